"""End-to-end verification: VCs -> solver -> re-simulated scenarios -> report."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ladder_verify.ast import Program
from ladder_verify.report import ERROR, PROVED, SKIPPED, UNKNOWN, Outcome, Report
from ladder_verify.scenario import Scenario, build_scenario
from ladder_verify.smt import Sat, SolverConfig, Unknown, Verdict, check
from ladder_verify.vcgen import VC, run_scan_symbolic

log = logging.getLogger(__name__)


class InternalInconsistency(RuntimeError):
    """A solver model did not reproduce its fault under simulation."""

    def __init__(self, scenarios: list[Scenario]):
        self.scenarios = scenarios
        lines = []
        for s in scenarios:
            got = s.trace.fault
            lines.append(f"VC {s.vc.index} ({s.vc.reason} at {s.vc.location}) re-simulated to "
                         + (f"{got.reason} at {got.location}" if got else "no fault"))
        super().__init__("spurious counterexample: " + "; ".join(lines))


@dataclass
class Result:
    vc: VC
    verdict: Verdict
    scenario: Scenario | None
    elapsed_ms: float


def _timed_check(vc: VC, cfg: SolverConfig) -> tuple[Verdict, float]:
    t0 = time.perf_counter()
    verdict = check(vc, cfg)
    return verdict, (time.perf_counter() - t0) * 1000


def _finish(vc: VC, verdict: Verdict, elapsed: float, p: Program, wrap: bool) -> Result:
    scenario = build_scenario(vc, verdict.model, p, wrap=wrap) if isinstance(verdict, Sat) else None
    return Result(vc, verdict, scenario, elapsed)


def check_vcs(p: Program, vcs: list[VC], cfg: SolverConfig, *, all_vcs: bool = False,
              wrap: bool = False, jobs: int = 1) -> list[Result]:
    """Discharge VCs in order. Without ``all_vcs`` stop after the first satisfiable one.

    Results are always in VC order and independent of ``jobs``.
    """
    results: list[Result] = []
    if jobs <= 1:
        for vc in vcs:
            verdict, ms = _timed_check(vc, cfg)
            results.append(_finish(vc, verdict, ms, p, wrap))
            if isinstance(verdict, Sat) and not all_vcs:
                break
        return results
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_timed_check, vc, cfg) for vc in vcs]
        for vc, fut in zip(vcs, futures):
            verdict, ms = fut.result()
            results.append(_finish(vc, verdict, ms, p, wrap))
            if isinstance(verdict, Sat) and not all_vcs:
                for rest in futures:
                    rest.cancel()
                break
    return results


def verify(p: Program, cfg: SolverConfig, *, all_vcs: bool = False, wrap: bool = False,
           jobs: int = 1) -> tuple[list[VC], list[Result]]:
    vcs, _ = run_scan_symbolic(p, wrap=wrap)
    log.info("%d verification conditions", len(vcs))
    return vcs, check_vcs(p, vcs, cfg, all_vcs=all_vcs, wrap=wrap, jobs=jobs)


def build_report(name: str, p: Program, vcs: list[VC], results: list[Result], cfg: SolverConfig, *,
                 all_vcs: bool = False, wrap: bool = False) -> Report:
    """Assemble the report. Raises :class:`InternalInconsistency` on any spurious model."""
    spurious = [r.scenario for r in results if r.scenario is not None and not r.scenario.confirmed]
    if spurious:
        raise InternalInconsistency(spurious)
    outcomes = []
    done = {r.vc.index: r for r in results}
    for vc in vcs:
        r = done.get(vc.index)
        o = Outcome(vc.index, SKIPPED, vc.instr, vc.location, vc.source, vc.reason)
        if r is not None:
            o.elapsed_ms = r.elapsed_ms
            if isinstance(r.verdict, Sat):
                o.status, o.trace = ERROR, r.scenario.trace
            elif isinstance(r.verdict, Unknown):
                o.status, o.unknown_reason = UNKNOWN, r.verdict.reason
            else:
                o.status = PROVED
        outcomes.append(o)
    return Report(name, len(p.steps), len(p.rungs), outcomes, cfg.executable_path, list(cfg.extra_args),
                  "wrap" if wrap else "checked", all_vcs)


def exit_code(r: Report) -> int:
    if r.count(ERROR):
        return 1
    if r.count(UNKNOWN):
        return 2
    return 0
