"""
Validation suites: invariants, oracle comparisons and reference values.

Each suite is a function of a SuiteContext returning a SuiteResult. The full
configuration reproduces the reference media and parameter sets; `quick`
shrinks grids, t-lists and radii so the whole run is a smoke test.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.cell.corrector import SlabProblem, SolveMode, solve_corrector
from src.cell.diagnostics import birkhoff_check, verify_normal_bound
from src.cell.endpoint import PinningInterval, estimate_endpoint, estimate_interval, sweep_directions
from src.cell.oracle import laminar_oracle
from src.energy.functional import EnergyProblem, energy, lattice_defect
from src.energy.minimize import brute_force_minimize, minimize
from src.envelope.operators import (
    DirectionFunction,
    inf_convolve_dir,
    inf_convolve_dir_brute,
    lipschitz_defect,
    sup_convolve_dir,
    sup_convolve_dir_brute,
)
from src.grid.slab import GridField, SlabGrid
from src.medium.direction import Direction
from src.medium.fields import SineProfile
from src.medium.medium import PeriodicMedium, make_bump_lattice, make_constant, make_laminar, medium_from_samples
from src.planelike.bending import bend, make_bending_profile
from src.planelike.offsets import extract_offset
from src.shapes.geometry import hausdorff, square
from src.shapes.obstacle import ObstacleProblem, ObstacleSettings, rescaling_defect, solve_obstacle
from src.utils.errors import PinlabError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["suite", "passed", "seconds", "details"]
E1 = Direction.from_lattice((1, 0))
DIAGONAL = Direction.from_lattice((1, 1))
LAMINAR_PROFILE = SineProfile(mean=1.0, amplitude=0.5)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"suite": self.name, "passed": self.passed, "seconds": self.seconds, "details": self.details}


@dataclass
class SuiteContext:
    """Shared run parameters and the intervals collected along the way."""

    quick: bool = False
    seed: int = 0
    jobs: int = 1
    tol: float = 1e-3
    intervals: List[PinningInterval] = field(default_factory=list)

    @property
    def h(self) -> float:
        return 0.1 if self.quick else 0.05

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _laminar() -> PeriodicMedium:
    return make_laminar(LAMINAR_PROFILE, E1)


def _bump() -> PeriodicMedium:
    return make_bump_lattice(10.0, 0.1)


def _interval_details(interval: PinningInterval) -> Dict[str, Any]:
    return {k: interval.to_dict()[k] for k in ("q_lower", "q_lower_err", "q_upper", "q_upper_err")}


def suite_constant_exactness(ctx: SuiteContext) -> SuiteResult:
    medium = make_constant(1.0)
    t_list = [2.0, 4.0, 8.0, 16.0] if ctx.quick else [4.0, 8.0, 16.0, 32.0]
    details, passed = {}, True
    for direction in (E1, DIAGONAL):
        interval = estimate_interval(medium, direction, t_list, ctx.tol, ctx.h)
        ctx.intervals.append(interval)
        details[direction.label()] = _interval_details(interval)
        passed &= abs(interval.q_upper - 1.0) <= 0.02 and abs(interval.q_lower - 1.0) <= 0.02
    return SuiteResult("constant_exactness", passed, details)


def suite_laminar_interval(ctx: SuiteContext) -> SuiteResult:
    medium = _laminar()
    t_list = [2.0, 4.0, 8.0, 16.0] if ctx.quick else [4.0, 8.0, 16.0, 32.0]
    details, passed = {}, True
    expected = {E1: (0.5, 1.5), DIAGONAL: (math.sqrt(1.125), math.sqrt(1.125))}
    for direction, (lower, upper) in expected.items():
        interval = estimate_interval(medium, direction, t_list, ctx.tol, ctx.h)
        ctx.intervals.append(interval)
        details[direction.label()] = _interval_details(interval)
        passed &= abs(interval.q_lower - lower) <= 0.05 * lower and abs(interval.q_upper - upper) <= 0.05 * upper
    return SuiteResult("laminar_interval", passed, details)


def suite_oracle(ctx: SuiteContext) -> SuiteResult:
    medium = _laminar()
    ts = [1.0, 2.0, 3.0] if ctx.quick else [1.0, 2.0, 3.0, 5.0, 8.0]
    rows, passed = [], True
    for t in ts:
        problem = SlabProblem.build(medium, E1, t, SolveMode.MIN_SUPERSOLUTION, h_max=ctx.h)
        solution = solve_corrector(problem, tol=ctx.tol)
        r_ref, alpha_ref = laminar_oracle(LAMINAR_PROFILE, t, SolveMode.MIN_SUPERSOLUTION)
        ok = abs(solution.r - r_ref) <= 2.0 * problem.grid.h and abs(solution.alpha - alpha_ref) <= 0.02 * alpha_ref
        rows.append({"t": t, "r": solution.r, "r_oracle": r_ref, "alpha": solution.alpha, "alpha_oracle": alpha_ref})
        passed &= ok
    return SuiteResult("oracle", passed, {"rows": rows})


def suite_energy_slope_rate(ctx: SuiteContext) -> SuiteResult:
    medium = _laminar()
    rms = medium.rms
    ts = [2.0, 4.0, 8.0, 16.0] if ctx.quick else [8.0, 16.0, 32.0, 64.0]
    # the bound is uniform in the data-line position, so each t takes the worst phase
    shifts = [0.0, 0.25, 0.5, 0.75]
    h = 0.1
    rows = []
    for t in ts:
        worst = None
        for shift in shifts:
            grid = SlabGrid.build(E1, 2.0 * t / medium.qmin + 2.0 * h, h, shift=shift)
            result = minimize(EnergyProblem(grid, medium, t))
            row = {"t": t, "shift": shift, "alpha": result.alpha, "deviation": abs(result.alpha - rms)}
            if worst is None or row["deviation"] > worst["deviation"]:
                worst = row
        rows.append(worst)
    table = pd.DataFrame(rows)
    positive = table[table["deviation"] > 0]
    if len(positive) < 2:
        return SuiteResult("energy_slope_rate", True, {"rows": rows, "exponent": None})
    exponent, intercept = np.polyfit(np.log(positive["t"]), np.log(positive["deviation"]), 1)
    C = float((table["deviation"] * np.sqrt(table["t"])).max())
    passed = exponent <= -0.35 and bool(np.all(table["deviation"] <= C / np.sqrt(table["t"]) + 1e-12))
    return SuiteResult("energy_slope_rate", bool(passed), {"rows": rows, "exponent": float(exponent), "C": C})


def suite_subadditivity(ctx: SuiteContext) -> SuiteResult:
    medium = _bump()
    ts = [1.0, 2.0, 4.0, 8.0] if ctx.quick else [4.0, 8.0, 16.0, 32.0]
    estimate = estimate_endpoint(medium, E1, ts, SolveMode.MIN_SUPERSOLUTION, ctx.tol, ctx.h)
    defects = {f"{a}+{b}": d for (a, b), d in estimate.subadditivity.items()}
    if not estimate.subadditivity:
        return SuiteResult("subadditivity", True, {"defects": defects})
    smallest = min(estimate.subadditivity)
    reference = estimate.subadditivity[smallest]
    worst = max(estimate.subadditivity.values())
    slack = 0.5 * abs(reference) + 2.0 * ctx.h
    return SuiteResult("subadditivity", worst <= reference + slack, {"defects": defects})


def suite_birkhoff(ctx: SuiteContext) -> SuiteResult:
    medium = _bump()
    problem = SlabProblem.build(medium, E1, 4.0, SolveMode.MIN_SUPERSOLUTION, h_max=ctx.h)
    solution = solve_corrector(problem, tol=ctx.tol)
    p = np.asarray(E1.unit)
    rng = ctx.rng
    shifts = []
    while len(shifts) < 10:
        k = tuple(int(v) for v in rng.integers(-3, 4, size=2))
        if k != (0, 0) and float(np.dot(k, p)) <= 0:
            shifts.append(k)
    defects = {str(k): birkhoff_check(solution, k) for k in shifts}
    bound = 2.0 * problem.grid.h * medium.qmax
    return SuiteResult("birkhoff", max(defects.values()) <= bound, {"defects": defects, "bound": bound})


def suite_normal_bound(ctx: SuiteContext) -> SuiteResult:
    constant = verify_normal_bound(make_constant(1.0), E1, [1.0, 2.0, 4.0, 8.0], tol=ctx.tol, h_max=ctx.h)
    ts = [2.0, 4.0, 8.0, 16.0] if ctx.quick else [8.0, 16.0, 32.0, 64.0]
    bump = verify_normal_bound(_bump(), E1, ts, tol=ctx.tol, h_max=ctx.h)
    passed = constant.exact and (bump.exact or bump.exponent <= -0.8)
    return SuiteResult("normal_bound", bool(passed), {"constant": constant.to_dict(), "bump": bump.to_dict()})


def suite_width_bound(ctx: SuiteContext) -> SuiteResult:
    medium = _bump()
    widths = {}
    for t in ((2.0, 8.0) if ctx.quick else (8.0, 32.0)):
        problem = SlabProblem.build(medium, E1, t, SolveMode.MIN_SUPERSOLUTION, h_max=ctx.h)
        widths[t] = solve_corrector(problem, tol=ctx.tol).width_osc
    small, large = sorted(widths)
    passed = widths[large] <= max(1.5 * widths[small], 2.0 * ctx.h)
    return SuiteResult("width_bound", passed, {"width_osc": widths})


def suite_pinning_every_direction(ctx: SuiteContext) -> SuiteResult:
    medium = _bump()
    t_list = [1.0, 2.0, 4.0, 8.0] if ctx.quick else [4.0, 8.0, 16.0, 32.0]
    intervals = sweep_directions(medium, 2, t_list, ctx.tol, ctx.h, jobs=ctx.jobs)
    ctx.intervals.extend(intervals)
    rows = [i.to_dict() for i in intervals]
    passed = all(i.status == "ok" and i.width >= 0.2 for i in intervals)
    at_e1 = [i for i in intervals if i.direction.rational == (1, 0)]
    passed &= bool(at_e1) and at_e1[0].q_upper >= math.sqrt(2.0) - 0.1
    return SuiteResult("pinning_every_direction", bool(passed), {"rows": rows})


def suite_lattice_identity(ctx: SuiteContext) -> SuiteResult:
    rng = ctx.rng
    grid = SlabGrid.build(E1, 1.0, 0.1)
    problem = EnergyProblem(grid, _laminar(), 1.0)
    worst_ordered, worst_random = 0.0, 0.0
    for _ in range(100):
        u = np.maximum(rng.normal(0.2, 1.0, grid.shape), 0.0)
        v = u + np.maximum(rng.normal(0.0, 0.5, grid.shape), 0.0)
        fu, fv = GridField(u, grid), GridField(v, grid)
        scale = max(energy(fu, problem) + energy(fv, problem), 1.0)
        worst_ordered = max(worst_ordered, abs(lattice_defect(fu, fv, problem)) / scale)
        w = GridField(np.maximum(rng.normal(0.2, 1.0, grid.shape), 0.0), grid)
        worst_random = min(worst_random, lattice_defect(fu, w, problem))
    passed = worst_ordered <= 1e-12 and worst_random >= -1e-9
    return SuiteResult("lattice_identity", passed, {"ordered_rel": worst_ordered, "random_min": worst_random})


def suite_brute_force(ctx: SuiteContext) -> SuiteResult:
    rng = ctx.rng
    rows, passed = [], True
    for _ in range(5 if ctx.quick else 20):
        n_tan = int(rng.integers(2, 5))
        grid = SlabGrid.build(E1, 0.5, 0.1, period_len=0.1 * n_tan)
        medium = medium_from_samples(rng.uniform(0.5, 2.0, size=(8, 8)))
        problem = EnergyProblem(grid, medium, float(rng.uniform(0.1, 0.4)))
        exact = brute_force_minimize(problem)
        found = minimize(problem)
        gap = found.energy - exact.energy
        rows.append({"n_tan": n_tan, "gap": gap})
        passed &= gap <= 1e-8
    return SuiteResult("brute_force", passed, {"rows": rows})


def suite_bending(ctx: SuiteContext) -> SuiteResult:
    M, r = (1.5, 16.0) if ctx.quick else (4.0, 64.0)
    medium = make_constant(1.0)
    period = float(math.ceil(2.0 * r))
    problem = SlabProblem.build(medium, E1, 2.0, SolveMode.MIN_SUPERSOLUTION, h_max=ctx.h, period_len=period)
    solution = extract_offset(solve_corrector(problem, tol=ctx.tol))
    profile = make_bending_profile(E1, M, r, 0.05, problem.grid)
    result = bend(solution, profile)
    h = problem.grid.h
    low, high = result.lift_ratio
    passed = result.min_laplacian >= -10.0 * h and 0.3 <= low and high <= 3.0 and result.slope_ok
    return SuiteResult("bending", bool(passed), {
        "min_laplacian": result.min_laplacian,
        "lift_ratio": [low, high],
        "slope_ok": result.slope_ok,
    })


def suite_boundary_layer(ctx: SuiteContext) -> SuiteResult:
    details, passed = {}, True
    for name, medium in (("laminar", _laminar()), ("bump", _bump())):
        problem = SlabProblem.build(medium, E1, 8.0, SolveMode.MIN_SUPERSOLUTION, h_max=ctx.h)
        fitted = extract_offset(solve_corrector(problem, tol=ctx.tol))
        details[name] = fitted.to_dict()
        passed &= fitted.decay_fitted and fitted.decay_rate > 0 and fitted.offset_residual <= 5.0 * problem.grid.h
    return SuiteResult("boundary_layer", passed, details)


def suite_envelope(ctx: SuiteContext) -> SuiteResult:
    f = DirectionFunction(ctx.rng.normal(1.0, 0.3, 360))
    details = {}
    low = inf_convolve_dir(f, 2.0)
    high = sup_convolve_dir(f, 2.0)
    details["brute_inf"] = float(np.max(np.abs(low.values - inf_convolve_dir_brute(f, 2.0).values)))
    details["brute_sup"] = float(np.max(np.abs(high.values - sup_convolve_dir_brute(f, 2.0).values)))
    details["lipschitz"] = lipschitz_defect(low, 2.0)
    details["idempotent"] = float(np.max(np.abs(inf_convolve_dir(low, 2.0).values - low.values)))
    weaker = inf_convolve_dir(f, 1.0)
    details["monotone"] = float(max(np.max(weaker.values - low.values), np.max(low.values - f.values)))
    details["sandwich"] = float(max(np.max(low.values - f.values), np.max(f.values - high.values)))
    passed = all(value <= 1e-12 for value in details.values())
    return SuiteResult("envelope", passed, details)


def suite_obstacle(ctx: SuiteContext) -> SuiteResult:
    epsilons = [1.0, 0.5, 0.25] if ctx.quick else [0.25, 0.125, 0.0625]
    h = min(epsilons) / 10.0
    obstacle = square(1.0)
    settings = ObstacleSettings(n_theta=180 if ctx.quick else 720)
    fronts = []
    for eps in epsilons:
        problem = ObstacleProblem(obstacle, _laminar(), eps, 5.0, h)
        fronts.append(solve_obstacle(problem, tol=1e-2, settings=settings).positivity_boundary)
    increments = [hausdorff(a, b) for a, b in zip(fronts, fronts[1:])]
    cauchy = all(b <= 1.2 * a + 2.0 * h for a, b in zip(increments, increments[1:]))
    constant = ObstacleProblem(obstacle, make_constant(1.0), epsilons[0], 5.0, h)
    defect = rescaling_defect(constant, 2.0, tol=1e-2, settings=settings)
    passed = cauchy and defect <= 2.0 * h
    return SuiteResult("obstacle", passed, {"increments": increments, "rescaling_defect": defect, "h": h})


def suite_rms_containment(ctx: SuiteContext) -> SuiteResult:
    rows, passed = [], True
    for interval in ctx.intervals:
        if interval.status != "ok":
            continue
        ok = interval.contains_rms()
        rows.append({**interval.to_dict(), "contains": ok})
        passed &= ok
    return SuiteResult("rms_containment", passed, {"rows": rows, "checked": len(rows)})


SUITES: Dict[str, Callable[[SuiteContext], SuiteResult]] = {
    "constant_exactness": suite_constant_exactness,
    "laminar_interval": suite_laminar_interval,
    "oracle": suite_oracle,
    "energy_slope_rate": suite_energy_slope_rate,
    "subadditivity": suite_subadditivity,
    "birkhoff": suite_birkhoff,
    "normal_bound": suite_normal_bound,
    "width_bound": suite_width_bound,
    "pinning_every_direction": suite_pinning_every_direction,
    "lattice_identity": suite_lattice_identity,
    "brute_force": suite_brute_force,
    "bending": suite_bending,
    "boundary_layer": suite_boundary_layer,
    "envelope": suite_envelope,
    "obstacle": suite_obstacle,
    # uses the intervals gathered by the sweeps above
    "rms_containment": suite_rms_containment,
}


def run_suites(ctx: SuiteContext, names: Optional[Sequence[str]] = None) -> List[SuiteResult]:
    """
    Run the named suites (all by default) in registry order.

    A suite that raises is recorded as failed with the error message.
    """
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suites: {unknown}. Available: {', '.join(SUITES)}")
    results = []
    for name in SUITES:
        if name not in names:
            continue
        start = time.perf_counter()
        try:
            result = SUITES[name](ctx)
        except (PinlabError, ValueError) as e:
            logger.error("Suite %s raised %s: %s", name, type(e).__name__, e)
            result = SuiteResult(name, False, {"error": f"{type(e).__name__}: {e}"})
        result.seconds = round(time.perf_counter() - start, 3)
        logger.info("Suite %s: %s (%.1fs)", name, "PASS" if result.passed else "FAIL", result.seconds)
        results.append(result)
    return results


def report_frame(results: Sequence[SuiteResult]) -> pd.DataFrame:
    rows = [{**r.to_dict(), "details": str(r.details)} for r in results]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
