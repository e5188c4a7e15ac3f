"""
Command implementations behind `pinlab <command>`.

Each command takes the validated RunConfig, the output directory and the run
manifest, writes its files, and returns the process exit code.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from src.cell.corrector import CorrectorSettings, SlabProblem, SolveMode, solve_corrector
from src.cell.endpoint import estimate_interval, success_fraction, sweep_directions, sweep_frame
from src.cli import plots
from src.cli.validate import SuiteContext, report_frame, run_suites
from src.envelope.operators import (
    DistanceMetric,
    build_Qm,
    build_Qm_lower,
    direction_function_frame,
    double_regularize,
    lipschitz_defect,
    read_direction_frame,
)
from src.grid.slab import dump_field
from src.medium.direction import Direction
from src.planelike.bending import bend, make_bending_profile
from src.planelike.offsets import extract_offset
from src.shapes.geometry import facet_coverage, facet_frame, hausdorff, polygon_vertices
from src.shapes.obstacle import ObstacleProblem, ObstacleSettings, shape_frame, solve_obstacle
from src.utils.config import RunConfig
from src.utils.errors import EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION, ConfigurationError
from src.utils.manifest import RunManifest

logger = logging.getLogger(__name__)

MIN_SUCCESS_FRACTION = 0.8


def _settings(config: RunConfig) -> CorrectorSettings:
    return CorrectorSettings(damping=config.solver.damping, max_iterations=config.solver.max_iterations)


def _write_csv(frame: pd.DataFrame, path: Path, manifest: RunManifest, out_dir: Path) -> Path:
    frame.to_csv(path, index=False)
    return manifest.record(path, out_dir)


def _write_json(data, path: Path, manifest: RunManifest, out_dir: Path) -> Path:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, default=str)
    return manifest.record(path, out_dir)


def cmd_sweep(config: RunConfig, out_dir: Path, manifest: RunManifest) -> int:
    """Pinning intervals over all irreducible directions up to xi_max."""
    with manifest.stage("medium"):
        medium = config.medium.build()
    with manifest.stage("sweep"):
        intervals = sweep_directions(
            medium,
            config.sweep.xi_max,
            config.sweep.t_list,
            tol=config.solver.tol,
            h_max=config.solver.h,
            jobs=config.solver.jobs,
            settings=_settings(config),
        )
    frame = sweep_frame(intervals)
    _write_csv(frame, out_dir / "sweep.csv", manifest, out_dir)
    if config.output.plots:
        with manifest.stage("plot"):
            manifest.record(plots.plot_sweep(frame, out_dir / "sweep.svg"), out_dir)

    fraction = success_fraction(intervals)
    print(f"{len(intervals)} directions, {fraction:.0%} succeeded")
    if fraction < MIN_SUCCESS_FRACTION:
        manifest.status = "partial"
        return EXIT_SOLVER
    return EXIT_OK


def cmd_interval(config: RunConfig, out_dir: Path, manifest: RunManifest) -> int:
    """Both endpoints at one direction."""
    medium = config.medium.build()
    direction = Direction.from_lattice(config.interval.xi)
    settings = _settings(config)
    with manifest.stage("interval"):
        interval = estimate_interval(
            medium, direction, config.interval.t_list, config.solver.tol, config.solver.h, settings,
        )
    print(
        f"{direction.label()}: [{interval.q_lower:.3f} ± {interval.q_lower_err:.1e}, "
        f"{interval.q_upper:.3f} ± {interval.q_upper_err:.1e}]  rms mean {interval.rms_mean:.4f}"
    )
    _write_csv(pd.DataFrame(interval.t_series), out_dir / "t_series.csv", manifest, out_dir)
    _write_json(interval.to_dict(), out_dir / "interval.json", manifest, out_dir)

    if config.output.dump_field:
        t = max(config.interval.t_list)
        for mode in SolveMode:
            problem = SlabProblem.build(medium, direction, t, mode, h_max=config.solver.h)
            solution = solve_corrector(problem, tol=config.solver.tol, settings=settings)
            manifest.record(dump_field(solution.field, out_dir / f"field_{mode.value}.txt"), out_dir)
    return EXIT_OK


def cmd_shape(config: RunConfig, out_dir: Path, manifest: RunManifest) -> int:
    """Free boundaries around a convex obstacle for each epsilon and mode."""
    shape = config.shape
    medium = config.medium.build()
    obstacle = shape.build_obstacle()
    settings = ObstacleSettings(
        n_theta=shape.n_theta,
        damping=config.solver.damping,
        max_iterations=config.solver.max_iterations,
        facet_angle_tol=shape.facet_angle_tol,
        facet_min_len=shape.facet_min_len,
    )
    fronts: Dict[str, np.ndarray] = {}
    facets: Dict[str, list] = {}
    summary: List[dict] = []
    for mode in shape.modes:
        previous = None
        for eps in sorted(shape.epsilons, reverse=True):
            h = min(config.solver.h, eps / 10.0)
            problem = ObstacleProblem(obstacle, medium, eps, shape.box, h, shape.data)
            with manifest.stage(f"{mode}_eps{eps:g}"):
                result = solve_obstacle(problem, mode, tol=config.solver.tol, settings=settings)
            label = f"{mode} eps={eps:g}"
            tag = f"{mode}_eps{eps:g}"
            fronts[label] = result.positivity_boundary
            facets[label] = result.facets
            _write_csv(shape_frame(result), out_dir / f"shape_{tag}.csv", manifest, out_dir)
            _write_csv(facet_frame(result.facets), out_dir / f"facets_{tag}.csv", manifest, out_dir)
            row = {"mode": mode, "epsilon": eps, "h": h, **result.summary()}
            row["facet_coverage"] = facet_coverage(result.facets, result.perimeter)
            row["hausdorff_to_previous"] = (
                hausdorff(previous, result.positivity_boundary) if previous is not None else float("nan")
            )
            summary.append(row)
            previous = result.positivity_boundary

    pairs = []
    for (a, pa), (b, pb) in itertools.combinations(fronts.items(), 2):
        pairs.append({"first": a, "second": b, "hausdorff": hausdorff(pa, pb)})
    _write_csv(pd.DataFrame(pairs, columns=["first", "second", "hausdorff"]), out_dir / "hausdorff.csv",
               manifest, out_dir)
    _write_json(summary, out_dir / "shape_summary.json", manifest, out_dir)
    if config.output.plots:
        manifest.record(plots.plot_shapes(polygon_vertices(obstacle), fronts, facets, out_dir / "shapes.svg"), out_dir)
    for row in summary:
        print(f"{row['mode']} eps={row['epsilon']:g}: mean radius {row['mean_radius']:.4f}, "
              f"{row['facets']} facets, coverage {row['facet_coverage']:.1%}")
    return EXIT_OK


def cmd_bend_demo(config: RunConfig, out_dir: Path, manifest: RunManifest) -> int:
    """Bend a plane-like solution and report the slope and lift checks."""
    demo = config.bend_demo
    medium = config.medium.build()
    direction = Direction.from_lattice(demo.xi)
    # wide enough for the plateau to fall back to 1 inside one period
    period = direction.lattice_norm * math.ceil(2.0 * demo.r / direction.lattice_norm)
    problem = SlabProblem.build(medium, direction, demo.t, demo.mode, h_max=config.solver.h, period_len=period)
    with manifest.stage("corrector"):
        solution = extract_offset(solve_corrector(problem, tol=config.solver.tol, settings=_settings(config)))
    with manifest.stage("bend"):
        profile = make_bending_profile(direction, demo.M, demo.r, demo.eps_amp, problem.grid)
        result = bend(solution, profile, lift_rows=demo.lift_rows)

    _write_csv(result.slope_report, out_dir / "slope_report.csv", manifest, out_dir)
    for name, field_ in (("original", solution.cell_solution.field), ("bent", result.bent), ("lifted", result.lifted)):
        manifest.record(dump_field(field_, out_dir / f"field_{name}.txt"), out_dir)
    summary = {
        "plane": solution.to_dict(),
        "lift_ratio": list(result.lift_ratio),
        "min_laplacian": result.min_laplacian,
        "slope_ok": result.slope_ok,
        "convexity_defect": profile.convexity_defect,
    }
    _write_json(summary, out_dir / "bend_summary.json", manifest, out_dir)
    if config.output.plots:
        grid = problem.grid
        before = solution.cell_solution.boundary.g
        after = np.asarray(result.slope_report["depth"])
        manifest.record(plots.plot_bend(grid.taus, before, after, out_dir / "bend.svg"), out_dir)
    print(f"lift ratio [{result.lift_ratio[0]:.3f}, {result.lift_ratio[1]:.3f}], "
          f"min laplacian {result.min_laplacian:.3e}, slope ok {result.slope_ok}")
    return EXIT_OK


def cmd_envelope(config: RunConfig, out_dir: Path, manifest: RunManifest) -> int:
    """Non-monotone and double regularizations of sampled pinning data."""
    env = config.envelope
    if env.input is None:
        raise ConfigurationError("envelope.input is required")
    frame = pd.read_csv(env.input)
    q_star = read_direction_frame(frame, env.column, env.n_samples)
    if env.continuous_input is not None:
        q_cont = read_direction_frame(pd.read_csv(env.continuous_input), env.column, env.n_samples)
    else:
        q_cont = q_star
    finite = frame[np.isfinite(frame[env.column])]
    rational_angles = finite["theta"].to_list()
    metric = DistanceMetric.parse(env.metric)

    if env.n_lip is None:
        builder = build_Qm if env.side == "upper" else build_Qm_lower
        result = builder(q_star, q_cont, rational_angles, env.m, metric)
    else:
        result = double_regularize(q_star, q_cont, rational_angles, env.m, env.n_lip, env.side, metric)
    _write_csv(direction_function_frame(result), out_dir / "envelope.csv", manifest, out_dir)
    if config.output.plots:
        curves = {env.column: q_star.values, f"{env.side} m={env.m:g}": result.values}
        manifest.record(plots.plot_direction_functions(curves, result.thetas, out_dir / "envelope.svg"), out_dir)
    if env.n_lip is not None:
        print(f"Lipschitz defect at n={env.n_lip:g}: {lipschitz_defect(result, env.n_lip, metric):.2e}")
    return EXIT_OK


def cmd_validate(config: RunConfig, out_dir: Path, manifest: RunManifest) -> int:
    """Run the validation suites; exit 3 if any fails."""
    ctx = SuiteContext(
        quick=config.validate_.quick,
        seed=config.seed,
        jobs=config.solver.jobs,
        tol=config.solver.tol,
    )
    with manifest.stage("suites"):
        try:
            results = run_suites(ctx, config.validate_.suites)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e
    _write_json([r.to_dict() for r in results], out_dir / "validation.json", manifest, out_dir)
    _write_csv(report_frame(results), out_dir / "validation.csv", manifest, out_dir)
    failed = [r.name for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.seconds:.1f}s)")
    if failed:
        manifest.status = "failed"
        logger.error("Failed suites: %s", ", ".join(failed))
        return EXIT_VALIDATION
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "interval": cmd_interval,
    "shape": cmd_shape,
    "bend-demo": cmd_bend_demo,
    "envelope": cmd_envelope,
    "validate": cmd_validate,
}
