"""Plot-ready data for the one-dimensional approximation demos and the objective landscape."""

from __future__ import annotations

import inspect
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .fe import composite_rule
from .hdm import solve_hdm
from .ift import IftObjective, IftSettings, objective_landscape
from .problems import (
    AdvecReactProblem,
    OneParameterMapping,
    cutoff_gaussian,
    quad_bijection,
    quad_bijection_inverse,
    steepening_gaussian,
    steepening_map,
)
from .reduction import build_basis, l2_project, pod, truncation_rank
from .storage import ENERGY_MARKERS, write_csv

logger = logging.getLogger(__name__)

SNAPSHOT_PARAMETERS = ((0.3, 0.4, -0.1), (0.6, 0.6, 0.6))
TARGET_PARAMETER = (0.8, 0.5, 0.2)
ORACLE_INTERVALS = 33334
PLOT_POINTS = 1001
STEEPENING_SAMPLES = 100


@dataclass
class DemoResult:
    name: str
    files: list[Path] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _oracle(lower: float, upper: float, breakpoints=()):
    """Composite Gauss rule with about 1e5 points, split at the known discontinuities."""
    return composite_rule(lower, upper, ORACLE_INTERVALS, 3, breakpoints)


def _relative(error: float, target: Callable, rule) -> float:
    x = rule.points[:, 0]
    return error / float(np.sqrt(np.sum(rule.weights * np.asarray(target(x)) ** 2)))


def staircase(directory: Path) -> DemoResult:
    """Best L2 approximation of a cutoff Gaussian from the span of two others."""
    functions = [lambda x, p=p: cutoff_gaussian(x, p) for p in SNAPSHOT_PARAMETERS]
    target = lambda x: cutoff_gaussian(x, TARGET_PARAMETER)
    rule = _oracle(-1.0, 1.0, breakpoints=[p[2] for p in SNAPSHOT_PARAMETERS] + [TARGET_PARAMETER[2]])
    coefficients, error = l2_project(target, functions, rule)

    x = np.linspace(-1.0, 1.0, PLOT_POINTS)
    projection = sum(a * f(x) for a, f in zip(coefficients, functions))
    path = directory / 'staircase.csv'
    write_csv(
        path,
        ('x', 'snapshot_1', 'snapshot_2', 'target', 'projection'),
        zip(x, functions[0](x), functions[1](x), target(x), projection),
    )
    relative = _relative(error, target, rule)
    logger.info('demo staircase error=%.6e relative=%.6e', error, relative)
    return DemoResult('staircase', [path], {'error': error, 'relative_error': relative})


def aligned_gaussian(directory: Path) -> DemoResult:
    """Same projection after composing every function with the bijection that pins its cutoff to X = 0."""
    def mapped(p):
        return lambda X: cutoff_gaussian(quad_bijection(X, p[2], strict=False), p)

    functions = [mapped(p) for p in SNAPSHOT_PARAMETERS]
    target = mapped(TARGET_PARAMETER)
    rule = _oracle(-1.0, 1.0, breakpoints=(0.0,))
    coefficients, error = l2_project(target, functions, rule)
    relative = _relative(error, target, rule)

    _, staircase_error = l2_project(
        lambda x: cutoff_gaussian(x, TARGET_PARAMETER),
        [lambda x, p=p: cutoff_gaussian(x, p) for p in SNAPSHOT_PARAMETERS],
        _oracle(-1.0, 1.0, breakpoints=[p[2] for p in SNAPSHOT_PARAMETERS] + [TARGET_PARAMETER[2]]),
    )

    X = np.linspace(-1.0, 1.0, PLOT_POINTS)
    projection = sum(a * f(X) for a, f in zip(coefficients, functions))
    reference_path = directory / 'aligned_reference.csv'
    write_csv(
        reference_path,
        ('X', 'snapshot_1', 'snapshot_2', 'target', 'projection'),
        zip(X, functions[0](X), functions[1](X), target(X), projection),
    )
    # push forward through the target's bijection; monotone for |tau| < 1/2
    tau = TARGET_PARAMETER[2]
    x = np.linspace(-1.0, 1.0, PLOT_POINTS)
    pulled = quad_bijection_inverse(x, tau)
    physical_path = directory / 'aligned_physical.csv'
    write_csv(
        physical_path,
        ('x', 'target', 'projection'),
        zip(x, cutoff_gaussian(x, TARGET_PARAMETER), sum(a * f(pulled) for a, f in zip(coefficients, functions))),
    )
    ratio = staircase_error / error if error > 0 else np.inf
    logger.info('demo aligned-gaussian error=%.6e staircase=%.6e ratio=%.3e', error, staircase_error, ratio)
    return DemoResult(
        'aligned-gaussian',
        [reference_path, physical_path],
        {'error': error, 'relative_error': relative, 'staircase_error': staircase_error, 'ratio': ratio},
    )


def steepening_compression(directory: Path, n_samples: int = STEEPENING_SAMPLES) -> DemoResult:
    """Singular value decay of a steepening Gaussian with and without aligning its feature at X = 0.5."""
    mus = np.linspace(0.2, 0.8, n_samples)
    rule = composite_rule(0.0, 1.0, 2000, 3, breakpoints=(0.5,))
    x = rule.points[:, 0]
    root = np.sqrt(rule.weights)[:, None]
    # sqrt-weighted samples so the Euclidean SVD is the L2 POD
    plain = root * np.column_stack([steepening_gaussian(x, mu) for mu in mus])
    aligned = root * np.column_stack([steepening_gaussian(steepening_map(x, mu), mu) for mu in mus])
    plain_modes, plain_sigma = pod(plain, 2)
    aligned_modes, aligned_sigma = pod(aligned, 2)

    ranks = [(e, truncation_rank(plain_sigma, e), truncation_rank(aligned_sigma, e)) for e in ENERGY_MARKERS]
    sigma_path = directory / 'steepening_sigma.csv'
    write_csv(sigma_path, ('index', 'sigma_plain', 'sigma_aligned'), zip(range(1, n_samples + 1), plain_sigma, aligned_sigma))
    ranks_path = directory / 'steepening_ranks.csv'
    write_csv(ranks_path, ('energy', 'n_plain', 'n_aligned'), ranks)

    grid = np.linspace(0.0, 1.0, PLOT_POINTS)
    shown = mus[:: max(n_samples // 5, 1)]
    curves_path = directory / 'steepening_snapshots.csv'
    header = ['x'] + [f'plain_{mu:.4f}' for mu in shown] + [f'aligned_{mu:.4f}' for mu in shown]
    columns = [grid] + [steepening_gaussian(grid, mu) for mu in shown]
    columns += [steepening_gaussian(steepening_map(grid, mu), mu) for mu in shown]
    write_csv(curves_path, header, zip(*columns))

    modes_path = directory / 'steepening_modes.csv'
    write_csv(
        modes_path,
        ('x', 'plain_1', 'plain_2', 'aligned_1', 'aligned_2'),
        zip(x, *(plain_modes / root).T, *(aligned_modes / root).T),
    )
    for energy, n_plain, n_aligned in ranks:
        logger.info('demo steepening energy=%.0e n_plain=%d n_aligned=%d', energy, n_plain, n_aligned)
    return DemoResult(
        'steepening-compression',
        [sigma_path, ranks_path, curves_path, modes_path],
        {'ranks': ranks},
    )


def landscape(
    directory: Path,
    nx: int = 8,
    degree: int = 2,
    c_values=None,
    settings: IftSettings | None = None,
) -> DemoResult:
    """Objectives along the one-parameter mapping for a single-snapshot advection basis."""
    settings = settings or IftSettings()
    problem = AdvecReactProblem()
    setup = problem.setup(nx, nx, degree)
    anchor = np.array([0.0, 0.55, 80.0])
    target = np.array([np.pi / 20, 0.55, 80.0])
    snapshot = solve_hdm(setup.disc, setup.nominal, anchor, tol=settings.newton_tol)
    basis = build_basis([snapshot.coefficients])
    obj = IftObjective(setup.disc, basis, OneParameterMapping(setup.mesh), 0.0)
    c_values = np.linspace(-0.3, 0.3, 13) if c_values is None else np.asarray(c_values, dtype=float)
    points = objective_landscape(obj, target, c_values, settings)
    path = directory / 'landscape.csv'
    write_csv(path, ('c', 'residual_objective', 'projection_error'), points)
    best = min(points, key=lambda p: p.residual_objective)
    logger.info('demo landscape best_c=%.4f objective=%.6e', best.c, best.residual_objective)
    return DemoResult('landscape', [path], {'best_c': best.c, 'points': len(points)})


DEMOS = {
    'staircase': staircase,
    'aligned-gaussian': aligned_gaussian,
    'steepening-compression': steepening_compression,
    'landscape': landscape,
}


def run_demo(name: str, directory: str | Path, **options) -> DemoResult:
    try:
        demo = DEMOS[name]
    except KeyError:
        raise ValueError(f'unknown demo {name!r}; choose from {sorted(DEMOS)}') from None
    unknown = sorted(set(options) - set(inspect.signature(demo).parameters))
    if unknown:
        raise ValueError(f'demo {name!r} does not take {", ".join(unknown)}')
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return demo(directory, **options)
