"""
Train / solve / sweep orchestration shared by the management commands.

Artifact files under the run's output directory are the source of truth; the
TrainingRun and SolveRecord rows only register what was done.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .exceptions import ConfigError, SolverError, TrainingError
from .fe import StateField
from .hdm import assemble_residual, solve_hdm
from .ift import IftSolution, Status, TrainedModel, offline_train, prepare_objective, solve_ift
from .metrics import ErrorReport, SweepRecord, rel_error, sweep
from .models import SolveRecord, TrainingRun
from .reduction import initial_reduced_state, solve_rom_minres
from .storage import load_model, save_model, write_history, write_matrix, write_report

logger = logging.getLogger(__name__)

MODES = tuple(SolveRecord.Modes.values)
SWEEP_REPORT = 'sweep.csv'

_RECORD_STATUS = {
    Status.CONVERGED: SolveRecord.Status.OK,
    Status.MAX_ITER: SolveRecord.Status.MAX_ITER,
    Status.LINE_SEARCH: SolveRecord.Status.LINE_SEARCH,
}


def _finite(value) -> float | None:
    return float(value) if value is not None and np.isfinite(value) else None


def parameter_tag(mu) -> str:
    return '_'.join(f'{float(v):.6g}' for v in np.ravel(mu))


def latest_run(config: RunConfig) -> TrainingRun | None:
    return (
        TrainingRun.objects.filter(output_dir=str(config.output_dir), status=TrainingRun.Status.COMPLETED)
        .order_by('-created_at', '-pk')
        .first()
    )


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def run_training(config: RunConfig) -> tuple[TrainingRun, dict]:
    if not config.training:
        raise ConfigError('the [training] section is empty', ['[training] must list at least one parameter'])
    setup = config.setup()
    run = TrainingRun.objects.create(
        problem=config.problem.name,
        config_hash=config.config_hash,
        output_dir=str(config.output_dir),
    )
    try:
        model = offline_train(
            setup,
            config.training,
            config.settings,
            energy=config.energy,
            n_basis=config.n_basis,
            n_mapping=config.n_mapping,
            align=config.align,
        )
    except TrainingError as exc:
        done = len(exc.archive) if exc.archive is not None else 0
        run.mark(TrainingRun.Status.FAILED, notes=str(exc), snapshot_count=done)
        raise
    try:
        manifest = save_model(
            model, config.output_dir, config.config_hash, extra={'align': config.align, 'norm': config.norm}
        )
    except OSError as exc:
        run.mark(TrainingRun.Status.FAILED, notes=f'cannot write artifacts: {exc}')
        raise
    run.mark(
        TrainingRun.Status.COMPLETED,
        snapshot_count=manifest['snapshot_count'],
        state_rank=manifest['state_rank'],
        mapping_rank=manifest['mapping_rank'],
    )
    return run, manifest


# ---------------------------------------------------------------------------
# online solves
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SolveOutcome:
    mode: str
    mu: np.ndarray
    directory: Path
    state: np.ndarray
    residual_norm: float
    w: np.ndarray | None = None
    mapping_dofs: np.ndarray | None = None
    solution: IftSolution | None = None
    files: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.solution is None:
            return SolveRecord.Status.OK
        return _RECORD_STATUS[self.solution.status]


def _residual_norm(disc, state, mapping, mu) -> float:
    return float(np.linalg.norm(assemble_residual(disc, state, mapping, mu)))


def solve_fixed_rom(model: TrainedModel, mu, settings) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimum-residual ROM on the reference mapping with the fixed-domain basis."""
    setup = model.setup
    basis = model.fixed_basis
    start = initial_reduced_state(setup.disc, basis, setup.nominal, mu, (model.nearest_snapshot(mu, fixed=True),))
    w = solve_rom_minres(setup.disc, basis, setup.nominal, mu, start, tol=settings.eps1)
    state = basis.expand(w)
    return w, state, _residual_norm(setup.disc, state, setup.nominal, mu)


def solve_rom_ift(model: TrainedModel, mu, settings) -> tuple[IftSolution, object, np.ndarray]:
    disc = model.disc
    obj, w0, c0 = prepare_objective(
        disc, model.basis, model.mapping_space, mu, settings, guess=model.nearest_snapshot(mu)
    )
    solution = solve_ift(obj, mu, w0, c0, settings)
    return solution, obj.mapping(solution.c), model.basis.expand(solution.w)


def hdm_reference(setup, mapping, mu, settings, initial=None) -> StateField:
    """HDM at a given mapping, warm-started when possible."""
    try:
        return solve_hdm(setup.disc, mapping, mu, initial, settings.newton_tol, settings.newton_max_iterations)
    except SolverError:
        if initial is None:
            raise
        logger.info('warm-started HDM failed at mu=%s, restarting with continuation', np.ravel(mu).tolist())
        return solve_hdm(setup.disc, mapping, mu, None, settings.newton_tol, settings.newton_max_iterations)


def _write_summary(directory: Path, summary: dict) -> None:
    (directory / 'summary.json').write_text(json.dumps(summary, sort_keys=True, indent=2) + '\n')


def solve_parameter(
    config: RunConfig,
    mu,
    mode: str,
    model: TrainedModel | None = None,
    run: TrainingRun | None = None,
) -> SolveOutcome:
    if mode not in MODES:
        raise ValueError(f'unknown solve mode {mode!r}; choose from {", ".join(MODES)}')
    mu = config.problem.check_parameter(mu)
    setup = model.setup if model is not None else config.setup()
    if mode != SolveRecord.Modes.HDM and model is None:
        model = load_model(config.output_dir, setup, config.settings)
        run = run or latest_run(config)
    directory = config.output_dir / f'solve_{mode}_{parameter_tag(mu)}'
    directory.mkdir(parents=True, exist_ok=True)
    summary = {'mode': mode, 'mu': [float(v) for v in mu], 'status': 'failed'}

    try:
        if mode == SolveRecord.Modes.HDM:
            state = hdm_reference(setup, setup.nominal, mu, config.settings).coefficients
            outcome = SolveOutcome(mode, mu, directory, state, _residual_norm(setup.disc, state, setup.nominal, mu))
        elif mode == SolveRecord.Modes.ROM_FIXED:
            w, state, residual = solve_fixed_rom(model, mu, config.settings)
            outcome = SolveOutcome(mode, mu, directory, state, residual, w=w)
        else:
            solution, mapping, state = solve_rom_ift(model, mu, config.settings)
            outcome = SolveOutcome(
                mode, mu, directory, state, solution.residual_norm,
                w=solution.w, mapping_dofs=np.real(mapping.dofs), solution=solution,
            )
    except Exception as exc:
        summary['error'] = str(exc)
        _write_summary(directory, summary)
        raise

    write_matrix(directory / 'state.bin', outcome.state)
    outcome.files.append('state.bin')
    if outcome.w is not None:
        write_matrix(directory / 'coefficients.bin', outcome.w)
        outcome.files.append('coefficients.bin')
    if outcome.mapping_dofs is not None:
        write_matrix(directory / 'mapping.bin', outcome.mapping_dofs)
        write_history(directory / 'history.csv', outcome.solution.history)
        outcome.files.extend(['mapping.bin', 'history.csv'])
    summary.update(status=str(outcome.status), residual_norm=outcome.residual_norm, files=outcome.files)
    if outcome.solution is not None:
        summary.update(
            objective=outcome.solution.objective,
            iterations=outcome.solution.iterations,
            kappa=outcome.solution.kappa,
            mapping_coordinates=[float(v) for v in outcome.solution.c],
        )
    _write_summary(directory, summary)

    SolveRecord.objects.create(
        run=run,
        mode=mode,
        parameters=summary['mu'],
        res_rom=_finite(outcome.residual_norm) if mode != SolveRecord.Modes.ROM_IFT else None,
        res_ift=_finite(outcome.residual_norm) if mode == SolveRecord.Modes.ROM_IFT else None,
        iterations=outcome.solution.iterations if outcome.solution else 0,
        status=outcome.status,
    )
    logger.info('solve mode=%s mu=%s res=%.3e status=%s', mode, summary['mu'], outcome.residual_norm, outcome.status)
    return outcome


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def compare_at(model: TrainedModel, mu, settings, norm: str) -> SweepRecord:
    """Fixed-ROM error against the reference-mapping HDM, ROM-IFT error against the HDM at its own mapping."""
    setup = model.setup
    space = setup.space
    _, rom_state, res_rom = solve_fixed_rom(model, mu, settings)
    reference = hdm_reference(setup, setup.nominal, mu, settings)
    e_rom = rel_error(space, reference, rom_state, norm)

    solution, mapping, ift_state = solve_rom_ift(model, mu, settings)
    tracked = hdm_reference(setup, mapping, mu, settings, initial=ift_state)
    e_ift = rel_error(space, tracked, ift_state, norm)
    return SweepRecord(
        mu=np.asarray(mu, dtype=float),
        e_rom=e_rom,
        e_ift=e_ift,
        res_rom=res_rom,
        res_ift=solution.residual_norm,
        iterations=solution.iterations,
        status=str(_RECORD_STATUS[solution.status]),
    )


def run_sweep(config: RunConfig, workers: int | None = None) -> tuple[ErrorReport, Path]:
    if not config.test:
        raise ConfigError('the test set is empty', ['[test] must list at least one parameter'])
    setup = config.setup()
    model = load_model(config.output_dir, setup, config.settings)
    run = latest_run(config)
    report = sweep(lambda mu: compare_at(model, mu, config.settings, config.norm), config.test, workers or config.workers)
    path = config.output_dir / SWEEP_REPORT
    write_report(path, report, config.problem.parameter_names)
    SolveRecord.objects.bulk_create(
        SolveRecord(
            run=run,
            mode=SolveRecord.Modes.ROM_IFT,
            parameters=[float(v) for v in record.mu],
            e_rom=_finite(record.e_rom),
            e_ift=_finite(record.e_ift),
            res_rom=_finite(record.res_rom),
            res_ift=_finite(record.res_ift),
            iterations=record.iterations,
            status=record.status,
        )
        for record in report.records
    )
    return report, path
