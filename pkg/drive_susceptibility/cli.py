"""Command-line interface: one subcommand per pipeline."""

import logging
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import typer
from pydantic import BaseModel, ConfigDict, ValidationError
from rich.console import Console

from .analysis import (
    AsymptoteMode,
    ParabolaFit,
    RateFit,
    add_measurement_noise,
    fit_decay_rate,
    fit_parabola,
)
from .config import ExperimentConfig, OutputFormat, config_hash, load_config
from .dynamics import (
    DriveProgram,
    MagnetizationState,
    NutationMetrics,
    integrate,
    simulate_cw_nutation,
)
from .errors import DriveSusceptibilityError, ToleranceError
from .logging_setup import configure_logging
from .model import (
    BlochSiegertFieldShift,
    DriveCoefficients,
    SpinSystemParams,
    asymptotic_bs_shift,
    compute_coefficients,
    cw_nutation_closed_form,
    nutation_damping_exact,
    refocused_curvature_factor,
    refocused_decay_rate,
)
from .oracle import OracleCheck, run_oracle_suite
from .reporting import (
    print_table,
    read_decay_series_csv,
    write_csv,
    write_decay_series_csv,
    write_report,
)
from .sequence import DecaySeries, leakage_ratio, simulate_refocused_nutation

logger = logging.getLogger(__name__)
console = Console(stderr=True)

app = typer.Typer(
    help="Driven spin-1/2 simulator: drive susceptibilities, refocused nutation, oracles.",
    no_args_is_help=True,
    add_completion=False,
)

EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2


class _Options(BaseModel):
    model_config = ConfigDict(frozen=True)

    config_path: Optional[Path] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    out_dir: Optional[Path] = None
    format: Optional[OutputFormat] = None

    def load(self) -> ExperimentConfig:
        config = load_config(self.config_path)
        return config.with_overrides(
            seed=self.seed, workers=self.workers, out_dir=self.out_dir, format=self.format
        )


class CoefficientsReport(BaseModel):
    params: SpinSystemParams
    coefficients: DriveCoefficients
    bloch_siegert: Optional[BlochSiegertFieldShift] = None
    refocused_rate: float
    curvature_factor: float
    leakage_ratio: Optional[float] = None


class NutationReport(BaseModel):
    metrics: NutationMetrics
    closed_form_frequency: float
    closed_form_damping: float
    exact_damping: float


class RefocusReport(BaseModel):
    omega1: float
    fit: RateFit
    expected_rate: float


class SweepPoint(BaseModel):
    index: int
    nu1_hz: float
    omega1: float
    n_max: int
    fit: RateFit


class SweepReport(BaseModel):
    parabola: ParabolaFit
    tau_c_true: float
    a1_expected: float
    points: List[SweepPoint]


class OracleReport(BaseModel):
    passed: bool
    checks: List[OracleCheck]


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map domain errors onto exit codes 1 (validation) and 2 (tolerance)."""
    try:
        yield
    except ToleranceError as exc:
        console.print(f"[bold red]tolerance failure:[/] {exc}")
        raise typer.Exit(EXIT_TOLERANCE)
    except ValidationError as exc:
        console.print(f"[bold red]invalid configuration:[/] {exc}")
        raise typer.Exit(EXIT_VALIDATION)
    except DriveSusceptibilityError as exc:
        console.print(f"[bold red]error:[/] {exc}")
        raise typer.Exit(EXIT_VALIDATION)


def _output(config: ExperimentConfig, name: str) -> Path:
    return config.run.out_dir / name


def _report(config: ExperimentConfig, name: str, data: BaseModel) -> Path:
    return write_report(
        _output(config, name), data, config_hash(config), config.run.format.value
    )


@app.callback()
def main_options(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment manifest"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Overrides RUN__SEED"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Overrides RUN__WORKERS"),
    out: Optional[Path] = typer.Option(None, "--out", help="Overrides RUN__OUT_DIR"),
    fmt: Optional[OutputFormat] = typer.Option(None, "--format", help="Report format"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
) -> None:
    configure_logging(verbose)
    ctx.obj = _Options(config_path=config, seed=seed, workers=workers, out_dir=out, format=fmt)


@app.command()
def coeffs(ctx: typer.Context) -> None:
    """Drive coefficients and the asymptotic Bloch-Siegert shift."""
    with _exit_codes():
        config = ctx.obj.load()
        p = config.spin_params()
        report = CoefficientsReport(
            params=p,
            coefficients=compute_coefficients(p),
            bloch_siegert=asymptotic_bs_shift(p) if p.delta_omega == 0.0 else None,
            refocused_rate=refocused_decay_rate(p),
            curvature_factor=refocused_curvature_factor(p),
            leakage_ratio=leakage_ratio(p) if p.omega1 > 0.0 else None,
        )
        if CoefficientsReport.model_validate_json(report.model_dump_json()) != report:
            raise ToleranceError("coefficients report does not round-trip through its schema")
        c = report.coefficients
        print_table(
            "Drive coefficients",
            ("omega_bs", "delta_omega", "eta_x", "eta_y", "eta_z"),
            [(c.omega_bs, c.delta_omega_shift, c.eta_x, c.eta_y, c.eta_z)],
            console,
        )
        _report(config, "coeffs", report)


@app.command()
def nutation(
    ctx: typer.Context,
    trajectory: bool = typer.Option(False, "--trajectory", help="Also write M(t) as CSV"),
) -> None:
    """Continuous-wave nutation frequency and damping."""
    with _exit_codes():
        config = ctx.obj.load()
        p = config.spin_params()
        step = config.integrator_step(p.omega1)
        metrics = simulate_cw_nutation(p, config.run.nutation_duration, step)
        frequency, damping = cw_nutation_closed_form(p)
        report = NutationReport(
            metrics=metrics,
            closed_form_frequency=frequency,
            closed_form_damping=damping,
            exact_damping=nutation_damping_exact(p),
        )
        digest = config_hash(config)
        if trajectory:
            history = integrate(
                MagnetizationState.equilibrium(p),
                DriveProgram.constant(p.omega1, config.run.nutation_duration),
                p,
                step,
                stride=1,
            )
            write_csv(
                _output(config, "nutation_trajectory.csv"),
                ("t", "mx", "my", "mz"),
                history.rows(),
                digest,
            )
        print_table(
            "CW nutation",
            ("quantity", "simulated", "closed form"),
            [
                ("frequency [rad/s]", metrics.nutation_frequency, frequency),
                ("damping [1/s]", metrics.damping_rate, damping),
            ],
            console,
        )
        _report(config, "nutation", report)


def _refocused_fit(
    config: ExperimentConfig, nu1_hz: float, noise_seed: List[int]
) -> Tuple[RateFit, int, DecaySeries]:
    p = config.spin_params(nu1_hz)
    sc = config.supercycle()
    inh = config.inhomogeneity_spec()
    n_values = config.n_values(sc.period(p.omega1))
    step = config.integrator_step(p.omega1, inh.max_scale)
    series = simulate_refocused_nutation(p, sc, inh, n_values, step)
    series = add_measurement_noise(series, config.run.noise_level, noise_seed)
    return fit_decay_rate(series, config.run.asymptote_mode), n_values[-1], series


@app.command()
def refocus(ctx: typer.Context) -> None:
    """Decay series of the supercycled drive and its fitted rate."""
    with _exit_codes():
        config = ctx.obj.load()
        p = config.spin_params()
        rate, _, series = _refocused_fit(config, config.spin.nu1_hz, [config.run.seed, 0])
        digest = config_hash(config)
        write_decay_series_csv(_output(config, "decay_series.csv"), series, digest)
        report = RefocusReport(omega1=p.omega1, fit=rate, expected_rate=refocused_decay_rate(p))
        print_table(
            "Refocused nutation",
            ("R_z fitted", "ci95", "expected"),
            [(rate.rate, rate.ci95_halfwidth, report.expected_rate)],
            console,
        )
        _report(config, "refocus", report)


def _sweep_member(task: Tuple[ExperimentConfig, int, float]) -> SweepPoint:
    config, index, nu1_hz = task
    try:
        rate, n_max, _ = _refocused_fit(config, nu1_hz, [config.run.seed, index])
    except DriveSusceptibilityError as exc:
        raise DriveSusceptibilityError(f"sweep member nu1={nu1_hz:g} Hz failed: {exc}") from exc
    return SweepPoint(
        index=index,
        nu1_hz=nu1_hz,
        omega1=config.spin_params(nu1_hz).omega1,
        n_max=n_max,
        fit=rate,
    )


def run_sweep(config: ExperimentConfig) -> SweepReport:
    """R_z over the drive-strength sweep and the parabola through it."""
    tasks = [(config, i, nu1) for i, nu1 in enumerate(config.nu1_values())]
    if config.run.workers > 1:
        with ProcessPoolExecutor(max_workers=config.run.workers) as pool:
            points = list(pool.map(_sweep_member, tasks))
    else:
        points = [_sweep_member(task) for task in tasks]
    points.sort(key=lambda point: point.index)

    p = config.spin_params()
    # noisy rates are weighted by their own confidence intervals
    sigma = None
    if config.run.noise_level > 0.0:
        sigma = [point.fit.ci95_halfwidth for point in points]
    parabola = fit_parabola(
        [(point.omega1, point.fit.rate) for point in points],
        curvature_factor=refocused_curvature_factor(p),
        sigma=sigma,
    )
    logger.info(
        "parabola: a1=%.6g 1/s, tau_c=%.6g s (true %.6g s)",
        parabola.a1,
        parabola.tau_c_estimate,
        p.tau_c,
    )
    return SweepReport(
        parabola=parabola,
        tau_c_true=p.tau_c,
        a1_expected=0.5 * (p.R1 + p.R2),
        points=points,
    )


@app.command()
def fig2(ctx: typer.Context) -> None:
    """Sweep the drive strength and recover tau_c from R_z(omega1)."""
    with _exit_codes():
        config = ctx.obj.load()
        report = run_sweep(config)
        digest = config_hash(config)
        write_csv(
            _output(config, "fig2.csv"),
            ("omega1_hz", "rz", "ci", "n_max"),
            [
                (point.nu1_hz, point.fit.rate, point.fit.ci95_halfwidth, point.n_max)
                for point in report.points
            ],
            digest,
        )
        fit = report.parabola
        print_table(
            "Parabola fit",
            ("a1 [1/s]", "a1 ci95", "tau_c [s]", "tau_c ci95"),
            [(fit.a1, fit.a1_ci95, fit.tau_c_estimate, fit.tau_c_ci95)],
            console,
        )
        _report(config, "fig2", report)


@app.command()
def oracle(
    ctx: typer.Context,
    corrupt_kernel: bool = typer.Option(
        False, "--corrupt-kernel", help="Negative control: wrong memory-kernel formula"
    ),
) -> None:
    """Brute-force oracle checks; exit code 2 if any exceeds its tolerance."""
    with _exit_codes():
        config = ctx.obj.load()
        settings = config.oracle
        if corrupt_kernel:
            settings = settings.model_copy(update={"corrupt_kernel": True})
        checks = run_oracle_suite(settings)
        report = OracleReport(passed=all(c.passed for c in checks), checks=checks)
        print_table(
            "Oracle checks",
            ("check", "deviation", "tolerance", "passed"),
            [(c.name, c.deviation, c.tolerance, c.passed) for c in checks],
            console,
        )
        _report(config, "oracle", report)
        if not report.passed:
            failed = [c.name for c in checks if not c.passed]
            raise ToleranceError(
                f"{len(failed)} oracle check(s) failed: {', '.join(failed)}", failed
            )


@app.command()
def fit(
    ctx: typer.Context,
    series_csv: Path = typer.Argument(..., help="DecaySeries CSV (n, t, mz, my_leakage)"),
    mode: AsymptoteMode = typer.Option(AsymptoteMode.SUBTRACT, "--mode"),
) -> None:
    """Fit the decay rate of a stored DecaySeries."""
    with _exit_codes():
        config = ctx.obj.load()
        result = fit_decay_rate(read_decay_series_csv(series_csv), mode)
        print_table(
            "Decay fit",
            ("rate [1/s]", "ci95", "residual rms"),
            [(result.rate, result.ci95_halfwidth, result.residual_rms)],
            console,
        )
        _report(config, "fit", result)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
