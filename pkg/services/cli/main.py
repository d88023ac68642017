"""
Command-line front end: ``lgp-control <verb> --config FILE [key=value ...]``.

Exit codes:
    0  success
    1  configuration, input or storage error (also unknown flags)
    2  numeric failure (decomposition, divergence where fatal)
    3  certificate infeasibility with --require-feasible
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from services.harness import (
    RunWriter,
    Setup,
    anchor_report,
    build_setup,
    build_training_set,
    decomposition_frame,
    divergence_onset,
    fit_model,
    lyapunov_frame,
    metrics_frame,
    monte_carlo,
    nominal_torque_frame,
    params_document,
    prediction_frame,
    rate_frame,
    run_benchmark,
    run_protocol,
    trajectory_frame,
)
from services.lgp import LgpModel, ModelRepository
from shared.config import ExperimentConfig, get_config, load_experiment
from shared.exceptions import (
    ConfigurationError,
    InfeasibilityError,
    LgpControlException,
)
from shared.utils.logging import configure_logging, get_logger

logger = get_logger(__name__)

VERBS = ("fit", "simulate", "certify", "montecarlo", "report")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lgp-control",
        description="Lagrangian-GP tracking control experiments",
    )
    commands = parser.add_subparsers(dest="verb", metavar="VERB", required=True)
    helps = {
        "fit": "generate training data, optimize hyperparameters and save the model",
        "simulate": "run controllers and write certified trajectories",
        "certify": "run the random-initial-condition certificate protocol",
        "montecarlo": "sweep reference frequencies and initial conditions",
        "report": "run the full benchmark and write the summary tables",
    }
    for verb in VERBS:
        sub = commands.add_parser(verb, help=helps[verb], description=helps[verb])
        sub.add_argument("--config", required=True, help="experiment YAML document")
        sub.add_argument("--out", help="output directory (default: output.directory)")
        sub.add_argument("--seed", type=int, help="override the experiment seed")
        sub.add_argument("--controller", help="restrict to one roster entry")
        sub.add_argument(
            "--realizations", type=int, help="Monte Carlo realizations per frequency"
        )
        sub.add_argument(
            "--paper-scale",
            "--full-scale",
            dest="full_scale",
            action="store_true",
            help="use the full-size study settings (100 elements, 100 realizations)",
        )
        sub.add_argument(
            "--require-feasible",
            action="store_true",
            help="exit with status 3 when no certificate parameters exist",
        )
        sub.add_argument(
            "--quiet", action="store_true", help="log warnings and errors only"
        )
        sub.add_argument(
            "overrides",
            nargs="*",
            metavar="KEY=VALUE",
            help="dotted-key config overrides",
        )
    return parser


def _overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.realizations is not None:
        overrides.append(f"monte_carlo.realizations={args.realizations}")
    if args.full_scale:
        overrides.append("full_scale=true")
    return overrides


def resolve_controller(cfg: ExperimentConfig, name: str) -> str:
    """
    Roster entry for a user-supplied name.

    Accepts exact names, hyphenated spellings and the bare kind of an L-GP
    entry (``var-nat-pdp`` finds ``lgp_var_nat_pdp``).

    Raises:
        ConfigurationError: If no entry matches
    """
    names = [entry.name for entry in cfg.controllers]
    normalized = name.replace("-", "_")
    for candidate in (name, normalized, f"lgp_{normalized}"):
        if candidate in names:
            return candidate
    kinds = [entry.name for entry in cfg.controllers if entry.kind == normalized]
    if len(kinds) == 1:
        return kinds[0]
    raise ConfigurationError("--controller", f"unknown controller '{name}'")


def _model_for(
    setup: Setup, names: Sequence[str], writer: RunWriter
) -> Optional[LgpModel]:
    """The saved model of the output directory, fitted and saved when missing."""
    if not any(setup.config.controller(name).model == "lgp" for name in names):
        return None
    models = ModelRepository(writer.directory)
    if models.exists("model"):
        print(f"model: loaded {models.path_for('model')}")
        return models.load("model")
    result = fit_model(setup)
    writer.metadata.artifacts.append(models.save(result.model, "model").name)
    print(f"model: fitted inline, validation_rmse={result.validation_rmse:.6g}")
    return result.model


def cmd_fit(setup: Setup, args: argparse.Namespace, writer: RunWriter) -> int:
    result = fit_model(setup)
    path = ModelRepository(writer.directory).save(result.model, "model")
    writer.metadata.artifacts.append(path.name)
    writer.table("training", result.training.to_frame())
    fit_frame = prediction_frame(setup, result.model, result.validation)
    writer.table("validation_fit", fit_frame)
    summary = {
        "rows": result.training.size,
        "prior_rmse": result.prior_rmse,
        "validation_rmse": result.validation_rmse,
    }
    if result.search is not None:
        summary["objective"] = result.search.objective
        summary["evaluations"] = result.search.evaluations
    writer.metadata.summary.update(summary)
    print(
        f"fit: rows={result.training.size} prior_rmse={result.prior_rmse:.6g} "
        f"validation_rmse={result.validation_rmse:.6g} model={path}"
    )
    return EXIT_OK


def _roster(cfg: ExperimentConfig, args: argparse.Namespace) -> list[str]:
    if args.controller:
        return [resolve_controller(cfg, args.controller)]
    return [entry.name for entry in cfg.controllers]


def _print_metrics(rows) -> None:
    for row in rows:
        if row.diverged:
            print(f"{row.controller}: diverged")
            continue
        print(
            f"{row.controller}: err_l2={row.err_l2:.4g} e_max={row.e_max:.4g} "
            f"de_max={row.de_max:.4g} tau_l2={row.tau_l2:.4g}"
        )


def cmd_simulate(setup: Setup, args: argparse.Namespace, writer: RunWriter) -> int:
    names = _roster(setup.config, args)
    lgp = _model_for(setup, names, writer)
    result = run_benchmark(setup, lgp, names, with_certificate=True)
    for run in result.runs:
        frame = trajectory_frame(run.trajectory, run.certificate, dof=setup.dof)
        writer.table(f"trajectory_{run.name}", frame)
    writer.table("metrics", metrics_frame(result.rows))
    _print_metrics(result.rows)

    infeasible = {run.name: run.infeasible for run in result.runs if run.infeasible}
    violations = {
        run.name: run.certificate.violations for run in result.runs if run.certificate
    }
    writer.metadata.summary.update({"infeasible": infeasible, "violations": violations})
    for name, binding in infeasible.items():
        print(f"{name}: certificate infeasible ({', '.join(binding)})")
    if infeasible and args.require_feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_certify(setup: Setup, args: argparse.Namespace, writer: RunWriter) -> int:
    cfg = setup.config
    name = resolve_controller(cfg, args.controller or cfg.certificate.controller)
    lgp = _model_for(setup, [name], writer)
    try:
        result = run_protocol(setup, lgp, controller=name)
    except InfeasibilityError as exc:
        print(f"certify: infeasible ({', '.join(exc.violations)})")
        writer.metadata.error = exc.to_dict()
        return EXIT_INFEASIBLE if args.require_feasible else EXIT_OK

    writer.table("lyapunov", lyapunov_frame(result))
    document = {"controller": name, "parameters": params_document(result.params)}
    if cfg.plant.kind == "two_link":
        document["anchor_tuple"] = anchor_report(result)
    writer.document("certificate", document)
    writer.metadata.summary.update(
        {"violations": result.violations, "void_samples": result.void_samples}
    )
    print(
        f"certify: controller={name} runs={len(result.traces)} "
        f"violations={result.violations} eps={result.params.eps:.4g} "
        f"theta={result.params.theta:.4g} alpha={result.params.alpha_lower:.4g}"
    )
    return EXIT_OK


def cmd_montecarlo(setup: Setup, args: argparse.Namespace, writer: RunWriter) -> int:
    cfg = setup.config
    names = cfg.monte_carlo.controllers or [entry.name for entry in cfg.controllers]
    if args.controller:
        names = [resolve_controller(cfg, args.controller)]
    lgp = _model_for(setup, names, writer)
    cells = monte_carlo(setup, lgp, names)
    writer.monte_carlo(cells)
    onsets = {name: divergence_onset(cells, name) for name in names}
    writer.metadata.summary.update({"divergence_onset": onsets})
    for name, onset in onsets.items():
        text = "none" if onset is None else f"{onset:g} rad/s"
        print(f"{name}: divergence onset {text}")
    return EXIT_OK


def cmd_report(setup: Setup, args: argparse.Namespace, writer: RunWriter) -> int:
    names = _roster(setup.config, args)
    lgp = _model_for(setup, names, writer)
    if lgp is not None:
        _, validation, _ = build_training_set(setup)
        writer.table("validation_fit", prediction_frame(setup, lgp, validation))
    result = run_benchmark(setup, lgp, names, with_certificate=True)
    writer.table("metrics", metrics_frame(result.rows))
    writer.table("rates", rate_frame(result))
    writer.table("r_decomposition", decomposition_frame(setup, result, lgp))
    if setup.soft_robot:
        for run in result.runs:
            frame = nominal_torque_frame(setup, run.trajectory)
            writer.table(f"nominal_torque_{run.name}", frame)
    _print_metrics(result.rows)
    return EXIT_OK


COMMANDS: dict[str, Callable[[Setup, argparse.Namespace, RunWriter], int]] = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "montecarlo": cmd_montecarlo,
    "report": cmd_report,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one workflow and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    settings = get_config()
    configure_logging(settings.log_level, settings.log_format, quiet=args.quiet)
    writer: Optional[RunWriter] = None
    try:
        cfg = load_experiment(args.config, _overrides(args))
        out = Path(args.out or cfg.output.directory)
        writer = RunWriter(out, args.verb, cfg)
        writer.document("config", cfg.model_dump(mode="json"))
        code = COMMANDS[args.verb](build_setup(cfg), args, writer)
        writer.finish()
        return code
    except LgpControlException as exc:
        logger.error("cli.failed", verb=args.verb, **exc.to_dict())
        print(f"error: {exc}", file=sys.stderr)
        if writer is not None:
            writer.finish(error=exc)
        return exc.exit_code


def main() -> None:
    sys.exit(dispatch())
