"""Command-line interface.

Subcommands cover the full workflow:

* ``summarize``      activation CSV -> persistence diagram CSV + summary JSON
* ``fit``            records CSV -> gap model JSON
* ``estimate``       model + one network's summaries -> test-score estimate
* ``eval``           records CSV -> cross-validated error report
* ``earlystop-step`` one epoch's diagram -> stop/continue decision
* ``scatter``        records + model -> (gap, predicted_gap) pairs for plotting

Exit codes: 0 success, 2 unusable input, 3 degenerate numbers, 4 protocol
misuse.  Every output embeds the run manifest (parameters plus any sidecar
metadata) and is byte-identical across reruns on the same input -- no
timestamps, no environment lookups.
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import click
import numpy as np

from . import __version__
from ._io import RunManifest
from .earlystop import (
    PeakTrace,
    append_trace_row,
    peak_scale,
    read_trace,
    update_and_check,
)
from .errors import InputError, ToolError
from .filtration import vietoris_rips
from .gap import (
    FEATURE_SETS,
    estimate_test_performance,
    fit_gap_model,
    leave_one_group_out,
    leave_one_sample_out,
    predict_gap,
    read_model_json,
    read_records_csv,
    write_model_json,
)
from .homology import (
    PersistenceDiagram,
    betti_curve,
    persistent_homology,
    read_diagram_csv,
    write_diagram_csv,
)
from .metric import correlation_matrix, load_activations, to_distance
from .summaries import summarize_diagram, write_summary_json
from ._io import dump_json, fmt_float, write_lines

logger = logging.getLogger("topogap")

#: above this many nodes the quadratic filtration gets noticeably slow
NODE_WARN_THRESHOLD = 4_000


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any):
        try:
            return fn(*args, **kwargs)
        except ToolError as exc:
            logger.error("%s", exc)
            raise SystemExit(exc.exit_code)

    return wrapper


def _common_options(fn):
    fn = click.option(
        "--out",
        type=click.Path(file_okay=False, path_type=Path),
        default=Path("."),
        show_default=True,
        help="Directory for output files.",
    )(fn)
    fn = click.option(
        "--seed",
        type=int,
        default=0,
        show_default=True,
        help="Seed recorded in the manifest (reserved for synthesized inputs).",
    )(fn)
    return fn


def _manifest(command: str, sidecar: Optional[RunManifest] = None, **params: Any) -> dict[str, Any]:
    out: dict[str, Any] = {"tool": "topogap", "tool_version": __version__, "command": command}
    for key, value in params.items():
        if value is not None:
            out[key] = value
    if sidecar is not None:
        out.update(sidecar.to_dict())
    return out


def _strip(path: Path, *suffixes: str) -> str:
    """Base name with a known multi-part suffix removed (fallback: stem)."""
    name = path.name
    for suffix in suffixes:
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


@click.group()
@click.version_option(version=__version__, prog_name="topogap")
def main() -> None:
    """Estimate test performance from the topology of a network's correlations."""
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr
    )


@main.command()
@click.argument("activations", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--eps-max", type=float, default=1.0, show_default=True,
              help="Largest filtration scale; the correlation distance lives in [0, 1].")
@click.option("--policy-infinite", type=click.Choice(["exclude", "clamp"]),
              default="exclude", show_default=True,
              help="Bars that never die: drop them or clamp their death to eps-max.")
@click.option("--policy-degenerate", type=click.Choice(["drop-node", "error"]),
              default="drop-node", show_default=True,
              help="What to do with constant (zero-variance) nodes.")
@_common_options
@_guarded
def summarize(
    activations: Path,
    eps_max: float,
    policy_infinite: str,
    policy_degenerate: str,
    out: Path,
    seed: int,
) -> None:
    """Compute the persistence diagram and life/midlife summaries of one network."""
    act, sidecar = load_activations(activations)
    if act.n_nodes > NODE_WARN_THRESHOLD:
        logger.warning(
            "%d nodes: filtration is quadratic, expect this to take a while",
            act.n_nodes,
        )
    corr, kept = correlation_matrix(act, degenerate_policy=policy_degenerate)
    if kept.size < act.n_nodes:
        logger.info("kept %d of %d nodes", kept.size, act.n_nodes)
    dist = to_distance(corr)
    fc = vietoris_rips(dist, eps_max=eps_max, max_dim=2)
    dgm0, dgm1 = persistent_homology(fc)

    manifest = _manifest(
        "summarize",
        sidecar,
        input=str(activations),
        out=str(out),
        eps_max=eps_max,
        policy_infinite=policy_infinite,
        policy_degenerate=policy_degenerate,
        seed=seed,
        n_samples=act.n_samples,
        n_nodes=act.n_nodes,
        n_nodes_kept=int(kept.size),
    )
    out.mkdir(parents=True, exist_ok=True)
    base = _strip(activations, ".csv")
    diagram_path = out / f"{base}.diagram.csv"
    summary_path = out / f"{base}.summary.json"
    write_diagram_csv(diagram_path, [dgm0, dgm1], manifest)
    summary = summarize_diagram(dgm1, infinite_policy=policy_infinite)
    write_summary_json(summary_path, summary, manifest)
    click.echo(
        f"lambda={fmt_float(summary.life)} mu={fmt_float(summary.midlife)} "
        f"n_cavities={summary.n_cavities}"
    )
    click.echo(f"wrote {diagram_path}")
    click.echo(f"wrote {summary_path}")


def _filtered_records(records_path: Path, model_filter: Optional[str]):
    recs, _ = read_records_csv(records_path)
    if model_filter is not None:
        recs = [r for r in recs if r.model == model_filter]
        if not recs:
            raise InputError(
                f"{records_path}: no records with model label {model_filter!r}"
            )
    return recs


@main.command()
@click.argument("records", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--features", type=click.Choice(sorted(FEATURE_SETS)), default="both",
              show_default=True, help="Summary features the gap is regressed on.")
@click.option("--model-filter", type=str, default=None,
              help="Use only records whose model label equals this value.")
@_common_options
@_guarded
def fit(records: Path, features: str, model_filter: Optional[str], out: Path, seed: int) -> None:
    """Fit the linear gap model on a records CSV."""
    recs = _filtered_records(records, model_filter)
    model = fit_gap_model(recs, feature_set=features)
    manifest = _manifest(
        "fit", None, input=str(records), out=str(out), features=features,
        model_filter=model_filter, seed=seed, n_records=len(recs),
    )
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / f"{_strip(records, '.records.csv', '.csv')}.model.json"
    write_model_json(model_path, model, manifest)
    click.echo(
        f"c1={fmt_float(model.c1)} c2={fmt_float(model.c2)} c3={fmt_float(model.c3)} "
        f"rms={fmt_float(model.fit_residual_rms)}"
    )
    click.echo(f"wrote {model_path}")


@main.command()
@click.argument("model", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--lambda", "life_value", type=float, default=None,
              help="Life summary of the network under estimation.")
@click.option("--mu", "midlife_value", type=float, default=None,
              help="Midlife summary of the network under estimation.")
@click.option("--rho-train", type=float, required=True,
              help="Training performance (0..100 scale).")
@_common_options
@_guarded
def estimate(
    model: Path,
    life_value: Optional[float],
    midlife_value: Optional[float],
    rho_train: float,
    out: Path,
    seed: int,
) -> None:
    """Estimate a network's test performance from its summaries."""
    gap_model, _ = read_model_json(model)
    needed = FEATURE_SETS[gap_model.feature_set]
    if "life" in needed and life_value is None:
        raise click.UsageError(f"model uses feature set {gap_model.feature_set!r}: --lambda is required")
    if "midlife" in needed and midlife_value is None:
        raise click.UsageError(f"model uses feature set {gap_model.feature_set!r}: --mu is required")
    if not 0.0 <= rho_train <= 100.0:
        raise InputError(f"--rho-train {rho_train} outside the 0..100 scale")
    life = life_value if life_value is not None else 0.0
    midlife = midlife_value if midlife_value is not None else 0.0
    gap_hat = predict_gap(gap_model, life, midlife)
    rho_estimate = estimate_test_performance(rho_train, gap_hat)
    out_of_range = not 0.0 <= rho_estimate <= 100.0
    if out_of_range:
        logger.warning(
            "estimate %s falls outside the 0..100 scale; reporting it unclamped",
            fmt_float(rho_estimate),
        )
    payload: dict[str, Any] = {
        "lambda": life,
        "mu": midlife,
        "rho_train": rho_train,
        "predicted_gap": gap_hat,
        "rho_test_estimate": rho_estimate,
        "out_of_range": out_of_range,
        "manifest": _manifest(
            "estimate", None, input=str(model), out=str(out), seed=seed,
            features=gap_model.feature_set,
        ),
    }
    out.mkdir(parents=True, exist_ok=True)
    estimate_path = out / f"{_strip(model, '.model.json', '.json')}.estimate.json"
    dump_json(estimate_path, payload)
    click.echo(json.dumps(payload, sort_keys=True, indent=2))


def _eval_row(recs, protocol: str, features: str) -> dict[str, Any]:
    row: dict[str, Any] = {"feature_set": features}
    if protocol == "loo":
        res = leave_one_sample_out(recs, feature_set=features)
        row.update(
            mean_error=res.mean_error,
            std_error=res.std_error,
            n_used=res.n_used,
            n_skipped_folds=res.n_skipped,
            errors=res.errors,
        )
    else:
        res = leave_one_group_out(recs, feature_set=features)
        row.update(
            mean_error=res.mean_error,
            std_error=res.std_error,
            n_used=res.n_used,
            n_skipped_folds=res.n_skipped,
            skipped_groups=res.skipped_groups,
            groups={
                label: {
                    "mean_error": g.mean_error,
                    "std_error": g.std_error,
                    "n_records": len(g.errors),
                    "errors": g.errors,
                }
                for label, g in res.groups.items()
            },
        )
    return row


@main.command("eval")
@click.argument("records", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--protocol", type=click.Choice(["loo", "lodo"]), default="loo",
              show_default=True,
              help="loo: leave one record out; lodo: leave one group out.")
@click.option("--features", type=click.Choice(sorted(FEATURE_SETS)), default=None,
              help="Single feature set to evaluate; default evaluates all three.")
@click.option("--model-filter", type=str, default=None,
              help="Use only records whose model label equals this value.")
@_common_options
@_guarded
def eval_cmd(
    records: Path,
    protocol: str,
    features: Optional[str],
    model_filter: Optional[str],
    out: Path,
    seed: int,
) -> None:
    """Cross-validate gap estimation; reports one row per feature set."""
    recs = _filtered_records(records, model_filter)
    feature_rows = [features] if features else ["lambda", "mu", "both"]
    rows = [_eval_row(recs, protocol, f) for f in feature_rows]
    payload: dict[str, Any] = {
        "protocol": protocol,
        "rows": rows,
        "manifest": _manifest(
            "eval", None, input=str(records), out=str(out), protocol=protocol,
            features=features, model_filter=model_filter, seed=seed,
            n_records=len(recs),
        ),
    }
    out.mkdir(parents=True, exist_ok=True)
    eval_path = out / f"{_strip(records, '.records.csv', '.csv')}.eval.json"
    dump_json(eval_path, payload)
    for row in rows:
        click.echo(
            f"protocol={protocol} features={row['feature_set']} "
            f"mean_error={fmt_float(row['mean_error'])} "
            f"std_error={fmt_float(row['std_error'])} "
            f"n_used={row['n_used']} n_skipped_folds={row['n_skipped_folds']}"
        )
    click.echo(f"wrote {eval_path}")


@main.command("earlystop-step")
@click.argument("diagram", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("trace", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--epoch", type=int, default=None,
              help="Epoch number for this step; defaults to the next after the trace.")
@click.option("--patience", type=int, default=0, show_default=True,
              help="Extra strict increases to tolerate before stopping.")
@click.option("--betti-dim", type=click.Choice(["0", "1"]), default="1",
              show_default=True, help="Homology dimension whose Betti curve is tracked.")
@click.option("--grid-steps", type=int, default=100, show_default=True,
              help="Size of the fixed uniform scale grid the peak index lives on.")
@click.option("--eps-max", type=float, default=1.0, show_default=True,
              help="Grid upper end; overridden by the eps_max in the diagram's manifest.")
@_common_options
@_guarded
def earlystop_step(
    diagram: Path,
    trace: Path,
    epoch: Optional[int],
    patience: int,
    betti_dim: str,
    grid_steps: int,
    eps_max: float,
    out: Path,
    seed: int,
) -> None:
    """Fold one epoch's diagram into the stopping trace; prints the decision.

    The peak index is computed on a uniform grid over [0, eps-max] that is
    identical for every epoch; indices from different grids would not be
    comparable and the stopping rule compares indices across epochs.
    """
    dim = int(betti_dim)
    diagrams, dgm_manifest = read_diagram_csv(diagram, eps_max=eps_max)
    if dgm_manifest is not None and "eps_max" in dgm_manifest:
        eps_max = float(dgm_manifest["eps_max"])
    dgm = next(
        (g for g in diagrams if g.dimension == dim),
        PersistenceDiagram(dim, [], eps_max),
    )
    if grid_steps < 2:
        raise InputError(f"--grid-steps must be at least 2, got {grid_steps}")
    grid = np.linspace(0.0, eps_max, grid_steps)
    curve = betti_curve(dgm, grid)
    pk = peak_scale(curve)
    if pk.no_cavities:
        logger.info("no dimension-%d cavities in %s; peak index pinned to 0", dim, diagram)

    if trace.exists():
        trace_state, _, _ = read_trace(trace)
    else:
        trace_state = PeakTrace()
    decision = update_and_check(trace_state, pk.index, epoch=epoch, patience=patience)
    manifest = _manifest(
        "earlystop-step", None, input=str(diagram), trace=str(trace),
        eps_max=eps_max, grid_steps=grid_steps, betti_dim=dim,
        patience=patience, seed=seed,
    )
    append_trace_row(
        trace,
        epoch=trace_state.epochs[-1],
        peak_index=pk.index,
        scale=float(grid[pk.index]),
        decision=decision,
        manifest=manifest,
    )
    click.echo(decision)


@main.command()
@click.argument("records", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("model", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--model-filter", type=str, default=None,
              help="Use only records whose model label equals this value.")
@_common_options
@_guarded
def scatter(records: Path, model: Path, model_filter: Optional[str], out: Path, seed: int) -> None:
    """Emit (gap, predicted_gap) pairs for every record with a known test score."""
    recs = _filtered_records(records, model_filter)
    gap_model, _ = read_model_json(model)
    usable = [r for r in recs if r.rho_test is not None]
    skipped = len(recs) - len(usable)
    if skipped:
        logger.warning("skipping %d record(s) without rho_test", skipped)
    if not usable:
        raise InputError("no records with rho_test; nothing to plot")
    lines = ["gap,predicted_gap"]
    for r in usable:
        lines.append(
            f"{fmt_float(r.gap)},{fmt_float(predict_gap(gap_model, r.life, r.midlife))}"
        )
    manifest = _manifest(
        "scatter", None, input=str(records), out=str(out), model=str(model.name),
        model_filter=model_filter, seed=seed, n_records=len(usable),
    )
    out.mkdir(parents=True, exist_ok=True)
    scatter_path = out / f"{_strip(records, '.records.csv', '.csv')}.scatter.csv"
    write_lines(scatter_path, lines, manifest)
    click.echo(f"wrote {scatter_path}")


if __name__ == "__main__":
    main()
