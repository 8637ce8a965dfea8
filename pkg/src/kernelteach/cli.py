"""Command-line surface: demos, the Gaussian teaching pipeline, and sweeps.

Exit codes: 0 success, 1 acceptance failure, 2 usage error, 3 pipeline error.
Set KT_LOG=debug|info|warning for verbosity.  Every command is deterministic
given --seed.
"""

from __future__ import annotations

import json
import logging
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .datasets import Dataset, GENERATOR_KINDS, generate, load_csv, save_csv, train_reference
from .kernels import KernelSpec, choose_truncation
from .learner import (
    DualModel,
    FeatureVector,
    FitNotConverged,
    LearnerConfig,
    PrimalModel,
    fit,
    training_loss,
)
from .kernels import feature_layout
from .metrics import direction_similarity, perceptron_risk, risk_gap, sign_agreement
from .teacher import (
    R_CONVENTION_APPENDIX,
    R_CONVENTION_MAIN,
    SearchConfig,
    TeachingError,
    axis_power_sum_model,
    check_assumptions,
    closed_form_dual,
    gaussian_teaching_set,
    linear_teaching_set,
    polynomial_teaching_set,
)
from .teaching import TeachingSet

log = logging.getLogger("kernelteach")

EXIT_ACCEPTANCE = 1
EXIT_PIPELINE = 3


class PipelineError(click.ClickException):
    exit_code = EXIT_PIPELINE

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")


def _setup_logging() -> None:
    level = os.environ.get("KT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_vector(text: str) -> np.ndarray:
    try:
        values = [float(tok) for tok in text.replace(" ", "").split(",") if tok != ""]
    except ValueError:
        raise click.UsageError(f"could not parse vector {text!r}")
    if not values:
        raise click.UsageError("empty vector")
    return np.array(values)


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _teaching_set_csv(ts: TeachingSet, path: Path) -> None:
    header = ",".join([f"x{i + 1}" for i in range(ts.d)] + ["y", "tag"])
    lines = [header]
    for i in range(len(ts)):
        coords = ",".join("%.17g" % v for v in ts.points[i])
        lines.append(f"{coords},{ts.labels[i]:d},{ts.tags[i]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_dataset(dataset: str | None, kind: str | None, n: int, noise: float,
                  seed: int) -> Dataset:
    if dataset is not None:
        return load_csv(dataset)
    if kind is None:
        raise click.UsageError("provide --dataset PATH or --kind NAME")
    return generate(kind, n, noise, seed)


@click.group()
@click.version_option(__version__, prog_name="kernelteach")
def main() -> None:
    """Machine teaching for kernel perceptrons."""
    _setup_logging()


@main.command("demo-linear")
@click.option("--theta", default="-3,3,5", show_default=True,
              help="Target model as comma-separated coordinates.")
@click.option("--dim", type=int, default=None,
              help="Draw a random target of this dimension instead.")
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_demo_linear(theta: str, dim: int | None, seed: int) -> None:
    """Teach a linear perceptron its exact decision boundary."""
    rng = np.random.default_rng(seed)
    target = rng.standard_normal(dim) if dim is not None else _parse_vector(theta)
    if float(np.linalg.norm(target)) == 0.0:
        raise click.UsageError("theta must be nonzero")
    try:
        ts = linear_teaching_set(target)
        model = fit(ts, KernelSpec.linear(), LearnerConfig(seed=seed))
    except (TeachingError, FitNotConverged) as exc:
        raise PipelineError("teach-linear", exc)
    spec = KernelSpec.linear()
    reference = PrimalModel(spec, FeatureVector(
        target / np.linalg.norm(target), feature_layout(spec, len(target))))
    cosine = direction_similarity(model, reference)
    loss = training_loss(model, ts)
    click.echo(f"teaching set ({len(ts)} items, all labelled +1):")
    for row, tag in zip(ts.points, ts.tags):
        click.echo("  [%s]  %s" % (", ".join("%.4f" % v for v in row), tag))
    click.echo(f"direction similarity: {cosine:.12f}")
    click.echo(f"training loss: {loss:.3e}")
    if cosine < 1 - 1e-6:
        click.echo("FAIL: direction similarity below 1-1e-6", err=True)
        sys.exit(EXIT_ACCEPTANCE)
    click.echo("PASS")


@main.command("demo-poly")
@click.option("--theta", default="1,4,4", show_default=True,
              help="Feature-space target, or the word 'counterexample'.")
@click.option("--d", "dim", type=int, default=2, show_default=True)
@click.option("--k", "degree", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_demo_poly(theta: str, dim: int, degree: int, seed: int) -> None:
    """Teach a polynomial perceptron its exact decision boundary."""
    spec = KernelSpec.polynomial(degree)
    if theta.strip().lower() == "counterexample":
        target = axis_power_sum_model(dim, degree)
    else:
        coords = _parse_vector(theta)
        target = PrimalModel(spec, FeatureVector(coords, feature_layout(spec, dim)))
    try:
        ts, report = polynomial_teaching_set(target, dim, degree, rng_seed=seed)
    except TeachingError as exc:
        click.echo(f"teaching failed: {exc}", err=True)
        click.echo("the target admits no independent boundary points "
                   "(orthogonal-polynomials condition violated)", err=True)
        sys.exit(EXIT_PIPELINE)
    try:
        model = fit(ts, spec, LearnerConfig(seed=seed))
    except FitNotConverged as exc:
        raise PipelineError("fit", exc)
    cosine = direction_similarity(model, target)
    grid = np.linspace(-2.0, 2.0, 100)
    gx, gy = np.meshgrid(grid, grid)
    probes = np.column_stack([gx.ravel(), gy.ravel()]) if dim == 2 else None
    click.echo(f"teaching set size: {len(ts)} (2r-1 with r={len(ts)//2 + 1})")
    click.echo(f"feature-space direction similarity: {cosine:.12f}")
    click.echo(f"assumption report: rank {report.achieved_rank}/{report.requested_rank}, "
               f"coherence {report.max_coherence:.3f} (bound {report.coherence_bound:.3f})")
    if probes is not None:
        band = 1e-6 * float(np.max(np.abs(target.decision_values(probes))))
        agreement = sign_agreement(target, model, probes, band)
        click.echo(f"sign agreement on 100x100 grid: {agreement:.6f}")
    if cosine < 1 - 1e-4:
        click.echo("FAIL: direction similarity below 1-1e-4", err=True)
        sys.exit(EXIT_ACCEPTANCE)
    click.echo("PASS")


def _search_profile(count_first: bool, budget: int | None,
                    margin_frac: float) -> SearchConfig:
    if count_first:
        return SearchConfig.count_first(budget=budget or 300_000,
                                        margin_frac=margin_frac)
    return SearchConfig(budget=budget or 300_000, margin_frac=margin_frac)


@main.command("teach-gaussian")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV dataset (x1..xd,y).")
@click.option("--kind", type=click.Choice(GENERATOR_KINDS), default=None,
              help="Generate a synthetic dataset instead.")
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--noise", type=float, default=0.05, show_default=True)
@click.option("--sigma", type=float, default=0.9, show_default=True)
@click.option("--epsilon", type=float, default=None, help="Closeness target in (0,1).")
@click.option("--s", "truncation", type=int, default=None,
              help="Truncation order (overrides --epsilon).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--r-convention", type=click.Choice([R_CONVENTION_MAIN, R_CONVENTION_APPENDIX]),
              default=R_CONVENTION_MAIN, show_default=True)
@click.option("--ball-factor", type=float, default=4.0, show_default=True)
@click.option("--anchor-q", type=float, default=1.0, show_default=True)
@click.option("--count-first", is_flag=True,
              help="Disable the independence/conditioning floors so the full "
                   "point count is always reached (recommended for s > 5).")
@click.option("--budget", type=int, default=None, help="Sampling budget.")
@click.option("--ref-coeff-bound", type=float, default=20.0, show_default=True,
              help="Coefficient l1 cap for the reference separator.")
def cmd_teach_gaussian(dataset, kind, n, noise, sigma, epsilon, truncation, seed,
                       out, r_convention, ball_factor, anchor_q, count_first,
                       budget, ref_coeff_bound) -> None:
    """Train a reference separator, construct its teaching set, and re-learn."""
    if epsilon is None and truncation is None:
        raise click.UsageError("provide --epsilon or --s")
    data = _load_dataset(dataset, kind, n, noise, seed)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = KernelSpec.gaussian(sigma)

    try:
        reference = train_reference(data, spec,
                                    LearnerConfig(seed=seed, coeff_bound=ref_coeff_bound))
    except Exception as exc:
        raise PipelineError("train-reference", exc)
    log.info("reference risk %.3e (converged=%s)", reference.err_star,
             reference.converged)

    search = _search_profile(count_first, budget, 0.5)
    try:
        ts, config, report = gaussian_teaching_set(
            reference.model, epsilon, rng_seed=seed, s=truncation,
            search=search, r_convention=r_convention,
            ball_radius_factor=ball_factor, anchor_Q=anchor_q)
    except TeachingError as exc:
        raise PipelineError("teaching-set", exc)
    click.echo(f"truncation order s={config.s} (epsilon={config.epsilon:.6g}), "
               f"teaching set size {len(ts)}")

    certificate = None
    if r_convention == R_CONVENTION_MAIN:
        from .linalg import SingularMatrixError
        try:
            certificate = closed_form_dual(ts, sigma)
            click.echo("certificate loss: %.3e" % training_loss(certificate, ts))
        except SingularMatrixError as exc:
            # expected for count-first sampling: crowded boundary points make
            # the Gram numerically singular, so no certificate is emitted
            click.echo(f"certificate unavailable: {exc}", err=True)
        except Exception as exc:
            raise PipelineError("certificate", exc)

    try:
        model = fit(ts, spec, LearnerConfig(seed=seed, coeff_bound=math.inf,
                                            loss_tol=1e-4))
    except FitNotConverged as exc:
        log.warning("learner kept best model at loss %.3e", exc.loss)
        model = exc.model
    click.echo("learned training loss: %.3e" % training_loss(model, ts))

    report_doc = risk_gap(reference.model, model, data)
    _teaching_set_csv(ts, out_dir / "teaching_set.csv")
    save_csv(data, out_dir / "dataset.csv")
    _write_json(out_dir / "model_star.json", reference.model.to_json())
    _write_json(out_dir / "model_hat.json", model.to_json())
    if certificate is not None:
        _write_json(out_dir / "model_certificate.json", certificate.to_json())
    _write_json(out_dir / "risk_report.json", report_doc.to_json())
    _write_json(out_dir / "assumption_report.json", report.to_json())
    _write_json(out_dir / "approx_config.json", {
        "epsilon": config.epsilon, "R": config.R, "s": config.s,
        "epsilon_s": config.epsilon_s, "d": config.d,
        "ball_radius_factor": config.ball_radius_factor,
        "anchor_Q": config.anchor_Q, "coherence_target": config.coherence_target,
        "r": config.r, "r_convention": r_convention,
    })
    click.echo(f"risk gap: {report_doc.gap:.6g} (err*={report_doc.err_star:.6g}, "
               f"err^={report_doc.err_hat:.6g})")
    click.echo(f"wrote outputs to {out_dir}/")


@main.command("sweep")
@click.option("--kind", type=click.Choice(GENERATOR_KINDS), default="circles",
              show_default=True)
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--noise", type=float, default=0.08, show_default=True)
@click.option("--sigma", type=float, default=0.9, show_default=True)
@click.option("--s-min", type=int, default=2, show_default=True)
@click.option("--s-max", type=int, default=12, show_default=True)
@click.option("--trials", type=int, default=5, show_default=True,
              help="Teaching-set rebuilds per order.")
@click.option("--restarts", type=int, default=5, show_default=True,
              help="Learner restarts per rebuild.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--r-convention", type=click.Choice([R_CONVENTION_MAIN, R_CONVENTION_APPENDIX]),
              default=R_CONVENTION_MAIN, show_default=True)
@click.option("--ball-factor", type=float, default=4.0, show_default=True)
@click.option("--anchor-q", type=float, default=1.0, show_default=True)
@click.option("--ref-coeff-bound", type=float, default=20.0, show_default=True)
def cmd_sweep(kind, n, noise, sigma, s_min, s_max, trials, restarts, seed, out,
              r_convention, ball_factor, anchor_q, ref_coeff_bound) -> None:
    """Rebuild and re-learn across truncation orders; emit gap statistics."""
    if s_min > s_max:
        raise click.UsageError("--s-min must be <= --s-max")
    if trials < 1 or restarts < 1:
        raise click.UsageError("--trials and --restarts must be >= 1")
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = generate(kind, n, noise, seed)
    spec = KernelSpec.gaussian(sigma)
    try:
        reference = train_reference(data, spec,
                                    LearnerConfig(seed=seed, coeff_bound=ref_coeff_bound))
    except Exception as exc:
        raise PipelineError("train-reference", exc)

    rows = []
    failures: dict[str, str] = {}
    for s in range(s_min, s_max + 1):
        gaps, errs = [], []
        for trial in range(trials):
            ts_seed = int(np.random.SeedSequence(
                entropy=seed, spawn_key=(s, trial)).generate_state(1)[0])
            try:
                ts, config, _ = gaussian_teaching_set(
                    reference.model, None, rng_seed=ts_seed, s=s,
                    search=SearchConfig.count_first(),
                    r_convention=r_convention,
                    ball_radius_factor=ball_factor, anchor_Q=anchor_q)
            except TeachingError as exc:
                failures[str(s)] = f"trial {trial}: {exc}"
                log.warning("s=%d trial %d failed: %s", s, trial, exc)
                continue
            for restart in range(restarts):
                learner = LearnerConfig(seed=restart, coeff_bound=math.inf,
                                        loss_tol=1e-3, max_iters=6000)
                try:
                    model = fit(ts, spec, learner)
                except FitNotConverged as exc:
                    model = exc.model
                err_hat = perceptron_risk(model, data)
                errs.append(err_hat)
                gaps.append(abs(reference.err_star - err_hat))
        if not gaps:
            continue
        rows.append({
            "s": s,
            "ts_size": len(ts),
            "err_star": reference.err_star,
            "err_hat_mean": float(np.mean(errs)),
            "err_hat_std": float(np.std(errs)),
            "gap_mean": float(np.mean(gaps)),
            "trials": len(errs),
        })
        log.info("s=%d gap_mean=%.6g", s, rows[-1]["gap_mean"])

    csv_lines = ["s,ts_size,err_star,err_hat_mean,err_hat_std,gap_mean"]
    for row in rows:
        csv_lines.append("%d,%d,%.17g,%.17g,%.17g,%.17g" % (
            row["s"], row["ts_size"], row["err_star"], row["err_hat_mean"],
            row["err_hat_std"], row["gap_mean"]))
    (out_dir / "sweep.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    _write_json(out_dir / "sweep.json", {
        "dataset_name": kind, "sigma": sigma, "seed": seed,
        "trials": trials, "restarts": restarts,
        "rows": rows, "failures": failures,
    })
    for row in rows:
        click.echo("s=%2d size=%4d gap_mean=%.6g" % (row["s"], row["ts_size"],
                                                     row["gap_mean"]))
    click.echo(f"wrote {out_dir}/sweep.csv and sweep.json")
    if failures:
        click.echo(f"{len(failures)} order(s) had failures; see sweep.json", err=True)


@main.command("eval")
@click.option("--model-star", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--model-hat", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--kind", type=click.Choice(GENERATOR_KINDS), default=None)
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--noise", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Optional path for the JSON risk report.")
def cmd_eval(model_star, model_hat, dataset, kind, n, noise, seed, out) -> None:
    """Compare two serialized models on a dataset."""
    data = _load_dataset(dataset, kind, n, noise, seed)
    try:
        star = DualModel.from_json(json.loads(Path(model_star).read_text()))
        hat = DualModel.from_json(json.loads(Path(model_hat).read_text()))
        report = risk_gap(star, hat, data)
    except Exception as exc:
        raise PipelineError("eval", exc)
    click.echo(json.dumps(report.to_json(), indent=2))
    if out is not None:
        _write_json(Path(out), report.to_json())


if __name__ == "__main__":
    main()
