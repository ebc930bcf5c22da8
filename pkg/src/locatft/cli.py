"""Command line: generate -> train -> evaluate, plus tuning, noise and comparison runs.

Each command writes into ``<out>/<command>/``: its CSV artifacts, PNG figures
next to them, the fully resolved config (``config.txt``) and ``run.log``.
Only ``run.log`` carries timestamps, so everything else is byte-identical
across reruns of the same resolved config.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline as P
from . import plotting
from .baselines import BaselineConfig, OracleForecaster, RecurrentBaseline, compare
from .config import ConfigError, RunConfig, parse_assignments, resolve
from .csvio import write_csv
from .data import NormStats, load_corpus, write_case, write_manifest
from .hpo import SearchSpace, TftObjective, optimize, read_log
from .numerics import NumericError
from .tft import TemporalFusionTransformer, TftConfig
from .tft.checkpoint import load_checkpoint, save_checkpoint
from .training import write_forecast_dump, write_loss_curve, write_metrics

log = logging.getLogger("locatft")

# exit codes per error category
EXIT = {"config": 2, "missing-input": 3, "io": 4, "numeric": 5, "invalid-input": 6}


# -- run directory helpers -------------------------------------------------

def _run_dir(out: Path, command: str, rc: RunConfig) -> Path:
    d = Path(out) / command
    d.mkdir(parents=True, exist_ok=True)
    (d / "config.txt").write_text(rc.dump())
    handler = logging.FileHandler(d / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)
    log.info("command %s, seed %d, out %s", command, rc.seed, out)
    return d


def _load_prepared(rc: RunConfig, out: Path):
    corpus_dir = rc.resolved_corpus_dir(out)
    try:
        manifest, cases = load_corpus(corpus_dir)
    except FileNotFoundError as exc:
        raise FileNotFoundError(f"{exc}; run 'locatft generate' first") from None
    return P.prepared_from_manifest(manifest, cases)


def _save_model(path: Path, kind: str, model, params, prep, target: str) -> None:
    if kind == "oracle":
        config = {}
    else:
        config = model.cfg.to_dict()
    meta = {
        "kind": kind,
        "target": target,
        "covariates": prep.covariates,
        "norm_stats": prep.norm.to_dict(),
    }
    save_checkpoint(path, params or {}, config, meta)


def _load_model(path: Path):
    if not Path(path).exists():
        raise FileNotFoundError(f"no checkpoint at {path}; run 'locatft train' first")
    params, config, meta = load_checkpoint(path)
    kind = meta.get("kind", "tft")
    if kind == "oracle":
        model = OracleForecaster()
    elif kind == "tft":
        model = TemporalFusionTransformer(TftConfig.from_dict(config))
    else:
        cfg = dict(config)
        cfg["quantiles"] = tuple(cfg["quantiles"])
        model = RecurrentBaseline(BaselineConfig(**cfg))
    return model, params, meta


def _eval_samples(rc: RunConfig, prep, meta) -> list:
    """Test windows built with the normalisation stored in the checkpoint."""
    prep = replace(prep, norm=NormStats.from_dict(meta["norm_stats"]))
    if list(meta["covariates"]) != prep.covariates:
        raise ValueError("checkpoint covariates do not match the corpus manifest")
    return P.make_windows(rc, prep, prep.test_cases, meta["target"])


def _adapt_static(model, samples):
    if isinstance(model, TemporalFusionTransformer) and model.cfg.n_static == 0:
        return P.drop_static(samples)
    return samples


# -- commands --------------------------------------------------------------

def cmd_generate(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "generate", rc)
    corpus_dir = rc.resolved_corpus_dir(out)
    cases = P.make_corpus(rc)
    prep = P.prepare(rc, cases)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for c in cases:
        write_case(c, corpus_dir)
    write_manifest(
        corpus_dir, cases, prep.train_ids, prep.test_ids, prep.norm, prep.retained,
        extra={"seed": rc.seed, "sample_rate_hz": rc.sample_rate_hz, "grid_every": rc.grid_every},
    )
    write_csv(d / "retained_signals.csv", ["signal"], [[s] for s in prep.retained])
    log.info("wrote %d cases (%d train / %d test) to %s", len(cases), len(prep.train_ids), len(prep.test_ids), corpus_dir)


def cmd_train(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "train", rc)
    prep = _load_prepared(rc, out)
    train_s, _ = P.samples(rc, prep)
    kind = rc.model.lower()
    model = P.build_model(rc, len(prep.covariates))
    res = P.fit(rc, model, train_s)
    ckpt = rc.resolved_checkpoint(out)
    _save_model(ckpt, kind, model, res.params, prep, rc.target)
    write_loss_curve(d / "loss_curve.csv", res.losses)
    if rc.figures and res.losses:
        plotting.loss_curve(d / "loss_curve.png", res.losses, f"{model.name} training loss")
    log.info("trained %s for %d epochs; checkpoint %s", model.name, len(res.losses), ckpt)


def cmd_evaluate(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "evaluate", rc)
    prep = _load_prepared(rc, out)
    model, params, meta = _load_model(rc.resolved_checkpoint(out))
    test = _adapt_static(model, _eval_samples(rc, prep, meta))
    pred, metrics = P.score(model, params, test)
    write_metrics(d / "metrics.csv", metrics)
    write_forecast_dump(d / "forecasts.csv", test, pred, model.quantiles)
    per_case = [[cid, *(v[k] for k in ("residual_mean", "residual_variance", "coverage", "crossing_rate", "pinball"))]
                for cid, v in metrics.per_case.items()]
    write_csv(d / "per_case.csv", ["case_id", "residual_mean", "residual_variance", "coverage", "crossing_rate", "pinball_loss"], per_case)
    if rc.figures:
        plotting.forecasts(d / "forecasts.png", test, pred, rc.sample_rate_hz)
    log.info("coverage %.4f, residual mean %.4f over %d cases", metrics.coverage, metrics.residual_mean, metrics.n_cases)


def cmd_tune(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "tune", rc)
    prep = _load_prepared(rc, out)
    fit_s, val_s = P.hpo_samples(rc, prep)
    base = P.tft_config(rc, len(prep.covariates))
    objective = TftObjective(base, fit_s, val_s, epochs=rc.hpo_epochs, batch_size=rc.batch_size,
                             seed=rc.seed, optimizer=P.optimizer_config(rc))

    def logged(theta):
        y = objective(theta)
        log.info("theta %s -> %.6g", theta, y)
        return y

    traj = d / "trajectory.csv"
    res = optimize(SearchSpace(), logged, n_max=rc.hpo_n_max, n_init=rc.hpo_n_init, seed=rc.seed,
                   log_path=traj, resume=args.resume)
    b = res.best.theta
    (d / "best_config.txt").write_text(
        f"# best of {len(res.trials)} trials, objective {res.best.y!r}\n"
        f"d_model = {b['d_model']}\nn_heads = {b['m_H']}\nlstm_layers = {b['lstm_layers']}\n"
        f"full_attention = {'true' if b['full_attention'] else 'false'}\n"
    )
    if rc.figures:
        trials = read_log(traj)
        plotting.convergence(d / "convergence.png", [t.y for t in trials], res.best_so_far)


def _write_sweep(path: Path, sweep) -> None:
    write_csv(path, P.SWEEP_HEADER, P.sweep_rows(sweep))


def _sweep_series(sweep):
    return [(label, {k: v for k, v in m.rows()}) for label, m in sweep]


def _full_model_and_test(rc, out):
    prep = _load_prepared(rc, out)
    model, params, meta = _load_model(rc.resolved_checkpoint(out))
    prep = replace(prep, norm=NormStats.from_dict(meta["norm_stats"]))
    return prep, model, params, meta, _adapt_static(model, _eval_samples(rc, prep, meta))


def cmd_noise_sweep(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "noise-sweep", rc)
    _, model, params, _, test = _full_model_and_test(rc, out)
    sweep = P.noise_sweep(rc, model, params, test)
    _write_sweep(d / "noise_sweep.csv", sweep)
    if rc.figures:
        plotting.noise_sweep(d / "noise_sweep.png", {model.name: _sweep_series(sweep)})


def cmd_ablate_static(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "ablate-static", rc)
    prep, model, params, meta, test = _full_model_and_test(rc, out)
    if not isinstance(model, TemporalFusionTransformer) or model.cfg.n_static == 0:
        raise ValueError("ablate-static needs a TFT checkpoint trained with static covariates")
    train_s, _ = P.samples(rc, prep, meta["target"])
    ablated, res = P.train_tft(rc, train_s, static=False)
    save_checkpoint(d / "ablated.ckpt", res.params, ablated.cfg.to_dict(),
                    {"kind": "tft", "target": meta["target"], "covariates": prep.covariates, "norm_stats": prep.norm.to_dict()})
    write_loss_curve(d / "ablated_loss_curve.csv", res.losses)
    full = P.noise_sweep(rc, model, params, test)
    abl = P.noise_sweep(rc, ablated, res.params, P.drop_static(test))
    _write_sweep(d / "noise_sweep_full.csv", full)
    _write_sweep(d / "noise_sweep_ablated.csv", abl)
    write_csv(d / "delta.csv", P.SWEEP_HEADER, P.sweep_delta(full, abl))
    if rc.figures:
        plotting.noise_sweep(d / "ablation.png", {"full": _sweep_series(full), "no static": _sweep_series(abl)})


def cmd_compare_baselines(rc: RunConfig, out: Path, args) -> None:
    d = _run_dir(out, "compare-baselines", rc)
    prep = _load_prepared(rc, out)
    datasets = {t: P.samples(rc, prep, t) for t in rc.compare_targets}
    models = P.comparison_models(rc, len(prep.covariates))
    result = compare(models, datasets)
    result.write(d / "comparison.csv")
    # aggregate pinball loss per model and target, the ordering criterion
    pin_rows = [[name, t, result.metrics[(name, t)].pinball] for name in result.models for t in result.targets]
    write_csv(d / "pinball.csv", ["model", "target", "pinball_loss"], pin_rows)
    if rc.figures:
        plotting.comparison(d / "comparison.png", result.header(), result.rows())


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "tune": cmd_tune,
    "noise-sweep": cmd_noise_sweep,
    "ablate-static": cmd_ablate_static,
    "compare-baselines": cmd_compare_baselines,
}


# -- argument handling -----------------------------------------------------

def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="key = value config file")
    parser.add_argument("--seed", type=int, default=default, help="global seed")
    parser.add_argument("--preset", choices=["desk", "paper"], default=default if suppress else "desk")
    parser.add_argument("--out", type=Path, default=default if suppress else Path("out"), help="run directory")
    parser.add_argument("--set", dest="overrides", action="append", metavar="KEY=VALUE",
                        default=default if suppress else [], help="override one config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locatft", description="TFT prognosis of LOCA transients")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p, suppress=True)
        if name == "tune":
            p.add_argument("--resume", action="store_true", help="continue from an existing trajectory.csv")
    return parser


def resolve_args(args) -> RunConfig:
    overrides = parse_assignments([(i + 1, s) for i, s in enumerate(args.overrides or [])], "--set")
    if args.seed is not None:
        overrides["seed"] = args.seed
    return resolve(args.preset, args.config, overrides)


def _category(exc: BaseException) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, FileNotFoundError):
        return "missing-input"
    if isinstance(exc, OSError):
        return "io"
    if isinstance(exc, (NumericError, FloatingPointError)):
        return "numeric"
    return "invalid-input"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "resume"):
        args.resume = False
    try:
        rc = resolve_args(args)
        COMMANDS[args.command](rc, Path(args.out), args)
    except (ConfigError, OSError, NumericError, FloatingPointError, ValueError, KeyError) as exc:
        cat = _category(exc)
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {cat}: {msg}", file=sys.stderr)
        log.error("%s: %s", cat, msg)
        return EXIT[cat]
    return 0


if __name__ == "__main__":
    sys.exit(main())
