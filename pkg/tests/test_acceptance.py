"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The desk-scale trainings (TFT, plain RNN, and the TFT without static inputs,
for three seeds) are run once per session and shared by criteria 4, 5 and 8.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from conftest import make_samples
from locatft import pipeline as P
from locatft.baselines import BaselineConfig
from locatft.baselines import forward_batch as baseline_forward_batch
from locatft.baselines import init_params as baseline_init
from locatft.cli import main
from locatft.config import resolve
from locatft.data import TimeSeriesSample, collate
from locatft.hpo import SearchSpace, decode, optimize
from locatft.numerics import Tensor
from locatft.numerics.gradcheck import check_gradients, max_relative_error
from locatft.tft import (
    ForwardTrace,
    QuantileForecast,
    TftConfig,
    causal_mask,
    encode_static,
    forward_batch,
    grn,
    init_params,
    interpretable_attention,
)
from locatft.tft.params import grn_shapes, init_param_dict
from locatft.training import aggregate_loss, pinball_array, quantile_loss

SEEDS = (0, 1, 2)


# -- 1. gradient fidelity ------------------------------------------------------

GRAD_CFG = TftConfig(d_model=6, n_heads=2, lstm_layers=2, history_steps=3, horizon=3,
                     n_static=3, n_observed=2, n_known=1)

# parameter groups of the full model, checked through the end-to-end loss
TFT_BLOCKS = {
    "variable selection": ("static_vsn.", "hist_vsn.", "future_vsn."),
    "static encoder": ("static_encoder.",),
    "LSTM chain": ("lstm.", "post_lstm."),
    "attention": ("attention.",),
    "decoder": ("enrichment.", "decoder."),
    "quantile head": ("quantile_head.",),
}
BASELINES = [(c, b) for c in ("elman", "gru", "lstm") for b in (True, False)]
PER_BLOCK = 24


def _jitter(params, rng, scale=0.3):
    # move biases and gains off their init values so every entry carries gradient
    for t in params.values():
        t.data += rng.normal(scale=scale, size=t.shape)


def _gradient_rows():
    rng = np.random.default_rng(2024)
    out = {}
    # gated residual network in isolation, with context
    p = init_param_dict(grn_shapes("g", 5, 5, 5, 5), 1)
    _jitter(p, rng)
    a, c = Tensor(rng.normal(size=(3, 5))), Tensor(rng.normal(size=(3, 5)))
    w = rng.normal(size=(3, 5))
    out["GRN"] = check_gradients(lambda: (grn(p, "g", a, c) * w).sum(), p, total=PER_BLOCK, rng=rng)
    # full TFT, one parameter group at a time
    params = init_params(GRAD_CFG, 7)
    _jitter(params, rng, 0.1)
    batch = collate(make_samples(GRAD_CFG, 2, seed=5))
    wt = rng.normal(size=(2, GRAD_CFG.horizon, 3))
    for block, prefixes in TFT_BLOCKS.items():
        group = {k: v for k, v in params.items() if k.startswith(prefixes)}
        out[block] = check_gradients(lambda: (forward_batch(params, GRAD_CFG, batch) * wt).sum(),
                                     group, total=PER_BLOCK, rng=rng)
    # every baseline cell, block and autoregressive
    for cell, block in BASELINES:
        cfg = BaselineConfig(cell=cell, block_mode=block, hidden=4, layers=1, history_steps=3, horizon=3,
                             n_observed=2, n_known=1)
        bp = baseline_init(cfg, 3)
        _jitter(bp, rng, 0.1)
        name = cfg.name
        out[name] = check_gradients(lambda: (baseline_forward_batch(bp, cfg, batch) * wt).sum(),
                                    bp, total=PER_BLOCK, rng=rng)
    return out


def test_criterion_1_gradient_fidelity(record):
    t0 = time.perf_counter()
    rows = _gradient_rows()
    elapsed = time.perf_counter() - t0
    worst = {k: max_relative_error(r) for k, r in rows.items()}
    counts = {k: len(r) for k, r in rows.items()}
    ok = all(v < 1e-4 for v in worst.values()) and all(n >= 20 for n in counts.values()) and elapsed < 120
    detail = f"{len(rows)} blocks, {min(counts.values())}+ params each, worst rel err {max(worst.values()):.2e}, {elapsed:.1f}s"
    assert record(1, "gradient fidelity", ok, detail), worst


# -- 2. loss oracle -----------------------------------------------------------

def test_criterion_2_loss_oracle(record):
    rng = np.random.default_rng(99)
    y = rng.normal(scale=3, size=1000)
    yhat = rng.normal(scale=3, size=1000)
    q = rng.uniform(0.001, 0.999, size=1000)
    y[:50] = yhat[:50]  # include exact ties
    literal = np.array([qi * (yi - yh) if yi >= yh else (qi - 1) * (yi - yh) for yi, yh, qi in zip(y, yhat, q)])
    scalar = np.array([quantile_loss(a, b, c) for a, b, c in zip(y, yhat, q)])
    err1 = float(np.max(np.abs(scalar - literal)))
    # aggregate: 1000 triples arranged as 20 cases x 10 steps x 5 quantiles
    Q = (0.05, 0.25, 0.5, 0.75, 0.95)
    truth = rng.normal(size=(20, 10))
    pred = rng.normal(size=(20, 10, 5))
    samples = [TimeSeriesSample(f"c{i}", np.zeros(1), np.zeros(2), np.zeros((2, 1)), np.zeros((12, 1)), truth[i], 1)
               for i in range(20)]
    pairs = [(s, QuantileForecast(pred[i], pred[i], Q, 1, s.case_id)) for i, s in enumerate(samples)]
    ref = sum(quantile_loss(truth[m, t], pred[m, t, j], Q[j]) for m in range(20) for t in range(10) for j in range(5))
    ref /= 20 * 10
    err2 = abs(aggregate_loss(pairs, Q).total - ref)
    err3 = float(np.max(np.abs(pinball_array(y, yhat[:, None], [0.3])[:, 0] -
                                [quantile_loss(a, b, 0.3) for a, b in zip(y, yhat)])))
    ok = max(err1, err2, err3) <= 1e-12
    assert record(2, "loss oracle", ok, f"max |diff| scalar {err1:.1e}, aggregate {err2:.1e}, array {err3:.1e}")


# -- 3. structural invariants --------------------------------------------------

def _structural_failures(theta, seed):
    cfg = TftConfig(d_model=theta["d_model"], n_heads=theta["m_H"], lstm_layers=theta["lstm_layers"],
                    full_attention=theta["full_attention"], history_steps=4, horizon=3,
                    n_static=3, n_observed=3, n_known=1)
    rng = np.random.default_rng(seed)
    params = init_params(cfg, seed)
    batch = collate(make_samples(cfg, 2, seed=seed))
    fails = []
    tr = ForwardTrace()
    out = forward_batch(params, cfg, batch, trace=tr)
    for name in ("static_weights", "hist_weights", "future_weights"):
        w = getattr(tr, name).data
        if np.any(w < 0) or np.max(np.abs(w.sum(-1) - 1)) > 1e-12:
            fails.append(name)
    for a in tr.attention:
        if np.any(a.data < 0) or np.max(np.abs(a.data.sum(-1) - 1)) > 1e-12:
            fails.append("attention rows")
            break
    # static encoder: one projection to 4*d_model, cut into equal contexts
    W = params["static_encoder.W"]
    d = cfg.d_model
    if W.shape[1] != 4 * d:
        fails.append("static encoder width")
    emb = Tensor(rng.normal(size=(2, d)))
    ctx = encode_static(params, emb)
    full = emb.data @ W.data
    for i, part in enumerate((ctx.c_v, ctx.c_c, ctx.c_h, ctx.c_e)):
        if not np.array_equal(part.data, full[:, i * d:(i + 1) * d]):
            fails.append("static encoder split")
    # shared value projection: output is linear in W_V
    psi = Tensor(rng.normal(size=(2, cfg.n_positions, d)))
    v1, v2 = rng.normal(size=(d, d)), rng.normal(size=(d, d))

    def attn_with(wv):
        p2 = dict(params)
        p2["attention.W_V"] = Tensor(wv)
        return interpretable_attention(p2, cfg, psi)[0].data

    lhs = attn_with(2.0 * v1 - 0.5 * v2)
    rhs = 2.0 * attn_with(v1) - 0.5 * attn_with(v2)
    if np.max(np.abs(lhs - rhs)) > 1e-10 * max(1.0, np.max(np.abs(lhs))):
        fails.append("W_V linearity")
    # causal mask: perturbing a late known input leaves earlier steps unchanged
    causal = replace(cfg, full_attention=False)
    base = forward_batch(params, causal, batch).data
    pb = collate(make_samples(cfg, 2, seed=seed))
    pb.fut[:, -1] += 3.0
    moved = forward_batch(params, causal, pb).data
    if np.max(np.abs(moved[:, :-1] - base[:, :-1])) > 1e-10 or np.max(np.abs(moved[:, -1] - base[:, -1])) == 0:
        fails.append("causal future invariance")
    # masked entries are exact zeros in the causal variant
    tr2 = ForwardTrace()
    forward_batch(params, causal, batch, trace=tr2)
    mask = causal_mask(cfg.n_positions)
    if any(np.any(a.data[:, mask] != 0) for a in tr2.attention):
        fails.append("mask zeros")
    if out.shape != (2, cfg.horizon, 3):
        fails.append("output shape")
    return fails


def test_criterion_3_structural_invariants(record):
    rng = np.random.default_rng(13)
    thetas = [decode(r) for r in SearchSpace().sample(rng, 10)]
    failures = {i: _structural_failures(t, i) for i, t in enumerate(thetas)}
    bad = {i: f for i, f in failures.items() if f}
    detail = f"10 configs (d_model {min(t['d_model'] for t in thetas)}-{max(t['d_model'] for t in thetas)}), failures: {bad or 'none'}"
    assert record(3, "structural invariants", not bad, detail)


# -- shared desk-scale runs -------------------------------------------------------

@pytest.fixture(scope="session")
def desk_runs():
    runs = {}
    for seed in SEEDS:
        rc = resolve("desk", overrides={"seed": seed})
        prep = P.prepare(rc, P.make_corpus(rc))
        tr, te = P.samples(rc, prep)
        entry = {"rc": rc, "prep": prep, "train": tr, "test": te, "times": {}}
        t0 = time.perf_counter()
        entry["tft"] = P.train_tft(rc, tr)
        entry["times"]["tft"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        rnn = P.build_model(rc, len(prep.covariates), kind="RNN")
        entry["rnn"] = (rnn, P.fit(rc, rnn, tr))
        entry["times"]["rnn"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        entry["ablated"] = P.train_tft(rc, tr, static=False)
        entry["times"]["ablated"] = time.perf_counter() - t0
        runs[seed] = entry
    return runs


# -- 4. desk end-to-end --------------------------------------------------------

def test_criterion_4_desk_end_to_end(desk_runs, record):
    run = desk_runs[0]
    rc = run["rc"]
    assert (len(run["train"]) + len(run["test"]), rc.history_steps, rc.horizon) == (36, 20, 190)
    assert (rc.d_model, rc.n_heads, rc.lstm_layers, rc.epochs) == (16, 2, 1, 200)
    model, res = run["tft"]
    _, m = P.score(model, res.params, run["test"])
    drop = 1.0 - res.losses[-1] / res.losses[0]
    runtime = run["times"]["tft"]
    ok = drop >= 0.60 and 0.60 <= m.coverage <= 0.98 and abs(m.residual_mean) <= 0.15 and runtime <= 900
    detail = (f"seed 0: loss drop {drop:.1%}, coverage {m.coverage:.3f}, residual mean {m.residual_mean:+.4f}, "
              f"train {runtime:.0f}s")
    assert record(4, "desk end-to-end", ok, detail)


# -- 5. comparison ordering ------------------------------------------------------

def test_criterion_5_tft_vs_rnn(desk_runs, record):
    parts, wins = [], 0
    for seed, run in desk_runs.items():
        tft = P.score(*(run["tft"][0], run["tft"][1].params), run["test"])[1].pinball
        rnn = P.score(run["rnn"][0], run["rnn"][1].params, run["test"])[1].pinball
        wins += tft <= rnn
        parts.append(f"seed {seed} TFT {tft:.4f} vs RNN {rnn:.4f}")
    ok = wins >= 2
    assert record(5, "TFT pinball <= RNN", ok, f"{wins}/3 seeds; " + "; ".join(parts))


# -- 6. search correctness -------------------------------------------------------

def _g(theta):
    return (theta["d_model"] - 64) ** 2 + (theta["m_H"] - 8) ** 2 + theta["lstm_layers"]


def test_criterion_6_hpo(record):
    space = SearchSpace()
    values = np.sort([_g(decode(r)) for r in space.enumerate()])
    cutoff = values[int(np.ceil(0.01 * len(values))) - 1]
    hits, monotone, parts = 0, True, []
    for seed in range(5):
        res = optimize(space, _g, n_max=60, n_init=5, seed=seed)
        curve = res.best_so_far
        monotone &= all(b <= a for a, b in zip(curve, curve[1:]))
        hits += res.best.y <= cutoff
        parts.append(f"{res.best.y:g}")
    ok = hits >= 4 and monotone
    detail = f"{hits}/5 seeds within best 1% (g <= {cutoff:g}); best per seed {', '.join(parts)}; curves monotone {monotone}"
    assert record(6, "HPO correctness", ok, detail)


# -- 7. noise protocol ------------------------------------------------------------

def _empirical_snr(snr, seed):
    rng = np.random.default_rng(seed)
    n = 100_000
    y = 50 + 5 * np.sin(np.linspace(0, 40, n))
    z = rng.normal(3.0, 1.0, size=(n, 2))
    s = TimeSeriesSample("snr", np.array([1.0, 0.0, 0.5]), (y - 40) / 8, (z - 1) / 2, np.zeros((n + 1, 1)),
                         np.zeros(1), n - 1, 40.0, 8.0, np.array([1.0, 1.0]), np.array([2.0, 2.0]))
    from locatft.data import inject_noise

    noisy = inject_noise(s, snr, seed=seed)
    out = []
    for clean, dirty in ((y, noisy.denormalize(noisy.y_hist)), (z, noisy.z_hist * 2 + 1)):
        clean = clean.reshape(n, -1)
        dirty = dirty.reshape(n, -1)
        out += list(10 * np.log10(np.mean(clean**2, 0) / np.mean((dirty - clean) ** 2, 0)))
    return out


def test_criterion_7_noise_protocol(desk_runs, record):
    levels = (40.0, 30.0, 25.0, 20.0, 15.0)
    worst = max(abs(v - snr) for i, snr in enumerate(levels) for v in _empirical_snr(snr, i))
    run = desk_runs[0]
    rc = run["rc"]
    model, res = run["tft"]
    sweep = P.noise_sweep(rc, model, res.params, run["test"])
    labels = [label for label, _ in sweep]
    rows_ok = labels == ["clean", *(repr(s) for s in levels)]
    static_ok = True
    for level, snr in enumerate(rc.snr_db):
        for a, b in zip(run["test"], P.noisy_set(rc, run["test"], level, snr)):
            static_ok &= a.static.tobytes() == b.static.tobytes()
            static_ok &= a.x_all.tobytes() == b.x_all.tobytes() and a.y_future.tobytes() == b.y_future.tobytes()
    ok = worst <= 0.5 and rows_ok and static_ok
    detail = f"max |SNR error| {worst:.3f} dB; rows {labels}; static bytes identical {static_ok}"
    assert record(7, "noise protocol", ok, detail)


# -- 8. static ablation ------------------------------------------------------------

def test_criterion_8_ablation(desk_runs, record):
    parts, wins = [], 0
    for seed, run in desk_runs.items():
        rc = run["rc"]
        level = rc.snr_db.index(15.0)
        noisy = P.noisy_set(rc, run["test"], level, 15.0)
        full_m, full_r = run["tft"]
        abl_m, abl_r = run["ablated"]
        full = P.score(full_m, full_r.params, noisy)[1].residual_variance
        abl = P.score(abl_m, abl_r.params, P.drop_static(noisy))[1].residual_variance
        wins += abl >= full
        parts.append(f"seed {seed} ablated {abl:.4f} vs full {full:.4f}")
    ok = wins >= 2
    assert record(8, "ablation variance at 15 dB", ok, f"{wins}/3 seeds; " + "; ".join(parts))


# -- 9. reproducibility -------------------------------------------------------------

FAST = ["--set", "epochs=3", "--set", "d_model=4", "--set", "n_heads=2", "--set", "history_steps=5",
        "--set", "horizon=20", "--set", "hpo_epochs=1", "--set", "hpo_n_max=3", "--set", "hpo_n_init=2",
        "--set", "baseline_hidden=3", "--set", "baselines=RNN,Block-GRU"]
COMMANDS = ("generate", "train", "evaluate", "tune", "noise-sweep", "ablate-static", "compare-baselines")


def test_criterion_9_reproducibility(tmp_path, record):
    snapshots, codes = [], []
    for tag in ("first", "second"):
        out = tmp_path / tag
        codes += [main([cmd, "--out", str(out), "--seed", "5", *FAST]) for cmd in COMMANDS]
        snapshots.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.csv"))})
    a, b = snapshots
    differing = sorted(str(k) for k in a if a[k] != b.get(k))
    ok = all(c == 0 for c in codes) and a.keys() == b.keys() and not differing
    detail = f"{len(a)} CSV files across {len(COMMANDS)} commands; differing: {differing or 'none'}"
    assert record(9, "reproducibility", ok, detail)
