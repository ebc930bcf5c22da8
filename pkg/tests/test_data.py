import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.signal import find_peaks

from locatft.data import (
    DEFAULT_TARGET,
    TARGETS,
    GeneratorConfig,
    GridError,
    NormStats,
    SizeGrid,
    TransientCase,
    build_corpus,
    correlation_matrix,
    generate_case,
    hpo_subsample,
    inject_noise,
    load_corpus,
    pearson,
    pearson_prune,
    split,
    window,
    write_case,
    write_manifest,
)
from locatft.data.generator import LARGE_BREAK_CM, SMALL_BREAK_CM

DESK = GeneratorConfig()
PAPER_RATE = GeneratorConfig(sample_rate_hz=2.0, pre_s=0.0)


def heatup_peaks(series, initial, prominence=20.0):
    peaks, _ = find_peaks(series, prominence=prominence)
    return [p for p in peaks if series[p] > initial]


def uncovery_onset(case, rise=50.0):
    clad = case.signals["cntrlvar_913"]
    post = case.time_s > 0
    hit = np.flatnonzero(post & (clad > clad[0] + rise))
    return case.time_s[hit[0]] if hit.size else np.inf


@pytest.fixture(scope="module")
def desk_corpus():
    return build_corpus(0, DESK, every=10)


# -- generator -------------------------------------------------------------

def test_channel_inventory():
    case = generate_case("cold", 7.5, 0)
    assert set(TARGETS) <= set(case.signals)
    assert len(case.signals) >= 14
    assert all(v.shape == (DESK.n_points,) for v in case.signals.values())
    assert case.time_s[0] == -DESK.pre_s and case.time_s[-1] == DESK.duration_s


@pytest.mark.parametrize("cfg", [DESK, PAPER_RATE])
def test_two_heatups_at_7_5_cm_cold_leg(cfg):
    case = generate_case("cold", 7.5, 0, cfg)
    clad = case.signals["cntrlvar_913"]
    within = case.time_s <= 2000.0
    assert len(heatup_peaks(clad[within], clad[0])) == 2


@pytest.mark.parametrize("cfg", [DESK, PAPER_RATE])
def test_smallest_break_keeps_level(cfg):
    for loc in ("cold", "hot"):
        lvl = generate_case(loc, 0.1, 0, cfg).signals["cntrlvar_2"]
        assert lvl.min() > 0.8 * lvl[0]


def test_generator_deterministic():
    a, b = generate_case("hot", 12.3, 5), generate_case("hot", 12.3, 5)
    assert all(np.array_equal(a.signals[k], b.signals[k]) for k in a.signals)
    c = generate_case("hot", 12.3, 6)
    assert not np.array_equal(a.signals["cntrlvar_2"], c.signals["cntrlvar_2"])


@pytest.mark.parametrize("bad", [0.0, 0.2, 7.4, 35.7, -0.1, 7.55])
def test_off_grid_size(bad):
    with pytest.raises(GridError):
        generate_case("cold", bad, 0)


def test_unknown_location():
    with pytest.raises(ValueError):
        generate_case("steam_line", 7.5, 0)


@pytest.mark.parametrize("loc", ["cold", "hot"])
def test_uncovery_onset_monotone_in_middle_range(loc):
    grid = SizeGrid()
    sizes = [s for s in grid.sizes(3) if SMALL_BREAK_CM + 1.0 <= s <= LARGE_BREAK_CM]
    onsets = [uncovery_onset(generate_case(loc, float(s), 1)) for s in sizes]
    assert all(np.isfinite(onsets[1:]))
    assert all(b <= a for a, b in zip(onsets, onsets[1:]))


def test_hot_leg_delays_uncovery_and_offsets_temperature():
    cold, hot = generate_case("cold", 10.1, 0), generate_case("hot", 10.1, 0)
    assert uncovery_onset(hot) > uncovery_onset(cold)
    # before either core uncovers, the only difference is the location offset
    w = (cold.time_s > 150) & (cold.time_s < 250)
    d = hot.signals["tempf_138010000"][w] - cold.signals["tempf_138010000"][w]
    assert 4.0 < d.mean() < 12.0


def test_regimes_differ():
    for size in (0.1, 0.5, 1.1):
        clad = generate_case("cold", size, 0).signals["cntrlvar_913"]
        assert clad.max() < clad[0] + 50
    large = generate_case("cold", 35.5, 0)
    early = large.time_s < 100
    clad = large.signals["cntrlvar_913"]
    assert clad[early].max() > clad[0] + 50


# -- corpus ----------------------------------------------------------------

def test_grid_counts():
    grid = SizeGrid()
    assert grid.count == 178
    assert len(grid.sizes(10)) == 18
    assert grid.sizes()[0] == 0.1 and grid.sizes()[-1] == 35.5


def test_desk_corpus(desk_corpus):
    assert len(desk_corpus) == 36
    assert len({c.case_id for c in desk_corpus}) == 36


def test_full_grid_ids_unique():
    grid = SizeGrid()
    from locatft.data import case_id_for
    ids = {case_id_for(loc, float(s)) for loc in ("cold", "hot") for s in grid.sizes()}
    assert len(ids) == 356


# -- pruning ---------------------------------------------------------------

def test_pearson_examples():
    x = np.random.default_rng(0).normal(size=200)
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    rng = np.random.default_rng(42)
    assert abs(pearson(rng.normal(size=4000), rng.normal(size=4000))) < 0.1


def _case(signals):
    n = len(next(iter(signals.values())))
    return TransientCase("c", "cold", 0.1, 1.0, np.arange(n, dtype=float), {k: np.asarray(v, float) for k, v in signals.items()})


def test_negated_copy_pruned_at_any_threshold():
    x = np.random.default_rng(1).normal(size=100)
    for thr in (0.5, 0.9, 0.999):
        res = pearson_prune([_case({"a": x, "b": -x})], thr, candidates=["a", "b"])
        assert res.retained == ["a"] and res.dropped == ["b"]


def test_zero_variance_signal_dropped_with_warning():
    x = np.random.default_rng(1).normal(size=50)
    with pytest.warns(UserWarning):
        res = pearson_prune([_case({"a": x, "flat": np.ones(50)})], 0.95, candidates=["a", "flat"])
    assert res.retained == ["a"] and res.degenerate == ["flat"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_correlation_matrix_properties(seed, n):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(n, 60))
    base[1:] += rng.normal(size=(1, 60)) * rng.uniform(0, 3)
    r = correlation_matrix(base)
    assert np.allclose(r, r.T)
    assert np.allclose(np.diag(r), 1.0)
    assert np.all(np.abs(r) <= 1.0)
    signals = {f"s{i}": base[i] for i in range(n)}
    res = pearson_prune([_case(signals)], 0.6, candidates=list(signals))
    again = pearson_prune([_case(signals)], 0.6, candidates=res.retained)
    assert again.retained == res.retained and again.dropped == []


def test_corpus_prunes_to_thirteen(desk_corpus):
    train, _ = split(desk_corpus, 0.8, 0)
    res = pearson_prune(train)
    assert len(res.retained) == 13
    assert not set(TARGETS) & set(res.dropped)


# -- windowing and normalisation -------------------------------------------

@pytest.fixture(scope="module")
def desk_norm(desk_corpus):
    train, _ = split(desk_corpus, 0.8, 0)
    covs = pearson_prune(train).retained
    return NormStats.from_cases(train, [DEFAULT_TARGET, *covs]), covs


def test_window_shapes(desk_corpus, desk_norm):
    norm, covs = desk_norm
    s = window(desk_corpus[3], 20, 190, norm, covs)
    assert s.y_hist.shape == (21,) and s.z_hist.shape == (21, 13)
    assert s.x_all.shape == (211, 1) and s.y_future.shape == (190,)
    assert s.static.shape == (3,)
    assert s.x_all[20, 0] == pytest.approx(100.0 / 2000.0) and s.x_all[-1, 0] == pytest.approx(1.0)


def test_paper_rate_history_covers_first_100s():
    case = generate_case("cold", 7.5, 0, PAPER_RATE)
    norm = NormStats.from_cases([case], [DEFAULT_TARGET, "p_155010000"])
    s = window(case, 200, 3800, norm, ["p_155010000"])
    assert s.t == 200 and s.horizon == 3800
    assert case.time_s[s.t - 200] == 0.0 and case.time_s[s.t] == 100.0


def test_window_errors(desk_corpus, desk_norm):
    norm, covs = desk_norm
    with pytest.raises(ValueError):
        window(desk_corpus[0], 30, 190, norm, covs)
    with pytest.raises(ValueError):
        window(desk_corpus[0], 20, 191, norm, covs)


def test_window_is_pure(desk_corpus, desk_norm):
    norm, covs = desk_norm
    before = {k: v.copy() for k, v in desk_corpus[5].signals.items()}
    a = window(desk_corpus[5], 20, 190, norm, covs)
    b = window(desk_corpus[5], 20, 190, norm, covs)
    assert np.array_equal(a.y_hist, b.y_hist) and np.array_equal(a.z_hist, b.z_hist)
    assert all(np.array_equal(before[k], desk_corpus[5].signals[k]) for k in before)


def test_normalization_round_trip(desk_corpus, desk_norm):
    norm, covs = desk_norm
    s = window(desk_corpus[7], 20, 190, norm, covs)
    raw = desk_corpus[7].signals[DEFAULT_TARGET]
    assert np.allclose(s.denormalize(s.y_future), raw[s.t + 1:s.t + 191], atol=1e-12, rtol=0)
    for sig in covs:
        v = desk_corpus[7].signals[sig]
        assert np.max(np.abs(norm.denormalize(sig, norm.normalize(sig, v)) - v)) <= 1e-12 * max(1.0, np.abs(v).max())


def test_static_normalised_size(desk_corpus, desk_norm):
    norm, covs = desk_norm
    statics = np.array([window(c, 20, 190, norm, covs).static for c in desk_corpus])
    assert np.all((statics[:, 2] >= 0) & (statics[:, 2] <= 1))
    assert np.all(statics[:, :2].sum(axis=1) == 1)


def test_norm_stats_drop_constant():
    c = _case({"a": np.arange(5.0), "flat": np.full(5, 3.0)})
    with pytest.warns(UserWarning):
        ns = NormStats.from_cases([c], ["a", "flat"])
    assert ns.signals == ["a"] and ns.std["a"] > 0


# -- noise -----------------------------------------------------------------

def _constant_sample(value=2.0, n=21):
    from locatft.data import TimeSeriesSample
    return TimeSeriesSample("k", np.array([1.0, 0.0, 0.5]), np.full(n, value), np.full((n, 1), value),
                            np.zeros((n + 3, 1)), np.zeros(3), n - 1)


def test_inf_snr_is_identity():
    s = _constant_sample()
    assert inject_noise(s, math.inf, 0) is s


def test_noise_variance_closed_form():
    from locatft.data.preprocess import noise_variance
    assert noise_variance(4.0, 20.0) == pytest.approx(0.04)
    assert noise_variance(4.0, 100.0, linear=True) == pytest.approx(0.04)


def test_noise_only_touches_history(desk_corpus, desk_norm):
    norm, covs = desk_norm
    s = window(desk_corpus[9], 20, 190, norm, covs)
    n = inject_noise(s, 15.0, 3)
    assert n.static.tobytes() == s.static.tobytes()
    assert n.x_all.tobytes() == s.x_all.tobytes()
    assert n.y_future.tobytes() == s.y_future.tobytes()
    assert not np.array_equal(n.y_hist, s.y_hist) and not np.array_equal(n.z_hist, s.z_hist)
    again = inject_noise(s, 15.0, 3)
    assert np.array_equal(again.z_hist, n.z_hist)


def test_zero_channel_warns_and_stays():
    s = _constant_sample(0.0)
    with pytest.warns(UserWarning):
        n = inject_noise(s, 20.0, 0)
    assert np.all(n.y_hist == 0.0)


@pytest.mark.parametrize("snr", [40.0, 30.0, 25.0, 20.0, 15.0])
def test_empirical_snr(snr):
    s = _constant_sample(2.0, n=100_000)
    n = inject_noise(s, snr, 11)
    noise = n.y_hist - s.y_hist
    measured = 10 * np.log10(np.mean(s.y_hist**2) / np.mean(noise**2))
    assert abs(measured - snr) <= 0.5
    assert np.var(noise) == pytest.approx(4.0 / 10 ** (snr / 10), rel=0.02)


# -- splits ----------------------------------------------------------------

def test_split_paper_grid_counts():
    ids = list(range(356))
    tr, te = split(ids, 0.8, 0)
    assert (len(tr), len(te)) == (284, 72)
    assert not set(tr) & set(te)
    assert split(ids, 0.8, 0) == (tr, te)
    assert split(ids, 0.8, 1) != (tr, te)


@pytest.mark.parametrize("frac", [0.0, 1.0, 0.05, -0.5])
def test_split_errors(frac):
    with pytest.raises(ValueError):
        split(list(range(10)), frac, 0)


def test_split_by_whole_cases(desk_corpus):
    tr, te = split(desk_corpus, 0.8, 4)
    assert (len(tr), len(te)) == (28, 8)
    assert not {c.case_id for c in tr} & {c.case_id for c in te}


def test_hpo_subsample():
    grid = SizeGrid()
    cases = [generate_case(l, float(s), 0) for l in ("cold", "hot") for s in grid.sizes() if 6.0 <= s <= 11.0]
    sub = hpo_subsample(cases, 10, 6.5, 10.5, seed=3)
    assert len(sub) == 10
    assert all(6.5 <= c.break_size_cm <= 10.5 for c in sub)
    assert [c.case_id for c in sub] == [c.case_id for c in hpo_subsample(cases, 10, 6.5, 10.5, seed=3)]


# -- storage ---------------------------------------------------------------

def test_case_files_round_trip(tmp_path, desk_corpus, desk_norm):
    norm, covs = desk_norm
    for c in desk_corpus[:3]:
        write_case(c, tmp_path)
    write_manifest(tmp_path, desk_corpus[:3], [desk_corpus[0].case_id], [desk_corpus[1].case_id], norm, covs)
    manifest, loaded = load_corpus(tmp_path)
    assert [e["split"] for e in manifest["cases"]] == ["train", "test", "unused"]
    assert manifest["retained_signals"] == covs
    for a, b in zip(desk_corpus[:3], loaded):
        assert a.case_id == b.case_id and a.break_size_cm == b.break_size_cm
        assert np.array_equal(a.time_s, b.time_s)
        assert all(np.array_equal(a.signals[k], b.signals[k]) for k in a.signals)
    header = (tmp_path / f"{desk_corpus[0].case_id}.csv").read_text().splitlines()[0]
    assert header.startswith("time_s,cntrlvar_2,")
    first = (tmp_path / f"{desk_corpus[0].case_id}.csv").read_bytes()
    write_case(desk_corpus[0], tmp_path)
    assert (tmp_path / f"{desk_corpus[0].case_id}.csv").read_bytes() == first
