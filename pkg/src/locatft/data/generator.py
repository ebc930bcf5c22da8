"""Parametric LOCA-like transient generator.

This is a closed-form stand-in for a thermal-hydraulics code. Every channel
is built from a handful of break-size dependent quantities:

* blowdown time constant and end pressure of the primary circuit,
* a reactor trip time (first crossing of the low-pressure setpoint),
* two core uncovery episodes (loop-seal clearing, then boil-off) whose
  onset time falls with break size,
* a recovery time after which injection refloods the vessel.

Break sizes fall into three regimes. Below ``SMALL_BREAK_CM`` the core never
uncovers and the transient is a slow depressurisation. Between the two
thresholds the uncovery onset follows ``700 s * (7.5 / D) ** 0.8``. Above
``LARGE_BREAK_CM`` an additional early blowdown heat-up appears within the
first minute.

Hot-leg breaks shift temperature channels by ``HOT_LEG_OFFSET_K`` after the
break and delay uncovery by ``HOT_LEG_DELAY``. The constants were set once so
that the shape targets listed in the tests hold and are otherwise frozen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOCATIONS = ("cold", "hot")

SMALL_BREAK_CM = 2.5
LARGE_BREAK_CM = 34.5
HOT_LEG_OFFSET_K = 8.0
HOT_LEG_DELAY = 1.3

P_NOMINAL = 15.5  # MPa
T_CLAD0 = 600.0  # K
TRIP_PRESSURE = 13.0
SI_PRESSURE = 11.0
ACCUMULATOR_PRESSURE = 4.5
LHSI_PRESSURE = 1.5

TARGETS = ("cntrlvar_2", "cntrlvar_101", "cntrlvar_913")

# Fixed order used by the correlation pruning: earlier channels win.
DIRECT_SIGNALS = (
    "p_155010000",
    "p_260010000",
    "tempf_138010000",
    "tempf_200010000",
    "tempf_250010000",
    "tempf_300010000",
    "tempf_400010000",
    "tempf_350010000",
    "tempf_450010000",
    "pmpvel_235",
    "pmpvel_335",
    "rktpow",
    "p_540010000",
    "mflowj_537000000",
    "mflowj_505010000",
    "mflowj_566010000",
    "mflowj_811010000",
    "mflowj_806000000",
    "voidf_200010000",
    "p_810010000",
    "voidf_811010000",
)

# relative noise scale per channel (fraction of a nominal range)
_RANGES = {
    "cntrlvar_2": 100.0,
    "cntrlvar_101": 250.0,
    "cntrlvar_913": 400.0,
    "p_155010000": 15.0,
    "p_260010000": 15.0,
    "tempf_138010000": 250.0,
    "tempf_200010000": 250.0,
    "tempf_250010000": 250.0,
    "tempf_300010000": 250.0,
    "tempf_400010000": 250.0,
    "tempf_350010000": 250.0,
    "tempf_450010000": 250.0,
    "pmpvel_235": 1.0,
    "pmpvel_335": 1.0,
    "rktpow": 100.0,
    "p_540010000": 8.0,
    "mflowj_537000000": 1000.0,
    "mflowj_505010000": 1000.0,
    "mflowj_566010000": 50.0,
    "mflowj_811010000": 300.0,
    "mflowj_806000000": 60.0,
    "voidf_200010000": 1.0,
    "p_810010000": 4.5,
    "voidf_811010000": 1.0,
}


class GridError(ValueError):
    """Break size is not on the configured grid."""


@dataclass(frozen=True)
class SizeGrid:
    start: float = 0.1
    step: float = 0.2
    stop: float = 35.5

    @property
    def count(self) -> int:
        return int(round((self.stop - self.start) / self.step)) + 1

    def sizes(self, every: int = 1) -> np.ndarray:
        idx = np.arange(0, self.count, every)
        return np.round(self.start + idx * self.step, 6)

    def index(self, size_cm: float) -> int:
        pos = (size_cm - self.start) / self.step
        i = int(round(pos))
        if abs(pos - i) > 1e-6 or not 0 <= i < self.count:
            raise GridError(f"break size {size_cm} cm is not on the grid {self.start}:{self.step}:{self.stop}")
        return i

    def normalize(self, size_cm: float) -> float:
        return (size_cm - self.start) / (self.stop - self.start)


@dataclass(frozen=True)
class GeneratorConfig:
    sample_rate_hz: float = 0.1
    duration_s: float = 2000.0
    # steady operation recorded before the break opens at t = 0
    pre_s: float = 100.0
    grid: SizeGrid = field(default_factory=SizeGrid)
    noise: float = 0.004

    @property
    def n_points(self) -> int:
        return int(round((self.pre_s + self.duration_s) * self.sample_rate_hz)) + 1

    def time_axis(self) -> np.ndarray:
        return -self.pre_s + np.arange(self.n_points) / self.sample_rate_hz


@dataclass
class TransientCase:
    case_id: str
    break_location: str
    break_size_cm: float
    sample_rate_hz: float
    time_s: np.ndarray
    signals: dict[str, np.ndarray]

    @property
    def n_points(self) -> int:
        return self.time_s.shape[0]

    def signal_codes(self) -> list[str]:
        return list(self.signals)


def case_id_for(location: str, size_cm: float) -> str:
    return f"{location}_{size_cm:05.1f}cm"


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _rise(t, t0, tau):
    return np.where(t > t0, 1.0 - np.exp(-np.maximum(t - t0, 0.0) / tau), 0.0)


def _sigmoid(t, c, w):
    return 0.5 * (1.0 + np.tanh((t - c) / (2.0 * w)))


def _bump(t, c, w):
    return np.exp(-0.5 * ((t - c) / w) ** 2)


def _crossing_time(t, cond):
    hit = np.flatnonzero(cond)
    return float(t[hit[0]]) if hit.size else np.inf


def _tsat(p):
    return 373.0 + 200.0 * (np.maximum(p, 0.0) / P_NOMINAL) ** 0.35


@dataclass(frozen=True)
class BreakDynamics:
    """Scalar quantities that drive every channel for one break."""

    size_cm: float
    location: str
    tau_p: float
    p_end: float
    t_trip: float
    t_si: float
    t_uncover: float
    t_second: float
    t_recover: float
    heat1: float
    heat2: float
    heat0: float
    level_drop: float

    @classmethod
    def from_break(cls, location: str, size_cm: float) -> "BreakDynamics":
        d = float(size_cm)
        tau_p = 15.0 + 5000.0 / (1.0 + (d / 0.8) ** 1.6)
        p_end = 0.3 + 7.0 / (1.0 + (d / 4.0) ** 2)

        def crossing(level):
            frac = (level - p_end) / (P_NOMINAL - p_end)
            return float(-tau_p * np.log(frac)) if 0.0 < frac < 1.0 else np.inf

        delay = HOT_LEG_DELAY if location == "hot" else 1.0
        t1 = 700.0 * (7.5 / max(d, SMALL_BREAK_CM)) ** 0.8 * delay
        t2 = t1 + 550.0 * (7.5 / max(d, SMALL_BREAK_CM)) ** 0.3 * delay
        frac = np.sqrt(np.clip((d - SMALL_BREAK_CM) / (LARGE_BREAK_CM - SMALL_BREAK_CM), 0.0, 1.0))
        onset = float(_smoothstep((d - 0.6) / (SMALL_BREAK_CM - 0.6)))
        heat1 = (150.0 + 250.0 * frac) * onset
        return cls(
            size_cm=d,
            location=location,
            tau_p=tau_p,
            p_end=p_end,
            t_trip=crossing(TRIP_PRESSURE),
            t_si=crossing(SI_PRESSURE),
            t_uncover=t1,
            t_second=t2,
            t_recover=t2 + 0.35 * (t2 - t1),
            heat1=heat1,
            heat2=0.7 * heat1,
            heat0=180.0 * float(_smoothstep((d - (LARGE_BREAK_CM - 1.0)) / 2.0)),
            level_drop=62.0 * d / (d + 4.0),
        )


def _channels(time_s: np.ndarray, dyn: BreakDynamics) -> dict[str, np.ndarray]:
    t = time_s
    post = t > 0
    p = np.where(post, dyn.p_end + (P_NOMINAL - dyn.p_end) * np.exp(-np.maximum(t, 0.0) / dyn.tau_p), P_NOMINAL)

    tripped = t > dyn.t_trip
    since_trip = np.maximum(t - dyn.t_trip, 0.0) if np.isfinite(dyn.t_trip) else np.zeros_like(t)
    power = np.where(tripped, 6.0 * (1.0 + since_trip / 10.0) ** -0.25, 100.0)
    pow_frac = power / 100.0

    w1 = 0.12 * dyn.t_uncover + 15.0
    w2 = 0.15 * (dyn.t_second - dyn.t_uncover) + 20.0
    base_clad = _tsat(p) + (T_CLAD0 - _tsat(P_NOMINAL)) * (0.25 + 0.75 * pow_frac)

    def base_at(tc):
        pc = dyn.p_end + (P_NOMINAL - dyn.p_end) * np.exp(-tc / dyn.tau_p)
        pw = 6.0 * (1.0 + max(tc - dyn.t_trip, 0.0) / 10.0) ** -0.25 / 100.0 if tc > dyn.t_trip else 1.0
        return _tsat(pc) + (T_CLAD0 - _tsat(P_NOMINAL)) * (0.25 + 0.75 * pw)

    heatup = np.zeros_like(t)
    if dyn.heat1 > 0:
        heatup += max(T_CLAD0 + dyn.heat1 - base_at(dyn.t_uncover), 0.0) * _bump(t, dyn.t_uncover, w1)
        heatup += max(T_CLAD0 + dyn.heat2 - base_at(dyn.t_second), 0.0) * _bump(t, dyn.t_second, w2)
    if dyn.heat0 > 0:
        heatup += dyn.heat0 * _bump(t, 40.0, 15.0)
    heatup *= post
    clad = base_clad + heatup

    refill = _sigmoid(t, dyn.t_recover, 80.0)
    loop_seal = _bump(t, dyn.t_uncover, w1) * (dyn.heat1 > 0)
    level = 100.0 - dyn.level_drop * _rise(t, 0.0, dyn.t_uncover / 3.0) * (1.0 - 0.7 * refill)
    level = level - 8.0 * loop_seal * dyn.level_drop / 62.0

    offset = HOT_LEG_OFFSET_K * _rise(t, 0.0, 50.0) if dyn.location == "hot" else np.zeros_like(t)
    si_flow_mhsi = np.where(t > dyn.t_si + 20.0, 60.0 * np.sqrt(np.clip((SI_PRESSURE + 1.5 - p) / 12.5, 0.0, 1.0)), 0.0)
    lhsi = 300.0 * np.sqrt(np.clip(1.0 - p / LHSI_PRESSURE, 0.0, 1.0))
    cooling = np.clip((si_flow_mhsi + lhsi / 3.0) / 160.0, 0.0, 1.0)

    t_hot = _tsat(p) + 22.0 * pow_frac + 0.2 * heatup - 60.0 * cooling + offset
    t_cold = _tsat(p) - 18.0 * pow_frac ** 0.5 - 90.0 * cooling + offset
    t_acc = _crossing_time(t, p < ACCUMULATOR_PRESSURE)
    acc_on = t > t_acc

    pump = np.where(tripped, np.exp(-since_trip / 300.0), 1.0)
    # intact loops stagnate after the pump trip and cool through the steam generators
    t_hot2 = 480.0 + 110.0 * np.sqrt(pump)
    # isolated steam generators sit on their relief valves until the primary falls below them
    steam_p = np.where(tripped, np.minimum(8.6, 1.0 + 0.6 * p), 6.7)
    # steam demand follows core power once the turbine trips
    steam_flow = 1000.0 * np.where(tripped, 0.9 * pow_frac, 1.0) * np.clip(steam_p / 6.7, 0.0, 1.3) ** 0.1
    feed_flow = np.where(tripped, 1000.0 * np.clip(1.0 - since_trip / 300.0, 0.0, 1.0) ** 2, 1000.0)
    aux_start = dyn.t_trip + 200.0
    aux_flow = np.where(t > aux_start, 50.0 * _rise(t, aux_start, 30.0) * np.clip(steam_p / 8.6, 0.0, 1.0), 0.0)
    # intact cold legs follow the secondary side, cooled further by auxiliary feed
    t_cold2 = 555.0 - 25.0 * _rise(t, dyn.t_trip, 150.0) - 60.0 * _rise(t, aux_start, 500.0) - 20.0 * np.sqrt(cooling)
    void = np.clip((100.0 - level) / 80.0, 0.0, 1.0) ** 1.5 * (1.0 - 0.5 * refill)
    # gas expansion while the accumulator discharges, bounded by the primary pressure
    acc_p = np.where(acc_on, np.maximum(ACCUMULATOR_PRESSURE * (1.0 + np.maximum(t - t_acc, 0.0) / 150.0) ** -0.8, p + 0.15), ACCUMULATOR_PRESSURE)
    # medium head injection switches to recirculation 1200 s after the SI signal
    recirc = _rise(t, dyn.t_si + 1200.0, 60.0)
    si_flow_mhsi = si_flow_mhsi * (1.0 - 0.5 * recirc)
    # injection tank inventory: integral of the drawn injection flow
    dt = np.diff(t, prepend=t[0])
    tank = np.clip(1.0 - np.cumsum((si_flow_mhsi + lhsi) * dt) / 2.0e5, 0.0, 1.0)

    return {
        "cntrlvar_2": level,
        "cntrlvar_101": 0.5 * (t_hot + t_cold),
        "cntrlvar_913": clad,
        "p_155010000": p,
        "p_260010000": 0.992 * p + 0.02,
        "tempf_138010000": _tsat(p) + 25.0 * pow_frac + 0.6 * heatup + offset,
        "tempf_200010000": t_hot,
        "tempf_250010000": t_cold,
        "tempf_300010000": t_hot2,
        "tempf_400010000": t_hot2 + 0.5,
        "tempf_350010000": t_cold2,
        "tempf_450010000": t_cold2 - 0.4,
        "pmpvel_235": pump,
        "pmpvel_335": pump,
        "rktpow": power,
        "p_540010000": steam_p,
        "mflowj_537000000": steam_flow,
        "mflowj_505010000": feed_flow,
        "mflowj_566010000": aux_flow,
        "mflowj_811010000": lhsi,
        "mflowj_806000000": si_flow_mhsi,
        "voidf_200010000": void,
        "p_810010000": acc_p,
        "voidf_811010000": tank,
    }


def _case_seed(seed: int, location: str, grid_index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), LOCATIONS.index(location), int(grid_index)])


def generate_case(location: str, size_cm: float, seed: int, config: GeneratorConfig | None = None) -> TransientCase:
    """Deterministic transient for one (location, break size, seed)."""
    config = config or GeneratorConfig()
    if location not in LOCATIONS:
        raise ValueError(f"break location must be one of {LOCATIONS}, got {location!r}")
    gi = config.grid.index(size_cm)
    size_cm = float(config.grid.sizes()[gi])
    time_s = config.time_axis()
    clean = _channels(time_s, BreakDynamics.from_break(location, size_cm))
    rng = _case_seed(seed, location, gi)
    signals = {}
    for code in (*TARGETS, *DIRECT_SIGNALS):
        noise = rng.normal(0.0, config.noise * _RANGES[code], size=time_s.shape)
        signals[code] = clean[code] + noise
    return TransientCase(case_id_for(location, size_cm), location, size_cm, config.sample_rate_hz, time_s, signals)


def build_corpus(
    seed: int,
    config: GeneratorConfig | None = None,
    every: int = 1,
    locations=LOCATIONS,
) -> list[TransientCase]:
    """One case per (location, size) on the grid, optionally keeping every n-th size."""
    config = config or GeneratorConfig()
    return [
        generate_case(loc, float(s), seed, config)
        for loc in locations
        for s in config.grid.sizes(every)
    ]
