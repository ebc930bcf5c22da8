import numpy as np
import pytest

from locatft.data.sample import TimeSeriesSample
from locatft.tft import TftConfig


def make_samples(cfg: TftConfig, n: int, seed: int = 0) -> list[TimeSeriesSample]:
    rng = np.random.default_rng(seed)
    k1 = cfg.history_steps + 1
    out = []
    for i in range(n):
        out.append(
            TimeSeriesSample(
                case_id=f"rand_{i}",
                static=rng.random(cfg.n_static),
                y_hist=rng.normal(size=k1),
                z_hist=rng.normal(size=(k1, cfg.n_observed)),
                x_all=rng.normal(size=(cfg.n_positions, cfg.n_known)),
                y_future=rng.normal(size=cfg.horizon),
                t=cfg.history_steps,
            )
        )
    return out


@pytest.fixture
def tiny_cfg():
    return TftConfig(d_model=4, n_heads=2, lstm_layers=1, history_steps=4, horizon=3,
                     n_static=3, n_observed=2, n_known=1)


# -- acceptance report -------------------------------------------------------

def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture
def record(request):
    """record(n, title, passed, detail) -> passed; one summary line per criterion."""

    def _record(n, title, passed, detail=""):
        line = f"criterion {n} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        request.config._acceptance_lines[n] = line
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
