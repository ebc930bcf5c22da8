from __future__ import annotations

from dataclasses import asdict, dataclass, field

DEFAULT_QUANTILES = (0.1, 0.5, 0.9)


@dataclass(frozen=True)
class TftConfig:
    """Architecture hyperparameters and input dimensions.

    ``history_steps`` is k (the window holds k+1 past points), ``horizon`` is
    the number of future steps predicted jointly. ``n_static == 0`` builds a
    model without the static covariate path (all contexts are zero).
    """

    d_model: int = 16
    n_heads: int = 2
    lstm_layers: int = 1
    full_attention: bool = False
    history_steps: int = 20
    horizon: int = 190
    n_static: int = 3
    n_observed: int = 13
    n_known: int = 1
    quantiles: tuple[float, ...] = field(default=DEFAULT_QUANTILES)

    def __post_init__(self):
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))
        for name in ("d_model", "n_heads", "lstm_layers", "history_steps", "horizon", "n_known"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_static < 0 or self.n_observed < 0:
            raise ValueError("covariate counts must be non-negative")
        qs = self.quantiles
        if not qs or any(not 0.0 < q < 1.0 for q in qs) or any(b <= a for a, b in zip(qs, qs[1:])):
            raise ValueError(f"quantiles must be strictly increasing in (0, 1), got {qs}")

    @property
    def n_positions(self) -> int:
        return self.history_steps + self.horizon + 1

    @property
    def n_hist_inputs(self) -> int:
        # target + observed + known covariates at each past step
        return 1 + self.n_observed + self.n_known

    def median_index(self) -> int:
        try:
            return self.quantiles.index(0.5)
        except ValueError:
            raise ValueError("quantile set has no median") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quantiles"] = list(self.quantiles)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TftConfig":
        d = dict(d)
        d["quantiles"] = tuple(d.get("quantiles", DEFAULT_QUANTILES))
        return cls(**d)
