"""Discrete hyperparameter space for the TFT."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

KEYS = ("d_model", "m_H", "lstm_layers", "full_attention")


@dataclass(frozen=True)
class SearchSpace:
    d_model: tuple[int, int] = (8, 128)
    m_H: tuple[int, int] = (1, 16)
    lstm_layers: tuple[int, int] = (1, 16)
    full_attention: tuple[bool, ...] = (False, True)

    def __post_init__(self):
        for name in KEYS[:3]:
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} range {lo}..{hi} is empty or non-positive")
        if not self.full_attention:
            raise ValueError("full_attention needs at least one value")

    def axes(self) -> list[np.ndarray]:
        return [
            np.arange(self.d_model[0], self.d_model[1] + 1),
            np.arange(self.m_H[0], self.m_H[1] + 1),
            np.arange(self.lstm_layers[0], self.lstm_layers[1] + 1),
            np.array(sorted(int(b) for b in self.full_attention)),
        ]

    @property
    def size(self) -> int:
        return int(np.prod([len(a) for a in self.axes()]))

    def enumerate(self) -> np.ndarray:
        """Every point, encoded as float rows in lexicographic order."""
        return np.array(list(product(*self.axes())), dtype=float)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cols = [rng.choice(a, size=n) for a in self.axes()]
        return np.stack(cols, axis=1).astype(float)

    def contains(self, theta: dict) -> bool:
        return (
            self.d_model[0] <= theta["d_model"] <= self.d_model[1]
            and self.m_H[0] <= theta["m_H"] <= self.m_H[1]
            and self.lstm_layers[0] <= theta["lstm_layers"] <= self.lstm_layers[1]
            and bool(theta["full_attention"]) in self.full_attention
        )


def encode(theta: dict) -> np.ndarray:
    return np.array([theta["d_model"], theta["m_H"], theta["lstm_layers"], int(bool(theta["full_attention"]))], dtype=float)


def decode(row) -> dict:
    d, h, l, fa = (int(round(v)) for v in row)
    return {"d_model": d, "m_H": h, "lstm_layers": l, "full_attention": bool(fa)}
