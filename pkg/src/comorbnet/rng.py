"""Counter-based uniform draws for prefix-stable simulation.

Each draw is a pure function of ``(seed, row, slot)``: the SplitMix64
finaliser (Steele, Lea & Flood 2014) is applied to a 64-bit counter built
from the three. Row ``i`` of a simulated table is therefore identical for
every ``n > i``, and rows can be generated in any order or in parallel.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SLOT_MUL = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, rows: np.ndarray, slot: int) -> np.ndarray:
    """Uniform(0, 1) doubles for ``rows`` in stream ``slot`` under ``seed``."""
    with np.errstate(over="ignore"):
        key = _mix(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64) * _GOLDEN + _GOLDEN)
        key = _mix(key ^ (np.uint64(slot) * _SLOT_MUL + _SLOT_MUL))
        counter = np.asarray(rows, dtype=np.uint64) * _GOLDEN + key
        bits = _mix(_mix(counter))
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def bernoulli(seed: int, rows: np.ndarray, slot: int, p) -> np.ndarray:
    return (uniforms(seed, rows, slot) < p).astype(np.uint8)
