"""BB84 with and without basis switching.

In the no-switching variant Bob feeds every photon into a universal 1 -> 2
cloner and measures one clone in each basis.  Each clone is the input state
with weight 5/6 mixed with its orthogonal complement with weight 1/6, so a
clone read in the input's own basis is right with probability 5/6 and a
clone read in the conjugate basis gives a uniform bit.  The two clones'
errors are drawn independently; only these marginals enter the rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .montecarlo import CHUNK, chunk_rng

RECT, DIAG = 0, 1
DEFAULT_SEED = 84


class Polarization(enum.Enum):
    H = (RECT, 0)
    V = (RECT, 1)
    D = (DIAG, 0)
    A = (DIAG, 1)

    @property
    def basis(self) -> int:
        return self.value[0]

    @property
    def bit(self) -> int:
        return self.value[1]


@dataclass(frozen=True)
class CloneStatistics:
    fidelity: float = 5 / 6
    error_probability: float = 1 / 6


CLONE = CloneStatistics()


def clone_bit_probability(pol: Polarization, basis: int) -> float:
    """Probability that a clone of ``pol`` read in ``basis`` gives bit 0."""
    if basis == pol.basis:
        return CLONE.fidelity if pol.bit == 0 else CLONE.error_probability
    return 0.5


def _clone_bits(bases: np.ndarray, bits: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised clone readout: returns (rectilinear bits, diagonal bits)."""
    out = []
    for basis in (RECT, DIAG):
        u = rng.random(bits.shape)
        same = bases == basis
        wrong = u < CLONE.error_probability
        random_bit = (u < 0.5).astype(np.int8)
        out.append(np.where(same, bits ^ wrong, random_bit).astype(np.int8))
    return out[0], out[1]


def clone_measure(pol: Polarization, rng: np.random.Generator) -> tuple[int, int]:
    """Clone ``pol`` and read one clone in each basis."""
    rect, diag = _clone_bits(np.array([pol.basis]), np.array([pol.bit], dtype=np.int8), rng)
    return int(rect[0]), int(diag[0])


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc_information_rate(p_e: float) -> float:
    """Shannon rate of a binary symmetric channel with error ``p_e``."""
    if not 0.0 <= p_e <= 0.5:
        raise ValueError(f"error probability must lie in [0, 0.5], got {p_e}")
    return 1.0 - binary_entropy(p_e)


@dataclass(frozen=True)
class VariantResult:
    variant: str
    trials: int
    sift_fraction: float
    error_rate: float
    bits_per_signal: float


@dataclass(frozen=True)
class ComparisonReport:
    switching: VariantResult
    no_switching: VariantResult

    @property
    def verdict(self) -> str:
        if self.switching.bits_per_signal > self.no_switching.bits_per_signal:
            return "switching wins"
        if self.switching.bits_per_signal < self.no_switching.bits_per_signal:
            return "no-switching wins"
        return "tie"

    def rows(self) -> list[VariantResult]:
        return [self.switching, self.no_switching]


def _effective_rate(kept: int, errors: int, trials: int) -> tuple[float, float, float]:
    sift = kept / trials
    if kept == 0:
        return sift, math.nan, 0.0
    err = errors / kept
    # an error rate above 1/2 is as informative as its complement
    return sift, err, sift * bsc_information_rate(min(err, 1.0 - err))


def compare_protocols(num_trials: int, seed=DEFAULT_SEED, channel_error: float = 0.0) -> ComparisonReport:
    """Simulate standard (switching) BB84 and the cloner variant side by side.

    ``channel_error`` flips Alice's bit in her own basis before Bob's station.
    Trials run in chunks seeded from ``(seed, chunk)``.
    """
    if num_trials < 1:
        raise ValueError("need at least one trial")
    if not 0.0 <= channel_error <= 1.0:
        raise ValueError("channel_error must be a probability")
    kept_sw = err_sw = err_ns = 0
    for idx, start in enumerate(range(0, num_trials, CHUNK)):
        m = min(CHUNK, num_trials - start)
        rng = chunk_rng(seed, idx)
        a_basis = rng.integers(0, 2, m, dtype=np.int8)
        a_bit = rng.integers(0, 2, m, dtype=np.int8)
        flips = (rng.random(m) < channel_error).astype(np.int8)
        sent_bit = a_bit ^ flips

        # switching: Bob guesses a basis, wrong guesses give a uniform bit
        b_basis = rng.integers(0, 2, m, dtype=np.int8)
        b_bit = np.where(b_basis == a_basis, sent_bit, rng.integers(0, 2, m, dtype=np.int8))
        match = b_basis == a_basis
        kept_sw += int(match.sum())
        err_sw += int((b_bit[match] != a_bit[match]).sum())

        # no switching: read the clone measured in Alice's basis, keep everything
        rect, diag = _clone_bits(a_basis, sent_bit, rng)
        ns_bit = np.where(a_basis == RECT, rect, diag)
        err_ns += int((ns_bit != a_bit).sum())

    sw = VariantResult("switching", num_trials, *_effective_rate(kept_sw, err_sw, num_trials))
    ns = VariantResult("no-switching", num_trials, *_effective_rate(num_trials, err_ns, num_trials))
    return ComparisonReport(sw, ns)
