"""Sampling oracle for the mode algebra.

Each symbol in a :class:`~noswitch.modes.Workspace` is drawn i.i.d. normal
with its declared variance and every requested expression is evaluated on
the draws.  Estimators return a point value with a standard error so that
analytic results can be checked to a fixed number of standard errors.

Sampling is split into fixed-size chunks, each seeded from ``(seed...,
chunk_index)`` through :class:`numpy.random.SeedSequence`, so output does not
depend on how many threads fill the chunks.  Streams are reproducible within
this implementation only (NumPy's PCG64 + ziggurat normals).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .modes import QUADS, ModeExpression, NoiseSymbol, Quad, Quadratures, Workspace

CHUNK = 1 << 16
SIGNAL = "S"


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    se: float
    n: int
    flag: str = ""

    def z(self, reference: float) -> float:
        """Distance from ``reference`` in standard errors."""
        diff = abs(self.value - reference)
        if self.se == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.se


@dataclass
class SampleBatch:
    """Evaluated records, ``records[name][quad]`` of shape ``(n,)``.

    ``records["S"]`` always holds the realised signal.  ``draws`` (per
    quadrature, shape ``(n, len(symbols))``) is kept only on request.
    """

    symbols: tuple[NoiseSymbol, ...]
    records: dict[str, dict[Quad, np.ndarray]]
    n: int
    seed: tuple[int, ...]
    draws: dict[Quad, np.ndarray] | None = None

    def record(self, name: str, quad: Quad) -> np.ndarray:
        try:
            return self.records[name][quad]
        except KeyError:
            raise KeyError(f"no record {name!r} in batch") from None


def seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def chunk_rng(seed, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([*seed_tuple(seed), chunk]))


def sample(
    ws: Workspace,
    expressions: Mapping[str, ModeExpression],
    n: int,
    seed,
    v_s: Quadratures | float,
    keep_draws: bool = False,
    workers: int | None = None,
) -> SampleBatch:
    """Draw ``n`` joint realisations of the workspace and evaluate ``expressions``."""
    if n < 2:
        raise ValueError("need at least 2 samples")
    v_s = Quadratures.coerce(v_s)
    if min(v_s) < 0:
        raise ValueError("signal variance must be nonnegative")
    symbols = ws.symbols
    index = {s: i for i, s in enumerate(symbols)}
    for name, expr in expressions.items():
        if name == SIGNAL:
            raise ValueError(f"record name {SIGNAL!r} is reserved for the signal")
        for sym in expr.symbols():
            if sym not in ws:
                raise KeyError(f"expression {name!r} uses undeclared symbol {sym.id}")

    k = len(symbols)
    names = list(expressions)
    # coefficient matrices: rows = symbols + signal, columns = expressions
    coef = {}
    for q in QUADS:
        m = np.zeros((k + 1, len(names)))
        for j, name in enumerate(names):
            e = expressions[name]
            for sym, c in e.coefficients(q).items():
                m[index[sym], j] = c
            m[k, j] = e.signal.of(q)
        coef[q] = m
    scale = {q: np.sqrt([*(s.variance(q) for s in symbols), v_s.of(q)]) for q in QUADS}

    out = {q: np.empty((n, len(names))) for q in QUADS}
    sig = {q: np.empty(n) for q in QUADS}
    draws = {q: np.empty((n, k)) for q in QUADS} if keep_draws else None
    bounds = [(start, min(start + CHUNK, n)) for start in range(0, n, CHUNK)]

    def fill(idx):
        lo, hi = bounds[idx]
        z = chunk_rng(seed, idx).standard_normal((2, hi - lo, k + 1))
        for qi, q in enumerate(QUADS):
            x = z[qi] * scale[q]
            out[q][lo:hi] = x @ coef[q]
            sig[q][lo:hi] = x[:, k]
            if draws is not None:
                draws[q][lo:hi] = x[:, :k]

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, range(len(bounds))))
    else:
        for i in range(len(bounds)):
            fill(i)

    records = {name: {q: out[q][:, j] for q in QUADS} for j, name in enumerate(names)}
    records[SIGNAL] = sig
    return SampleBatch(symbols, records, n, seed_tuple(seed), draws)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n))


def estimate_variance(batch: SampleBatch, name: str, quad: Quad) -> EstimateWithError:
    """Second moment about the known zero mean."""
    x = batch.record(name, quad)
    v, se = _mean_se(x * x)
    return EstimateWithError(v, se, batch.n)


def estimate_covariance(batch: SampleBatch, a: str, b: str, quad: Quad) -> EstimateWithError:
    v, se = _mean_se(batch.record(a, quad) * batch.record(b, quad))
    return EstimateWithError(v, se, batch.n)


def _regress(batch: SampleBatch, target: str, conditioners: Sequence[str], quad: Quad):
    y = batch.record(target, quad)
    x = np.column_stack([batch.record(c, quad) for c in conditioners])
    gram = x.T @ x / batch.n
    rhs = x.T @ y / batch.n
    flag = ""
    if np.linalg.cond(gram) > 1e10:
        flag = "degenerate"
        gains = np.linalg.lstsq(gram, rhs, rcond=1e-10)[0]
    else:
        gains = np.linalg.solve(gram, rhs)
    return y - x @ gains, gains, flag


def estimate_conditional_variance(
    batch: SampleBatch, target: str, conditioners: str | Sequence[str], quad: Quad
) -> EstimateWithError:
    """Least-squares residual variance of ``target`` on one or two records."""
    if isinstance(conditioners, str):
        conditioners = [conditioners]
    if not 1 <= len(conditioners) <= 2:
        raise ValueError("one or two conditioners")
    resid, _, flag = _regress(batch, target, conditioners, quad)
    v, se = _mean_se(resid * resid)
    return EstimateWithError(v, se, batch.n, flag)


def estimate_gain(batch: SampleBatch, target: str, conditioner: str, quad: Quad) -> EstimateWithError:
    """Optimal single-record gain ``<xy>/<x^2>``, with a delta-method error."""
    x, y = batch.record(conditioner, quad), batch.record(target, quad)
    vx = float(np.mean(x * x))
    g = float(np.mean(x * y)) / vx
    _, se = _mean_se((x * y - g * x * x) / vx)
    return EstimateWithError(g, se, batch.n)


def estimate_mutual_information(batch: SampleBatch, a: str, b: str, quad: Quad) -> EstimateWithError:
    """Gaussian mutual information ``0.5 log2(V_b / V_b|a)`` in bits.

    The standard error comes from the influence functions of the two log
    second moments.
    """
    y = batch.record(b, quad)
    resid, _, flag = _regress(batch, b, [a], quad)
    v_b = float(np.mean(y * y))
    v_r = float(np.mean(resid * resid))
    if v_b <= 0 or v_r <= 0:
        return EstimateWithError(math.nan, math.inf, batch.n, "nonpositive variance")
    mi = 0.5 * math.log2(v_b / v_r)
    influence = (y * y / v_b - resid * resid / v_r) / (2 * math.log(2))
    _, se = _mean_se(influence)
    return EstimateWithError(mi, se, batch.n, flag)
