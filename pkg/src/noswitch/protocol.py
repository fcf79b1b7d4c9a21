"""Alice's source, the lossy noisy channel and Bob's heterodyne station."""

from __future__ import annotations

from dataclasses import dataclass

from .modes import (
    HEISENBERG_TOL,
    ModeExpression,
    Quadratures,
    Workspace,
    beamsplitter,
    conjugate,
    splice,
    variance,
)


@dataclass(frozen=True)
class SourceParams:
    """Alice's Gaussian-modulated source.

    ``v_a`` is the total transmitted variance and ``v_sqz`` the quantum noise
    of the prepared state (1 for coherent states); the classical modulation
    is ``v_s = v_a - v_sqz``.  Scalars mean both quadratures.  With
    ``squeezed=True`` the bound ``V_sqz(-q) >= 1 / V_A(q)`` is enforced.
    """

    v_a: Quadratures | float
    v_sqz: Quadratures | float = 1.0
    squeezed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "v_a", Quadratures.coerce(self.v_a))
        object.__setattr__(self, "v_sqz", Quadratures.coerce(self.v_sqz))
        for q in ("+", "-"):
            if self.v_sqz.of(q) <= 0:
                raise ValueError("V_sqz must be positive")
            if self.v_a.of(q) < self.v_sqz.of(q):
                raise ValueError(f"V_A{q} = {self.v_a.of(q)} < V_sqz{q} = {self.v_sqz.of(q)}: negative modulation")
        if self.squeezed:
            for q in ("+", "-"):
                bound = 1.0 / self.v_a.of(conjugate(q))
                if self.v_sqz.of(q) < bound * (1 - HEISENBERG_TOL):
                    raise ValueError(f"V_sqz{q} = {self.v_sqz.of(q)} below the squeezing limit 1/V_A = {bound}")

    @classmethod
    def coherent(cls, v_a) -> "SourceParams":
        return cls(v_a, 1.0)

    @classmethod
    def max_squeezed(cls, v_a: float, quad="+") -> "SourceParams":
        """All modulation in ``quad``, squeezed to the limit ``1/V_A``; the
        conjugate quadrature is anti-squeezed to ``V_A`` and carries no signal."""
        sq = (1.0 / v_a, v_a) if quad == "+" else (v_a, 1.0 / v_a)
        return cls(v_a, sq, squeezed=True)

    @property
    def v_s(self) -> Quadratures:
        return Quadratures(self.v_a.plus - self.v_sqz.plus, self.v_a.minus - self.v_sqz.minus)


@dataclass(frozen=True)
class ChannelParams:
    """Transmission ``eta`` and per-quadrature channel noise ``v_n``.

    ``v_n < 1`` cannot come from a physical noise mode; pass
    ``nonphysical=True`` to explore it anyway.
    """

    eta: float
    v_n: Quadratures | float = 1.0
    nonphysical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "v_n", Quadratures.coerce(self.v_n))
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if min(self.v_n) < 0:
            raise ValueError("V_N must be nonnegative")
        if not self.nonphysical and min(self.v_n) < 1.0:
            raise ValueError(f"V_N = {tuple(self.v_n)} below vacuum; set nonphysical=True to allow")


def alice_state(src: SourceParams, ws: Workspace) -> ModeExpression:
    """``X_A = S + N_A`` with ``N_A`` of variance ``V_sqz``."""
    n_a = ws.mode("N_A", src.v_sqz.plus, src.v_sqz.minus)
    return ModeExpression.of_signal() + ModeExpression.of_symbol(n_a)


def transmit(state: ModeExpression, ch: ChannelParams, ws: Workspace) -> ModeExpression:
    """``X_B' = sqrt(eta) X + sqrt(1 - eta) X_N`` with a fresh noise mode."""
    v_n = ch.v_n
    if v_n.plus * v_n.minus >= 1 - HEISENBERG_TOL:
        x_n = ws.mode("X_N", v_n.plus, v_n.minus)
    else:
        x_n = ws.noise("X_N", v_n.plus, v_n.minus)
    out, _ = beamsplitter(state, ModeExpression.of_symbol(x_n), ch.eta)
    return out


def bob_heterodyne(state: ModeExpression, ws: Workspace, name: str = "N_B") -> tuple[ModeExpression, ModeExpression]:
    """Split ``state`` against fresh vacuum on a 50/50 beamsplitter.

    Output 1 is read in the ``+`` quadrature and output 2 in ``-``; see
    :func:`heterodyne_record`.
    """
    n_b = ws.vacuum(name)
    return beamsplitter(state, ModeExpression.of_symbol(n_b), 0.5)


def heterodyne_record(out1: ModeExpression, out2: ModeExpression) -> ModeExpression:
    """Combine the two homodyne readings into one two-quadrature record."""
    return splice(out1, out2)


def heterodyne(state: ModeExpression, ws: Workspace, name: str = "N_B") -> ModeExpression:
    return heterodyne_record(*bob_heterodyne(state, ws, name))


@dataclass(frozen=True)
class ProtocolModes:
    """All expressions of one run of the protocol, sharing a workspace."""

    ws: Workspace
    src: SourceParams
    ch: ChannelParams
    alice: ModeExpression
    arriving: ModeExpression  # X_B', before Bob's beamsplitter
    bob: ModeExpression  # measured record (heterodyne, or X_B' when switching)
    switching: bool = False

    def variance(self, expr: ModeExpression, quad) -> float:
        return variance(expr, quad, self.src.v_s)


def build_protocol(src: SourceParams, ch: ChannelParams, switching: bool = False) -> ProtocolModes:
    """Build source, channel and detection; ``switching`` reads ``X_B'`` directly."""
    ws = Workspace()
    x_a = alice_state(src, ws)
    x_b_prime = transmit(x_a, ch, ws)
    bob = x_b_prime if switching else heterodyne(x_b_prime, ws)
    return ProtocolModes(ws, src, ch, x_a, x_b_prime, bob, switching)
