"""Coherent-state quantum key distribution without basis switching.

Linear mode algebra for quadrature bookkeeping, key rates for the
heterodyne (no-switching) and homodyne (switching) receivers, optimised
feed-forward attacks, a Monte Carlo oracle and a discrete BB84 analogue.
"""

from .attacks import AttackKind, AttackOutcome, optimize_attack
from .keyrate import KeyRateReport, Target, Variant, closed_form_rate, secret_key_rate, security_threshold
from .modes import ModeExpression, NoiseSymbol, Quadratures, Workspace, beamsplitter, covariance, variance
from .protocol import ChannelParams, SourceParams, build_protocol

__version__ = "0.1.0"
