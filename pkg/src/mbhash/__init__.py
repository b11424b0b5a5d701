"""Simulator and bound engine for noisy measurement-based entanglement hashing."""

from .bell import (
    ALL_LABELS,
    F_CRIT,
    BellDiagonal,
    BellLabel,
    InvalidSymbolError,
    bilateral_cnot,
    depolarize,
    fidelity_to_q,
    q_to_fidelity,
    select_bit,
    twirl_to_werner,
    werner,
    werner_entropy,
)
from .bounds import BoundInputs, BoundReport, diamond_bound_log, iid_bound
from .graph import GraphDiagonal, GraphLabel, TwoColorableGraph, check_two_colorable
from .hashing import Outcome, ProtocolConfig, monte_carlo, run_protocol
from .multiparty import MultiConfig, monte_carlo_multi, run_multiparty
from .regimes import Q_CRIT, Regime, classify
from ._validation import ParameterError

__version__ = "0.1.0"
