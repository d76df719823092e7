"""Simulator for EPR-pair quantum secure direct communication."""
from .adversary import AttackAction, AttackModel, BasisPolicy, EveRecord
from .analysis import ExactDistribution, build_report, exact_distribution
from .protocol import Episode, EpisodeRecord, ProtocolParams, SessionResult, recover_bit, run_session
from .qcore import Basis, QuantumState

__all__ = [
    "AttackAction",
    "AttackModel",
    "Basis",
    "BasisPolicy",
    "Episode",
    "EpisodeRecord",
    "EveRecord",
    "ExactDistribution",
    "ProtocolParams",
    "QuantumState",
    "SessionResult",
    "build_report",
    "exact_distribution",
    "recover_bit",
    "run_session",
]
