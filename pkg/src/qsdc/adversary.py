"""Eavesdropping strategies applied to the B particle while it is in transit.

Two families are modelled:

* intercept-resend: Eve measures B and forwards a substitute.  After a Z
  measurement she forwards ``|+>`` for outcome 0 and ``|->`` for outcome 1;
  after an X measurement she forwards the eigenstate she found.
* collective: Eve entangles a fresh ancilla with B through a CNOT (B is the
  control) and measures the ancilla in the X basis once the protocol has run.
  The ``pre_hadamard`` variant performs the CNOT in the X frame instead,
  i.e. H on B, CNOT, H on B.

A session-level :class:`AttackModel` is resolved into one concrete
:class:`AttackAction` per episode.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import qcore
from .qcore import Basis, QuantumState


class BasisPolicy(enum.Enum):
    ALWAYS_Z = "always-z"
    ALWAYS_X = "always-x"
    UNIFORM_RANDOM = "uniform-random"


class AttackKind(enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept-resend"
    COLLECTIVE_CNOT = "collective-cnot"


class AttackAction(enum.Enum):
    """What Eve actually does to one particular B particle."""

    NONE = "none"
    INTERCEPT_Z = "ir-z"
    INTERCEPT_X = "ir-x"
    COLLECTIVE = "collective"
    COLLECTIVE_H = "collective-h"

    @property
    def intercepts(self) -> bool:
        return self in (AttackAction.INTERCEPT_Z, AttackAction.INTERCEPT_X)

    @property
    def entangles(self) -> bool:
        return self in (AttackAction.COLLECTIVE, AttackAction.COLLECTIVE_H)

    @property
    def basis(self) -> Optional[Basis]:
        return {AttackAction.INTERCEPT_Z: Basis.Z, AttackAction.INTERCEPT_X: Basis.X}.get(self)


@dataclass(frozen=True)
class AttackModel:
    """Eve's strategy for a whole session.

    ``probability`` is the per-episode chance that Eve touches the particle
    at all; 1.0 reproduces the all-particles attacks analysed for the
    protocol, lower values give partial-interception sweeps.
    """

    kind: AttackKind = AttackKind.NONE
    policy: Optional[BasisPolicy] = None
    pre_hadamard: bool = False
    probability: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"attack probability must be in [0, 1], got {self.probability}")
        if (self.kind is AttackKind.INTERCEPT_RESEND) != (self.policy is not None):
            raise ValueError("a basis policy is required for, and only for, intercept-resend")
        if self.pre_hadamard and self.kind is not AttackKind.COLLECTIVE_CNOT:
            raise ValueError("pre_hadamard only applies to the collective attack")

    @classmethod
    def none(cls) -> "AttackModel":
        return cls()

    @classmethod
    def intercept_resend(cls, policy: BasisPolicy, probability: float = 1.0) -> "AttackModel":
        return cls(AttackKind.INTERCEPT_RESEND, policy=policy, probability=probability)

    @classmethod
    def collective(cls, pre_hadamard: bool = False, probability: float = 1.0) -> "AttackModel":
        return cls(AttackKind.COLLECTIVE_CNOT, pre_hadamard=pre_hadamard, probability=probability)

    @property
    def is_none(self) -> bool:
        return self.kind is AttackKind.NONE

    def resolve(self, u_act, u_basis):
        """Map two uniforms per episode to concrete actions.

        Accepts scalars or equal-length arrays; returns an ``AttackAction``
        or an object array of them.
        """
        u_act = np.asarray(u_act)
        u_basis = np.asarray(u_basis)
        acts = u_act < self.probability
        if self.kind is AttackKind.NONE:
            chosen = np.full(u_act.shape, AttackAction.NONE, dtype=object)
        elif self.kind is AttackKind.COLLECTIVE_CNOT:
            action = AttackAction.COLLECTIVE_H if self.pre_hadamard else AttackAction.COLLECTIVE
            chosen = np.where(acts, action, AttackAction.NONE)
        else:
            if self.policy is BasisPolicy.ALWAYS_Z:
                use_x = np.zeros(u_basis.shape, dtype=bool)
            elif self.policy is BasisPolicy.ALWAYS_X:
                use_x = np.ones(u_basis.shape, dtype=bool)
            else:
                use_x = u_basis < 0.5
            picked = np.where(use_x, AttackAction.INTERCEPT_X, AttackAction.INTERCEPT_Z)
            chosen = np.where(acts, picked, AttackAction.NONE)
        chosen = np.asarray(chosen, dtype=object)
        return chosen.item() if chosen.ndim == 0 else chosen

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "policy": None if self.policy is None else self.policy.value,
            "pre_hadamard": self.pre_hadamard,
            "probability": self.probability,
        }


@dataclass(frozen=True)
class EveRecord:
    """What Eve learned on one episode.  ``acted`` is False when she let it pass."""

    acted: bool
    intercept_basis: Optional[Basis] = None
    intercept_bit: Optional[int] = None
    ancilla_x_bit: Optional[int] = None

    @property
    def symbol(self) -> Optional[int]:
        """Eve's single classical bit for this episode, if she has one."""
        if self.ancilla_x_bit is not None:
            return self.ancilla_x_bit
        return self.intercept_bit

    def to_dict(self) -> dict:
        return {
            "acted": self.acted,
            "intercept_basis": None if self.intercept_basis is None else self.intercept_basis.value,
            "intercept_bit": self.intercept_bit,
            "ancilla_x_bit": self.ancilla_x_bit,
        }


def resend_state(basis: Basis, bit) -> QuantumState:
    """Particle Eve forwards after measuring ``bit`` in ``basis``.

    Both rules send an X eigenstate: Z outcome 0/1 maps to ``|+>``/``|->``,
    and an X outcome is forwarded unchanged.
    """
    return qcore.x_eigenstate(bit)


def substitute(state: QuantumState, qubit_b: int, basis: Basis, bit) -> QuantumState:
    """Swap a collapsed B for Eve's resent particle."""
    rest = qcore.split_off(state, qubit_b, basis, bit)
    return qcore.insert_qubit(rest, qubit_b, resend_state(basis, bit))


def attack_intercept_resend(state: QuantumState, qubit_b: int, basis: Basis, rng) -> tuple[QuantumState, EveRecord]:
    outcome, collapsed = qcore.measure(state, qubit_b, basis, rng)
    forwarded = substitute(collapsed, qubit_b, basis, outcome.bit)
    return forwarded, EveRecord(True, intercept_basis=basis, intercept_bit=outcome.bit)


def attack_collective_cnot(state: QuantumState, qubit_b: int, pre_hadamard: bool = False) -> tuple[QuantumState, EveRecord]:
    """Append Eve's ``|0>`` ancilla as the last qubit and entangle it with B."""
    if state.num_qubits + 1 > qcore.MAX_QUBITS:
        raise ValueError("no room for Eve's ancilla")
    out = qcore.tensor(state, qcore.basis_state(1, "0"))
    ancilla = out.num_qubits - 1
    if pre_hadamard:
        out = qcore.apply_hadamard(out, qubit_b)
    out = qcore.apply_cnot(out, qubit_b, ancilla)
    if pre_hadamard:
        out = qcore.apply_hadamard(out, qubit_b)
    # the ancilla bit is filled in by eve_final_measure
    return out, EveRecord(True)


def eve_final_measure(state: QuantumState, ancilla: int, rng) -> tuple[EveRecord, QuantumState]:
    outcome, post = qcore.measure(state, ancilla, Basis.X, rng)
    return EveRecord(True, ancilla_x_bit=outcome.bit), post
