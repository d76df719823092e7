"""Session state machine for EPR-pair direct communication.

One *episode* is the full life of a single EPR pair: Bob's optional
Hadamard, Alice's encoding of a check or message bit onto an ancilla ``a``
that she entangles with her half ``A`` of the pair, and the final
measurements (``a`` and ``A`` in Z by Alice, ``B`` in X by Bob).  Pairs never
interact, so every episode is simulated as its own 3-4 qubit state with
qubit order (a, A, B, E).

Randomness is split per session into a planning stream and a per-episode
table of uniforms (row ``i - 1`` belongs to episode ``i``).  Each episode
consumes its own row in a fixed order, so results do not depend on how
episodes are grouped or scheduled.
"""
from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import qcore
from .adversary import (
    AttackAction,
    AttackModel,
    EveRecord,
    attack_collective_cnot,
    attack_intercept_resend,
    eve_final_measure,
)
from .qcore import Basis, QuantumState

# u_act, u_basis, then at most four measurements per episode
EPISODE_DRAWS = 6

QUBIT_A, QUBIT_B = 0, 1  # before Alice prepends her ancilla


class ProtocolError(RuntimeError):
    pass


class Role(enum.Enum):
    CHECK = "check"
    MESSAGE = "message"


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _ceil(x: float) -> int:
    # guards against 0.1 * 30 == 3.0000000000000004
    return math.ceil(round(x, 9))


@dataclass(frozen=True)
class ProtocolParams:
    n_pairs: int
    message: str = ""
    hadamard_fraction: float = 0.5
    check_fraction: float = 0.5
    abort_threshold: float = 0.0
    master_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n_pairs, (int, np.integer)) or self.n_pairs < 1:
            raise ValueError(f"n_pairs must be a positive integer, got {self.n_pairs!r}")
        for name in ("hadamard_fraction", "check_fraction"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")
        if not 0.0 <= self.abort_threshold <= 1.0:
            raise ValueError(f"abort_threshold must be in [0, 1], got {self.abort_threshold}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if set(self.message) - {"0", "1"}:
            raise ValueError("message must be a string of '0'/'1' characters")
        if len(self.message) > self.capacity:
            raise ValueError(
                f"message of {len(self.message)} bits does not fit the {self.capacity} "
                f"message pairs available with n_pairs={self.n_pairs}"
            )

    @property
    def n_check(self) -> int:
        return _ceil(self.n_pairs * self.check_fraction)

    @property
    def n_hadamard(self) -> int:
        return _round_half_up(self.n_pairs * self.hadamard_fraction)

    @property
    def capacity(self) -> int:
        """Number of message-carrying pairs."""
        return self.n_pairs - self.n_check

    @property
    def throughput(self) -> float:
        return self.capacity / self.n_pairs

    def to_dict(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "message_bits": len(self.message),
            "hadamard_fraction": self.hadamard_fraction,
            "check_fraction": self.check_fraction,
            "abort_threshold": self.abort_threshold,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True)
class Episode:
    index: int  # 1-based pair position
    hadamard_applied: bool
    role: Role
    alice_bit: int


@dataclass(frozen=True)
class EpisodeRecord:
    episode: Episode
    alice_a_bit: int
    alice_A_bit: int
    bob_x_bit: int
    eve_record: Optional[EveRecord] = None
    action: AttackAction = AttackAction.NONE


# -- transcript --------------------------------------------------------------


@dataclass(frozen=True)
class BobHadamardPositions:
    positions: tuple
    step = 2
    actor = "Bob"


@dataclass(frozen=True)
class AliceCheckPositions:
    positions: tuple
    step = 8
    actor = "Alice"


@dataclass(frozen=True)
class BobCheckResults:
    results: tuple  # (index, x_bit)
    step = 8
    actor = "Bob"


@dataclass(frozen=True)
class AliceAbortDecision:
    abort: bool
    error_rate: float
    step = 8
    actor = "Alice"


@dataclass(frozen=True)
class AliceDResults:
    results: tuple  # (index, a_bit)
    step = 9
    actor = "Alice"


_ENTRY_ORDER = (BobHadamardPositions, AliceCheckPositions, BobCheckResults, AliceAbortDecision, AliceDResults)


def _payload(entry) -> dict:
    if isinstance(entry, (BobHadamardPositions, AliceCheckPositions)):
        return {"kind": type(entry).__name__, "positions": list(entry.positions)}
    if isinstance(entry, (BobCheckResults, AliceDResults)):
        return {"kind": type(entry).__name__, "results": [list(r) for r in entry.results]}
    return {"kind": type(entry).__name__, "abort": entry.abort, "error_rate": entry.error_rate}


@dataclass
class Transcript:
    """Public classical announcements, in the only order the protocol allows."""

    entries: list = field(default_factory=list)

    def append(self, entry) -> None:
        position = len(self.entries)
        if position >= len(_ENTRY_ORDER) or not isinstance(entry, _ENTRY_ORDER[position]):
            expected = _ENTRY_ORDER[position].__name__ if position < len(_ENTRY_ORDER) else "nothing"
            raise ProtocolError(f"announcement {type(entry).__name__} out of order; expected {expected}")
        if isinstance(entry, AliceDResults) and self.entries[-1].abort:
            raise ProtocolError("D-sequence results may not be announced on an aborted session")
        self.entries.append(entry)

    def kinds(self) -> list[str]:
        return [type(e).__name__ for e in self.entries]

    def to_records(self) -> list[dict]:
        return [{"step": e.step, "actor": e.actor, "payload": _payload(e)} for e in self.entries]


@dataclass(frozen=True)
class SessionResult:
    aborted: bool
    check_error_rate: float
    recovered_message: Optional[str]
    transcript: Transcript
    records: list
    params: ProtocolParams
    attack: AttackModel


# -- randomness --------------------------------------------------------------


class UniformTape:
    """Replays pre-drawn uniforms column by column as an ``rng``.

    ``table`` has shape ``(..., k)``; each ``random()`` call hands out the
    next column, one value per row.
    """

    def __init__(self, table, start: int = 0):
        self._table = np.asarray(table, dtype=float)
        self._col = start

    def random(self, size=None):
        if self._col >= self._table.shape[-1]:
            raise ProtocolError("episode random stream exhausted")
        col = self._table[..., self._col]
        self._col += 1
        return float(col) if col.ndim == 0 else col


def session_streams(master_seed: int, n_pairs: int) -> tuple[np.random.Generator, np.ndarray]:
    """Planning generator plus the ``(n_pairs, EPISODE_DRAWS)`` uniform table."""
    plan_seq, episode_seq = np.random.SeedSequence(master_seed).spawn(2)
    uniforms = np.random.default_rng(episode_seq).random((n_pairs, EPISODE_DRAWS))
    return np.random.default_rng(plan_seq), uniforms


def episode_rng(master_seed: int, index: int) -> UniformTape:
    """The stream a session hands to episode ``index`` (1-based)."""
    _, uniforms = session_streams(master_seed, index)
    return UniformTape(uniforms[index - 1])


# -- episode pipeline ----------------------------------------------------------


def hadamard_layer(state: QuantumState, applied: bool) -> QuantumState:
    """Bob's Hadamard on B followed by Alice's on A, for flagged pairs."""
    if not applied:
        return state
    state = qcore.apply_hadamard(state, QUBIT_B)
    return qcore.apply_hadamard(state, QUBIT_A)


def alice_encode(state: QuantumState, alice_bit: int) -> QuantumState:
    """Prepend the ``|+>``/``|->`` ancilla, CNOT it onto A, then Hadamard it.

    Input qubits (A, B[, E]) become (a, A, B[, E]).
    """
    state = qcore.tensor(qcore.encode_message_qubit(alice_bit), state)
    state = qcore.apply_cnot(state, 0, 1)
    return qcore.apply_hadamard(state, 0)


def transmit(action: AttackAction, rng, batch: Optional[int] = None) -> tuple[QuantumState, Optional[np.ndarray]]:
    """Fresh EPR pair(s) after Eve has handled B in transit."""
    state = qcore.make_epr_pair()
    if batch is not None:
        state = qcore.broadcast(state, batch)
    intercept_bit = None
    if action.intercepts:
        state, rec = attack_intercept_resend(state, QUBIT_B, action.basis, rng)
        intercept_bit = rec.intercept_bit
    elif action.entangles:
        state, _ = attack_collective_cnot(state, QUBIT_B, pre_hadamard=action is AttackAction.COLLECTIVE_H)
    return state, intercept_bit


def simulate(alice_bit: int, hadamard: bool, action: AttackAction, rng, batch: Optional[int] = None) -> dict:
    """Run steps (1)-(7) for one configuration.

    With ``batch`` set, ``batch`` independent copies run side by side and
    every value in the returned dict is an int array of that length.  Keys:
    ``a``, ``A``, ``B`` and, when Eve acted, ``eve`` (her intercept bit or
    ancilla X bit).
    """
    state, intercept_bit = transmit(action, rng, batch)
    state = hadamard_layer(state, hadamard)
    state = alice_encode(state, alice_bit)
    a, state = qcore.measure(state, 0, Basis.Z, rng)
    big_a, state = qcore.measure(state, 1, Basis.Z, rng)
    b, state = qcore.measure(state, 2, Basis.X, rng)
    out = {"a": a.bit, "A": big_a.bit, "B": b.bit}
    if action.intercepts:
        out["eve"] = intercept_bit
    elif action.entangles:
        rec, _ = eve_final_measure(state, 3, rng)
        out["eve"] = rec.ancilla_x_bit
    return out


def _eve_record(action: AttackAction, attack: AttackModel, eve_bit) -> Optional[EveRecord]:
    if attack.is_none:
        return None
    if action.intercepts:
        return EveRecord(True, intercept_basis=action.basis, intercept_bit=int(eve_bit))
    if action.entangles:
        return EveRecord(True, ancilla_x_bit=int(eve_bit))
    return EveRecord(False)


def run_episode(episode: Episode, attack: AttackModel, rng) -> EpisodeRecord:
    action = attack.resolve(rng.random(), rng.random())
    out = simulate(episode.alice_bit, episode.hadamard_applied, action, rng)
    return EpisodeRecord(
        episode, out["a"], out["A"], out["B"], _eve_record(action, attack, out.get("eve")), action
    )


def recover_bit(alice_a_bit: int, bob_x_bit: int) -> int:
    """Message bit from Alice's ``a`` outcome and Bob's X outcome (0 = ``|+>``)."""
    return alice_a_bit ^ bob_x_bit


# -- session -------------------------------------------------------------------


def plan_episodes(params: ProtocolParams, rng: np.random.Generator) -> list[Episode]:
    n = params.n_pairs
    hadamard = np.zeros(n, dtype=bool)
    hadamard[rng.choice(n, size=params.n_hadamard, replace=False)] = True
    check = np.zeros(n, dtype=bool)
    check[rng.choice(n, size=params.n_check, replace=False)] = True
    check_bits = rng.integers(0, 2, size=params.n_check)
    # message pairs beyond the message length carry random filler
    filler = rng.integers(0, 2, size=params.capacity - len(params.message))
    payload = np.concatenate([np.array([int(c) for c in params.message], dtype=np.int64), filler])

    episodes = []
    ci = mi = 0
    for i in range(n):
        if check[i]:
            role, bit = Role.CHECK, int(check_bits[ci])
            ci += 1
        else:
            role, bit = Role.MESSAGE, int(payload[mi])
            mi += 1
        episodes.append(Episode(i + 1, bool(hadamard[i]), role, bit))
    return episodes


def run_episodes(episodes: list[Episode], attack: AttackModel, uniforms: np.ndarray) -> list[EpisodeRecord]:
    """Batched equivalent of calling :func:`run_episode` on every row.

    Episodes sharing (alice_bit, hadamard, action) are pushed through one
    batched state; each still reads only its own row of ``uniforms``.
    """
    actions = attack.resolve(uniforms[:, 0], uniforms[:, 1])
    groups = defaultdict(list)
    for pos, (ep, act) in enumerate(zip(episodes, actions)):
        groups[(ep.alice_bit, ep.hadamard_applied, act)].append(pos)

    records: list = [None] * len(episodes)
    for (bit, had, act), positions in groups.items():
        idx = np.asarray(positions)
        out = simulate(bit, had, act, UniformTape(uniforms[idx], start=2), batch=len(idx))
        for j, pos in enumerate(positions):
            eve_bit = out["eve"][j] if "eve" in out else None
            records[pos] = EpisodeRecord(
                episodes[pos],
                int(out["a"][j]),
                int(out["A"][j]),
                int(out["B"][j]),
                _eve_record(act, attack, eve_bit),
                act,
            )
    return records


def check_phase(records: list[EpisodeRecord], params: ProtocolParams) -> tuple[float, bool, list]:
    """Step (8): reveal check positions, compare Bob's answers, decide."""
    checks = [r for r in records if r.episode.role is Role.CHECK]
    if not checks:
        raise ProtocolError("no check episodes to test")
    errors = sum(recover_bit(r.alice_a_bit, r.bob_x_bit) != r.episode.alice_bit for r in checks)
    rate = errors / len(checks)
    abort = rate > params.abort_threshold
    entries = [
        AliceCheckPositions(tuple(r.episode.index for r in checks)),
        BobCheckResults(tuple((r.episode.index, r.bob_x_bit) for r in checks)),
        AliceAbortDecision(abort, rate),
    ]
    return rate, abort, entries


def run_session(params: ProtocolParams, attack: Optional[AttackModel] = None) -> SessionResult:
    attack = attack or AttackModel.none()
    plan_rng, uniforms = session_streams(params.master_seed, params.n_pairs)
    episodes = plan_episodes(params, plan_rng)

    transcript = Transcript()
    transcript.append(BobHadamardPositions(tuple(e.index for e in episodes if e.hadamard_applied)))

    records = run_episodes(episodes, attack, uniforms)
    rate, abort, entries = check_phase(records, params)
    for entry in entries:
        transcript.append(entry)

    recovered = None
    if not abort:
        message_records = [r for r in records if r.episode.role is Role.MESSAGE]
        transcript.append(AliceDResults(tuple((r.episode.index, r.alice_a_bit) for r in message_records)))
        bits = [recover_bit(r.alice_a_bit, r.bob_x_bit) for r in message_records[: len(params.message)]]
        recovered = "".join(map(str, bits))
    return SessionResult(abort, rate, recovered, transcript, records, params, attack)
