"""Dense state-vector engine for a handful of qubits.

Qubit 0 is the most significant bit of a basis-ket index, so the ket
``|abc>`` lives at index ``int("abc", 2)``.  Every operation returns a new
:class:`QuantumState`; nothing is mutated in place.

Amplitude arrays may carry leading batch axes (shape ``(..., 2**n)``).  A
batched state is a stack of independent states that share a circuit, which
is how the Monte Carlo paths push thousands of episodes through numpy at
once.  Gates broadcast over the batch; measurements draw one uniform per row.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import sqrt
from typing import Sequence, Union

import numpy as np

MAX_QUBITS = 8
NORM_TOL = 1e-9

_INV_SQRT2 = 1 / sqrt(2)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _INV_SQRT2

Bit = Union[int, np.ndarray]


class Basis(enum.Enum):
    """Measurement basis.  X outcome 0 is ``|+>``, outcome 1 is ``|->``."""

    Z = "Z"
    X = "X"


@dataclass(frozen=True)
class QuantumState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        n = self.num_qubits
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {n!r}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim == 0 or amps.shape[-1] != 2**n:
            raise ValueError(f"expected {2**n} amplitudes per state, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norms = np.sum(np.abs(amps) ** 2, axis=-1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValueError(f"state is not normalized (norm^2 = {norms})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def batch_shape(self) -> tuple:
        return self.amplitudes.shape[:-1]

    def __len__(self):
        return self.amplitudes.shape[-1]

    def probabilities(self) -> np.ndarray:
        """Computational-basis probabilities of every ket."""
        return np.abs(self.amplitudes) ** 2

    def allclose(self, other: "QuantumState | np.ndarray", atol: float = 1e-12) -> bool:
        target = other.amplitudes if isinstance(other, QuantumState) else np.asarray(other)
        return bool(np.allclose(self.amplitudes, target, rtol=0, atol=atol))


@dataclass(frozen=True)
class MeasurementOutcome:
    qubit: int
    basis: Basis
    bit: Bit
    probability: Union[float, np.ndarray]


# -- low-level kernels over raw amplitude arrays --------------------------


def _check_index(n: int, qubit: int) -> None:
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < n:
        raise IndexError(f"qubit index {qubit!r} out of range for {n} qubits")


def _split(amps: np.ndarray, n: int, qubit: int) -> np.ndarray:
    """View amplitudes as (..., left, 2, right) around ``qubit``."""
    return amps.reshape(amps.shape[:-1] + (2**qubit, 2, 2 ** (n - qubit - 1)))


def _apply_1q(amps: np.ndarray, matrix: np.ndarray, n: int, qubit: int) -> np.ndarray:
    return np.matmul(matrix, _split(amps, n, qubit)).reshape(amps.shape)


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    cmask = 1 << (n - 1 - control)
    tmask = 1 << (n - 1 - target)
    return np.where(idx & cmask, idx ^ tmask, idx)


def _project_z(amps: np.ndarray, n: int, qubit: int, bit: Bit) -> np.ndarray:
    """Unnormalized projection of ``qubit`` onto ``|bit>`` (bit may be per-row)."""
    t = _split(amps, n, qubit).copy()
    bit = np.asarray(bit)
    keep = np.stack([bit == 0, bit == 1], axis=-1)[..., None, :, None]
    return np.where(keep, t, 0).reshape(amps.shape)


def _project(amps: np.ndarray, n: int, qubit: int, basis: Basis, bit: Bit) -> np.ndarray:
    if basis is Basis.Z:
        return _project_z(amps, n, qubit, bit)
    rotated = _apply_1q(amps, HADAMARD, n, qubit)
    return _apply_1q(_project_z(rotated, n, qubit, bit), HADAMARD, n, qubit)


def _norm2(amps: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(amps) ** 2, axis=-1)


# -- public operations -----------------------------------------------------


def basis_state(num_qubits: int, label: str) -> QuantumState:
    """Computational basis ket, e.g. ``basis_state(2, "01")`` is ``|01>``."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    if len(label) != num_qubits or set(label) - {"0", "1"}:
        raise ValueError(f"label {label!r} is not a {num_qubits}-bit string")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[int(label, 2)] = 1.0
    return QuantumState(num_qubits, amps)


def make_epr_pair() -> QuantumState:
    """(|00> + |11>)/sqrt(2)."""
    return QuantumState(2, np.array([_INV_SQRT2, 0, 0, _INV_SQRT2], dtype=complex))


def encode_message_qubit(bit: int) -> QuantumState:
    """``|+>`` for 0, ``|->`` for 1."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    sign = 1 - 2 * bit
    return QuantumState(1, np.array([_INV_SQRT2, sign * _INV_SQRT2], dtype=complex))


def x_eigenstate(bit: Bit) -> QuantumState:
    """``|+>``/``|->`` selected per row when ``bit`` is an array."""
    sign = 1 - 2 * np.asarray(bit, dtype=float)
    amps = np.stack([np.full_like(sign, _INV_SQRT2), sign * _INV_SQRT2], axis=-1)
    return QuantumState(1, amps.astype(complex))


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """Kronecker product with ``a``'s qubits first."""
    n = a.num_qubits + b.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"combined state would have {n} qubits (max {MAX_QUBITS})")
    amps = a.amplitudes[..., :, None] * b.amplitudes[..., None, :]
    return QuantumState(n, amps.reshape(amps.shape[:-2] + (2**n,)))


def apply_gate(state: QuantumState, matrix: np.ndarray, qubit: int) -> QuantumState:
    """Apply an arbitrary 2x2 unitary to one qubit."""
    _check_index(state.num_qubits, qubit)
    return QuantumState(state.num_qubits, _apply_1q(state.amplitudes, matrix, state.num_qubits, qubit))


def apply_hadamard(state: QuantumState, qubit: int) -> QuantumState:
    return apply_gate(state, HADAMARD, qubit)


def apply_cnot(state: QuantumState, control: int, target: int) -> QuantumState:
    n = state.num_qubits
    _check_index(n, control)
    _check_index(n, target)
    if control == target:
        raise ValueError("control and target must differ")
    return QuantumState(n, state.amplitudes[..., _cnot_permutation(n, control, target)])


def measure(state: QuantumState, qubit: int, basis: Basis, rng) -> tuple[MeasurementOutcome, QuantumState]:
    """Projective measurement with Born-rule sampling.

    ``rng`` is anything with a numpy-style ``random(size)`` method.  For a
    batched state one uniform is drawn per row and ``bit`` comes back as an
    int array.
    """
    n = state.num_qubits
    _check_index(n, qubit)
    amps = state.amplitudes
    if basis is Basis.X:
        amps = _apply_1q(amps, HADAMARD, n, qubit)
    t = _split(amps, n, qubit)
    p0 = np.sum(np.abs(t[..., 0, :]) ** 2, axis=(-2, -1))
    p1 = np.sum(np.abs(t[..., 1, :]) ** 2, axis=(-2, -1))
    total = p0 + p1
    if np.any(total < NORM_TOL):
        raise RuntimeError("both projections have zero norm; input state is not normalized")
    u = rng.random(state.batch_shape) if state.batch_shape else rng.random()
    bit = (np.asarray(u) < p1 / total).astype(np.int64)
    prob = np.where(bit == 1, p1, p0)
    projected = _project_z(amps, n, qubit, bit)
    projected = projected / np.sqrt(prob)[..., None]
    if basis is Basis.X:
        projected = _apply_1q(projected, HADAMARD, n, qubit)
    if not state.batch_shape:
        bit, prob = int(bit), float(prob)
    return MeasurementOutcome(qubit, basis, bit, prob), QuantumState(n, projected)


def project(state: QuantumState, qubit: int, basis: Basis, bit: int) -> tuple[float, QuantumState | None]:
    """Deterministic counterpart of :func:`measure` for one chosen outcome.

    Returns the outcome probability and the renormalized post-measurement
    state, or ``None`` for the state when the outcome is impossible.
    """
    _check_index(state.num_qubits, qubit)
    projected = _project(state.amplitudes, state.num_qubits, qubit, basis, bit)
    prob = float(_norm2(projected))
    if prob < 1e-15:
        return 0.0, None
    return prob, QuantumState(state.num_qubits, projected / sqrt(prob))


def outcome_distribution(state: QuantumState, plan: Sequence[tuple[int, Basis]]) -> dict[str, float]:
    """Exact joint distribution of measuring ``plan`` in order.

    Keys are bit strings with one character per plan entry.  Every one of
    the ``2**len(plan)`` outcomes is listed, zero-probability ones included.
    """
    if state.batch_shape:
        raise ValueError("outcome_distribution needs a single (unbatched) state")
    qubits = [q for q, _ in plan]
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"plan measures a qubit twice: {qubits}")
    n = state.num_qubits
    for q in qubits:
        _check_index(n, q)

    table = {}
    for bits in itertools.product((0, 1), repeat=len(plan)):
        amps = state.amplitudes
        for (q, basis), b in zip(plan, bits):
            amps = _project(amps, n, q, basis, b)
        table["".join(map(str, bits))] = float(_norm2(amps))
    total = sum(table.values())
    if abs(total - 1.0) > NORM_TOL:
        raise RuntimeError(f"outcome probabilities sum to {total}")
    return table


def split_off(state: QuantumState, qubit: int, basis: Basis, bit: Bit) -> QuantumState:
    """Drop a qubit known to sit in a product eigenstate of ``basis``.

    The remaining qubits keep their relative order.  Raises if the qubit is
    not actually in the named eigenstate.
    """
    n = state.num_qubits
    _check_index(n, qubit)
    if n == 1:
        raise ValueError("cannot remove the only qubit")
    amps = state.amplitudes
    if basis is Basis.X:
        amps = _apply_1q(amps, HADAMARD, n, qubit)
    t = _split(amps, n, qubit)
    bit = np.asarray(bit)
    rest = np.where(bit[..., None, None] == 1, t[..., :, 1, :], t[..., :, 0, :])
    rest = rest.reshape(amps.shape[:-1] + (2 ** (n - 1),))
    return QuantumState(n - 1, rest)


def insert_qubit(state: QuantumState, position: int, single: QuantumState) -> QuantumState:
    """Insert a one-qubit state so that it becomes qubit ``position``."""
    n = state.num_qubits + 1
    if n > MAX_QUBITS:
        raise ValueError(f"combined state would have {n} qubits (max {MAX_QUBITS})")
    if not 0 <= position < n:
        raise IndexError(f"position {position} out of range for {n} qubits")
    if single.num_qubits != 1:
        raise ValueError("only single-qubit states can be inserted")
    left, right = 2**position, 2 ** (state.num_qubits - position)
    rest = state.amplitudes.reshape(state.batch_shape + (left, 1, right))
    new = single.amplitudes[..., None, :, None]
    amps = rest * new
    batch = np.broadcast_shapes(state.batch_shape, single.batch_shape)
    return QuantumState(n, amps.reshape(batch + (2**n,)))


def broadcast(state: QuantumState, batch: int) -> QuantumState:
    """Stack ``batch`` copies of an unbatched state."""
    return QuantumState(state.num_qubits, np.broadcast_to(state.amplitudes, (batch, len(state))))
