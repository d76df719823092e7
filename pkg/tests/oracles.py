"""Brute-force reference computations used as test oracles.

Everything here works on plain numpy vectors with full 2**n x 2**n
matrices built from Kronecker products and explicit loops.  None of it
calls into qsdc, so agreement with the package is a real cross-check.
"""
import itertools
from functools import reduce

import numpy as np

S = 1 / np.sqrt(2)
I2 = np.eye(2)
H = np.array([[1, 1], [1, -1]]) * S
SINGLE = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([S, S], dtype=complex),
    "-": np.array([S, -S], dtype=complex),
}


def ket(label):
    """Product ket from characters in {0, 1, +, -}, first character most significant."""
    return reduce(np.kron, [SINGLE[c] for c in label])


def gate_on(matrix, qubit, n):
    return reduce(np.kron, [matrix if q == qubit else I2 for q in range(n)])


def cnot_matrix(control, target, n):
    dim = 2**n
    m = np.zeros((dim, dim))
    for col in range(dim):
        bits = list(format(col, f"0{n}b"))
        if bits[control] == "1":
            bits[target] = "0" if bits[target] == "1" else "1"
        m[int("".join(bits), 2), col] = 1
    return m


def joint_table(vec, bases):
    """Outcome probabilities when every qubit is measured; ``bases`` is e.g. "ZZX"."""
    n = len(bases)
    rot = reduce(np.kron, [H if b == "X" else I2 for b in bases])
    probs = np.abs(rot @ vec) ** 2
    return {format(i, f"0{n}b"): float(probs[i]) for i in range(2**n)}


def marginal(table, positions):
    out = {}
    for key, p in table.items():
        sub = "".join(key[i] for i in positions)
        out[sub] = out.get(sub, 0.0) + p
    return out


def tv(p, q):
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


def _finish(vec, alice_bit, hadamard, n):
    """Hadamard layer, encoding, CNOT, H on a.  Input qubits (A, B[, E])."""
    if hadamard:
        vec = gate_on(H, 1, n) @ vec
        vec = gate_on(H, 0, n) @ vec
    vec = np.kron(ket("+" if alice_bit == 0 else "-"), vec)
    vec = cnot_matrix(0, 1, n + 1) @ vec
    return gate_on(H, 0, n + 1) @ vec


def episode_table(alice_bit, hadamard, action):
    """Exact outcome table keyed like qsdc.analysis.exact_distribution.

    action is one of "none", "ir-z", "ir-x", "collective", "collective-h".
    """
    epr = (ket("00") + ket("11")) * S
    if action == "none":
        return joint_table(_finish(epr, alice_bit, hadamard, 2), "ZZX")
    if action in ("collective", "collective-h"):
        vec = np.kron(epr, ket("0"))
        if action == "collective-h":
            vec = gate_on(H, 1, 3) @ vec
        vec = cnot_matrix(1, 2, 3) @ vec
        if action == "collective-h":
            vec = gate_on(H, 1, 3) @ vec
        return joint_table(_finish(vec, alice_bit, hadamard, 3), "ZZXX")

    basis_kets = ("0", "1") if action == "ir-z" else ("+", "-")
    table = {}
    for e, bk in enumerate(basis_kets):
        # <bk|_B applied to the pair leaves A's conditional state
        rest = epr.reshape(2, 2) @ SINGLE[bk].conj()
        p = float(np.vdot(rest, rest).real)
        resent = SINGLE["+" if e == 0 else "-"]
        vec = np.kron(rest / np.sqrt(p), resent)
        for key, q in joint_table(_finish(vec, alice_bit, hadamard, 2), "ZZX").items():
            table[str(e) + key] = p * q
    return table


def check_error(table, alice_bit, a_pos, b_pos):
    return sum(p for k, p in table.items() if (int(k[a_pos]) ^ int(k[b_pos])) != alice_bit)


def mutual_information(joint):
    """Exact MI in bits of a dict {(x, y): p}."""
    px, py = {}, {}
    for (x, y), p in joint.items():
        px[x] = px.get(x, 0.0) + p
        py[y] = py.get(y, 0.0) + p
    return sum(p * np.log2(p / (px[x] * py[y])) for (x, y), p in joint.items() if p > 0)


def all_cells():
    return list(itertools.product((0, 1), (False, True), ("none", "ir-z", "ir-x", "collective", "collective-h")))
