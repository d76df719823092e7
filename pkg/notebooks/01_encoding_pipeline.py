# %% [markdown]
# # One EPR pair, end to end
#
# Follow a single pair through Alice's encoding: prepare the ancilla `a`,
# entangle it with her half `A` through a CNOT, rotate `a` with a Hadamard,
# then look at the joint outcome table of the final measurements.

# %%
import numpy as np

from qsdc import qcore
from qsdc.analysis import exact_distribution
from qsdc.adversary import AttackAction
from qsdc.qcore import Basis

np.set_printoptions(precision=4, suppress=True)


def show(state):
    for i, amp in enumerate(state.amplitudes):
        if abs(amp) > 1e-12:
            print(f"  |{i:0{state.num_qubits}b}>  {amp.real:+.4f}")


# %%
pair = qcore.make_epr_pair()
show(pair)

# %% [markdown]
# Qubit order is (a, A, B).  Encode bit 1 (`a` starts in |->).

# %%
state = qcore.tensor(qcore.encode_message_qubit(1), pair)
state = qcore.apply_cnot(state, 0, 1)
show(state)
state = qcore.apply_hadamard(state, 0)
show(state)

# %% [markdown]
# Measure a and A in Z and B in X.  Every branch pairs Alice's `a` bit with
# the complementary X bit at Bob, so `a XOR B` recovers the secret 1, while
# `A` is a coin flip that carries nothing.

# %%
table = qcore.outcome_distribution(state, [(0, Basis.Z), (1, Basis.Z), (2, Basis.X)])
for key, p in table.items():
    if p > 1e-12:
        print(f"a={key[0]} A={key[1]} B={key[2]}  p={p:.3f}  recovered={int(key[0]) ^ int(key[2])}")

# %% [markdown]
# Bob's Hadamard layer changes nothing without an eavesdropper: the pair
# looks the same in the X frame.

# %%
for hadamard in (False, True):
    dist = exact_distribution(1, hadamard, AttackAction.NONE)
    print(hadamard, {k: round(v, 3) for k, v in dist.table.items() if v > 0})
