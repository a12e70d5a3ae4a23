"""Teleportation over two pairs: Alice on (0, 1), Victor on (2, 3).

The two Bell measurements act on disjoint factors, so their projectors
commute and Bob's state on 4 is the same whichever happens first. The
calculus sees this as two different groupings of one four-term chain.
"""

import numpy as np

from qhistory import build_double_teleportation, commutes, oracle, run_and_compare
from qhistory.tensor_core import Ket, fidelity_up_to_phase

rng = np.random.default_rng(11)
phi = Ket.random((0,), 3, rng).vector

first = oracle(build_double_teleportation(3, phi))
second = oracle(build_double_teleportation(3, phi, order="victor_then_alice"))
worst = min(fidelity_up_to_phase(first[k].state, second[k].state) for k in first)
print(f"qutrit input, {len(first)} outcome pairs, worst Bob fidelity across orders: {worst:.12f}")

sc = build_double_teleportation(2, [0.6, 0.8])
alice, victor = sc.measurement_order
norm = max(commutes(p, q)[1] for p in alice.projectors for q in victor.projectors)
print("largest commutator between Alice's and Victor's projectors:", norm)

rep = run_and_compare(build_double_teleportation(2, [0.6, 0.8], apply_corrections=True))
print("order dependent:", rep.order_dependent, "| worst corrected fidelity:", rep.min_corrected_fidelity)
