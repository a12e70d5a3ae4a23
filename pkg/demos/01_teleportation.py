"""Teleporting a qubit, and a qutrit, through one EPR pair.

Alice holds the input on factor 1 and half of a pair (2, 3); she makes a
Bell measurement on (1, 2). Each outcome leaves Bob's factor 3 holding the
input moved by a known unitary, which Bob undoes once Alice tells him the
outcome index.
"""

import numpy as np

from qhistory import build_teleportation, oracle, predict
from qhistory.tensor_core import Ket, fidelity_up_to_phase

phi = np.array([0.6, 0.8j])
sc = build_teleportation(2, phi)

pred = predict(sc)  # isometry composition only
orc = oracle(sc)  # full state vector, for comparison

print("qubit teleportation, input (0.6, 0.8i)")
print(f"{'outcome':>8} {'prob':>8} {'raw fidelity':>13} {'corrected':>10}")
for key, o in orc.items():
    p = pred[key]
    raw = fidelity_up_to_phase(o.state, Ket.from_vector(3, phi))
    fixed = fidelity_up_to_phase(p.correction.apply_to(o.state), sc.input_ket())
    print(f"{key[0][1]:>8} {o.prob:8.4f} {raw:13.6f} {fixed:10.6f}")

# the branch map Bob must undo is linear, although every step in it is antilinear
k = (("alice_12", 3),)
print("\nbranch 3 map on factor 3:\n", np.round(pred[k].transport.matrix, 12))
print("antilinear:", pred[k].transport.antilinear)

# the same protocol for qutrits: nine outcomes, each 1/9
rng = np.random.default_rng(0)
sc3 = build_teleportation(3, Ket.random((1,), 3, rng).vector)
probs = sorted({round(o.prob, 12) for o in oracle(sc3).values()})
print("\nqutrit outcome probabilities:", probs)
