"""A set-up whose outcome depends on the order of measurements.

Alice measures twice on overlapping factors, (0, 2) then (0, 1), and
Victor measures (2, 3). With the identity reference state on (0, 2) both
orders fold to the same isometry on the reference branch. Shifting the
reference state on (0, 2) by the cyclic shift breaks that for qutrits,
while for qubits the shift is real with square one and the difference
disappears.
"""

import numpy as np

from qhistory import build_triple_teleportation, iso_equal_up_to_phase, run_and_compare, triple_chains
from qhistory.tensor_core import Ket, random_unitary

rng = np.random.default_rng(5)
phi = Ket.random((0,), 3, rng).vector

for variant in ("default", "shifted"):
    sc = build_triple_teleportation(3, phi, iso20_variant=variant)
    ch = triple_chains(sc)
    rep = run_and_compare(sc)
    print(f"d = 3, {variant:>8}: chains equal = {iso_equal_up_to_phase(ch.i20_forward, ch.i20_reversed)},"
          f" reference-branch fidelity between orders = {rep.reference_order_fidelity:.6f}")
    print(f"{'':17}largest commutator (0,2) vs (0,1): {rep.commutators['alice_02|alice_01']:.4f},"
          f" order witness on the prepared state: {rep.witnesses['alice_02|alice_01']:.1e}")

# any unitary twist U on factor 0 multiplies the forward chain by conj(U) U
base = triple_chains(build_triple_teleportation(3, phi)).i20_forward.matrix
u = random_unitary(3, rng)
twisted = triple_chains(build_triple_teleportation(3, phi, iso20_variant=u)).i20_forward.matrix
print("\nconj(U) U identity error:", np.max(np.abs(twisted - u.conj() @ u @ base)))

qubit = run_and_compare(build_triple_teleportation(2, Ket.random((0,), 2, rng).vector, iso20_variant="shifted"))
print("d = 2 shifted variant order dependent:", qubit.order_dependent)
