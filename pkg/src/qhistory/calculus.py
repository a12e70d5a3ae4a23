"""Branch-wise prediction by isometry composition alone.

Every state reachable in the protocols here is a tensor product of
single-factor vectors and maximally entangled pairs. A Bell projection
then either teleports a vector through a pair, swaps two pairs into a new
one, or overlaps states that are already local; a single-factor
projection either filters a vector or steers a pair partner. Each case is
a closed formula in the isometries, so Bob's state follows without ever
forming the joint state vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .isometry import Isometry, compose, compose_chain, invert, linear, state_from_isometry
from .measurement import MeasurementSet, outcome_key
from .tensor_core import ZERO_PROB, Ket, Label, Projector, canonical, tensor


class CalculusError(ValueError):
    """Raised for projectors the calculus has no closed rule for."""


@dataclass(frozen=True, eq=False)
class Single:
    label: Label
    vector: np.ndarray
    # map from the input factor that produced this vector, if any
    transport: Isometry | None = None


@dataclass(frozen=True, eq=False)
class Pair:
    iso: Isometry

    def partner(self, label: Label) -> Label:
        return self.iso.target if label == self.iso.source else self.iso.source

    def oriented_from(self, label: Label) -> Isometry:
        """The pair's isometry with ``label`` as domain."""
        return self.iso if self.iso.source == label else invert(self.iso)


Components = Mapping[Label, "Single | Pair"]


def initial_components(
    sources: Iterable[Isometry],
    input_label: Label | None = None,
    input_vector: np.ndarray | None = None,
) -> dict:
    comps: dict = {}
    for iso in sources:
        pair = Pair(iso)
        comps[iso.source] = comps[iso.target] = pair
    if input_label is not None:
        v = np.asarray(input_vector, dtype=complex)
        comps[input_label] = Single(input_label, v, linear(input_label, np.eye(len(v))))
    return comps


def _put_single(comps: dict, s: Single) -> None:
    comps[s.label] = s


def _put_pair(comps: dict, iso: Isometry) -> None:
    pair = Pair(iso)
    comps[iso.source] = comps[iso.target] = pair


def _teleport(comps: dict, single: Single, outcome: Isometry) -> float:
    # single sits on outcome.source; outcome.target's partner receives it
    mid = outcome.target
    pair = comps[mid]
    onward = pair.oriented_from(mid)
    step = compose(onward, outcome)
    transport = compose(step, single.transport) if single.transport is not None else None
    d = outcome.d
    _put_pair(comps, outcome)
    _put_single(comps, Single(onward.target, step(single.vector), transport))
    return float(np.vdot(single.vector, single.vector).real) / d**2


def _bell_projection(comps: dict, outcome: Isometry) -> float:
    x, y = outcome.source, outcome.target
    cx, cy = comps[x], comps[y]
    d = outcome.d
    m = outcome.matrix
    if isinstance(cx, Pair) and cx is cy:
        p = cx.oriented_from(x).matrix
        amp = np.trace(m.conj().T @ p) / d
        _put_pair(comps, outcome)
        return float(abs(amp) ** 2)
    if isinstance(cx, Single) and isinstance(cy, Single):
        amp = cy.vector @ m.conj() @ cx.vector / np.sqrt(d)
        _put_pair(comps, outcome)
        return float(abs(amp) ** 2)
    if isinstance(cx, Single):
        return _teleport(comps, cx, outcome)
    if isinstance(cy, Single):
        return _teleport(comps, cy, invert(outcome))
    # two distinct pairs: entanglement swapping
    w = cx.partner(x)
    swapped = compose_chain(cy.oriented_from(y), outcome, cx.oriented_from(w))
    _put_pair(comps, outcome)
    _put_pair(comps, swapped)
    return 1.0 / d**2


def _local_projection(comps: dict, vec: Ket) -> float:
    (x,) = vec.labels
    u = vec.vector
    cx = comps[x]
    if isinstance(cx, Single):
        amp = np.vdot(u, cx.vector)
        _put_single(comps, Single(x, u))
        return float(abs(amp) ** 2)
    steer = cx.oriented_from(x)
    _put_single(comps, Single(x, u))
    _put_single(comps, Single(steer.target, steer(u)))
    return 1.0 / steer.d


def apply_projector(comps: Components, proj: Projector) -> tuple[dict | None, float]:
    """Components after projecting onto ``proj`` and the outcome probability."""
    out = dict(comps)
    if isinstance(proj.isometry, Isometry):
        prob = _bell_projection(out, proj.isometry)
    elif all(len(part.labels) == 1 for part in proj.parts):
        prob = 1.0
        for part in proj.parts:
            prob *= _local_projection(out, part)
    else:
        raise CalculusError(f"no isometry rule for projector on {proj.labels}")
    if prob < ZERO_PROB:
        return None, prob
    return out, prob


def render(comps: Components, labels: Sequence[Label]) -> Ket | None:
    """Pure state on ``labels``, or ``None`` if they are entangled with the rest."""
    labels = canonical(labels)
    wanted = set(labels)
    kets = []
    seen: set = set()
    for lab in labels:
        if lab in seen:
            continue
        c = comps[lab]
        if isinstance(c, Single):
            kets.append(Ket.from_vector(lab, c.vector))
            seen.add(lab)
        else:
            if c.partner(lab) not in wanted:
                return None
            kets.append(state_from_isometry(c.iso))
            seen |= {c.iso.source, c.iso.target}
    out = kets[0]
    for k in kets[1:]:
        out = tensor(out, k)
    return out.normalized()


@dataclass(frozen=True, eq=False)
class BranchPrediction:
    outcomes: tuple
    prob: float
    state: Ket | None
    transport: Isometry | None = None

    @property
    def correction(self) -> Isometry | None:
        """The map that undoes the transport, returning Bob's vector to the input."""
        return invert(self.transport) if self.transport is not None else None


def predict_branches(
    comps: Components,
    sequence: Sequence[MeasurementSet],
    bob_labels: Sequence[Label],
) -> dict[tuple, BranchPrediction]:
    """Predicted probability and Bob state for every outcome tuple."""
    sequence = tuple(sequence)
    bob_labels = canonical(bob_labels)
    out: dict[tuple, BranchPrediction] = {}
    for idx in product(*(range(len(m)) for m in sequence)):
        state: dict | None = dict(comps)
        prob = 1.0
        for mset, k in zip(sequence, idx):
            state, p = apply_projector(state, mset.projectors[k])
            prob *= p
            if state is None:
                prob = 0.0
                break
        outcomes = tuple((m.name, k) for m, k in zip(sequence, idx))
        if state is None:
            out[outcome_key(outcomes)] = BranchPrediction(outcomes, 0.0, None)
            continue
        transport = None
        if len(bob_labels) == 1 and isinstance(state[bob_labels[0]], Single):
            single = state[bob_labels[0]]
            transport = single.transport
            bob = Ket.from_vector(single.label, single.vector).normalized()
        else:
            bob = render(state, bob_labels)
        out[outcome_key(outcomes)] = BranchPrediction(outcomes, prob, bob, transport)
    return out
