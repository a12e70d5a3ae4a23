"""Builders for the teleportation and swapping set-ups, plus the
calculus-versus-oracle harness.

Label conventions follow the channel numbering of the set-ups: plain
teleportation uses input 1, source (2, 3) and Bob 3; swapping uses sources
(1, 2), (3, 4); double and triple teleportation add the input on 0 and
deliver to Bob on 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import calculus
from .calculus import BranchPrediction
from .isometry import (
    Isometry,
    compose_chain,
    invert,
    isometry_from_state,
    shift,
    state_from_isometry,
)
from .measurement import (
    MeasurementSet,
    bell_basis,
    commutator_norm,
    order_independence_witness,
    product_basis,
    run_history,
)
from .tensor_core import (
    Ket,
    Label,
    canonical,
    fidelity_up_to_phase,
    marginal_pure_state,
    tensor,
)

PROB_TOL = 1e-10
FIDELITY_TOL = 1e-9


class ScenarioError(ValueError):
    """Raised for an inconsistent scenario description."""


def as_source(src: Isometry | Ket, source: Label, target: Label, d: int) -> Isometry:
    """Normalize an EPR source to an antilinear isometry ``source -> target``.

    A :class:`Ket` is checked for maximal entanglement; a bare matrix is
    read as the isometry matrix.
    """
    if src is None:
        return Isometry.identity(source, target, d)
    if isinstance(src, Ket):
        iso = isometry_from_state(src, source=source)
    elif isinstance(src, Isometry):
        iso = src
    else:
        iso = Isometry(source, target, np.asarray(src, dtype=complex))
    if not iso.antilinear:
        raise ScenarioError("EPR sources are antilinear isometries")
    if {iso.source, iso.target} != {source, target}:
        raise ScenarioError(f"source acts on ({iso.source}, {iso.target}), expected ({source}, {target})")
    if iso.source != source:
        iso = invert(iso)
    if iso.d != d:
        raise ScenarioError(f"source has dimension {iso.d}, scenario uses {d}")
    return iso


@dataclass(frozen=True, eq=False)
class Scenario:
    """A prepared pure state plus a chronological list of measurements."""

    name: str
    d: int
    sources: tuple
    measurement_order: tuple
    bob_labels: tuple
    input_label: Label | None = None
    input_state: np.ndarray | None = None
    apply_corrections: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        used: list = []
        if self.input_label is not None:
            v = np.asarray(self.input_state, dtype=complex).ravel()
            if v.shape != (self.d,):
                raise ScenarioError(f"input needs {self.d} amplitudes, got {v.size}")
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ScenarioError("input state must be normalized")
            object.__setattr__(self, "input_state", v)
            used.append(self.input_label)
        for iso in self.sources:
            if not iso.antilinear or iso.d != self.d:
                raise ScenarioError(f"bad source {iso!r}")
            used += [iso.source, iso.target]
        if len(set(used)) != len(used):
            raise ScenarioError(f"factor labels used more than once: {used}")
        for m in self.measurement_order:
            if not set(m.labels) <= set(used):
                raise ScenarioError(f"measurement {m.name!r} acts outside the prepared factors")
        if not set(self.bob_labels) <= set(used):
            raise ScenarioError(f"Bob's factors {self.bob_labels} are not prepared")
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "measurement_order", tuple(self.measurement_order))
        object.__setattr__(self, "bob_labels", canonical(self.bob_labels))

    @property
    def labels(self) -> tuple:
        labs = [lab for iso in self.sources for lab in (iso.source, iso.target)]
        if self.input_label is not None:
            labs.append(self.input_label)
        return canonical(labs)

    def initial_state(self) -> Ket:
        kets = [state_from_isometry(iso) for iso in self.sources]
        if self.input_label is not None:
            kets.insert(0, Ket.from_vector(self.input_label, self.input_state))
        out = kets[0]
        for k in kets[1:]:
            out = tensor(out, k)
        return out

    def input_ket(self) -> Ket | None:
        if self.input_label is None:
            return None
        return Ket.from_vector(self.input_label, self.input_state)

    def with_order(self, sequence: Sequence[MeasurementSet], name: str | None = None) -> Scenario:
        return replace(self, measurement_order=tuple(sequence), name=name or self.name)

    def reversed(self) -> Scenario:
        return self.with_order(self.measurement_order[::-1], name=f"{self.name}[reversed]")


# builders


def build_teleportation(
    d: int,
    input_state: Any,
    source=None,
    bell_seed=None,
    apply_corrections: bool = False,
) -> Scenario:
    """Input on 1, EPR source on (2, 3), Alice's BSM on (1, 2), Bob on 3.

    ``source`` is the isometry ``2 -> 3`` (or the source state); ``bell_seed``
    the isometry ``1 -> 2`` whose state is Alice's reference Bell outcome.
    """
    src = as_source(source, 2, 3, d)
    seed = as_source(bell_seed, 1, 2, d)
    return Scenario(
        name="teleportation",
        d=d,
        sources=(src,),
        measurement_order=(bell_basis(seed, "alice_12"),),
        bob_labels=(3,),
        input_label=1,
        input_state=input_state,
        apply_corrections=apply_corrections,
    )


SWAP_ORDERS = ("victor_first", "alice_bob_first", "victor_only")


def build_swapping(
    d: int,
    source12=None,
    source34=None,
    order: str = "victor_first",
    victor_choice: str = "entangled",
    orientations: tuple | None = None,
    victor_seed=None,
) -> Scenario:
    """Two EPR pairs (1, 2), (3, 4); Victor measures (2, 3), Alice and Bob 1 and 4.

    ``orientations`` holds the measurement bases (unitary columns) of
    factors 1 and 4. ``victor_choice`` is ``"entangled"`` (BSM) or
    ``"separable"`` (computational product basis).
    """
    if order not in SWAP_ORDERS:
        raise ScenarioError(f"order must be one of {SWAP_ORDERS}")
    s12 = as_source(source12, 1, 2, d)
    s34 = as_source(source34, 3, 4, d)
    if victor_choice == "entangled":
        victor = bell_basis(as_source(victor_seed, 2, 3, d), "victor_23")
    elif victor_choice == "separable":
        victor = product_basis("victor_23", {2: np.eye(d), 3: np.eye(d)})
    else:
        raise ScenarioError(f"unknown victor choice {victor_choice!r}")
    if orientations is None:
        orientations = (np.eye(d), np.eye(d))
    ab = product_basis("alice_bob_14", {1: orientations[0], 4: orientations[1]})
    seq = {
        "victor_first": (victor, ab),
        "alice_bob_first": (ab, victor),
        "victor_only": (victor,),
    }[order]
    return Scenario(
        name=f"swapping[{order},{victor_choice}]",
        d=d,
        sources=(s12, s34),
        measurement_order=seq,
        bob_labels=(1, 4),
        meta={"victor_choice": victor_choice},
    )


def build_double_teleportation(
    d: int,
    input_state: Any,
    order: str = "alice_then_victor",
    source12=None,
    source34=None,
    alice_seed=None,
    victor_seed=None,
    apply_corrections: bool = False,
) -> Scenario:
    """Input on 0; Alice's BSM on (0, 1) and Victor's on (2, 3); Bob on 4."""
    alice = bell_basis(as_source(alice_seed, 0, 1, d), "alice_01")
    victor = bell_basis(as_source(victor_seed, 2, 3, d), "victor_23")
    if order == "alice_then_victor":
        seq = (alice, victor)
    elif order == "victor_then_alice":
        seq = (victor, alice)
    else:
        raise ScenarioError(f"unknown order {order!r}")
    return Scenario(
        name=f"double_teleportation[{order}]",
        d=d,
        sources=(as_source(source12, 1, 2, d), as_source(source34, 3, 4, d)),
        measurement_order=seq,
        bob_labels=(4,),
        input_label=0,
        input_state=input_state,
        apply_corrections=apply_corrections,
    )


def iso20_seed(d: int, variant: Any = "default") -> Isometry:
    """Alice's reference Bell state on (0, 2) as the isometry ``0 -> 2``.

    ``"default"`` pairs ``|i>_0`` with ``|i>_2``; ``"shifted"`` with
    ``|i+1>_2``; a unitary ``U`` gives the identity isometry composed with
    ``U`` on factor 0, whose matrix is ``conj(U)``.
    """
    if isinstance(variant, str):
        if variant == "default":
            return Isometry.identity(0, 2, d)
        if variant == "shifted":
            return Isometry(0, 2, shift(d))
        raise ScenarioError(f"unknown iso20 variant {variant!r}")
    u = np.asarray(variant, dtype=complex)
    return Isometry(0, 2, u.conj())


def build_triple_teleportation(
    d: int,
    input_state: Any,
    iso20_variant: Any = "default",
    order: str = "forward",
    include_q02: bool = True,
    source12=None,
    source34=None,
    alice01_seed=None,
    victor_seed=None,
    apply_corrections: bool = False,
) -> Scenario:
    """Input on 0; BSMs on (0, 2), (0, 1) and (2, 3); Bob on 4.

    ``forward`` measures (0, 2), (0, 1), (2, 3); ``reversed`` measures
    (2, 3), (0, 1) and then (0, 2) unless ``include_q02`` is false.
    """
    a02 = bell_basis(iso20_seed(d, iso20_variant), "alice_02")
    a01 = bell_basis(as_source(alice01_seed, 0, 1, d), "alice_01")
    victor = bell_basis(as_source(victor_seed, 2, 3, d), "victor_23")
    if order == "forward":
        seq = (a02, a01, victor)
    elif order == "reversed":
        seq = (victor, a01, a02) if include_q02 else (victor, a01)
    else:
        raise ScenarioError(f"unknown order {order!r}")
    variant_name = iso20_variant if isinstance(iso20_variant, str) else "unitary"
    return Scenario(
        name=f"triple_teleportation[{variant_name},{order}]",
        d=d,
        sources=(as_source(source12, 1, 2, d), as_source(source34, 3, 4, d)),
        measurement_order=seq,
        bob_labels=(4,),
        input_label=0,
        input_state=input_state,
        apply_corrections=apply_corrections,
        meta={"iso20_variant": variant_name, "include_q02": include_q02},
    )


@dataclass(frozen=True)
class TripleChains:
    """The literal compositions behind the two triple-teleportation orders."""

    i20_forward: Isometry  # I20^1 = I20 o I01 o I12 o I20
    i20_reversed: Isometry  # I20^2 = I21 o I10
    i40_forward: Isometry  # six-term chain
    i40_reversed: Isometry  # four-term chain


def triple_chains(scenario: Scenario, outcomes: dict | None = None) -> TripleChains:
    """Fold the isometry chains of a triple-teleportation scenario.

    ``outcomes`` maps set names to outcome indices (default all 0, the
    reference Bell states).
    """
    outcomes = outcomes or {}
    sets = {m.name: m for m in scenario.measurement_order}
    if not {"alice_02", "alice_01", "victor_23"} <= set(sets):
        raise ScenarioError("not a triple-teleportation scenario")

    def member(name):
        return sets[name].projectors[outcomes.get(name, 0)].isometry

    i20 = member("alice_02")
    i10 = member("alice_01")
    i32 = member("victor_23")
    s21, s43 = scenario.sources
    i01, i12 = invert(i10), invert(s21)
    return TripleChains(
        i20_forward=compose_chain(i20, i01, i12, i20),
        i20_reversed=compose_chain(s21, i10),
        i40_forward=compose_chain(s43, i32, i20, i01, i12, i20),
        i40_reversed=compose_chain(s43, i32, s21, i10),
    )


# prediction and comparison


@dataclass(frozen=True, eq=False)
class Prediction:
    branches: dict

    @property
    def total_prob(self) -> float:
        return float(sum(b.prob for b in self.branches.values()))

    def __getitem__(self, key) -> BranchPrediction:
        return self.branches[key]


def predict(scenario: Scenario) -> Prediction:
    comps = calculus.initial_components(scenario.sources, scenario.input_label, scenario.input_state)
    return Prediction(calculus.predict_branches(comps, scenario.measurement_order, scenario.bob_labels))


@dataclass(frozen=True, eq=False)
class OracleBranch:
    outcomes: tuple
    prob: float
    state: Ket | None  # Bob's pure state, None if zero branch or mixed


def oracle(scenario: Scenario) -> dict:
    """Brute-force state-vector run: Bob's state per outcome key."""
    records = run_history(scenario.initial_state(), scenario.measurement_order)
    out = {}
    for r in records:
        bob = marginal_pure_state(r.final_state, scenario.bob_labels) if r.possible else None
        out[r.key] = OracleBranch(r.outcomes, r.prob, bob)
    return out


@dataclass(frozen=True)
class Row:
    key: tuple
    predicted_prob: float
    oracle_prob: float
    fidelity: float | None
    corrected_fidelity: float | None
    reversed_prob: float | None
    order_fidelity: float | None


@dataclass(frozen=True)
class ComparisonReport:
    scenario: str
    d: int
    rows: tuple
    max_prob_delta: float
    min_fidelity: float | None
    min_corrected_fidelity: float | None
    bob_defined: bool
    order_dependent: bool
    max_order_prob_delta: float
    min_order_fidelity: float | None
    reference_order_fidelity: float | None
    commutators: dict
    witnesses: dict

    @property
    def agrees(self) -> bool:
        """Calculus and oracle agree on every branch."""
        fid_ok = self.min_fidelity is None or self.min_fidelity >= 1.0 - FIDELITY_TOL
        return self.max_prob_delta <= PROB_TOL and fid_ok


def _fid(a: Ket | None, b: Ket | None) -> float | None:
    if a is None and b is None:
        return None
    if a is None or b is None:
        # pure on one side, entangled with the rest on the other
        return 0.0
    return fidelity_up_to_phase(a, b)


def _corrected(scenario: Scenario, pred: BranchPrediction, bob: Ket | None) -> float | None:
    if not scenario.apply_corrections or scenario.input_label is None or bob is None:
        return None
    corr = pred.correction
    if corr is None:
        return None
    return fidelity_up_to_phase(corr.apply_to(bob), scenario.input_ket())


def pairwise_diagnostics(scenario: Scenario) -> tuple[dict, dict]:
    """Largest commutator norm and order witness over member pairs, per set pair."""
    initial = scenario.initial_state()
    sets = scenario.measurement_order
    commutators, witnesses = {}, {}
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            a, b = sets[i], sets[j]
            name = f"{a.name}|{b.name}"
            if not set(a.labels) & set(b.labels):
                commutators[name] = 0.0
                witnesses[name] = 0.0
                continue
            norms = [commutator_norm(p, q) for p in a.projectors for q in b.projectors]
            wits = [abs(order_independence_witness(initial, p, q)) for p in a.projectors for q in b.projectors]
            commutators[name] = float(max(norms))
            witnesses[name] = float(max(wits))
    return commutators, witnesses


def run_and_compare(scenario: Scenario, diagnostics: bool = True) -> ComparisonReport:
    """Run the oracle and the calculus branch by branch, in both orders."""
    pred = predict(scenario)
    orc = oracle(scenario)
    rev = oracle(scenario.reversed())
    if set(pred.branches) != set(orc):
        raise ScenarioError("calculus and oracle enumerate different outcome keys")
    rows = []
    for key, o in orc.items():
        p = pred[key]
        live = o.prob > 1e-12
        r = rev.get(key)
        rows.append(Row(
            key=key,
            predicted_prob=p.prob,
            oracle_prob=o.prob,
            fidelity=_fid(p.state, o.state) if live else None,
            corrected_fidelity=_corrected(scenario, p, o.state) if live else None,
            reversed_prob=None if r is None else r.prob,
            order_fidelity=_fid(o.state, r.state) if (r is not None and live and r.prob > 1e-12) else None,
        ))
    fids = [r.fidelity for r in rows if r.fidelity is not None]
    cfids = [r.corrected_fidelity for r in rows if r.corrected_fidelity is not None]
    ofids = [r.order_fidelity for r in rows if r.order_fidelity is not None]
    order_deltas = [abs(r.oracle_prob - r.reversed_prob) if r.reversed_prob is not None else 1.0 for r in rows]
    bob_defined = all(o.state is not None for o in orc.values() if o.prob > 1e-12)
    max_order_delta = max(order_deltas) if order_deltas else 0.0
    order_dependent = (
        set(rev) != set(orc)
        or max_order_delta > PROB_TOL
        or (bool(ofids) and min(ofids) < 1.0 - FIDELITY_TOL)
    )
    ref_key = tuple(sorted(((m.name, 0) for m in scenario.measurement_order), key=lambda o: o[0]))
    ref_row = next((r for r in rows if r.key == ref_key), None)
    commutators, witnesses = pairwise_diagnostics(scenario) if diagnostics else ({}, {})
    return ComparisonReport(
        scenario=scenario.name,
        d=scenario.d,
        rows=tuple(rows),
        max_prob_delta=max(abs(r.predicted_prob - r.oracle_prob) for r in rows),
        min_fidelity=min(fids) if fids else None,
        min_corrected_fidelity=min(cfids) if cfids else None,
        bob_defined=bob_defined,
        order_dependent=order_dependent,
        max_order_prob_delta=max_order_delta,
        min_order_fidelity=min(ofids) if ofids else None,
        reference_order_fidelity=None if ref_row is None else ref_row.order_fidelity,
        commutators=commutators,
        witnesses=witnesses,
    )
