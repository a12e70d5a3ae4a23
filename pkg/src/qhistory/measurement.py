"""Projective measurements and sequential quantum histories."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .isometry import Isometry, bell_family, state_from_isometry
from .tensor_core import (
    ZERO_PROB,
    Ket,
    Label,
    LabelError,
    Projector,
    canonical,
)

SET_TOL = 1e-10


class IncompleteMeasurementError(ValueError):
    """Raised when a measurement set is not a complete orthogonal family."""


Outcome = tuple  # (set name, index)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Ordered family of projectors on one group of factors."""

    name: str
    projectors: tuple

    def __post_init__(self):
        projectors = tuple(self.projectors)
        if not projectors:
            raise ValueError("a measurement set needs projectors")
        labels = projectors[0].labels
        if any(p.labels != labels for p in projectors):
            raise LabelError(f"projectors of {self.name!r} act on different factors")
        object.__setattr__(self, "projectors", projectors)

    @property
    def labels(self) -> tuple:
        return self.projectors[0].labels

    def __len__(self) -> int:
        return len(self.projectors)

    @cached_property
    def _vectors(self) -> np.ndarray:
        # column k is projector k's range vector, rows in canonical label order
        return np.stack([p.vector.as_array(self.labels).ravel() for p in self.projectors], axis=1)

    def completeness_error(self) -> float:
        """Max-modulus deviation of the Gram matrix and of ``sum P`` from 1."""
        v = self._vectors
        gram = v.conj().T @ v
        resolution = v @ v.conj().T
        return float(max(
            np.max(np.abs(gram - np.eye(gram.shape[0]))),
            np.max(np.abs(resolution - np.eye(resolution.shape[0]))),
        ))

    def check_complete(self, tol: float = SET_TOL) -> None:
        err = self.completeness_error()
        if err > tol:
            raise IncompleteMeasurementError(
                f"measurement set {self.name!r} is not complete and orthogonal (deviation {err:.3e})"
            )

    def outcomes(self, state: Ket) -> list[tuple[Ket | None, float]]:
        """Collapsed state and probability for every projector, in order.

        Same result as calling :func:`~qhistory.tensor_core.project` per
        projector, computed in one contraction.
        """
        labels = self.labels
        rest = tuple(lab for lab in state.labels if lab not in labels)
        arr = state.as_array(labels + rest)
        size = self._vectors.shape[0]
        flat = arr.reshape(size, -1)
        coeffs = self._vectors.conj().T @ flat
        probs = np.minimum(np.sum(np.abs(coeffs) ** 2, axis=1), 1.0)
        out = []
        for k, prob in enumerate(probs):
            if prob < ZERO_PROB:
                out.append((None, float(prob)))
                continue
            amps = np.outer(self._vectors[:, k], coeffs[k] / np.sqrt(prob)).reshape(arr.shape)
            out.append((Ket(labels + rest, amps), float(prob)))
        return out


def bell_basis(seed: Isometry, name: str | None = None) -> MeasurementSet:
    """Bell-state measurement on ``(seed.source, seed.target)``.

    Projector ``k`` is onto the state of the ``k``-th generalized Bell
    member; each projector remembers its isometry.
    """
    members = bell_family(seed)
    name = name or f"bsm_{seed.source}{seed.target}"
    return MeasurementSet(name, tuple(Projector.onto(state_from_isometry(m), m) for m in members))


def product_basis(name: str, bases: Mapping[Label, np.ndarray]) -> MeasurementSet:
    """Product measurement; ``bases[label]`` holds an orthonormal basis as columns.

    Outcome indices run lexicographically over the labels in canonical order.
    """
    labels = canonical(bases)
    cols = [np.asarray(bases[lab], dtype=complex) for lab in labels]
    projectors = []
    for idx in np.ndindex(*(c.shape[1] for c in cols)):
        parts = tuple(Ket.from_vector(lab, c[:, i]) for lab, c, i in zip(labels, cols, idx))
        projectors.append(Projector.product(parts))
    return MeasurementSet(name, tuple(projectors))


def computational_basis(name: str, labels: Iterable[Label], d: int) -> MeasurementSet:
    return product_basis(name, {lab: np.eye(d) for lab in labels})


@dataclass(frozen=True, eq=False)
class HistoryRecord:
    """One branch of a measurement sequence.

    ``final_state`` is ``None`` on a zero-probability branch.
    """

    outcomes: tuple
    prob: float
    final_state: Ket | None = field(default=None, repr=False)

    @property
    def possible(self) -> bool:
        return self.final_state is not None

    @property
    def key(self) -> tuple:
        return outcome_key(self.outcomes)


def outcome_key(outcomes: Iterable[Outcome]) -> tuple:
    """Order-insensitive key: ``(set name, index)`` pairs sorted by name."""
    return tuple(sorted(outcomes, key=lambda o: o[0]))


def _validate(initial: Ket, sequence: Sequence[MeasurementSet]) -> None:
    if not initial.is_normalized(1e-9):
        raise ValueError("initial state must be normalized")
    names = [m.name for m in sequence]
    if len(set(names)) != len(names):
        raise ValueError(f"measurement set names must be unique, got {names}")
    for m in sequence:
        if not set(m.labels) <= set(initial.labels):
            raise LabelError(f"set {m.name!r} acts on {m.labels}, state has {initial.labels}")
        m.check_complete()


def run_history(initial: Ket, sequence: Sequence[MeasurementSet]) -> list[HistoryRecord]:
    """Enumerate every outcome branch of ``sequence`` applied in order.

    Zero-probability branches are kept (with ``final_state=None``) and
    expanded to full length, so every record has one outcome per set.
    """
    sequence = tuple(sequence)
    _validate(initial, sequence)
    records: list[HistoryRecord] = []

    def walk(state: Ket | None, prob: float, step: int, outcomes: tuple) -> None:
        if step == len(sequence):
            records.append(HistoryRecord(outcomes, prob, state))
            return
        mset = sequence[step]
        if state is None:
            branches = [(None, 0.0)] * len(mset)
        else:
            branches = mset.outcomes(state)
        for k, (collapsed, p) in enumerate(branches):
            walk(collapsed, prob * p if collapsed is not None else 0.0, step + 1,
                 outcomes + ((mset.name, k),))

    walk(initial, 1.0, 0, ())
    return records


def joint_distribution(records: Iterable[HistoryRecord]) -> dict[tuple, float]:
    table: dict[tuple, float] = {}
    for r in records:
        table[r.key] = table.get(r.key, 0.0) + r.prob
    return table


def _embed(m: np.ndarray, labels: tuple, order: tuple, d: int) -> np.ndarray:
    # extend m (acting on labels) by identity onto order, rows/cols in order
    rest = tuple(lab for lab in order if lab not in labels)
    full = np.kron(m, np.eye(d ** len(rest)))
    n = len(order)
    src = labels + rest
    perm = [src.index(lab) for lab in order]
    t = full.reshape((d,) * (2 * n))
    t = np.transpose(t, perm + [n + k for k in perm])
    return t.reshape(d**n, d**n)


def _dimension(p: Projector) -> int:
    return p.parts[0].dims[0]


def commutator_norm(p: Projector, q: Projector) -> float:
    """Max-modulus entry of ``PQ - QP`` on the union of their factors."""
    if not set(p.labels) & set(q.labels):
        return 0.0
    order = canonical(set(p.labels) | set(q.labels))
    d = _dimension(p)
    pm = _embed(p.matrix(), p.labels, order, d)
    qm = _embed(q.matrix(), q.labels, order, d)
    return float(np.max(np.abs(pm @ qm - qm @ pm)))


def commutes(p: Projector, q: Projector, tol: float = SET_TOL) -> tuple[bool, float]:
    norm = commutator_norm(p, q)
    return norm <= tol, norm


def order_independence_witness(initial: Ket, p: Projector, q: Projector) -> float:
    """``Tr rho (QPQ - PQP)`` for ``rho = |initial><initial|``.

    The first term is the probability of finding ``q`` then ``p``, the
    second of ``p`` then ``q``.
    """
    qpq = q.apply(p.apply(q.apply(initial)))
    pqp = p.apply(q.apply(p.apply(initial)))
    return float(np.real(np.vdot(initial.amps, qpq.amps) - np.vdot(initial.amps, pqp.amps)))


class _Sampler:
    """Shared prefix cache so repeated draws reuse branch computations."""

    def __init__(self, initial: Ket, sequence: Sequence[MeasurementSet]):
        self.initial = initial
        self.sequence = tuple(sequence)
        self._cache: dict[tuple, tuple[list, np.ndarray]] = {}

    def _branches(self, prefix: tuple, state: Ket):
        hit = self._cache.get(prefix)
        if hit is None:
            branches = self.sequence[len(prefix)].outcomes(state)
            probs = np.array([p for _, p in branches])
            hit = (branches, np.cumsum(probs / probs.sum()))
            self._cache[prefix] = hit
        return hit

    def draw(self, rng: np.random.Generator) -> HistoryRecord:
        state, prob, prefix = self.initial, 1.0, ()
        for mset in self.sequence:
            branches, cdf = self._branches(prefix, state)
            k = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(cdf) - 1)
            # never land on a zero branch through rounding at the cdf edges
            while branches[k][0] is None:
                k = (k - 1) % len(branches)
            state, p = branches[k]
            prob *= p
            prefix = prefix + (k,)
        outcomes = tuple((m.name, k) for m, k in zip(self.sequence, prefix))
        return HistoryRecord(outcomes, prob, state)


def sample_history(initial: Ket, sequence: Sequence[MeasurementSet], seed: int) -> HistoryRecord:
    """Draw one branch, each outcome from its conditional distribution."""
    _validate(initial, sequence)
    return _Sampler(initial, sequence).draw(np.random.default_rng(seed))


def sample_histories(initial: Ket, sequence: Sequence[MeasurementSet], n: int, seed: int) -> list[HistoryRecord]:
    """``n`` independent draws from one seeded generator."""
    _validate(initial, sequence)
    sampler = _Sampler(initial, sequence)
    rng = np.random.default_rng(seed)
    return [sampler.draw(rng) for _ in range(n)]
