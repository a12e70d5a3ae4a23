"""Labeled multi-factor pure states.

A :class:`Ket` stores its amplitudes as an ``n``-dimensional array with one
axis per labeled factor. Axes are kept in canonical label order, so every
public function addresses factors by label and never by storage position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

Label = Hashable

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
ZERO_PROB = 1e-14


class LabelError(ValueError):
    """Raised when factor labels do not fit the requested operation."""


class LabelCollisionError(LabelError):
    """Raised when two states that must be disjoint share a label."""


class FullContractionError(LabelError):
    """Raised when a partial scalar product would contract every factor."""


class ShapeError(ValueError):
    """Raised when a matrix does not match the dimensions it acts on."""


def label_key(label: Label) -> tuple:
    # ints sort before strings; mixed label types stay comparable
    return (isinstance(label, str), label)


def canonical(labels: Iterable[Label]) -> tuple:
    return tuple(sorted(labels, key=label_key))


class Ket:
    """Pure state on an ordered set of labeled qudit factors.

    Parameters
    ----------
    labels:
        Factor labels, in the order the amplitude axes are given.
    amps:
        Either an array with one axis per label or a flat vector in
        row-major order over ``labels``; a flat vector requires ``dims``.
    dims:
        Dimension of each factor (an int applies to every factor).
    """

    __slots__ = ("labels", "amps")

    def __init__(self, labels: Sequence[Label], amps: Any, dims: int | Sequence[int] | None = None):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise LabelCollisionError(f"repeated label in {labels}")
        amps = np.asarray(amps, dtype=complex)
        if dims is not None:
            if isinstance(dims, (int, np.integer)):
                dims = (int(dims),) * len(labels)
            dims = tuple(dims)
            if len(dims) != len(labels):
                raise ShapeError("one dimension per label is required")
            if amps.size != int(np.prod(dims)):
                raise ShapeError(f"{amps.size} amplitudes do not fit dimensions {dims}")
            amps = amps.reshape(dims)
        elif amps.ndim != len(labels):
            raise ShapeError(f"expected {len(labels)} axes, got array of shape {amps.shape}")
        if any(n < 1 for n in amps.shape):
            raise ShapeError("factor dimensions must be positive")
        order = sorted(range(len(labels)), key=lambda k: label_key(labels[k]))
        amps = np.array(np.transpose(amps, order), order="C")
        amps.setflags(write=False)
        self.labels = tuple(labels[k] for k in order)
        self.amps = amps

    # constructors

    @classmethod
    def basis(cls, labels: Sequence[Label], indices: Sequence[int], d: int) -> Ket:
        """Computational basis ket ``|indices>`` on ``labels``."""
        amps = np.zeros((d,) * len(labels), dtype=complex)
        amps[tuple(indices)] = 1.0
        return cls(labels, amps)

    @classmethod
    def from_vector(cls, label: Label, vector: Any) -> Ket:
        vector = np.asarray(vector, dtype=complex).ravel()
        return cls((label,), vector)

    @classmethod
    def random(cls, labels: Sequence[Label], d: int, rng: np.random.Generator) -> Ket:
        """Haar-random normalized ket."""
        shape = (d,) * len(labels)
        amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return cls(labels, amps / np.linalg.norm(amps))

    # views

    @property
    def dims(self) -> tuple[int, ...]:
        return self.amps.shape

    def dim_of(self, label: Label) -> int:
        return self.amps.shape[self.labels.index(label)]

    @property
    def vector(self) -> np.ndarray:
        """Flat amplitude vector, row-major over canonical label order."""
        return self.amps.ravel()

    def as_array(self, order: Sequence[Label]) -> np.ndarray:
        """Amplitudes with axes permuted into ``order``."""
        order = tuple(order)
        if set(order) != set(self.labels) or len(order) != len(self.labels):
            raise LabelError(f"{order} is not a permutation of {self.labels}")
        return np.transpose(self.amps, [self.labels.index(lab) for lab in order])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> Ket:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.labels, self.amps / n)

    def scaled(self, factor: complex) -> Ket:
        return Ket(self.labels, self.amps * factor)

    def __repr__(self) -> str:
        return f"Ket(labels={self.labels}, dims={self.dims})"


@dataclass(frozen=True)
class Operator:
    """Square matrix acting on the multi-index of ``domain`` (in that order)."""

    domain: tuple
    matrix: np.ndarray
    unitary_hint: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"operator matrix must be square, got {m.shape}")
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "matrix", m)
        if self.unitary_hint and not is_unitary(m):
            raise ValueError("matrix flagged unitary is not unitary")


@dataclass(frozen=True)
class Projector:
    """Rank-1 projector, or a tensor product of rank-1 projectors.

    Each part is a normalized :class:`Ket`; parts live on disjoint labels.
    ``isometry`` optionally records the antilinear isometry a two-factor
    maximally entangled part was built from.
    """

    parts: tuple
    isometry: Any = field(default=None, compare=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a projector needs at least one part")
        seen: set = set()
        for p in parts:
            if seen & set(p.labels):
                raise LabelCollisionError("product projector parts must be disjoint")
            seen |= set(p.labels)
            if not p.is_normalized(1e-10):
                raise ValueError("projector vectors must be normalized")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def onto(cls, ket: Ket, isometry: Any = None) -> Projector:
        return cls((ket,), isometry)

    @classmethod
    def product(cls, kets: Iterable[Ket]) -> Projector:
        return cls(tuple(kets))

    @property
    def labels(self) -> tuple:
        return canonical(lab for p in self.parts for lab in p.labels)

    @property
    def vector(self) -> Ket:
        """The projector's range vector as a single ket."""
        out = self.parts[0]
        for p in self.parts[1:]:
            out = tensor(out, p)
        return out

    def matrix(self, order: Sequence[Label] | None = None) -> np.ndarray:
        """Dense matrix on ``order`` (default: canonical label order)."""
        order = self.labels if order is None else tuple(order)
        v = self.vector.as_array(order).ravel()
        return np.outer(v, v.conj())

    def apply(self, state: Ket) -> Ket:
        """Unnormalized ``P|state>``."""
        if not set(self.labels) <= set(state.labels):
            raise LabelError(f"projector labels {self.labels} not in state {state.labels}")
        out = state
        for p in self.parts:
            out = tensor(p, _contract(p, out))
        return out


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and (
        np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol
    )


def tensor(a: Ket, b: Ket) -> Ket:
    """Tensor product of kets on disjoint label sets."""
    shared = set(a.labels) & set(b.labels)
    if shared:
        raise LabelCollisionError(f"labels {sorted(shared, key=label_key)} appear in both factors")
    amps = np.multiply.outer(a.amps, b.amps)
    return Ket(a.labels + b.labels, amps)


def inner(a: Ket, b: Ket) -> complex:
    """Full scalar product ``<a|b>``."""
    if set(a.labels) != set(b.labels):
        raise LabelError(f"label mismatch: {a.labels} vs {b.labels}")
    return complex(np.vdot(a.amps, b.amps))


def _contract(bra: Ket, state: Ket) -> Ket:
    # partial scalar product allowing an empty (scalar) remainder
    if not set(bra.labels) <= set(state.labels):
        raise LabelError(f"bra labels {bra.labels} are not a subset of {state.labels}")
    rest = tuple(lab for lab in state.labels if lab not in bra.labels)
    arr = state.as_array(bra.labels + rest)
    n = len(bra.labels)
    if bra.dims != arr.shape[:n]:
        raise ShapeError(f"dimension mismatch {bra.dims} vs {arr.shape[:n]}")
    out = np.tensordot(bra.amps.conj(), arr, axes=(list(range(n)), list(range(n))))
    return Ket(rest, out)


def partial_inner(bra: Ket, state: Ket) -> Ket:
    """Contract ``conj(bra)`` against ``state`` over the bra's labels.

    The result is the generally unnormalized ket on the labels of ``state``
    that ``bra`` does not cover.
    """
    if set(bra.labels) == set(state.labels):
        raise FullContractionError("bra covers every factor; use inner() instead")
    return _contract(bra, state)


def apply(op: Operator, state: Ket, target_labels: Sequence[Label] | None = None) -> Ket:
    """Apply ``op`` to the factors ``target_labels`` (default ``op.domain``)."""
    targets = tuple(op.domain if target_labels is None else target_labels)
    if len(set(targets)) != len(targets):
        raise LabelCollisionError(f"repeated target label in {targets}")
    if not set(targets) <= set(state.labels):
        raise LabelError(f"targets {targets} not in state {state.labels}")
    rest = tuple(lab for lab in state.labels if lab not in targets)
    arr = state.as_array(targets + rest)
    tdims = arr.shape[: len(targets)]
    size = int(np.prod(tdims))
    if op.matrix.shape != (size, size):
        raise ShapeError(f"matrix {op.matrix.shape} does not act on dimensions {tdims}")
    out = (op.matrix @ arr.reshape(size, -1)).reshape(arr.shape)
    return Ket(targets + rest, out)


def project(p: Projector, state: Ket) -> tuple[Ket | None, float]:
    """Projective collapse onto ``p``.

    Returns ``(collapsed, prob)``. An outcome with probability below
    ``ZERO_PROB`` is a zero branch and comes back as ``(None, prob)``.
    """
    if not state.is_normalized(1e-9):
        raise ValueError(f"state must be normalized (norm {state.norm():.3e})")
    projected = p.apply(state)
    prob = min(projected.norm() ** 2, 1.0)
    if prob < ZERO_PROB:
        return None, prob
    return projected.scaled(1.0 / np.sqrt(prob)), prob


def fidelity_up_to_phase(a: Ket, b: Ket) -> float:
    """``|<a|b>|^2`` for normalized kets on the same labels."""
    return float(min(abs(inner(a, b)) ** 2, 1.0))


def reduced_density(state: Ket, keep: Sequence[Label]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (rows ordered as given)."""
    keep = tuple(keep)
    rest = tuple(lab for lab in state.labels if lab not in keep)
    arr = state.as_array(keep + rest)
    size = int(np.prod(arr.shape[: len(keep)]))
    m = arr.reshape(size, -1)
    return m @ m.conj().T


def schmidt_coefficients(state: Ket, part: Sequence[Label]) -> np.ndarray:
    part = tuple(part)
    rest = tuple(lab for lab in state.labels if lab not in part)
    arr = state.as_array(part + rest)
    size = int(np.prod(arr.shape[: len(part)]))
    return np.linalg.svd(arr.reshape(size, -1), compute_uv=False)


def schmidt_rank(state: Ket, part: Sequence[Label], tol: float = 1e-9) -> int:
    return int(np.sum(schmidt_coefficients(state, part) > tol))


def marginal_pure_state(state: Ket, keep: Sequence[Label], tol: float = 1e-9) -> Ket | None:
    """The pure state on ``keep`` if the reduced state is pure, else ``None``."""
    keep = canonical(keep)
    if set(keep) == set(state.labels):
        return state
    rho = reduced_density(state, keep)
    w, v = np.linalg.eigh(rho)
    total = float(np.real(np.trace(rho)))
    if total <= 0.0 or w[-1] < total * (1.0 - tol):
        return None
    dims = tuple(state.dim_of(lab) for lab in keep)
    return Ket(keep, v[:, -1], dims)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``d x d`` unitary."""
    return unitary_group.rvs(d, random_state=rng)
