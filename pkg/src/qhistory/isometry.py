"""Parity-tracked isometries between single qudit factors.

An :class:`Isometry` maps vectors of factor ``source`` onto factor
``target``. A linear one acts as ``v -> M v``, an antilinear one as
``v -> M conj(v)``. Maximally entangled two-factor states and antilinear
isometries are in one-to-one correspondence::

    |psi> = d**-0.5 * sum_i |e_i>_source (x) |I e_i>_target

so ``<i_source, j_target | psi> = M[j, i] / sqrt(d)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .tensor_core import Ket, Label, Operator, is_unitary, reduced_density

PHASE_TOL = 1e-9


class ParityError(ValueError):
    """Raised when a linear map is given where an antilinear one is needed."""


class CompositionError(ValueError):
    """Raised when the range of one isometry is not the domain of the next."""


class NotMaximallyEntangledError(ValueError):
    """Raised when a state does not define an isometry.

    ``deviation`` is the largest entry of ``|rho_source - 1/d|``.
    """

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


@dataclass(frozen=True, eq=False)
class Isometry:
    """Unitary map from factor ``source`` to factor ``target``."""

    source: Label
    target: Label
    matrix: np.ndarray
    antilinear: bool = True

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"isometry matrix must be square, got shape {m.shape}")
        if not is_unitary(m):
            raise ValueError("isometry matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, source: Label, target: Label, d: int, antilinear: bool = True) -> Isometry:
        return cls(source, target, np.eye(d), antilinear)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return self.matrix @ (v.conj() if self.antilinear else v)

    def apply_to(self, ket: Ket) -> Ket:
        """Carry a single-factor ket on ``source`` over to ``target``."""
        if ket.labels != (self.source,):
            raise CompositionError(f"isometry acts on {self.source!r}, ket lives on {ket.labels}")
        return Ket((self.target,), self(ket.vector))

    def __repr__(self) -> str:
        kind = "antilinear" if self.antilinear else "linear"
        return f"Isometry({self.target!r} <- {self.source!r}, {kind}, d={self.d})"


def compose(second: Isometry, first: Isometry) -> Isometry:
    """``second o first``: apply ``first``, then ``second``."""
    if first.target != second.source:
        raise CompositionError(
            f"cannot compose {second!r} after {first!r}: {first.target!r} != {second.source!r}"
        )
    inner = first.matrix.conj() if second.antilinear else first.matrix
    return Isometry(first.source, second.target, second.matrix @ inner, first.antilinear != second.antilinear)


def compose_chain(*isos: Isometry) -> Isometry:
    """Fold ``isos[0] o isos[1] o ... o isos[-1]`` (rightmost acts first)."""
    if not isos:
        raise CompositionError("empty chain")
    out = isos[-1]
    for iso in reversed(isos[:-1]):
        out = compose(iso, out)
    return out


def invert(iso: Isometry) -> Isometry:
    # (v -> M conj v)^-1 is w -> conj(M^dag w) = M^T conj(w)
    m = iso.matrix.T if iso.antilinear else iso.matrix.conj().T
    return Isometry(iso.target, iso.source, m, iso.antilinear)


def linear(label: Label, u: np.ndarray) -> Isometry:
    """A unitary on one factor, viewed as a linear isometry onto itself."""
    return Isometry(label, label, u, antilinear=False)


def state_from_isometry(iso: Isometry, basis: np.ndarray | None = None) -> Ket:
    """Maximally entangled state on ``(source, target)`` defined by ``iso``.

    ``basis`` (columns, an orthonormal basis of the source factor) selects
    the basis the defining sum runs over; the result does not depend on it.
    """
    if not iso.antilinear:
        raise ParityError("only antilinear isometries correspond to entangled states")
    d = iso.d
    if basis is None:
        amps = iso.matrix.T / np.sqrt(d)
    else:
        basis = np.asarray(basis, dtype=complex)
        amps = sum(np.outer(basis[:, k], iso(basis[:, k])) for k in range(d)) / np.sqrt(d)
    return Ket((iso.source, iso.target), amps)


def isometry_from_state(state: Ket, source: Label | None = None, tol: float = 1e-9) -> Isometry:
    """Antilinear isometry of a maximally entangled two-factor state.

    ``source`` picks the domain factor; it defaults to the first label.
    """
    if len(state.labels) != 2:
        raise ValueError(f"need a two-factor state, got labels {state.labels}")
    source = state.labels[0] if source is None else source
    if source not in state.labels:
        raise ValueError(f"{source!r} is not a factor of {state.labels}")
    target = next(lab for lab in state.labels if lab != source)
    d = state.dim_of(source)
    if state.dim_of(target) != d:
        raise ValueError("both factors must share one dimension")
    rho = reduced_density(state, (source,))
    deviation = float(np.max(np.abs(rho - np.eye(d) / d)))
    if deviation > tol:
        raise NotMaximallyEntangledError(
            f"state is not maximally entangled (reduced-state deviation {deviation:.3e})", deviation
        )
    amps = state.as_array((source, target))
    return Isometry(source, target, np.sqrt(d) * amps.T, antilinear=True)


def transported_conjugate(iso: Isometry, u: np.ndarray) -> np.ndarray:
    """The operator ``V`` on the range with ``iso o U = V o iso``.

    For an antilinear ``iso`` this is ``M conj(U) M^dag``, which reduces to
    ``conj(U)`` when ``M`` is the identity.
    """
    m = iso.matrix
    uu = np.conj(u) if iso.antilinear else np.asarray(u)
    return m @ uu @ m.conj().T


def conjugation_transport(iso: Isometry, u: Operator, tol: float = 1e-12) -> Isometry:
    """``iso o U`` for a unitary ``U`` on the source factor.

    Computed directly and as ``V o iso`` with ``V`` the transported
    conjugate; the two matrices must agree.
    """
    if u.domain != (iso.source,):
        raise ValueError(f"unitary acts on {u.domain}, isometry domain is {iso.source!r}")
    if not is_unitary(u.matrix):
        raise ValueError("transport requires a unitary operator")
    direct = compose(iso, linear(iso.source, u.matrix))
    via_range = transported_conjugate(iso, u.matrix) @ iso.matrix
    gap = float(np.max(np.abs(direct.matrix - via_range)))
    if gap > tol:
        raise ArithmeticError(f"transport representations disagree by {gap:.3e}")
    return direct


class PhaseComparison(NamedTuple):
    equal: bool
    reason: str  # "equal", "labels", "parity", "shape" or "matrix"


def compare_up_to_phase(a: Isometry, b: Isometry, tol: float = PHASE_TOL) -> PhaseComparison:
    if (a.source, a.target) != (b.source, b.target):
        return PhaseComparison(False, "labels")
    if a.antilinear != b.antilinear:
        return PhaseComparison(False, "parity")
    if a.matrix.shape != b.matrix.shape:
        return PhaseComparison(False, "shape")
    # largest entry of b as phase reference avoids dividing by near-zeros
    ref = np.unravel_index(np.argmax(np.abs(b.matrix)), b.matrix.shape)
    if abs(a.matrix[ref]) < tol:
        return PhaseComparison(False, "matrix")
    phase = a.matrix[ref] / b.matrix[ref]
    phase /= abs(phase)
    if np.max(np.abs(a.matrix - phase * b.matrix)) > tol:
        return PhaseComparison(False, "matrix")
    return PhaseComparison(True, "equal")


def iso_equal_up_to_phase(a: Isometry, b: Isometry, tol: float = PHASE_TOL) -> bool:
    return compare_up_to_phase(a, b, tol).equal


def shift(d: int, power: int = 1) -> np.ndarray:
    """Cyclic shift ``|i> -> |i + power mod d>``."""
    return np.roll(np.eye(d, dtype=complex), power % d, axis=0)


def clock(d: int, power: int = 1) -> np.ndarray:
    """Phase operator ``|i> -> w**(power*i) |i>`` with ``w = exp(2 pi i / d)``."""
    return np.diag(np.exp(2j * np.pi * power * np.arange(d) / d))


def weyl(d: int, a: int, b: int) -> np.ndarray:
    return shift(d, a) @ clock(d, b)


def bell_member(seed: Isometry, a: int, b: int) -> Isometry:
    """Member ``(a, b)`` of the generalized Bell family grown from ``seed``.

    The matrices ``M_seed X^a Z^b`` give ``d**2`` mutually orthogonal
    maximally entangled states; ``(0, 0)`` is the seed itself.
    """
    if not seed.antilinear:
        raise ParityError("Bell family seed must be antilinear")
    return Isometry(seed.source, seed.target, seed.matrix @ weyl(seed.d, a, b), True)


def bell_family(seed: Isometry) -> list[Isometry]:
    """All ``d**2`` members, index ``k = a*d + b``."""
    d = seed.d
    return [bell_member(seed, a, b) for a in range(d) for b in range(d)]

