"""Operator-space primitives: states, the trace inner product, and Liouvillians.

Operators on an N-dimensional Hilbert space are treated as vectors under the
infinite-temperature inner product (A|B) = Tr[A^dag B] / N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

HERMITICITY_TOL = 1e-12
NULL_TOL = 1e-28


class NullOperatorError(ValueError):
    """Raised when an operator with (O|O) below the null threshold is normalized."""


@dataclass(frozen=True)
class HilbertSpace:
    """Finite Hilbert space of dimension ``dim`` (>= 2)."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"Hilbert space dimension must be >= 2, got {self.dim}")


@dataclass
class OperatorState:
    """A dense operator viewed as a vector in operator space.

    Parameters
    ----------
    matrix : complex ndarray, shape (N, N)
    hermitian : bool
        Declares the operator Hermitian. Checked against the matrix on
        construction with max-entry tolerance ``HERMITICITY_TOL``.
    """

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] < 2:
            raise ValueError("operator acts on a Hilbert space of dimension >= 2")
        self.matrix = m
        if self.hermitian:
            dev = np.max(np.abs(m - m.conj().T))
            if dev > HERMITICITY_TOL:
                raise ValueError(
                    f"operator declared Hermitian but max |O - O^dag| = {dev:.3e}"
                )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.matrix.shape[0])


@dataclass
class Hamiltonian:
    """A Hermitian matrix together with the model metadata that produced it."""

    matrix: np.ndarray
    model: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Hamiltonian must be square, got shape {m.shape}")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITICITY_TOL:
            raise ValueError(f"Hamiltonian is not Hermitian: max |H - H^dag| = {dev:.3e}")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _as_matrix(op: OperatorState | Hamiltonian | np.ndarray) -> np.ndarray:
    if isinstance(op, (OperatorState, Hamiltonian)):
        return op.matrix
    return np.asarray(op, dtype=complex)


def inner_product(a: OperatorState | np.ndarray, b: OperatorState | np.ndarray) -> complex:
    """Return (A|B) = Tr[A^dag B] / N.

    Raises ``ValueError`` on mismatched shapes.
    """
    am, bm = _as_matrix(a), _as_matrix(b)
    if am.shape != bm.shape:
        raise ValueError(f"operator shape mismatch: {am.shape} vs {bm.shape}")
    return complex(np.vdot(am, bm) / am.shape[0])


def norm(a: OperatorState | np.ndarray) -> float:
    """Operator-space norm sqrt((A|A))."""
    am = _as_matrix(a)
    return float(np.linalg.norm(am)) / np.sqrt(am.shape[0])


def hermitize(op: OperatorState | np.ndarray) -> OperatorState:
    """Project onto the Hermitian part, (O + O^dag) / 2."""
    m = _as_matrix(op)
    return OperatorState(0.5 * (m + m.conj().T), hermitian=True)


def normalize(op: OperatorState | np.ndarray) -> OperatorState:
    """Scale so that (O|O) = 1.

    Raises ``NullOperatorError`` if (O|O) <= ``NULL_TOL``.
    """
    m = _as_matrix(op)
    sq = np.vdot(m, m).real / m.shape[0]
    if sq <= NULL_TOL:
        raise NullOperatorError(f"cannot normalize: (O|O) = {sq:.3e} <= {NULL_TOL}")
    hermitian = op.hermitian if isinstance(op, OperatorState) else False
    return OperatorState(m / np.sqrt(sq), hermitian=hermitian)


def apply_liouvillian(
    h: Hamiltonian | np.ndarray, op: OperatorState | np.ndarray
) -> OperatorState:
    """Apply L = i[H, . ].

    L maps Hermitian operators to Hermitian operators, so the flag propagates.
    """
    hm, om = _as_matrix(h), _as_matrix(op)
    if hm.shape != om.shape:
        raise ValueError(f"shape mismatch: H is {hm.shape}, O is {om.shape}")
    res = 1j * (hm @ om - om @ hm)
    hermitian = op.hermitian if isinstance(op, OperatorState) else False
    return OperatorState(res, hermitian=hermitian)


def apply_liouvillian_tilde(
    h: Hamiltonian | np.ndarray, op: OperatorState | np.ndarray
) -> OperatorState:
    """Apply Ltilde = [H, . ] (self-adjoint under the trace inner product).

    Ltilde alternates Hermitian and anti-Hermitian sectors, so no Hermiticity
    flag is inferred on the output.
    """
    hm, om = _as_matrix(h), _as_matrix(op)
    if hm.shape != om.shape:
        raise ValueError(f"shape mismatch: H is {hm.shape}, O is {om.shape}")
    return OperatorState(hm @ om - om @ hm, hermitian=False)
