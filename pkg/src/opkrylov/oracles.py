"""Independent cross-checks for the Lanczos engine.

Three routes that never touch the engine:

* ``exact_autocorrelation``: C(t) = (O_0 | e^{iHt} O_0 e^{-iHt}) by full
  eigendecomposition, for validating chain dynamics (phi_0 must equal C).
* ``moments``: mu_2k = (O_0 | Ltilde^{2k} O_0) by repeated commutators,
  optionally in exact rational arithmetic.
* ``bn_from_moments``: the Hankel/Chebyshev recursion recovering b_n from the
  moments, which the engine's coefficients must reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import OperatorState, _as_matrix, normalize
from .observables import DENSE_EIGENSOLVE_LIMIT

MAX_MOMENT_ORDER = 12


def exact_autocorrelation(
    h, o0: OperatorState | np.ndarray, times: Sequence[float] | np.ndarray
) -> np.ndarray:
    """Infinite-temperature autocorrelation C(t) of a Hermitian operator.

    C(t) = sum_{ab} |O'_{ab}|^2 e^{i(E_a - E_b)t} / N in the eigenbasis of H.
    The operator is normalized internally, so C(0) = 1. The imaginary part is
    asserted to stay below 1e-10 and the real part is returned.
    """
    hm = _as_matrix(h)
    if hm.shape[0] > DENSE_EIGENSOLVE_LIMIT:
        raise ValueError(
            f"dimension {hm.shape[0]} exceeds the dense-eigensolve limit"
        )
    om = normalize(o0).matrix
    if hm.shape != om.shape:
        raise ValueError(f"shape mismatch: H is {hm.shape}, O is {om.shape}")
    evals, vecs = np.linalg.eigh(hm)
    op = vecs.conj().T @ om @ vecs
    weights = (op.real**2 + op.imag**2).ravel() / hm.shape[0]
    omega = (evals[:, None] - evals[None, :]).ravel()
    t = np.asarray(times, dtype=float).ravel()
    out = np.empty(t.size, dtype=complex)
    block = 128
    for i in range(0, t.size, block):
        phases = np.exp(1j * np.outer(t[i : i + block], omega))
        out[i : i + block] = phases @ weights
    worst = float(np.max(np.abs(out.imag))) if t.size else 0.0
    if worst > 1e-10:
        raise AssertionError(f"autocorrelation acquired imaginary part {worst:.3e}")
    return out.real


@dataclass
class MomentSequence:
    """Even moments mu_0, mu_2, ..., mu_{2k} of Ltilde, normalized to mu_0 = 1.

    Entries are floats, or ``Fraction`` objects when produced in exact mode.
    """

    mu: list
    exact: bool = False

    def as_floats(self) -> np.ndarray:
        return np.array([float(m) for m in self.mu], dtype=float)

    def __len__(self) -> int:
        return len(self.mu)


def _exact_complex(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a complex matrix into exact-rational real/imag object arrays.

    float64 entries are dyadic rationals, so Fraction conversion is lossless.
    """
    re = np.array([[Fraction(x) for x in row] for row in m.real.tolist()], dtype=object)
    im = np.array([[Fraction(x) for x in row] for row in m.imag.tolist()], dtype=object)
    return re, im


def moments(h, o0: OperatorState | np.ndarray, k_max: int, exact: bool = False) -> MomentSequence:
    """Moments mu_{2k} = (O_0 | Ltilde^{2k} O_0) for k = 0..k_max.

    Computed as (W_k | W_k) with W_k = Ltilde^k O_0, which is algebraically
    identical (Ltilde is self-adjoint) and manifestly nonnegative. Odd moments
    vanish by the same symmetry and are not returned. The result is normalized
    by mu_0, so O_0 need not be normalized. ``k_max`` is capped at
    ``MAX_MOMENT_ORDER``; beyond that double-precision moment handling is
    meaningless and exact mode becomes expensive.

    With ``exact=True`` every product is carried out over rational numbers
    (float64 entries are exact dyadic rationals), so the returned Fractions
    are the true moments of the given floating-point matrices.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if k_max > MAX_MOMENT_ORDER:
        raise ValueError(f"k_max {k_max} exceeds supported order {MAX_MOMENT_ORDER}")
    hm = _as_matrix(h)
    om = _as_matrix(o0)
    if hm.shape != om.shape:
        raise ValueError(f"shape mismatch: H is {hm.shape}, O is {om.shape}")
    dim = hm.shape[0]
    if exact:
        hr, hi = _exact_complex(hm)
        wr, wi = _exact_complex(om)
        raw = []
        for _ in range(k_max + 1):
            raw.append((np.sum(wr * wr) + np.sum(wi * wi)) / dim)
            # W <- H W - W H in split real/imag arithmetic
            nr = (hr @ wr - hi @ wi) - (wr @ hr - wi @ hi)
            ni = (hr @ wi + hi @ wr) - (wr @ hi + wi @ hr)
            wr, wi = nr, ni
        mu0 = raw[0]
        if mu0 == 0:
            raise ValueError("null initial operator has no moments")
        return MomentSequence(mu=[m / mu0 for m in raw], exact=True)
    w = om.astype(complex)
    raw_f = []
    for _ in range(k_max + 1):
        raw_f.append(float(np.vdot(w, w).real) / dim)
        w = hm @ w - w @ hm
    mu0_f = raw_f[0]
    if mu0_f == 0:
        raise ValueError("null initial operator has no moments")
    return MomentSequence(mu=[m / mu0_f for m in raw_f], exact=False)


def bn_from_moments(mu: MomentSequence | Sequence) -> np.ndarray:
    """Recover b_1..b_K from even moments mu_0..mu_{2K}.

    Runs the Chebyshev-style recursion on mixed moments sigma(n, k) of the
    monic orthogonal polynomials (all recurrence alphas vanish for an even
    moment sequence):

        sigma(n+1, k) = sigma(n, k+1) - beta_n * sigma(n-1, k),
        beta_n = sigma(n, n) / sigma(n-1, n-1),  b_n = sqrt(beta_n).

    The arithmetic follows the input: Fractions stay exact and a vanishing
    Hankel determinant terminates the sequence legitimately; in floats a loss
    of positivity truncates to the reliable prefix. In double precision the
    recursion loses roughly two digits per step, so only the first ~8-10
    coefficients are trustworthy; use exact moments beyond that.
    """
    if isinstance(mu, MomentSequence):
        even = list(mu.mu)
        exact = mu.exact
    else:
        even = list(mu)
        exact = isinstance(even[0], (Fraction, int))
    if len(even) < 2:
        raise ValueError("need at least mu_0 and mu_2 to produce b_1")
    zero = Fraction(0) if exact else 0.0
    # interleave the vanishing odd moments: m[j] = mu_j for j = 0..2K
    m: list = []
    for v in even:
        m.extend([v, zero])
    m.pop()
    kmax = len(m) - 1
    row_prev: list = [zero] * len(m)
    row_cur: list = list(m)
    h_prev = row_cur[0]
    if h_prev <= 0:
        raise ValueError("mu_0 must be positive")
    last_beta = zero
    bs: list[float] = []
    n_target = len(even) - 1
    for n in range(1, n_target + 1):
        # sigma(n, k) exists for k <= kmax - n; building row n consumes
        # row n-1 up to k+1 and row n-2 up to k, both in range
        width = kmax - n + 1
        if n == 1:
            row_next = [row_cur[k + 1] for k in range(width)]
        else:
            row_next = [row_cur[k + 1] - last_beta * row_prev[k] for k in range(width)]
        h_n = row_next[n]
        if exact:
            if h_n < 0:
                raise ValueError("moment sequence is not positive definite")
            if h_n == 0:
                break
        elif h_n <= 0:
            break
        last_beta = h_n / h_prev
        bs.append(float(np.sqrt(float(last_beta))))
        h_prev = h_n
        row_prev, row_cur = row_cur, row_next
    return np.array(bs, dtype=float)


def moments_of_tridiagonal(b: Sequence[float] | np.ndarray, k_max: int) -> np.ndarray:
    """Even moments (e_0 | T^{2k} | e_0) of the symmetric tridiagonal with
    zero diagonal and off-diagonal b, for k = 0..k_max.

    This is the forward direction of the moment/coefficient duality: feeding
    engine output through here must reproduce ``moments`` of the original
    Hamiltonian and operator.
    """
    bv = np.asarray(b, dtype=float).ravel()
    size = bv.size + 1
    v = np.zeros(size)
    v[0] = 1.0
    out = [1.0]
    for k in range(1, k_max + 1):
        for _ in range(2):
            nxt = np.zeros(size)
            nxt[:-1] += bv * v[1:]
            nxt[1:] += bv * v[:-1]
            v = nxt
        out.append(float(v[0]))
    return np.array(out, dtype=float)
