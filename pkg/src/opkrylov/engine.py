"""Operator Lanczos iteration with full orthogonalization.

The algorithm, for a normalized Hermitian starting operator O_0:

    (a) b_0 = 0, O_{-1} = 0
    (b) A_n = L O_{n-1}, hermitized when Hermiticity enforcement is on
        (the standard Liouvillian L = i[H, .] preserves Hermiticity, so
        this only scrubs roundoff)
    (c) full orthogonalization: A_n -= sum_{i<n} O_i (O_i | A_n)
    (d) b_n = sqrt((A_n | A_n)); stop when b_n falls to the tolerance
    (e) O_n = A_n / b_n

No re-hermitization ever happens after step (c). The orthogonality error
epsilon_n = max_{i<n} |(O_i | O_n)| is reported for every accepted step.

Internally three equivalent realizations are selected by problem structure:
a literal dense-matrix path; for real-symmetric H and real-symmetric O_0 a
path in the eigenbasis of H where every Krylov element is i^n times a real
matrix and L acts elementwise by E_a - E_b; and for large such problems a
path that first compresses the Liouvillian spectral measure into its Gauss
quadrature rule (a merge tree of small full-orthogonalization
tridiagonalizations, each exact for every polynomial moment the run can
probe) and then executes the same FO iteration on the reduced rule. The
three agree to roundoff and are cross-checked against each other in the
test suite at the path-selection boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (
    HERMITICITY_TOL,
    Hamiltonian,
    OperatorState,
    _as_matrix,
    normalize,
)

# path-selection boundaries (matrix dimension N)
_REAL_PATH_MIN_DIM = 256
_REAL_PATH_MAX_DIM = 512

# atoms per leaf in the quadrature-compression merge tree; leaves of this
# size keep every orthogonalization working set inside the CPU cache
_COMPRESS_LEAF = 2048

TERMINATED_MAX_STEPS = "max_steps"
TERMINATED_B_BELOW_TOL = "b_below_tol"


def krylov_bound(dim: int) -> int:
    """Upper bound N^2 - N + 1 on the operator Krylov dimension."""
    return dim * dim - dim + 1


@dataclass
class LanczosConfig:
    """Algorithmic switches for :func:`run_lanczos`.

    ``fo_passes`` is the number of orthogonalization sweeps per step.  A
    single sweep leaves a residual overlap proportional to the cancellation
    ratio norm(A_n)/b_n, which compounds over long runs when the coefficient
    sequence spans two scales; the second sweep removes it.  Extra sweeps
    beyond the second change b_n below 1e-12.
    """

    max_steps: int = 1000
    termination_tol: float = 1e-14
    full_orthogonalization: bool = True
    enforce_hermiticity: bool = True
    retain_basis: bool = False
    liouvillian_kind: str = "standard"
    fo_passes: int = 2

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.termination_tol < 0:
            raise ValueError("termination_tol must be >= 0")
        if self.liouvillian_kind not in ("standard", "tilde"):
            raise ValueError(
                f"unknown liouvillian_kind {self.liouvillian_kind!r}; "
                "use 'standard' or 'tilde'"
            )
        if self.fo_passes < 1:
            raise ValueError("fo_passes must be >= 1")


@dataclass
class LanczosResult:
    """Output of one Lanczos run.

    ``b_raw`` holds b_1..b_M in the Hamiltonian's energy units and
    ``epsilon`` the orthogonality error of each accepted basis element, so
    both have length M. ``krylov_dim_reached`` = M + 1 counts O_0.
    """

    b_raw: np.ndarray
    epsilon: np.ndarray
    terminated_by: str
    krylov_dim_reached: int
    basis: list[OperatorState] | None = None


def orthogonality_error(basis: Sequence[OperatorState | np.ndarray], n: int) -> float:
    """epsilon_n = max_{i<n} |(O_i | O_n)| over an explicit basis list; 0 at n = 0."""
    if not 0 <= n < len(basis):
        raise ValueError(f"n must be in 0..{len(basis) - 1}, got {n}")
    if n == 0:
        return 0.0
    target = _as_matrix(basis[n]).ravel()
    dim = _as_matrix(basis[n]).shape[0]
    worst = 0.0
    for i in range(n):
        ov = abs(np.vdot(_as_matrix(basis[i]).ravel(), target)) / dim
        worst = max(worst, float(ov))
    return worst


def _epsilon_from_gram(gram: np.ndarray) -> np.ndarray:
    """eps_n = max_{i<n} |gram[i, n]| for n = 1..M from an (M+1)x(M+1) Gram."""
    m_plus_1 = gram.shape[0]
    eps = np.empty(m_plus_1 - 1)
    for n in range(1, m_plus_1):
        eps[n - 1] = np.max(np.abs(gram[:n, n]))
    return eps


def _run_dense(hm: np.ndarray, o0m: np.ndarray, cfg: LanczosConfig, steps_cap: int):
    dim = hm.shape[0]
    standard = cfg.liouvillian_kind == "standard"
    basis = np.empty((steps_cap + 1, dim * dim), dtype=complex)
    basis_conj = np.empty_like(basis)
    basis[0] = o0m.ravel()
    basis_conj[0] = basis[0].conj()
    prev = o0m
    prev2: np.ndarray | None = None
    b: list[float] = []
    terminated = TERMINATED_MAX_STEPS
    for n in range(1, steps_cap + 1):
        comm = hm @ prev - prev @ hm
        a = (1j * comm) if standard else comm
        if not cfg.full_orthogonalization and n >= 2:
            a = a - b[-1] * prev2
        if cfg.enforce_hermiticity and standard:
            a = 0.5 * (a + a.conj().T)
        if cfg.full_orthogonalization:
            av = a.ravel()
            for _ in range(cfg.fo_passes):
                coef = (basis_conj[:n] @ av) / dim
                av -= basis[:n].T @ coef
            a = av.reshape(dim, dim)
        bn = float(np.linalg.norm(a)) / np.sqrt(dim)
        if bn <= cfg.termination_tol:
            terminated = TERMINATED_B_BELOW_TOL
            break
        a /= bn
        basis[n] = a.ravel()
        basis_conj[n] = basis[n].conj()
        b.append(bn)
        prev2, prev = prev, a
    m = len(b)
    eps = (
        _epsilon_from_gram((basis_conj[: m + 1] @ basis[: m + 1].T) / dim)
        if m
        else np.zeros(0)
    )
    return np.array(b), eps, terminated, basis[: m + 1]


def _run_real_eigen(hm: np.ndarray, o0m: np.ndarray, cfg: LanczosConfig, steps_cap: int):
    """Standard-Liouvillian FO run for real-symmetric H and O_0.

    Every Krylov element is i^n R_n with R_n real; working in the H
    eigenbasis, L O = i^n (Omega o R) with Omega_ab = E_a - E_b, and all
    orthogonalization coefficients reduce to real dot products of the R's.
    Hermitization of i^n R is the parity projection (R + (-1)^n R^T)/2.
    """
    dim = hm.shape[0]
    evals, vecs = np.linalg.eigh(hm.real)
    r0 = vecs.T @ o0m.real @ vecs
    r0 = 0.5 * (r0 + r0.T)
    omega = evals[:, None] - evals[None, :]
    basis = np.empty((steps_cap + 1, dim * dim), dtype=float)
    basis[0] = r0.ravel()
    prev = r0
    b: list[float] = []
    terminated = TERMINATED_MAX_STEPS
    sqrt_dim = np.sqrt(dim)
    for n in range(1, steps_cap + 1):
        s = omega * prev
        if cfg.enforce_hermiticity:
            sign = -1.0 if n % 2 else 1.0
            s = 0.5 * (s + sign * s.T)
        sv = s.ravel()
        for _ in range(cfg.fo_passes):
            coef = (basis[:n] @ sv) / dim
            sv -= basis[:n].T @ coef
        bn = float(np.linalg.norm(sv)) / sqrt_dim
        if bn <= cfg.termination_tol:
            terminated = TERMINATED_B_BELOW_TOL
            break
        sv /= bn
        basis[n] = sv
        b.append(bn)
        prev = sv.reshape(dim, dim)
    m = len(b)
    eps = (
        _epsilon_from_gram((basis[: m + 1] @ basis[: m + 1].T) / dim)
        if m
        else np.zeros(0)
    )
    retained = None
    if cfg.retain_basis:
        retained = []
        for n in range(m + 1):
            mat = (1j**n) * (vecs @ basis[n].reshape(dim, dim) @ vecs.T)
            retained.append(mat)
    return np.array(b), eps, terminated, retained


def _jacobi_rule(nodes: np.ndarray, weights: np.ndarray, size: int):
    """Gauss rule with at most ``size`` points for sum_i w_i delta(x - x_i).

    Tridiagonalizes multiplication by x over the atoms with a fully
    orthogonalized Lanczos sweep (two passes; this is quadrature
    construction, not the operator iteration, so it is not configurable),
    then takes nodes and weights from the eigendecomposition of the
    resulting Jacobi matrix. Exact for polynomials of degree 2*size - 1.
    """
    from scipy.linalg import eigh_tridiagonal

    mass = float(weights.sum())
    d = nodes.size
    steps = min(size, d)
    basis = np.empty((steps, d))
    basis[0] = 1.0 / np.sqrt(mass)
    alpha = np.zeros(steps)
    beta = np.zeros(steps)
    k = 1
    for n in range(1, steps + 1):
        s = nodes * basis[n - 1]
        alpha[n - 1] = float(np.dot(weights, s * basis[n - 1]))
        for _ in range(2):
            coef = basis[:n] @ (weights * s)
            s -= basis[:n].T @ coef
        bsq = float(np.dot(weights, s * s))
        if n == steps or bsq <= mass * 1e-28:
            k = n
            break
        beta[n] = np.sqrt(bsq)
        basis[n] = s / beta[n]
        k = n + 1
    lam, vv = eigh_tridiagonal(alpha[:k], beta[1:k])
    return lam, mass * vv[0] ** 2


def _gauss_compress(nodes: np.ndarray, weights: np.ndarray, size: int):
    """Gauss rule of a large atomic measure by a merge tree of small rules.

    A rule with ``size`` points reproduces every moment of its input up to
    degree 2*size - 1, so replacing each leaf chunk by its rule and then
    pairwise merging preserves all moments of that degree exactly at every
    level; the root is the Gauss rule of the full measure.
    """
    order = np.argsort(nodes, kind="stable")
    nodes = nodes[order]
    weights = weights[order]
    rules = []
    for lo in range(0, nodes.size, _COMPRESS_LEAF):
        cn = nodes[lo : lo + _COMPRESS_LEAF]
        cw = weights[lo : lo + _COMPRESS_LEAF]
        rules.append((cn, cw) if cn.size <= size else _jacobi_rule(cn, cw, size))
    while len(rules) > 1:
        merged = []
        for i in range(0, len(rules), 2):
            if i + 1 == len(rules):
                merged.append(rules[i])
                continue
            xn = np.concatenate([rules[i][0], rules[i + 1][0]])
            xw = np.concatenate([rules[i][1], rules[i + 1][1]])
            merged.append(_jacobi_rule(xn, xw, size))
        rules = merged
    return rules[0]


def _run_reduced(hm: np.ndarray, o0m: np.ndarray, cfg: LanczosConfig, steps_cap: int):
    """Standard-Liouvillian FO run on the compressed spectral measure.

    In the H eigenbasis the whole iteration lives in L^2 of the measure
    sum_ab |(O_0)_ab|^2 delta(omega - E_a + E_b) / N: element n is i^n
    f_n(omega) with f_n real of degree n, L acts as multiplication by
    omega and the hermitize step as the parity projection
    f -> (f + (-1)^n f(-omega)) / 2. A run of M steps only ever probes
    moments of degree <= 2M, so the measure can be replaced exactly by a
    Gauss rule. The rule is built for the even part (in t = omega^2, from
    the upper triangle of the atom grid) and unfolded to a symmetric rule,
    which quarters the compression work; the FO iteration then runs over
    pointwise values on the rule's nodes.
    """
    dim = hm.shape[0]
    evals, vecs = np.linalg.eigh(hm.real)
    r0 = vecs.T @ o0m.real @ vecs
    r0 = 0.5 * (r0 + r0.T)
    iu0, iu1 = np.triu_indices(dim, 1)
    de = evals[iu0] - evals[iu1]
    t = de * de
    w = r0[iu0, iu1] ** 2 * (2.0 / dim)
    del iu0, iu1, de
    t = np.append(t, 0.0)
    w = np.append(w, float(np.sum(np.diag(r0) ** 2)) / dim)
    total = float(w.sum())
    keep = w > total * 1e-25
    t = t[keep]
    w = w[keep]
    half = _gauss_compress(t, w, steps_cap // 2 + 1)
    root = np.sqrt(np.maximum(half[0], 0.0))
    nodes = np.concatenate([-root[::-1], root])
    wts = 0.5 * np.concatenate([half[1][::-1], half[1]])
    g = nodes.size
    basis = np.empty((steps_cap + 1, g))
    v = np.ones(g)
    v /= np.sqrt(float(np.dot(wts, v * v)))
    basis[0] = v
    b: list[float] = []
    terminated = TERMINATED_MAX_STEPS
    for n in range(1, steps_cap + 1):
        s = nodes * basis[n - 1]
        if cfg.enforce_hermiticity:
            sign = -1.0 if n % 2 else 1.0
            s = 0.5 * (s + sign * s[::-1])
        for _ in range(cfg.fo_passes):
            coef = basis[:n] @ (wts * s)
            s -= basis[:n].T @ coef
        bn_sq = float(np.dot(wts, s * s))
        bn = np.sqrt(bn_sq) if bn_sq > 0 else 0.0
        if bn <= cfg.termination_tol:
            terminated = TERMINATED_B_BELOW_TOL
            break
        basis[n] = s / bn
        b.append(bn)
    m = len(b)
    eps = (
        _epsilon_from_gram((basis[: m + 1] * wts) @ basis[: m + 1].T)
        if m
        else np.zeros(0)
    )
    return np.array(b), eps, terminated, None


def _is_real_symmetric_pair(hm: np.ndarray, o0m: np.ndarray) -> bool:
    return (
        not np.any(hm.imag)
        and not np.any(o0m.imag)
        and np.max(np.abs(o0m - o0m.T)) <= HERMITICITY_TOL
    )


def run_lanczos(
    h: Hamiltonian | np.ndarray,
    o0: OperatorState | np.ndarray,
    config: LanczosConfig | None = None,
) -> LanczosResult:
    """Run the full-orthogonalization operator Lanczos iteration.

    The starting operator is normalized internally (a null operator is
    rejected); with Hermiticity enforcement on, a non-Hermitian O_0 is
    rejected. Steps are additionally capped at N^2 - N, the largest number
    of coefficients the operator Krylov space can support.
    """
    cfg = config if config is not None else LanczosConfig()
    hm = _as_matrix(h)
    if hm.ndim != 2 or hm.shape[0] != hm.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got {hm.shape}")
    if np.max(np.abs(hm - hm.conj().T)) > HERMITICITY_TOL:
        raise ValueError("Hamiltonian must be Hermitian")
    om = _as_matrix(o0)
    if om.shape != hm.shape:
        raise ValueError(f"shape mismatch: H is {hm.shape}, O is {om.shape}")
    if cfg.enforce_hermiticity:
        dev = np.max(np.abs(om - om.conj().T))
        if dev > HERMITICITY_TOL:
            raise ValueError(
                f"O_0 must be Hermitian when enforcement is on; max |O - O^dag| = {dev:.3e}"
            )
    o0m = normalize(om).matrix
    dim = hm.shape[0]
    steps_cap = min(cfg.max_steps, krylov_bound(dim) - 1)

    structured = (
        cfg.liouvillian_kind == "standard"
        and cfg.full_orthogonalization
        and cfg.enforce_hermiticity
        and _is_real_symmetric_pair(hm, o0m)
    )
    basis_states: list[OperatorState] | None = None
    if structured and dim > _REAL_PATH_MAX_DIM:
        if cfg.retain_basis:
            raise ValueError(
                f"basis retention is not supported above dimension {_REAL_PATH_MAX_DIM}"
            )
        b, eps, terminated, _ = _run_reduced(hm, o0m, cfg, steps_cap)
    elif structured and dim >= _REAL_PATH_MIN_DIM:
        b, eps, terminated, retained = _run_real_eigen(hm, o0m, cfg, steps_cap)
        if cfg.retain_basis:
            basis_states = [OperatorState(mat, hermitian=True) for mat in retained]
    else:
        b, eps, terminated, flat = _run_dense(hm, o0m, cfg, steps_cap)
        if cfg.retain_basis:
            hermitian_basis = cfg.liouvillian_kind == "standard" and cfg.enforce_hermiticity
            basis_states = [
                OperatorState(row.reshape(dim, dim), hermitian=hermitian_basis)
                for row in flat
            ]
    return LanczosResult(
        b_raw=b,
        epsilon=eps,
        terminated_by=terminated,
        krylov_dim_reached=len(b) + 1,
        basis=basis_states,
    )
