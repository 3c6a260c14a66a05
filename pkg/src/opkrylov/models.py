"""Model Hamiltonians and starting operators.

Two concrete families are provided, a Majorana fermion model with random
four-body and random imaginary two-body couplings, and a kinetically
constrained East spin chain, plus an analytic coefficient sequence used as
a synthetic reference. Starting operators are built from a compact string
grammar and returned normalized.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from .algebra import Hamiltonian, OperatorState
from .observables import BSequence

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_NUMBER = np.array([[0.0, 0.0], [0.0, 1.0]])
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])
_ID2 = np.eye(2)


def _site_operator(local: np.ndarray, site: int, length: int) -> np.ndarray:
    """Embed a single-site operator at a 1-based site of a chain."""
    mat = np.ones((1, 1))
    for k in range(1, length + 1):
        mat = np.kron(mat, local if k == site else _ID2)
    return mat


def build_majoranas(n_majorana: int) -> list[np.ndarray]:
    """Majorana operators chi_1..chi_n with {chi_i, chi_j} = delta_ij.

    Realized through n/2 fermion modes under a Jordan-Wigner encoding,
    chi_{2j} = (c_j + c_j^dag)/sqrt(2) and chi_{2j-1} = i(c_j - c_j^dag)/sqrt(2).
    """
    if n_majorana < 2 or n_majorana % 2:
        raise ValueError(f"n_majorana must be even and >= 2, got {n_majorana}")
    n_sites = n_majorana // 2
    chis: list[np.ndarray] = [None] * n_majorana
    for j in range(1, n_sites + 1):
        string = np.ones((1, 1))
        for k in range(1, j):
            string = np.kron(string, _PAULI_Z)
        c = np.kron(string, _LOWER)
        for k in range(j + 1, n_sites + 1):
            c = np.kron(c, _ID2)
        c = c.astype(complex)
        cdag = c.conj().T
        chis[2 * j - 2] = 1j * (c - cdag) / np.sqrt(2.0)
        chis[2 * j - 1] = (c + cdag) / np.sqrt(2.0)
    return chis


def parity_operator(n_majorana: int) -> np.ndarray:
    """(-1)^Q over the fermion modes underlying n_majorana Majoranas."""
    if n_majorana < 2 or n_majorana % 2:
        raise ValueError(f"n_majorana must be even and >= 2, got {n_majorana}")
    mat = np.ones((1, 1))
    for _ in range(n_majorana // 2):
        mat = np.kron(mat, _PAULI_Z)
    return mat


@dataclass(frozen=True)
class SykParams:
    """Majorana model parameters; couplings are fixed by (seed, realization)."""

    n_majorana: int
    kappa: float
    j_coupling: float = 1.0
    seed: int = 0
    realization: int = 0

    def __post_init__(self) -> None:
        if self.n_majorana < 4 or self.n_majorana % 2:
            raise ValueError("n_majorana must be even and >= 4")
        if self.realization < 0:
            raise ValueError("realization must be >= 0")


def draw_syk_couplings(params: SykParams) -> tuple[np.ndarray, np.ndarray]:
    """Coupling draws (J_ijkl, kappa_ij), both in lexicographic index order.

    The stream is PCG64 seeded with the pair (seed, realization); the
    four-body block is drawn first and the two-body block second, so a
    realization never depends on scheduling. J_ijkl and kappa_ij are
    independent centered Gaussians with variances 6 J^2 / N^3 and
    kappa^2 / N.
    """
    n = params.n_majorana
    rng = Generator(PCG64(SeedSequence([params.seed, params.realization])))
    n_quartic = math.comb(n, 4)
    n_duo = math.comb(n, 2)
    j_scale = np.sqrt(6.0) * params.j_coupling / n**1.5
    j_draw = rng.normal(0.0, j_scale, size=n_quartic)
    k_scale = abs(params.kappa) / np.sqrt(n)
    k_draw = rng.normal(0.0, k_scale, size=n_duo) if params.kappa else np.zeros(n_duo)
    return j_draw, k_draw


def build_syk(params: SykParams) -> Hamiltonian:
    """H = (2/sqrt(N)) sum_{i<j<k<l} J_ijkl chi_i chi_j chi_k chi_l
           + i sum_{i<j} kappa_ij chi_i chi_j.

    Couplings come from :func:`draw_syk_couplings`.
    """
    n = params.n_majorana
    chis = build_majoranas(n)
    dim = chis[0].shape[0]
    quartics = list(itertools.combinations(range(n), 4))
    duos = list(itertools.combinations(range(n), 2))
    j_draw, k_draw = draw_syk_couplings(params)
    pair_prod = {duo: chis[duo[0]] @ chis[duo[1]] for duo in duos}
    h4 = np.zeros((dim, dim), dtype=complex)
    # group the quartic sum by its leading pair so each group costs one matmul
    grouped: dict[tuple[int, int], np.ndarray] = {}
    for idx, (i, j, k, l) in enumerate(quartics):
        acc = grouped.get((i, j))
        if acc is None:
            acc = np.zeros((dim, dim), dtype=complex)
            grouped[(i, j)] = acc
        acc += j_draw[idx] * pair_prod[(k, l)]
    for lead, acc in grouped.items():
        h4 += pair_prod[lead] @ acc
    h = (2.0 / np.sqrt(n)) * h4
    for idx, duo in enumerate(duos):
        h += (1j * k_draw[idx]) * pair_prod[duo]
    meta = {
        "n_majorana": n,
        "kappa": params.kappa,
        "j_coupling": params.j_coupling,
        "seed": params.seed,
        "realization": params.realization,
    }
    return Hamiltonian(h, model="syk", params=meta)


@dataclass(frozen=True)
class EastParams:
    """East chain parameters; `effective` selects the boundary completion."""

    length: int
    s: float
    effective: bool = True

    def __post_init__(self) -> None:
        if self.length < 2:
            raise ValueError("length must be >= 2")


def build_quantum_east(params: EastParams) -> Hamiltonian:
    """H = -1/2 sum_{i=1}^{L-1} n_i (e^{-s} sigma^x_{i+1} - 1), plus, in the
    effective variant, boundary terms -1/2 (e^{-s} sigma^x_1 - 1) and
    -1/2 n_L (e^{-s} - 1) that put a frozen facilitating site before site 1
    and dephasing past site L.
    """
    length = params.length
    dim = 2**length
    g = np.exp(-params.s)
    h = np.zeros((dim, dim))
    for i in range(1, length):
        n_i = _site_operator(_NUMBER, i, length)
        x_next = _site_operator(_PAULI_X, i + 1, length)
        h -= 0.5 * (g * (n_i @ x_next) - n_i)
    if params.effective:
        h -= 0.5 * (g * _site_operator(_PAULI_X, 1, length) - np.eye(dim))
        h -= 0.5 * (g - 1.0) * _site_operator(_NUMBER, length, length)
    meta = {"length": length, "s": params.s, "effective": params.effective}
    return Hamiltonian(h, model="east", params=meta)


def build_operator(
    spec: str,
    *,
    length: int | None = None,
    n_majorana: int | None = None,
) -> OperatorState:
    """Build a normalized Hermitian starting operator from a spec string.

    Grammar (sites are 1-based):
      "n:i"          occupation projector at site i, scaled by sqrt(2)
      "sx:i"         x Pauli at site i
      "chi:i,j,..."  product of Majoranas at strictly increasing indices,
                     scaled by sqrt(2) per factor and phased by
                     i^{k(k-1)/2} so the product is Hermitian
    """
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise ValueError(f"operator spec {spec!r} must look like 'kind:sites'")
    try:
        sites = [int(tok) for tok in rest.split(",")]
    except ValueError as exc:
        raise ValueError(f"bad site list in operator spec {spec!r}") from exc
    if kind in ("n", "sx"):
        if length is None:
            raise ValueError(f"operator {spec!r} needs the chain length")
        if len(sites) != 1:
            raise ValueError(f"operator kind {kind!r} takes exactly one site")
        site = sites[0]
        if not 1 <= site <= length:
            raise ValueError(f"site {site} outside chain of length {length}")
        if kind == "n":
            mat = np.sqrt(2.0) * _site_operator(_NUMBER, site, length)
        else:
            mat = _site_operator(_PAULI_X, site, length)
        return OperatorState(mat, hermitian=True)
    if kind == "chi":
        if n_majorana is None:
            raise ValueError(f"operator {spec!r} needs n_majorana")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise ValueError("Majorana indices must be strictly increasing")
        if sites[0] < 1 or sites[-1] > n_majorana:
            raise ValueError(f"Majorana index outside 1..{n_majorana}")
        chis = build_majoranas(n_majorana)
        k = len(sites)
        mat = chis[sites[0] - 1].copy()
        for s in sites[1:]:
            mat = mat @ chis[s - 1]
        mat *= (1j) ** (k * (k - 1) // 2) * (np.sqrt(2.0) ** k)
        return OperatorState(mat, hermitian=True)
    raise ValueError(f"unknown operator kind {kind!r} in {spec!r}")


def synthetic_largeq_chain(j_scale: float, m: int) -> BSequence:
    """Analytic ergodic reference b_n = J sqrt(n(n-1)) for n = 1..m.

    b_1 comes out 0 by the formula; analyses of this chain start at n = 2.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if j_scale <= 0:
        raise ValueError("j_scale must be > 0")
    steps = np.arange(1, m + 1, dtype=float)
    values = j_scale * np.sqrt(steps * (steps - 1.0))
    prov = {"model": "synthetic", "j_scale": j_scale, "m": m}
    return BSequence(values, raw=True, provenance=prov)


def parity_sector_check(h: Hamiltonian | np.ndarray, n_majorana: int) -> bool:
    """Whether H commutes with fermion parity (-1)^Q to within 1e-10."""
    hm = h.matrix if isinstance(h, Hamiltonian) else np.asarray(h)
    par = parity_operator(n_majorana)
    if hm.shape != par.shape:
        raise ValueError(
            f"H is {hm.shape} but {n_majorana} Majoranas act on {par.shape}"
        )
    return float(np.max(np.abs(hm @ par - par @ hm))) <= 1e-10
