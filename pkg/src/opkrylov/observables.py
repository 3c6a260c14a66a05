"""Analysis of Lanczos coefficient sequences: rescaling and Krylov variance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .algebra import Hamiltonian, _as_matrix

DENSE_EIGENSOLVE_LIMIT = 4096


def spectral_bounds(
    h: Hamiltonian | np.ndarray, dense_limit: int = DENSE_EIGENSOLVE_LIMIT
) -> tuple[float, float]:
    """Extremal eigenvalues (E_min, E_max) of a Hermitian matrix via dense solve.

    Dimensions above ``dense_limit`` are refused; supply precomputed bounds to
    the consumer instead of raising the limit.
    """
    m = _as_matrix(h)
    if m.shape[0] > dense_limit:
        raise ValueError(
            f"dimension {m.shape[0]} exceeds the dense-eigensolve limit {dense_limit}; "
            "compute the bounds iteratively and pass them in directly"
        )
    evals = np.linalg.eigvalsh(m)
    return float(evals[0]), float(evals[-1])


@dataclass
class BSequence:
    """A sequence of Lanczos coefficients b_1..b_M.

    ``raw=True`` marks engine output in the Hamiltonian's energy scale;
    rescaled sequences carry the spectral bounds they were divided by.
    Values must be finite and nonnegative (a leading zero is legal for
    synthetic chains; zeros are rejected later where logarithms are taken).
    """

    values: np.ndarray
    raw: bool = True
    spectral_bounds: tuple[float, float] | None = None
    provenance: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size and not np.all(np.isfinite(v)):
            raise ValueError("Lanczos coefficients must be finite")
        if v.size and np.any(v < 0):
            raise ValueError("Lanczos coefficients must be nonnegative")
        self.values = v

    def __len__(self) -> int:
        return self.values.size


def rescale(seq: BSequence, bounds: tuple[float, float] | None = None) -> BSequence:
    """Divide a raw sequence by r = (E_max - E_min) / 2.

    The bounds come from the argument or from ``seq.spectral_bounds``.
    """
    if not seq.raw:
        raise ValueError("sequence is already rescaled")
    if bounds is None:
        bounds = seq.spectral_bounds
    if bounds is None:
        raise ValueError("no spectral bounds available for rescaling")
    e_min, e_max = float(bounds[0]), float(bounds[1])
    r = 0.5 * (e_max - e_min)
    if r <= 0:
        raise ValueError(f"degenerate spectral bounds ({e_min}, {e_max})")
    return BSequence(
        values=seq.values / r,
        raw=False,
        spectral_bounds=(e_min, e_max),
        provenance=dict(seq.provenance),
    )


@dataclass
class VarianceRecord:
    """Krylov variance of one coefficient sequence."""

    sigma: float
    sigma_sq: float
    cutoff: int
    pairs_used: int
    provenance: dict[str, Any] = field(default_factory=dict)


@dataclass
class AveragedVariance:
    """Disorder average: mean of sigma over realizations, then squared."""

    sigma_bar: float
    sigma_bar_sq: float
    realizations: int
    cutoff: int
    provenance: dict[str, Any] = field(default_factory=dict)


def krylov_variance(
    b: BSequence | Sequence[float] | np.ndarray,
    cutoff: int = 50,
    pair_by_global_index: bool = False,
    provenance: dict[str, Any] | None = None,
) -> VarianceRecord:
    """Variance of x_j = ln(b_{2j-1} / b_{2j}) after dropping the initial ramp.

    The first ``cutoff`` coefficients are discarded. By default the remaining
    sequence is re-indexed from 1 and paired consecutively; with
    ``pair_by_global_index`` the pairs keep their original (2j-1, 2j) indices
    and only pairs lying entirely beyond the cutoff are used. An unpaired
    trailing coefficient is dropped and never enters a logarithm.

    The variance is the population variance (ddof = 0). It is invariant under
    b -> alpha * b, so raw and rescaled sequences give the same result.
    """
    if isinstance(b, BSequence):
        values = b.values
        if provenance is None:
            provenance = dict(b.provenance)
    else:
        values = np.asarray(b, dtype=float).ravel()
    if provenance is None:
        provenance = {}
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    retained = values[cutoff:]
    if retained.size < 4:
        raise ValueError(
            f"need at least 4 retained coefficients, have {retained.size} "
            f"(cutoff {cutoff} of {values.size})"
        )
    if pair_by_global_index:
        # first odd 1-based index past the cutoff
        first = cutoff + 1 if (cutoff + 1) % 2 == 1 else cutoff + 2
        hi = values[first - 1 :: 2]
        lo = values[first::2]
        npairs = min(hi.size, lo.size)
        hi, lo = hi[:npairs], lo[:npairs]
    else:
        npairs = retained.size // 2
        hi = retained[0 : 2 * npairs : 2]
        lo = retained[1 : 2 * npairs : 2]
    if npairs < 2:
        raise ValueError(f"need at least 2 pairs for a variance, have {npairs}")
    if np.any(hi <= 0) or np.any(lo <= 0):
        raise ValueError("nonpositive coefficient inside the analysis window")
    x = np.log(hi / lo)
    sigma_sq = float(np.var(x))
    return VarianceRecord(
        sigma=float(np.sqrt(sigma_sq)),
        sigma_sq=sigma_sq,
        cutoff=cutoff,
        pairs_used=int(npairs),
        provenance=provenance,
    )


def disorder_average(records: Sequence[VarianceRecord]) -> AveragedVariance:
    """Average sigma over realizations and square the mean.

    All records must share the same cutoff and agree on provenance apart from
    realization bookkeeping.
    """
    if not records:
        raise ValueError("no variance records to average")
    cutoffs = {r.cutoff for r in records}
    if len(cutoffs) != 1:
        raise ValueError(f"records mix cutoffs {sorted(cutoffs)}")
    ignored = {"realization", "run_id", "seed"}
    base = {k: v for k, v in records[0].provenance.items() if k not in ignored}
    for r in records[1:]:
        other = {k: v for k, v in r.provenance.items() if k not in ignored}
        if other != base:
            raise ValueError("records carry inconsistent provenance")
    sigma_bar = float(np.mean([r.sigma for r in records]))
    return AveragedVariance(
        sigma_bar=sigma_bar,
        sigma_bar_sq=sigma_bar**2,
        realizations=len(records),
        cutoff=records[0].cutoff,
        provenance=base,
    )
