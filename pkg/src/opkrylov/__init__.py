"""Operator-Krylov toolkit: Lanczos coefficients, their statistics, and
Krylov-chain dynamics for model quantum Hamiltonians."""

__version__ = "0.1.0"

from .algebra import (
    Hamiltonian,
    HilbertSpace,
    NullOperatorError,
    OperatorState,
    apply_liouvillian,
    apply_liouvillian_tilde,
    hermitize,
    inner_product,
    norm,
    normalize,
)
from .dynamics import ChainState, evolve_chain, krylov_complexity
from .engine import (
    LanczosConfig,
    LanczosResult,
    krylov_bound,
    orthogonality_error,
    run_lanczos,
)
from .models import (
    EastParams,
    SykParams,
    build_majoranas,
    build_operator,
    build_quantum_east,
    build_syk,
    draw_syk_couplings,
    parity_operator,
    parity_sector_check,
    synthetic_largeq_chain,
)
from .observables import (
    AveragedVariance,
    BSequence,
    VarianceRecord,
    disorder_average,
    krylov_variance,
    rescale,
    spectral_bounds,
)
from .oracles import (
    MomentSequence,
    bn_from_moments,
    exact_autocorrelation,
    moments,
    moments_of_tridiagonal,
)

__all__ = [
    "AveragedVariance",
    "BSequence",
    "ChainState",
    "EastParams",
    "Hamiltonian",
    "HilbertSpace",
    "LanczosConfig",
    "LanczosResult",
    "MomentSequence",
    "NullOperatorError",
    "OperatorState",
    "SykParams",
    "VarianceRecord",
    "apply_liouvillian",
    "apply_liouvillian_tilde",
    "bn_from_moments",
    "build_majoranas",
    "build_operator",
    "build_quantum_east",
    "build_syk",
    "draw_syk_couplings",
    "disorder_average",
    "evolve_chain",
    "krylov_complexity",
    "exact_autocorrelation",
    "hermitize",
    "inner_product",
    "krylov_bound",
    "krylov_variance",
    "moments",
    "moments_of_tridiagonal",
    "norm",
    "normalize",
    "orthogonality_error",
    "parity_operator",
    "parity_sector_check",
    "rescale",
    "run_lanczos",
    "spectral_bounds",
    "synthetic_largeq_chain",
]
