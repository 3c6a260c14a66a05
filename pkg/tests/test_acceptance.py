"""End-to-end acceptance checks.

Each test prints one verdict line (``acceptance NN <name>: PASS|FAIL``) so a
full run yields a scannable scorecard; the assertion carries the measured
numbers. Heavy Lanczos runs are shared between criteria through module-level
caches, so the suite cost is dominated by the 21 East sweeps and 27 coupled
Majorana runs it genuinely needs.
"""

import itertools

import numpy as np

from opkrylov import (
    EastParams,
    LanczosConfig,
    SykParams,
    bn_from_moments,
    build_majoranas,
    build_operator,
    build_quantum_east,
    build_syk,
    disorder_average,
    draw_syk_couplings,
    evolve_chain,
    exact_autocorrelation,
    krylov_complexity,
    krylov_variance,
    moments,
    parity_sector_check,
    run_lanczos,
    synthetic_largeq_chain,
)

EAST_SIZES = (7, 9, 11)
EAST_SWEEP = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
SYK_SIZES = (10, 12, 14)
SYK_KAPPAS = (0.01, 1.0, 100.0)
SYK_REALIZATIONS = (0, 1, 2)

_EAST_CACHE = {}
_SYK_CACHE = {}


def east_result(length, s):
    """600-step run on the density operator at the middle site; the first
    500 epsilon entries equal those of a 500-step run exactly, because the
    basis vectors are built deterministically one at a time."""
    key = (length, s)
    if key not in _EAST_CACHE:
        h = build_quantum_east(EastParams(length=length, s=s))
        o0 = build_operator(f"n:{length // 2}", length=length)
        _EAST_CACHE[key] = run_lanczos(h, o0, LanczosConfig(max_steps=600))
    return _EAST_CACHE[key]


def syk_result(n_majorana, kappa, realization):
    key = (n_majorana, kappa, realization)
    if key not in _SYK_CACHE:
        h = build_syk(SykParams(n_majorana=n_majorana, kappa=kappa,
                                realization=realization))
        o0 = build_operator("chi:1", n_majorana=n_majorana)
        _SYK_CACHE[key] = run_lanczos(h, o0, LanczosConfig(max_steps=500))
    return _SYK_CACHE[key]


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def _verdict(capsys, num, name, ok, detail=""):
    line = f"acceptance {num:02d} {name}: {'PASS' if ok else 'FAIL'}"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, detail or line


def test_01_two_level_oracle(capsys):
    sz = np.diag([1.0, -1.0]).astype(complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    res = run_lanczos(sz, sx)
    times = np.linspace(0.0, 5.0, 501)
    state = evolve_chain(res.b_raw, times)
    k_err = float(np.max(np.abs(krylov_complexity(state) - np.sin(2.0 * times) ** 2)))
    ok = (
        res.b_raw.size == 1
        and abs(res.b_raw[0] - 2.0) < 1e-10
        and res.krylov_dim_reached == 2
        and res.terminated_by == "b_below_tol"
        and k_err < 1e-8
    )
    _verdict(capsys, 1, "two-level-oracle", ok,
             f"b={res.b_raw!r} dim={res.krylov_dim_reached} K_err={k_err:.2e}")


def test_02_moment_oracle_equivalence(capsys):
    rng = np.random.default_rng(20260814)
    worst = 0.0
    for i, dim in zip(range(20), itertools.cycle((4, 6, 8))):
        h = random_hermitian(rng, dim)
        o0 = random_hermitian(rng, dim)
        got = run_lanczos(h, o0, LanczosConfig(max_steps=8)).b_raw
        want = bn_from_moments(moments(h, o0, k_max=8, exact=True))
        n = min(8, got.size, want.size)
        assert n == 8, f"system {i}: expected 8 coefficients, got {n}"
        worst = max(worst, float(np.max(np.abs(got[:n] - want[:n]))))
    _verdict(capsys, 2, "moment-oracle-equivalence", worst < 1e-6,
             f"max |b_lanczos - b_moments| = {worst:.3e} over 20 systems")


def test_03_liouvillian_kind_equivalence(capsys):
    rng = np.random.default_rng(7)
    worst = 0.0
    for dim in range(2, 9):
        h = random_hermitian(rng, dim)
        o0 = random_hermitian(rng, dim)
        std = run_lanczos(h, o0, LanczosConfig(liouvillian_kind="standard"))
        til = run_lanczos(h, o0, LanczosConfig(liouvillian_kind="tilde",
                                               enforce_hermiticity=False))
        assert std.b_raw.size == til.b_raw.size, f"dim {dim}: length mismatch"
        worst = max(worst, float(np.max(np.abs(std.b_raw - til.b_raw))))
    _verdict(capsys, 3, "liouvillian-kind-equivalence", worst < 1e-8,
             f"max |b_standard - b_tilde| = {worst:.3e} for dims 2..8")


def test_04_orthogonality_stability(capsys):
    details = []
    worst = 0.0
    for length in EAST_SIZES:
        for s in EAST_SWEEP:
            eps = float(np.max(east_result(length, s).epsilon[:500]))
            worst = max(worst, eps)
            if eps >= 1e-8:
                details.append(f"east L={length} s={s}: {eps:.2e}")
    for n_majorana in SYK_SIZES:
        for kappa in SYK_KAPPAS:
            for r in SYK_REALIZATIONS:
                eps = float(np.max(syk_result(n_majorana, kappa, r).epsilon))
                worst = max(worst, eps)
                if eps >= 1e-8:
                    details.append(f"syk N={n_majorana} kappa={kappa} r={r}: {eps:.2e}")
    _verdict(capsys, 4, "orthogonality-stability", worst < 1e-8,
             f"max epsilon = {worst:.3e}; offenders: {details}")


def test_05_autocorrelation_consistency(capsys):
    rng = np.random.default_rng(11)
    times = np.linspace(0.0, 10.0, 201)
    worst_phi = 0.0
    worst_norm = 0.0
    for dim in range(2, 9):
        h = random_hermitian(rng, dim)
        o0 = random_hermitian(rng, dim)
        res = run_lanczos(h, o0)
        state = evolve_chain(res.b_raw, times)
        want = exact_autocorrelation(h, o0, times)
        worst_phi = max(worst_phi, float(np.max(np.abs(state.autocorrelation - want))))
        worst_norm = max(worst_norm, float(np.max(state.norm_error)))
    ok = worst_phi < 1e-6 and worst_norm < 1e-8
    _verdict(capsys, 5, "autocorrelation-consistency", ok,
             f"max |phi_0 - C| = {worst_phi:.3e}, max norm error = {worst_norm:.3e}")


def test_06_variance_scale_invariance(capsys):
    rng = np.random.default_rng(3)
    b = np.exp(0.4 * rng.normal(size=400) + 0.2)
    base = krylov_variance(b).sigma_sq
    worst = max(abs(krylov_variance(alpha * b).sigma_sq - base)
                for alpha in (1e-3, 1.0, 1e3))
    _verdict(capsys, 6, "variance-scale-invariance", worst < 1e-12,
             f"max |sigma_sq(alpha b) - sigma_sq(b)| = {worst:.3e}")


def test_07_synthetic_chain_variance_decay(capsys):
    # b_n = sqrt(n(n-1)) makes the paired log-ratios exactly
    # x_j = ln((2j-1)/(2j+1))/2 once the leading b_1 = 0 is cut, giving a
    # closed-form route that must agree with the library to roundoff.
    results = {}
    for m_pairs in (10, 100):
        chain = synthetic_largeq_chain(1.0, 2 * m_pairs + 1)
        lib = krylov_variance(chain.values, cutoff=1)
        assert lib.pairs_used == m_pairs
        j = np.arange(1, m_pairs + 1)
        closed = float(np.var(0.5 * np.log((2 * j - 1) / (2 * j + 1.0))))
        assert abs(lib.sigma_sq - closed) < 1e-12, (
            f"M={m_pairs}: library {lib.sigma_sq!r} vs closed form {closed!r}")
        results[m_pairs] = lib.sigma_sq
    ok = results[100] < 0.2 * results[10]
    _verdict(capsys, 7, "synthetic-chain-variance-decay", ok,
             f"sigma_sq(M=100)={results[100]:.4e} vs 0.2*sigma_sq(M=10)={0.2 * results[10]:.4e}")


def test_08_east_variance_ordering(capsys):
    failures = []
    summary = []
    for length in EAST_SIZES:
        sigma_sq = {s: krylov_variance(east_result(length, s).b_raw).sigma_sq
                    for s in EAST_SWEEP}
        peak = max(sigma_sq, key=sigma_sq.get)
        summary.append(f"L={length}: peak@s={peak} "
                       f"ratio={sigma_sq[2.0] / sigma_sq[-2.0]:.1f}")
        if not sigma_sq[-2.0] < sigma_sq[2.0] / 5.0:
            failures.append(
                f"L={length}: sigma_sq(-2)={sigma_sq[-2.0]:.3e} !< "
                f"sigma_sq(+2)/5={sigma_sq[2.0] / 5.0:.3e}")
        if not -0.5 <= peak <= 0.5:
            failures.append(f"L={length}: argmax at s={peak}, outside [-0.5, 0.5]")
    _verdict(capsys, 8, "east-variance-ordering", not failures,
             "; ".join(failures + summary))


def test_09_syk_variance_ordering(capsys):
    failures = []
    summary = []
    for n_majorana in SYK_SIZES:
        averaged = {}
        for kappa, cutoff in ((0.01, 50), (0.01, 0), (100.0, 50)):
            recs = [krylov_variance(syk_result(n_majorana, kappa, r).b_raw,
                                    cutoff=cutoff,
                                    provenance={"realization": r})
                    for r in SYK_REALIZATIONS]
            averaged[kappa, cutoff] = disorder_average(recs).sigma_bar_sq
        contrast = averaged[100.0, 50] / averaged[0.01, 50]
        inflation = averaged[0.01, 0] / averaged[0.01, 50]
        summary.append(f"N={n_majorana}: contrast={contrast:.2f} inflation={inflation:.2f}")
        if not contrast >= 5.0:
            failures.append(f"N={n_majorana}: kappa contrast {contrast:.2f} < 5")
        if not inflation >= 10.0:
            failures.append(f"N={n_majorana}: cutoff-0 inflation {inflation:.2f} < 10")
    _verdict(capsys, 9, "syk-variance-ordering", not failures,
             "; ".join(failures + summary))


def test_10_model_invariants(capsys):
    failures = []

    chis = build_majoranas(14)
    dim = 2 ** 7
    eye = np.eye(dim)
    worst_anti = 0.0
    for i in range(14):
        for j in range(i, 14):
            anti = chis[i] @ chis[j] + chis[j] @ chis[i]
            target = eye if i == j else 0.0
            worst_anti = max(worst_anti, float(np.max(np.abs(anti - target))))
    if worst_anti >= 1e-12:
        failures.append(f"anticommutators off by {worst_anti:.2e}")

    for n_majorana in (10, 14):
        h = build_syk(SykParams(n_majorana=n_majorana, kappa=1.0))
        herm = float(np.max(np.abs(h.matrix - h.matrix.conj().T)))
        if herm >= 1e-12:
            failures.append(f"N={n_majorana} Hamiltonian non-Hermitian: {herm:.2e}")
        if not parity_sector_check(h, n_majorana):
            failures.append(f"N={n_majorana} Hamiltonian breaks fermion parity")

    # coupling statistics: pool >= 1e4 samples of each Gaussian block
    j_pool = np.concatenate(
        [draw_syk_couplings(SykParams(n_majorana=10, kappa=2.0, realization=r))[0]
         for r in range(48)])
    k_pool = np.concatenate(
        [draw_syk_couplings(SykParams(n_majorana=10, kappa=2.0, realization=r))[1]
         for r in range(223)])
    assert j_pool.size >= 10_000 and k_pool.size >= 10_000
    j_var_rel = abs(np.var(j_pool) / (6.0 / 10.0 ** 3) - 1.0)
    k_var_rel = abs(np.var(k_pool) / (2.0 ** 2 / 10.0) - 1.0)
    if j_var_rel >= 0.05:
        failures.append(f"quartic coupling variance off by {j_var_rel:.1%}")
    if k_var_rel >= 0.05:
        failures.append(f"quadratic coupling variance off by {k_var_rel:.1%}")

    j1, k1 = draw_syk_couplings(SykParams(n_majorana=10, kappa=2.0, realization=5))
    j2, k2 = draw_syk_couplings(SykParams(n_majorana=10, kappa=2.0, realization=5))
    if not (np.array_equal(j1, j2) and np.array_equal(k1, k2)):
        failures.append("coupling draws are not bitwise reproducible")
    h = build_quantum_east(EastParams(length=5, s=0.3))
    o0 = build_operator("n:2", length=5)
    cfg = LanczosConfig(max_steps=100)
    if not np.array_equal(run_lanczos(h, o0, cfg).b_raw,
                          run_lanczos(h, o0, cfg).b_raw):
        failures.append("repeated runs are not bitwise reproducible")

    _verdict(capsys, 10, "model-invariants", not failures, "; ".join(failures))
