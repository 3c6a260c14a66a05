import numpy as np
import pytest

from opkrylov import (
    AveragedVariance,
    BSequence,
    VarianceRecord,
    disorder_average,
    krylov_variance,
    rescale,
    spectral_bounds,
)


class TestBSequence:
    def test_basic_container(self):
        seq = BSequence(np.array([1.0, 2.0]), provenance={"model": "custom"})
        assert len(seq) == 2
        assert seq.raw
        assert seq.provenance["model"] == "custom"

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            BSequence(np.array([1.0, -0.5]))
        with pytest.raises(ValueError):
            BSequence(np.array([1.0, np.nan]))


class TestSpectralBounds:
    def test_diagonal_matrix(self):
        lo, hi = spectral_bounds(np.diag([-3.0, 0.5, 2.0]))
        assert lo == pytest.approx(-3.0)
        assert hi == pytest.approx(2.0)

    def test_dense_limit_refusal(self):
        big = np.zeros((4100, 4100))
        with pytest.raises(ValueError, match="iteratively"):
            spectral_bounds(big)
        # an explicit smaller limit also triggers the refusal
        with pytest.raises(ValueError):
            spectral_bounds(np.eye(10), dense_limit=8)


class TestRescale:
    def test_divides_by_half_bandwidth(self):
        seq = BSequence(np.array([1.0, 2.0, 3.0]))
        out = rescale(seq, bounds=(-4.0, 6.0))
        # r = (E_max - E_min) / 2 = 5
        assert np.allclose(out.values, [0.2, 0.4, 0.6])
        assert not out.raw
        assert out.spectral_bounds == (-4.0, 6.0)

    def test_uses_stored_bounds(self):
        seq = BSequence(np.array([1.0, 2.0]), spectral_bounds=(-1.0, 3.0))
        out = rescale(seq)
        assert np.allclose(out.values, [0.5, 1.0])

    def test_provenance_carried(self):
        seq = BSequence(np.array([1.0]), provenance={"model": "east", "s": 0.3})
        out = rescale(seq, bounds=(0.0, 4.0))
        assert out.provenance["model"] == "east"

    def test_refuses_double_rescale(self):
        seq = BSequence(np.array([1.0, 2.0]), raw=False)
        with pytest.raises(ValueError):
            rescale(seq, bounds=(0.0, 2.0))

    def test_refuses_missing_or_degenerate_bounds(self):
        seq = BSequence(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            rescale(seq)
        with pytest.raises(ValueError):
            rescale(seq, bounds=(1.0, 1.0))


class TestKrylovVariance:
    def test_hand_computed_case(self):
        """b = (2, 1, 1, 2) pairs into x = (ln 2, -ln 2): mean 0, variance (ln 2)^2."""
        rec = krylov_variance([2.0, 1.0, 1.0, 2.0], cutoff=0)
        assert rec.pairs_used == 2
        assert rec.sigma_sq == pytest.approx(np.log(2.0) ** 2)
        assert rec.sigma == pytest.approx(np.log(2.0))
        assert rec.cutoff == 0

    def test_cutoff_reindexes_pairs(self):
        """Default mode re-pairs from the first retained coefficient."""
        values = [9.0, 2.0, 1.0, 1.0, 2.0]
        rec = krylov_variance(values, cutoff=1)
        ref = krylov_variance([2.0, 1.0, 1.0, 2.0], cutoff=0)
        assert rec.sigma_sq == pytest.approx(ref.sigma_sq)
        assert rec.pairs_used == 2

    def test_global_index_pairing(self):
        """With global pairing a cutoff landing mid-pair skips to the next
        odd index instead of re-indexing."""
        values = np.array([3.0, 5.0, 2.0, 1.0, 1.0, 2.0, 7.0])
        rec = krylov_variance(values, cutoff=2, pair_by_global_index=True)
        # first odd 1-based index past 2 is 3: pairs (b3, b4) and (b5, b6)
        x = np.log([2.0 / 1.0, 1.0 / 2.0])
        assert rec.pairs_used == 2
        assert rec.sigma_sq == pytest.approx(np.var(x))

    def test_odd_tail_dropped(self):
        rec = krylov_variance([2.0, 1.0, 1.0, 2.0, 9.0], cutoff=0)
        assert rec.pairs_used == 2
        assert rec.sigma_sq == pytest.approx(np.log(2.0) ** 2)

    def test_scale_invariance(self):
        rng = np.random.default_rng(31)
        values = rng.uniform(0.5, 2.0, size=40)
        base = krylov_variance(values, cutoff=6).sigma_sq
        for alpha in (1e-3, 1e3):
            scaled = krylov_variance(alpha * values, cutoff=6).sigma_sq
            assert abs(scaled - base) < 1e-12

    def test_provenance_adopted_from_bsequence(self):
        seq = BSequence(np.array([2.0, 1.0, 1.0, 2.0]), provenance={"model": "syk"})
        rec = krylov_variance(seq, cutoff=0)
        assert rec.provenance["model"] == "syk"
        override = krylov_variance(seq, cutoff=0, provenance={"model": "other"})
        assert override.provenance["model"] == "other"

    def test_error_cases(self):
        with pytest.raises(ValueError, match="cutoff"):
            krylov_variance([1.0, 1.0, 1.0, 1.0], cutoff=-1)
        with pytest.raises(ValueError, match="retained"):
            krylov_variance([1.0, 1.0, 1.0], cutoff=0)
        with pytest.raises(ValueError, match="retained"):
            krylov_variance([1.0] * 10, cutoff=8)
        with pytest.raises(ValueError, match="nonpositive"):
            krylov_variance([1.0, 0.0, 1.0, 1.0], cutoff=0)
        # a zero before the window is fine
        rec = krylov_variance([0.0, 2.0, 1.0, 1.0, 2.0], cutoff=1)
        assert rec.pairs_used == 2


class TestDisorderAverage:
    def make(self, sigma, realization, cutoff=50):
        return VarianceRecord(
            sigma=sigma,
            sigma_sq=sigma**2,
            cutoff=cutoff,
            pairs_used=100,
            provenance={"model": "syk", "kappa": 1.0, "realization": realization},
        )

    def test_mean_of_sigma_then_square(self):
        recs = [self.make(0.1, 0), self.make(0.3, 1)]
        avg = disorder_average(recs)
        assert isinstance(avg, AveragedVariance)
        assert avg.sigma_bar == pytest.approx(0.2)
        assert avg.sigma_bar_sq == pytest.approx(0.04)
        assert avg.realizations == 2
        assert avg.cutoff == 50

    def test_single_record(self):
        avg = disorder_average([self.make(0.5, 0)])
        assert avg.sigma_bar == pytest.approx(0.5)
        assert avg.realizations == 1

    def test_requires_common_cutoff(self):
        recs = [self.make(0.1, 0, cutoff=50), self.make(0.2, 1, cutoff=40)]
        with pytest.raises(ValueError, match="cutoff"):
            disorder_average(recs)

    def test_requires_consistent_provenance(self):
        good = self.make(0.1, 0)
        other = VarianceRecord(
            sigma=0.2,
            sigma_sq=0.04,
            cutoff=50,
            pairs_used=100,
            provenance={"model": "syk", "kappa": 2.0, "realization": 1},
        )
        with pytest.raises(ValueError):
            disorder_average([good, other])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            disorder_average([])
