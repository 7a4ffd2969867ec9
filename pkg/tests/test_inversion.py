import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import gap_params, standardized_uniform_sum_cdf, standardized_uniform_sum_pdf
from pseudomoment_clt import dist_core as dc
from pseudomoment_clt import inversion as inv
from pseudomoment_clt.errors import AtomsPresent, TruncationTooLarge
from pseudomoment_clt.example_dist import build_example, normal_triangle_mixture, normal_uniform_mixture
from pseudomoment_clt.pseudomoments import report

GRID = inv.GridConfig()
UNIFORM = dc.centered_uniform()
RHO1_GAP = 0.002928693095539539  # Phi(-theta eps) - Phi(-eps), mpmath


@pytest.fixture(scope="module")
def gap():
    return build_example(0.5)


def kink_distance(x, kinks):
    return np.min(np.abs(np.asarray(x)[:, None] - np.asarray(kinks)[None, :]), axis=1)


def uniform_kinks(n):
    return [(2 * k - n) * math.sqrt(3.0) / math.sqrt(n) for k in range(n + 1)]


class TestGridConfig:
    @pytest.mark.parametrize("kw", [{"points": 2**11}, {"points": 5000}, {"x_halfwidth": 0.0}, {"t_cutoff": -1.0}])
    def test_invariants(self, kw):
        with pytest.raises(ValueError):
            inv.GridConfig(**kw)

    def test_resolution(self):
        rg = inv.resolve_grid(dc.standard_normal(), 1, GRID)
        assert rg.halfwidth == 12.0 and rg.points == 2**18
        assert rg.dx == pytest.approx(24.0 / 2**18)
        assert rg.t_max == pytest.approx(2**17 * math.pi / 12)

    def test_halfwidth_grows_with_n(self):
        assert inv.default_halfwidth(64) == pytest.approx(12 + 2 * math.sqrt(math.log(64)))

    def test_t_cutoff_doubles_points(self):
        rg = inv.resolve_grid(dc.standard_normal(), 1, inv.GridConfig(points=2**12, t_cutoff=1000.0))
        assert rg.t_max >= 1000.0 and rg.points == 2**13

    def test_strict_truncation(self):
        with pytest.raises(TruncationTooLarge):
            inv.resolve_grid(UNIFORM, 1, inv.GridConfig(points=2**12, strict=True))


class TestGaussian:
    @pytest.mark.parametrize("n", [1, 2, 3, 7, 20, 64])
    def test_fixed_point(self, n):
        cdf_d, pdf_d = inv.sup_distances(dc.standard_normal(), n, GRID)
        assert cdf_d.value < 1e-9 and pdf_d.value < 1e-9

    def test_density(self):
        x, p = inv.density_of_sum(dc.standard_normal(), 5, GRID)
        assert np.max(np.abs(p - dc.std_normal_pdf(x))) < 1e-10

    def test_median(self):
        x, c = inv.cdf_of_sum(dc.standard_normal(), 7, GRID)
        assert c[np.searchsorted(x, 0.0)] == pytest.approx(0.5, abs=1e-9)


class TestIrwinHall:
    def test_density_n2(self):
        x, p = inv.density_of_sum(UNIFORM, 2, GRID)
        idx = np.arange(0, x.size, 997)
        idx = idx[np.abs(x[idx]) < 4]
        ref = np.array([standardized_uniform_sum_pdf(v, 2) for v in x[idx]])
        assert np.max(np.abs(p[idx] - ref)) < 1e-6
        far = kink_distance(x[idx], uniform_kinks(2)) > 0.05
        assert np.max(np.abs(p[idx] - ref)[far]) < 1e-8

    def test_symmetric_median(self):
        x, c = inv.cdf_of_sum(UNIFORM, 2, GRID)
        assert c[np.searchsorted(x, 0.0)] == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_cdf_ten_points(self, n):
        x, c = inv.cdf_of_sum(UNIFORM, n, GRID)
        idx = np.searchsorted(x, np.linspace(-2.2, 2.2, 10))
        ref = np.array([standardized_uniform_sum_cdf(x[i], n) for i in idx])
        assert np.max(np.abs(c[idx] - ref)) < 1e-8

    def test_cdf_n1_away_from_kinks(self):
        x, c = inv.cdf_of_sum(UNIFORM, 1, GRID)
        idx = np.searchsorted(x, np.linspace(-4, 4, 100))
        idx = idx[kink_distance(x[idx], uniform_kinks(1)) > 0.05]
        ref = np.array([standardized_uniform_sum_cdf(x[i], 1) for i in idx])
        assert np.max(np.abs(c[idx] - ref)) < 1e-8

    def test_rho1_two_paths(self):
        # direct closed form: the sup sits at x = -1 where F_U and Phi have equal slope
        xs = np.linspace(-3, 3, 600_001)
        direct = np.max(np.abs(np.clip((xs + math.sqrt(3)) / (2 * math.sqrt(3)), 0, 1) - stats.norm.cdf(xs)))
        assert inv.sup_cdf_distance(UNIFORM, 1, GRID) == pytest.approx(direct, abs=1e-8)

    def test_pdf_sup_n1(self):
        # the sup sits at the edge x -> sqrt 3 from inside, not at x = 0
        edge = 1 / (2 * math.sqrt(3)) - stats.norm.pdf(math.sqrt(3))
        centre = stats.norm.pdf(0) - 1 / (2 * math.sqrt(3))
        assert edge > centre
        assert inv.sup_pdf_distance(UNIFORM, 1, GRID) == pytest.approx(edge, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 2])
    def test_semigroup(self, n):
        grid = inv.GridConfig(x_halfwidth=14.0, max_points=2**18)
        tri = dc.DistributionSpec(1.0, tuple(dc.centered_triangle()))
        x, p2n = inv.density_of_sum(UNIFORM, 2 * n, grid)
        _, pn = inv.density_of_sum(tri, n, grid)
        assert np.max(np.abs(p2n - pn)) < 1e-7


class TestGapExample:
    def test_rho1_exact(self, gap):
        assert inv.sup_cdf_distance(gap, 1, GRID) == pytest.approx(RHO1_GAP, abs=1e-12)

    def test_pdf_sup_n1_analytic(self, gap):
        theta, _ = gap_params(0.5)
        ref = float(dc.std_normal_pdf(float(theta) * 0.5))
        assert inv.sup_pdf_distance(gap, 1, GRID) == pytest.approx(ref, abs=1e-8)

    def test_self_consistency_n1(self, gap):
        inverted = inv.invert_sum(gap, 1, GRID)
        x = inverted.x
        keep = (kink_distance(x, gap.breakpoints()) > 0.05) & (np.abs(x) < 8)
        assert np.max(np.abs(inverted.distribution - dc.cdf(gap, x))[keep]) < 1e-8
        # density jumps leave a Gibbs residue of order jump / (pi T distance)
        assert np.max(np.abs(inverted.density - dc.pdf(gap, x))[keep]) < 2e-5

    def test_rho_decreasing(self, gap):
        dists = [inv.sup_distances(gap, n, GRID)[0] for n in (2, 4, 8, 16, 32)]
        for a, b in zip(dists, dists[1:]):
            assert b.value <= a.value + a.error + b.error

    @pytest.mark.parametrize("n", [3, 8])
    def test_normalization(self, gap, n):
        r = inv.invert_sum(gap, n, GRID)
        mass = float(np.sum(r.density) * r.grid.dx)
        tol = GRID.quad_tol
        assert 1 - 10 * tol - r.cdf_error <= mass <= 1 + 10 * tol
        assert r.density.min() >= -10 * tol

    def test_error_terms_reported(self, gap):
        r = inv.invert_sum(gap, 4, GRID)
        assert set(r.error_terms) >= {"cdf_truncation", "cdf_aliasing", "cdf_grid_gap", "pdf_truncation"}
        assert r.cdf_error == pytest.approx(sum(v for k, v in r.error_terms.items() if k.startswith("cdf")))


class TestErrors:
    def test_atoms_rejected(self):
        spec = dc.DistributionSpec(1.0, (), ((-1.0, 0.5), (1.0, 0.5)))
        with pytest.raises(AtomsPresent):
            inv.density_of_sum(spec, 2)
        with pytest.raises(AtomsPresent):
            inv.sup_cdf_distance(spec, 1)

    def test_n_positive(self):
        with pytest.raises(ValueError):
            inv.invert_sum(UNIFORM, 0)


class TestMonteCarlo:
    def test_normal_ks_golden(self):
        ks = inv.mc_ks_estimate(dc.standard_normal(), 3, inv.GridConfig(mc_samples=10**6, mc_seed=12345))
        assert ks < 0.0015
        assert ks == pytest.approx(0.0006283335308117088, rel=1e-9)

    def test_deterministic(self, gap):
        grid = inv.GridConfig(mc_samples=10**4, mc_seed=7)
        assert inv.mc_ks_estimate(gap, 3, grid) == inv.mc_ks_estimate(gap, 3, grid)

    def test_seed_matters(self, gap):
        a = inv.mc_ks_estimate(gap, 3, inv.GridConfig(mc_samples=10**4, mc_seed=1))
        b = inv.mc_ks_estimate(gap, 3, inv.GridConfig(mc_samples=10**4, mc_seed=2))
        assert a != b

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            inv.mc_ks_estimate(UNIFORM, 1, inv.GridConfig(mc_samples=100))

    def test_gap_agreement(self, gap):
        grid = inv.GridConfig(mc_samples=200_000)
        d = inv.sup_distances(gap, 8, grid)[0]
        assert abs(inv.mc_ks_estimate(gap, 8, grid) - d.value) <= 3 / math.sqrt(grid.mc_samples) + d.error

    @pytest.mark.parametrize("make", [build_example, normal_triangle_mixture, normal_uniform_mixture])
    def test_sampler_matches_cdf(self, make):
        spec = make()
        draws = inv.sample(spec, 200_000, np.random.Generator(np.random.Philox(key=3)))
        res = stats.kstest(draws, lambda x: dc.cdf(spec, x))
        assert res.pvalue > 1e-3

    def test_polynomial_inverse_cdf_exact(self):
        piece = dc.centered_triangle()[1]
        u = np.linspace(0.0, 1.0, 101)
        x = inv._invert_polynomial_cdf(piece, u)
        assert np.max(np.abs(piece.mass_below(x) - u * piece.mass())) < 1e-14

    def test_atoms_sampled(self):
        spec = dc.DistributionSpec(1.0, (), ((-1.0, 0.5), (1.0, 0.5)))
        draws = inv.sample(spec, 10_000, np.random.Generator(np.random.Philox(key=0)))
        assert set(np.unique(draws)) == {-1.0, 1.0}


class TestLemmaCheck:
    def test_normal_lemma1_only(self):
        rows = inv.lemma_check(dc.standard_normal(), 3, 4)
        assert all(r.ok and r.envelope is None and r.omega < 1e-15 for r in rows)

    @pytest.mark.parametrize("make", [build_example, normal_triangle_mixture, normal_uniform_mixture])
    @pytest.mark.parametrize("n", [1, 4, 16])
    def test_all_pass(self, make, n):
        rows = inv.lemma_check(make(), 3, n)
        assert len(rows) == 800
        assert {r.branch for r in rows} == {1, 2}
        assert all(r.ok for r in rows)

    @pytest.mark.parametrize("make", [build_example, normal_triangle_mixture])
    def test_corrupted_nu_detected(self, make):
        import dataclasses

        spec = make()
        rep = report(spec, 3, 4)
        # halving stays inside the slack of Lemma 1 here; a tenfold cut does not
        bad = dataclasses.replace(rep, nu1=rep.nu1 / 10, nu2=rep.nu2 / 10, nu=rep.nu / 10)
        rows = inv.lemma_check(spec, 3, 4, report=bad)
        assert any(not r.ok for r in rows)

    def test_explicit_grid(self, gap):
        rows = inv.lemma_check(gap, 3, 2, t_grid=[0.0, 0.5, 30.0])
        assert [r.t for r in rows] == [0.0, 0.5, 30.0]
        assert rows[0].abs_cf == pytest.approx(1.0) and rows[0].branch == 1


class TestReport:
    def test_fields_and_round_trip(self, gap):
        rep = inv.empirical_report(gap, 4, inv.GridConfig(mc_samples=10**4))
        assert 0 <= rep.sup_cdf_dist <= 1 and rep.sup_pdf_dist >= 0 and rep.mc_ks >= 0
        assert rep.grid["resolved_points"] >= 2**18
        assert inv.EmpiricalReport.from_dict(rep.to_dict()) == rep

    def test_dump(self, tmp_path, gap):
        r = inv.invert_sum(gap, 3, inv.GridConfig(points=2**12))
        path = tmp_path / "p.txt"
        inv.dump_two_column(path, r.x, r.density)
        lines = path.read_text().splitlines()
        assert len(lines) == r.x.size
        xs, ys = np.loadtxt(path, unpack=True)
        assert np.array_equal(xs, r.x) and np.array_equal(ys, r.density)


@settings(max_examples=10)
@given(st.floats(0.5, 0.99), st.integers(2, 12))
def test_mixture_distribution_is_proper(w, n):
    x, c = inv.cdf_of_sum(normal_triangle_mixture(w), n, inv.GridConfig(points=2**14))
    assert np.all(np.diff(c) >= 0) and c[0] >= 0 and c[-1] <= 1
    assert c[0] < 1e-9 and c[-1] > 1 - 1e-9
