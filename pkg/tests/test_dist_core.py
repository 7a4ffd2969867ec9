import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from oracles import gap_params, mp_cf
from pseudomoment_clt import dist_core as dc
from pseudomoment_clt.errors import SpecInvalid
from pseudomoment_clt.example_dist import build_example, normal_triangle_mixture, normal_uniform_mixture

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


@pytest.fixture(scope="module")
def gap():
    return build_example(0.5)


def atom_spec(loc=0.0):
    return dc.DistributionSpec(1.0, (), ((loc, 1.0),))


def two_point():
    return dc.DistributionSpec(1.0, (), ((-1.0, 0.5), (1.0, 0.5)))


def mixed_spec():
    """Asymmetric spec touching every family and an atom; not centered."""
    pieces = (
        dc.DensityPiece("gaussian_restriction", (-math.inf, -0.3), 0.8),
        dc.DensityPiece("gaussian_restriction", (0.7, 2.5), 0.5),
        dc.DensityPiece("uniform", (-0.2, 0.9), 0.1),
        dc.DensityPiece("polynomial", (1.0, 2.0), 0.2, (0.5, -0.2, 0.1)),
    )
    return dc.DistributionSpec(1.3, pieces, ((0.4, 0.05),))


class TestPieces:
    def test_unknown_family(self):
        with pytest.raises(SpecInvalid, match="unknown family"):
            dc.DensityPiece("cauchy", (0.0, 1.0))

    @pytest.mark.parametrize("interval", [(1.0, 1.0), (2.0, 1.0)])
    def test_empty_interval(self, interval):
        with pytest.raises(SpecInvalid, match="empty"):
            dc.DensityPiece("uniform", interval, 1.0)

    def test_infinite_uniform_rejected(self):
        with pytest.raises(SpecInvalid, match="finite interval"):
            dc.DensityPiece("uniform", (0.0, math.inf), 1.0)

    def test_nonpositive_weight(self):
        with pytest.raises(SpecInvalid, match="weight"):
            dc.DensityPiece("uniform", (0.0, 1.0), 0.0)

    def test_violations_are_listed(self):
        with pytest.raises(SpecInvalid) as info:
            dc.DensityPiece("uniform", (1.0, 0.0), -1.0)
        assert len(info.value.violations) == 2

    @pytest.mark.parametrize("k", range(0, 7))
    def test_gaussian_piece_moment_vs_scipy(self, k):
        piece = dc.DensityPiece("gaussian_restriction", (-0.7, 1.9))
        ref = stats.norm.expect(lambda x: x**k, lb=-0.7, ub=1.9, epsabs=1e-15, epsrel=1e-13)
        assert piece.moment(k) == pytest.approx(ref, rel=1e-10, abs=1e-14)

    def test_upper_tail_mass_keeps_precision(self):
        piece = dc.DensityPiece("gaussian_restriction", (9.0, math.inf))
        assert piece.mass() == pytest.approx(stats.norm.sf(9.0), rel=1e-12)


class TestPdfCdf:
    def test_normal_pdf_at_zero(self):
        assert dc.pdf(dc.standard_normal(), 0.0) == pytest.approx(PHI0, rel=1e-15)

    def test_uniform_height(self):
        spec = dc.centered_uniform(2.0)
        assert dc.pdf(spec, 0.0) == pytest.approx(0.25)
        assert dc.pdf(spec, 2.5) == 0.0

    def test_gap_region_is_empty(self, gap):
        theta, _ = gap_params(0.5)
        x = 0.495
        assert float(theta) * 0.5 < x < 0.5
        assert dc.pdf(gap, x) == 0.0
        assert dc.pdf(gap, -x) == 0.0

    def test_gap_central_height(self, gap):
        _, h = gap_params(0.5)
        assert dc.pdf(gap, 0.0) == pytest.approx(float(h), rel=1e-13)

    def test_normal_cdf_at_zero(self):
        assert dc.cdf(dc.standard_normal(), 0.0) == 0.5

    def test_atom_step(self):
        spec = atom_spec()
        assert dc.cdf(spec, -0.1) == 0.0
        assert dc.cdf(spec, 0.0) == 1.0

    def test_gap_flat_cdf(self, gap):
        # F equals Phi(-eps) on (-eps, -theta eps)
        assert dc.cdf(gap, -0.495) == pytest.approx(0.3085375387259869, abs=1e-13)

    @pytest.mark.parametrize("sign", [-1, 1])
    def test_gap_cdf_continuous_at_breakpoints(self, gap, sign):
        theta, _ = gap_params(0.5)
        for b in (0.5, float(theta) * 0.5):
            x = sign * b
            assert dc.cdf(gap, x - 1e-13) == pytest.approx(dc.cdf(gap, x + 1e-13), abs=1e-12)

    def test_cdf_monotone_and_bounded(self, gap):
        xs = np.linspace(-8, 8, 4001)
        vals = dc.cdf(mixed_spec(), xs)
        assert np.all(np.diff(vals) >= 0)
        assert vals[0] >= 0 and vals[-1] <= 1

    @pytest.mark.parametrize("x", [-1.7, -0.31, 0.0, 0.4, 0.8, 1.5, 2.2])
    def test_cdf_is_integrated_pdf(self, x):
        from scipy import integrate

        spec = mixed_spec()
        pts = [p for p in spec.breakpoints() if p < x]
        val, _ = integrate.quad(lambda u: dc.pdf(spec, u), -40, x, points=pts, limit=200, epsabs=1e-13)
        atoms = sum(m for loc, m in spec.atoms if loc <= x)
        assert dc.cdf(spec, x) == pytest.approx(val + atoms, abs=1e-10)


class TestCf:
    @given(st.floats(-50, 50))
    def test_normal_cf(self, t):
        assert dc.cf(dc.standard_normal(), t) == pytest.approx(math.exp(-t * t / 2), abs=1e-15)

    @given(st.floats(0.01, 80))
    def test_uniform_sinc(self, t):
        a = math.sqrt(3.0)
        assert dc.cf(dc.centered_uniform(), t).real == pytest.approx(math.sin(a * t) / (a * t), abs=1e-14)

    def test_cf_at_zero_is_total_mass(self):
        spec = mixed_spec()
        assert dc.cf(spec, 0.0) == pytest.approx(dc.moment(spec, 0), abs=1e-15)

    def test_cf_at_zero_normalized(self, gap):
        assert dc.cf(gap, 0.0) == pytest.approx(1.0, abs=1e-15)

    @given(st.floats(-200, 200))
    def test_hermitian_and_bounded(self, t):
        spec = mixed_spec()
        f, g = dc.cf(spec, t), dc.cf(spec, -t)
        assert abs(f - np.conj(g)) < 1e-15
        assert abs(f) <= 1.0 + 1e-15

    def test_gap_cf_at_one_vs_mpmath(self, gap):
        # mpmath quadrature of e^{-1/2} - int_{-eps}^{eps} cos x phi + 2 h sin(theta eps)
        assert dc.cf(gap, 1.0).real == pytest.approx(0.6065271270862734, abs=1e-14)

    def test_analytic_vs_quadrature_grid(self):
        spec = mixed_spec()
        ts = np.linspace(-20, 20, 100)
        analytic = dc.cf(spec, ts)
        brute = np.array([dc.cf_quadrature(spec, t) for t in ts])
        assert np.max(np.abs(analytic - brute)) < 10 * dc.TAU_QUAD

    @pytest.mark.parametrize("t", [0.3, 7.0, 55.0])
    def test_polynomial_cf_vs_mpmath(self, t):
        c = math.sqrt(6.0)
        spec = dc.DistributionSpec(1.0, tuple(dc.centered_triangle(c)))
        ref = mp_cf([(lambda x: (c + x) / c**2, -c, 0), (lambda x: (c - x) / c**2, 0, c)], t)
        assert abs(dc.cf(spec, t) - ref) < 1e-14


class TestMoments:
    def test_normal_variance(self):
        assert dc.moment(dc.standard_normal(), 2) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("spec_fn", [normal_triangle_mixture, normal_uniform_mixture, dc.centered_uniform])
    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_odd_moments_vanish(self, spec_fn, k):
        assert abs(dc.moment(spec_fn(), k)) < dc.TAU_MOM

    def test_gap_variance(self, gap):
        assert dc.moment(gap, 2) == pytest.approx(1.0, abs=1e-12)

    def test_order_limit(self):
        with pytest.raises(ValueError):
            dc.moment(dc.standard_normal(), dc.K_MAX + 1)


class TestValidate:
    def test_standard_normal(self):
        rep = dc.validate(dc.standard_normal())
        assert abs(rep.mass_defect) < 1e-14
        assert rep.density_sup == pytest.approx(PHI0, rel=1e-12)
        assert rep.cf_l1_norm == pytest.approx(math.sqrt(2 * math.pi), rel=1e-10)
        assert rep.cf_integrable

    def test_two_point_law(self):
        rep = dc.validate(two_point())
        assert rep.density_sup == 0.0
        assert not rep.cf_integrable
        assert rep.cf_l1_truncation_error > 100
        assert math.isinf(rep.cf_l1_upper)

    def test_gap_density_sup(self, gap):
        _, h = gap_params(0.5)
        rep = dc.validate(gap)
        assert rep.density_sup == pytest.approx(float(h), rel=1e-12)
        assert not rep.cf_integrable

    def test_triangle_mixture_integrable(self):
        rep = dc.validate(normal_triangle_mixture())
        assert rep.cf_integrable
        assert 2.45 < rep.cf_l1_norm < rep.cf_l1_upper < 2.6

    def test_bad_variance(self):
        spec = dc.DistributionSpec(2.0, (dc.DensityPiece("gaussian_restriction", (-math.inf, math.inf)),))
        with pytest.raises(SpecInvalid, match="variance"):
            dc.validate(spec)

    def test_bad_mass_and_mean(self):
        spec = dc.DistributionSpec(1.0, (dc.DensityPiece("uniform", (0.0, 1.0), 0.5),))
        with pytest.raises(SpecInvalid) as info:
            dc.validate(spec)
        assert any("mass" in v for v in info.value.violations)
        assert any("mean" in v for v in info.value.violations)

    def test_negative_polynomial(self):
        piece = dc.DensityPiece("polynomial", (-1.0, 1.0), 1.0, (0.5, 0.0, -1.0))
        with pytest.raises(SpecInvalid, match="negative"):
            dc.validate(dc.DistributionSpec(1.0, (piece,)))


class TestSerialization:
    @pytest.mark.parametrize("make", [mixed_spec, lambda: build_example(0.3), dc.standard_normal, two_point])
    def test_round_trip(self, make):
        spec = make()
        back = dc.loads_spec(dc.dumps_spec(spec))
        assert back == spec
        assert dc.dumps_spec(back) == dc.dumps_spec(spec)

    def test_infinite_endpoints_are_strings(self):
        doc = dc.spec_to_dict(dc.standard_normal())
        assert doc["pieces"][0]["interval"] == ["-inf", "+inf"]
        assert doc["spec_version"] == 1

    def test_wrong_version(self):
        doc = dc.spec_to_dict(dc.standard_normal())
        doc["spec_version"] = 2
        with pytest.raises(SpecInvalid, match="spec_version"):
            dc.spec_from_dict(doc)

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "gap.json"
        dc.save_spec(build_example(0.5), path)
        assert dc.load_spec(path) == build_example(0.5)

    @given(
        st.floats(0.1, 5.0),
        st.floats(-3, 3),
        st.floats(0.01, 2.0),
        st.floats(1e-3, 10.0),
    )
    def test_uniform_piece_round_trip(self, sigma, a, width, height):
        spec = dc.DistributionSpec(sigma, (dc.DensityPiece("uniform", (a, a + width), height),))
        assert dc.loads_spec(dc.dumps_spec(spec)) == spec
