import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import min_pt_symplectic, tms_closed_form, wick_normal_fourth
from systems import parametric_block, random_stable_system, standard_phase
from raman_langevin.errors import G2UndefinedError, NonPhysicalCovarianceError
from raman_langevin.linear_system import build_diffusion, build_drift, stability
from raman_langevin.moments import MomentMatrix, evolve, initial_moments, steady_moments
from raman_langevin.observables import (
    correlation_matrix,
    g2_zero,
    min_symplectic,
    occupation,
    pair_correlation,
    parse_pair,
    quadrature_covariance,
    quadrature_variance,
    record,
    single_mode_symplectic,
    symplectic_eta,
    symplectic_spectrum,
)
from raman_langevin.params import BOSONIC_MODES, ModeId, SystemParams
from raman_langevin.steady_state import SteadyState, solve

SEEDS = st.integers(0, 2**32 - 1)
VACUUM = initial_moments()


def gaussian_mode(n, m, k=0):
    """Moment matrix with one non-vacuum mode: <a+a> = n, <aa> = m."""
    M = initial_moments().M.copy()
    i, j = 2 * k, 2 * k + 1
    M[i, i], M[j, j] = m, np.conj(m)
    M[j, i], M[i, j] = n, n + 1
    return MomentMatrix(M)


def thermal(Ns):
    M = initial_moments().M.copy()
    for k, n in enumerate(Ns):
        M[2 * k + 1, 2 * k] = n
        M[2 * k, 2 * k + 1] = n + 1
    return MomentMatrix(M)


def tms_pure(r, chi=0.5):
    A, D = parametric_block(chi, kappa=0.0, noise=False)
    return evolve(VACUUM, A, D, r / chi)


def random_symplectic_2x2(rng):
    th, ph = rng.uniform(0, 2 * np.pi, 2)
    s = math.exp(rng.uniform(-1, 1))
    rot = lambda a: np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    return rot(th) @ np.diag([s, 1 / s]) @ rot(ph)


class TestVariances:
    def test_vacuum(self):
        for mode in BOSONIC_MODES:
            v = quadrature_variance(VACUUM, mode)
            assert v.varX == v.varP == 0.5

    def test_thermal(self):
        v = quadrature_variance(thermal([0, 0, 3.5, 0, 0]), ModeId.STOKE)
        assert v.varX == v.varP == 4.0

    def test_squeezed(self):
        r = 0.4
        M = gaussian_mode(math.sinh(r) ** 2, -math.sinh(r) * math.cosh(r))
        v = quadrature_variance(M, "signal")
        assert v.varX == pytest.approx(math.exp(-2 * r) / 2, rel=1e-12)
        assert v.varP == pytest.approx(math.exp(2 * r) / 2, rel=1e-12)

    def test_atom_rejected(self):
        with pytest.raises(ValueError):
            quadrature_variance(VACUUM, ModeId.ATOM)

    def test_damped_parametric_squeezing(self):
        # closed-form stationary state of the damped squeezer at T = 0
        kappa, chi = 1.0, 0.6
        A, D = parametric_block(chi, kappa)
        M = steady_moments(A, D)
        for mode in ("signal", "idler"):
            v = quadrature_variance(M, mode)
            assert v.product >= 0.25
        V = standard_phase(correlation_matrix(M, ("signal", "idler")))
        a = kappa**2 / (2 * (kappa**2 - chi**2))
        c = kappa * chi / (2 * (kappa**2 - chi**2))
        ref = np.block([[a * np.eye(2), c * np.diag([1, -1])], [c * np.diag([1, -1]), a * np.eye(2)]])
        np.testing.assert_allclose(V, ref, atol=1e-12)
        # the joint quadrature (x_s + x_i)/sqrt(2) dips below vacuum
        assert np.min(np.linalg.eigvalsh(V)) == pytest.approx(kappa / (2 * (kappa + chi)), rel=1e-10)
        assert pair_correlation(M, ("signal", "idler")).two_eta == pytest.approx(kappa / (kappa + chi), rel=1e-10)


class TestG2:
    def test_coherent(self):
        ss = SteadyState(alpha_s=3 - 4j)
        assert g2_zero(VACUUM, ss, "signal", include_mean=True) == pytest.approx(1.0, abs=1e-12)

    def test_thermal(self):
        assert g2_zero(thermal([0.7, 0, 0, 0, 0]), None, "signal", include_mean=False) == pytest.approx(2.0, abs=1e-12)

    def test_squeezed_vacuum(self):
        n, m = 0.3, 0.2 + 0.4j
        got = g2_zero(gaussian_mode(n, m), None, "signal", include_mean=False)
        assert got == pytest.approx(2 + abs(m) ** 2 / n**2, rel=1e-13)

    def test_undefined(self):
        with pytest.raises(G2UndefinedError):
            g2_zero(VACUUM, SteadyState(), "signal")
        with pytest.raises(ZeroDivisionError):
            g2_zero(VACUUM, SteadyState(alpha_s=1.0), "idler", include_mean=True)

    def test_table_against_wick_enumeration(self):
        p = SystemParams()
        ss = solve(p)
        A, D = build_drift(p, ss).A, build_diffusion(p).D
        for t in (1e-13, 1e-11, 1e-8):
            M = evolve(VACUUM, A, D, t)
            for mode in BOSONIC_MODES:
                i = mode.slots[0]
                alpha = ss.mean(mode)
                n = M.M[i + 1, i].real
                N = abs(alpha) ** 2 + n
                if N <= 1e-12:
                    continue
                ref = (wick_normal_fourth(alpha, M.M, i) / N**2).real
                assert g2_zero(M, ss, mode, include_mean=True) == pytest.approx(ref, rel=1e-12)

    @settings(max_examples=60)
    @given(st.floats(1e-6, 10), st.floats(0, 1), st.floats(0, 2 * np.pi), st.floats(-5, 5), st.floats(-5, 5))
    def test_random_against_wick(self, n, frac, phase, are, aim):
        # |m|^2 <= n(n+1) for a physical state
        m = frac * math.sqrt(n * (n + 1)) * np.exp(1j * phase)
        M = gaussian_mode(n, m)
        alpha = complex(are, aim)
        ref = (wick_normal_fourth(alpha, M.M, 0) / (abs(alpha) ** 2 + n) ** 2).real
        assert g2_zero(M, SteadyState(alpha_s=alpha), "signal") == pytest.approx(ref, rel=1e-10)
        assert g2_zero(M, None, "signal", include_mean=False) >= 2 - 1e-12

    def test_antibunching_needs_mean(self):
        r = 0.3
        M = gaussian_mode(math.sinh(r) ** 2, -math.sinh(r) * math.cosh(r))
        assert g2_zero(M, SteadyState(alpha_s=1.0), "signal", include_mean=True) < 1
        assert g2_zero(M, SteadyState(alpha_s=1.0), "signal", include_mean=False) >= 2


class TestCorrelation:
    def test_vacuum(self):
        np.testing.assert_array_equal(correlation_matrix(VACUUM, ("signal", "phonon")), np.eye(4) / 2)

    def test_thermal(self):
        V = correlation_matrix(thermal([0, 1.5, 0, 0, 4.0]), ("idler", "phonon"))
        np.testing.assert_array_equal(V, np.diag([2.0, 2.0, 4.5, 4.5]))

    @pytest.mark.parametrize("r", [0.05, 0.3, 0.8, 1.5])
    def test_two_mode_squeezed(self, r):
        V = standard_phase(correlation_matrix(tms_pure(r), ("signal", "idler")))
        np.testing.assert_allclose(V, tms_closed_form(r), atol=1e-12 * math.cosh(2 * r))

    def test_same_mode(self):
        with pytest.raises(ValueError):
            correlation_matrix(VACUUM, ("signal", "signal"))

    def test_symmetric_real(self):
        _, _, A, D = random_stable_system(np.random.default_rng(7))
        M = evolve(VACUUM, A, D, 1e-10)
        V = correlation_matrix(M, ("stoke", "antistoke"))
        assert V.dtype == float
        np.testing.assert_array_equal(V, V.T)
        assert np.all(np.diag(V) > 0)


class TestEta:
    def test_vacuum_boundary(self):
        pc = symplectic_eta(np.eye(4) / 2)
        assert pc.two_eta == pytest.approx(1.0, abs=1e-15)
        assert not pc.entangled

    @pytest.mark.parametrize("N", [0.1, 2.0, 30.0])
    def test_thermal(self, N):
        pc = symplectic_eta(np.eye(4) * (N + 0.5))
        assert pc.two_eta == pytest.approx(2 * N + 1, rel=1e-12)
        assert pc.eta_plus == pytest.approx(N + 0.5, rel=1e-12)

    @pytest.mark.parametrize("r", [0.01, 0.2, 0.7, 1.2])
    def test_two_mode_squeezed(self, r):
        V = tms_closed_form(r)
        pc = symplectic_eta(V)
        assert pc.two_eta == pytest.approx(math.exp(-2 * r), rel=1e-10)
        assert pc.eta == pytest.approx(min_pt_symplectic(V), rel=1e-10)
        assert pc.entangled

    @settings(max_examples=40, deadline=None)
    @given(SEEDS)
    def test_matches_numerical_diagonalisation(self, seed):
        _, _, A, D = random_stable_system(np.random.default_rng(seed))
        M = steady_moments(A, D)
        for pair in (("signal", "idler"), ("stoke", "antistoke"), ("signal", "phonon")):
            V = correlation_matrix(M, pair)
            assert symplectic_eta(V).eta == pytest.approx(min_pt_symplectic(V), rel=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(SEEDS, st.floats(0, 1.5))
    def test_local_symplectic_invariance(self, seed, r):
        rng = np.random.default_rng(seed)
        V = tms_closed_form(r) + np.diag([rng.uniform(0, 0.5)] * 4)
        S = np.zeros((4, 4))
        S[:2, :2] = random_symplectic_2x2(rng)
        S[2:, 2:] = random_symplectic_2x2(rng)
        a = symplectic_eta(V).two_eta
        b = symplectic_eta(S @ V @ S.T).two_eta
        assert abs(a - b) < 1e-10

    def test_non_physical(self):
        # indefinite, although its diagonal is positive
        V = np.array([[1.1, 0.9, 2.2, -1.9], [0.9, 2.1, 0.9, -2.4], [2.2, 0.9, 2.6, -4.3], [-1.9, -2.4, -4.3, 2.4]])
        with pytest.raises(NonPhysicalCovarianceError) as exc:
            symplectic_eta(V)
        assert exc.value.violation > 0

    def test_bad_shape_and_diagonal(self):
        with pytest.raises(ValueError):
            symplectic_eta(np.eye(2))
        with pytest.raises(NonPhysicalCovarianceError):
            symplectic_eta(-np.eye(4))

    def test_uncorrelated_product(self):
        r = 0.5
        M = gaussian_mode(math.sinh(r) ** 2, math.sinh(r) * math.cosh(r), k=2)
        M.M[9, 8], M.M[8, 9] = 0.2, 1.2
        V = correlation_matrix(M, ("stoke", "phonon"))
        assert np.all(V[:2, 2:] == 0)
        nus = [single_mode_symplectic(M, m) for m in ("stoke", "phonon")]
        assert symplectic_eta(V).two_eta == pytest.approx(2 * min(nus), rel=1e-12)


class TestPhysicality:
    @settings(max_examples=30, deadline=None)
    @given(SEEDS, st.floats(-3, 2))
    def test_random_states(self, seed, logf):
        _, _, A, D = random_stable_system(np.random.default_rng(seed))
        M = evolve(VACUUM, A, D, 10**logf / -stability(A).max_real)
        for mode in BOSONIC_MODES:
            v = quadrature_variance(M, mode)
            assert v.varX > 0 and v.varP > 0
            assert v.product >= 0.25 - 1e-9
            assert single_mode_symplectic(M, mode) >= 0.5 - 1e-9
        assert min_symplectic(M) >= 0.5 - 1e-9

    def test_pure_state_saturates(self):
        nu = symplectic_spectrum(quadrature_covariance(tms_pure(0.9), BOSONIC_MODES))
        np.testing.assert_allclose(nu, 0.5, atol=1e-12)


class TestRecord:
    def test_vacuum(self):
        rec = record(VACUUM, SteadyState(), [("signal", "idler")])
        assert all(v.varX == v.varP == 0.5 for v in rec.variances.values())
        assert all(g is None for g in rec.g2.values())
        (pc,) = rec.pairs.values()
        assert pc.two_eta == pytest.approx(1.0, abs=1e-15)

    def test_table_pairs(self):
        p = SystemParams()
        ss = solve(p)
        M = evolve(VACUUM, build_drift(p, ss).A, build_diffusion(p).D, 1e-9)
        pairs = ["signal:idler", "signal:phonon", "stoke:antistoke"]
        rec = record(M, ss, pairs)
        assert list(rec.pairs) == [parse_pair(q) for q in pairs]
        single = record(M, ss, ["signal:phonon"])
        key = parse_pair("signal:phonon")
        assert single.pairs[key].two_eta == rec.pairs[key].two_eta
        assert single.variances == rec.variances
        assert rec.occupation[ModeId.PHONON] == occupation(M, "phonon")

    @pytest.mark.parametrize("bad", ["signal", "signal:signal", "signal:atom", "a:b:c"])
    def test_bad_pairs(self, bad):
        with pytest.raises(ValueError):
            parse_pair(bad)
