import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymwalk import (
    DegenerateStateError,
    NumericalConsistencyError,
    ReducedDensityMatrix,
    WalkParams,
    entanglement_entropy,
    evolve,
    initial_state,
    ipr,
    position_distribution,
    reduced_density_matrix,
    summarize,
)
from asymwalk.observables import PositionDistribution
from oracles import brute_observables

# one lossy step at theta=45, gamma=0.2, by hand: P(+1) = 1 / (1 + e^-0.4)
P_PLUS = 0.598687660112452
P_MINUS = 0.401312339887548
IPR_ONE_STEP = 0.5194785085169417
S_ONE_STEP = 0.9717130895791362

thetas = st.floats(0.0, 180.0)
phis = st.floats(0.0, math.pi)
gammas = st.floats(0.0, 1.0)


class TestDistribution:
    def test_ballistic(self):
        d = position_distribution(evolve(WalkParams(0.0, 0.0, 0.0, 16)))
        assert d.at(16) == 1.0
        assert d.p_total.sum() == 1.0

    def test_lossy_one_step(self):
        d = position_distribution(evolve(WalkParams(45.0, 0.0, 0.2, 1)))
        assert d.at(1) == pytest.approx(P_PLUS, abs=1e-12)
        assert d.at(-1) == pytest.approx(P_MINUS, abs=1e-12)

    def test_symmetric_ballistic(self):
        d = position_distribution(evolve(WalkParams(0.0, math.pi / 4, 0.0, 16)))
        assert d.at(16) == pytest.approx(0.5, abs=1e-15)
        assert d.at(-16) == pytest.approx(0.5, abs=1e-15)

    @given(thetas, phis, gammas)
    def test_normalized(self, theta, phi, gamma):
        d = position_distribution(evolve(WalkParams(theta, phi, gamma, 16)))
        assert np.all(d.p_h >= 0) and np.all(d.p_v >= 0)
        assert d.p_total.sum() == pytest.approx(1.0, abs=1e-10)

    def test_degenerate(self):
        s = initial_state(math.pi / 2).scaled(0.0)
        with pytest.raises(DegenerateStateError):
            position_distribution(s)
        with pytest.raises(DegenerateStateError):
            reduced_density_matrix(s)
        with pytest.raises(DegenerateStateError):
            summarize(initial_state(0.0).scaled(1e-155))


class TestIPR:
    def test_point(self):
        d = PositionDistribution(0, np.array([0]), np.array([1.0]), np.array([0.0]))
        assert ipr(d) == 1.0

    def test_two_sites(self):
        d = PositionDistribution(1, np.array([-1, 1]), np.array([0.0, 0.5]), np.array([0.5, 0.0]))
        assert ipr(d) == 0.5

    def test_lossy_one_step(self):
        d = position_distribution(evolve(WalkParams(45.0, 0.0, 0.2, 1)))
        assert ipr(d) == pytest.approx(IPR_ONE_STEP, abs=1e-12)

    @given(thetas, phis, gammas, st.integers(1, 16))
    def test_bounds(self, theta, phi, gamma, t):
        d = position_distribution(evolve(WalkParams(theta, phi, gamma, t)))
        value = ipr(d)
        occupied = int(np.count_nonzero(d.p_total))
        assert 1.0 / (2 * t + 1) <= value <= 1.0 + 1e-12
        assert value >= 1.0 / occupied - 1e-12
        assert occupied <= t + 1


class TestDensityMatrix:
    def test_pure_h(self):
        r = reduced_density_matrix(initial_state(0.0))
        assert (r.alpha, r.beta, r.chi) == (1.0, 0.0, 0j)

    def test_symmetric_ballistic(self):
        r = reduced_density_matrix(evolve(WalkParams(0.0, math.pi / 4, 0.0, 16)))
        assert r.alpha == pytest.approx(0.5, abs=1e-15)
        assert r.beta == pytest.approx(0.5, abs=1e-15)
        assert r.chi == 0

    def test_hadamard_like_step(self):
        r = reduced_density_matrix(evolve(WalkParams(45.0, 0.0, 0.0, 1)))
        assert r.alpha == pytest.approx(0.5, abs=1e-15)
        assert r.beta == pytest.approx(0.5, abs=1e-15)
        assert r.chi == 0

    @given(thetas, phis, gammas, st.integers(0, 16))
    def test_physical(self, theta, phi, gamma, t):
        r = reduced_density_matrix(evolve(WalkParams(theta, phi, gamma, t)))
        assert r.alpha + r.beta == pytest.approx(1.0, abs=1e-10)
        assert r.alpha * r.beta - abs(r.chi) ** 2 >= -1e-12

    def test_complex_chi_mid_walk(self):
        r = reduced_density_matrix(evolve(WalkParams(30.0, 0.5, 0.0, 3)))
        assert abs(r.chi.imag) > 1e-3


class TestEntropy:
    def test_pure(self):
        e = entanglement_entropy(ReducedDensityMatrix(1.0, 0.0, 0j))
        assert e.s_e == 0.0 and e.lambda1 == 1.0 and e.lambda2 == 0.0

    def test_maximally_mixed(self):
        assert entanglement_entropy(ReducedDensityMatrix(0.5, 0.5, 0j)).s_e == 1.0

    def test_diagonal(self):
        e = entanglement_entropy(ReducedDensityMatrix(P_PLUS, P_MINUS, 0j))
        assert e.s_e == pytest.approx(S_ONE_STEP, abs=1e-12)

    def test_unphysical_raises(self):
        with pytest.raises(NumericalConsistencyError):
            entanglement_entropy(ReducedDensityMatrix(0.5, 0.5, 0.6 + 0j))

    def test_rounding_is_clamped(self):
        e = entanglement_entropy(ReducedDensityMatrix(0.5, 0.5, complex(0.5 + 1e-12, 0)))
        assert e.s_e == 0.0

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * math.pi))
    def test_closed_form_vs_eigh(self, alpha, frac, angle):
        beta = 1 - alpha
        chi = frac * math.sqrt(alpha * beta) * complex(math.cos(angle), math.sin(angle))
        rho = ReducedDensityMatrix(alpha, beta, chi)
        e = entanglement_entropy(rho)
        lam = np.linalg.eigvalsh(rho.matrix())
        assert sorted([e.lambda2, e.lambda1]) == pytest.approx(sorted(lam), abs=1e-10)
        assert e.lambda1 + e.lambda2 == pytest.approx(1.0, abs=1e-10)
        assert 0.0 <= e.s_e <= 1.0

    @given(st.floats(0, 1), st.floats(0, 2 * math.pi))
    def test_pure_states_have_zero_entropy(self, alpha, angle):
        beta = 1 - alpha
        chi = math.sqrt(alpha * beta) * complex(math.cos(angle), math.sin(angle))
        assert entanglement_entropy(ReducedDensityMatrix(alpha, beta, chi)).s_e == pytest.approx(0, abs=1e-9)


@given(thetas, phis, gammas, st.integers(0, 16))
@settings(max_examples=60)
def test_against_dense_partial_trace(theta, phi, gamma, t):
    s = evolve(WalkParams(theta, phi, gamma, t))
    ref = brute_observables(s.a, s.b)
    got = summarize(s)
    assert got.s_e == pytest.approx(ref["s_e"], abs=1e-9)
    assert got.ipr == pytest.approx(ref["ipr"], abs=1e-12)
    r = reduced_density_matrix(s)
    np.testing.assert_allclose(r.matrix(), ref["rho"], atol=1e-12)


@given(thetas, phis, gammas, st.floats(1e-3, 1e3))
def test_rescaling_invariance(theta, phi, gamma, k):
    s = evolve(WalkParams(theta, phi, gamma, 16))
    base, scaled = summarize(s), summarize(s.scaled(k))
    assert scaled.s_e == pytest.approx(base.s_e, abs=1e-10)
    assert scaled.ipr == pytest.approx(base.ipr, abs=1e-10)
    np.testing.assert_allclose(
        position_distribution(s.scaled(k)).p_total, position_distribution(s).p_total, atol=1e-10
    )
    r0, r1 = reduced_density_matrix(s), reduced_density_matrix(s.scaled(k))
    assert abs(r0.chi - r1.chi) < 1e-10 and abs(r0.alpha - r1.alpha) < 1e-10


def test_theta_mirror_symmetry():
    for phi_deg in range(0, 181, 15):
        phi = math.radians(phi_deg)
        for theta in range(0, 91):
            a = summarize(evolve(WalkParams(theta, phi, 0.0, 16))).s_e
            b = summarize(evolve(WalkParams(180 - theta, phi, 0.0, 16))).s_e
            assert a == pytest.approx(b, abs=1e-9)


class TestLossRobustness:
    gammas = np.round(np.arange(0.0, 0.2 + 1e-9, 0.02), 10)

    def curve(self, theta, field):
        return np.array([getattr(summarize(evolve(WalkParams(theta, 0.0, g, 16))), field) for g in self.gammas])

    def test_entropy_ordering(self):
        s37, s48, s59 = (self.curve(t, "s_e") for t in (37.0, 48.0, 59.0))
        assert np.all(np.diff(s37) < 0) and np.all(np.diff(s59) < 0)
        assert np.all(s59 > s48) and np.all(s48 > s37)
        # smaller total drop over the range
        assert s59[0] - s59[-1] < s48[0] - s48[-1] < s37[0] - s37[-1]

    def test_ipr_ordering(self):
        i37, i48, i59 = (self.curve(t, "ipr") for t in (37.0, 48.0, 59.0))
        assert np.all(i59 < i37) and np.all(i48 < i37)
