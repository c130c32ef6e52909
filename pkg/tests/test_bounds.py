"""Scalar bound maps: frozen values, branch structure, dominance, inversions."""

import math

import numpy as np
import pytest

from qkdlab.bounds import (
    f2_phi,
    f_theta,
    fidelity_bound_arbitrary,
    fidelity_bound_qubit,
    fidelity_bound_qubit_dim2,
    fuchs_relation_check,
    g_alpha,
    helstrom_lower,
)
from qkdlab.errors import CertificationUnavailableError, DomainError
from qkdlab.source import OverlapCharacterization, QubitSourceAngles

# mpmath at 50 digits.
F_THETA_PI3_09 = 0.5614779162289611
F2_PI3_095_09 = 0.72985699431403502


class TestHelstromLower:
    def test_values(self):
        assert helstrom_lower(0.0) == 1.0
        assert helstrom_lower(0.5) == 0.0
        assert helstrom_lower(1.0) == 1.0
        assert abs(helstrom_lower(0.05) - 0.9) < 1e-15
        assert abs(helstrom_lower(0.75) - 0.5) < 1e-15

    def test_domain(self):
        with pytest.raises(DomainError):
            helstrom_lower(-0.1)
        with pytest.raises(DomainError):
            helstrom_lower(1.1)


class TestFTheta:
    def test_orthogonal_slice_is_identity(self):
        for v in np.linspace(0.0, 1.0, 101):
            assert abs(f_theta(math.pi / 2, float(v)) - v) < 1e-15

    def test_frozen_value(self):
        assert abs(f_theta(math.pi / 3, 0.9) - F_THETA_PI3_09) < 1e-15

    def test_zero_branch(self):
        assert f_theta(math.pi / 3, 0.3) == 0.0
        assert f_theta(0.2, 0.9) == 0.0

    def test_continuity_at_breakpoint(self):
        theta = 1.0
        c = math.cos(theta)
        assert abs(f_theta(theta, c)) < 1e-12
        assert abs(f_theta(theta, c + 1e-9) - f_theta(theta, c - 1e-9)) < 1e-8

    def test_monotone_in_v(self):
        for theta in (0.5, 1.0, math.pi / 2):
            values = [f_theta(theta, v) for v in np.linspace(0.0, 1.0, 200)]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_endpoint(self):
        for theta in (0.4, 1.2, math.pi / 2):
            assert abs(f_theta(theta, 1.0) - abs(math.sin(theta))) < 1e-15

    def test_domain(self):
        with pytest.raises(DomainError):
            f_theta(0.0, 0.5)
        with pytest.raises(DomainError):
            f_theta(math.pi / 2 + 0.01, 0.5)
        with pytest.raises(DomainError):
            f_theta(1.0, 1.01)
        with pytest.raises(DomainError):
            f_theta(1.0, -0.01)

    def test_roundoff_clamp(self):
        assert f_theta(1.0, 1.0 + 1e-13) <= math.sin(1.0)


class TestGAlpha:
    def test_orthogonal_is_identity(self):
        for x in np.linspace(0.0, 1.0, 50):
            assert g_alpha(0.0, float(x)) == pytest.approx(x, abs=1e-15)

    def test_floor_below_kink(self):
        s = math.sin(0.3)
        kink = 2.0 * s / (1.0 + s)
        assert g_alpha(0.3, 0.0) == s
        assert g_alpha(0.3, kink - 1e-6) == s

    def test_kink_location_frozen(self):
        # sin(alpha) = 0.2 puts the kink at exactly x = 1/3.
        alpha = math.asin(0.2)
        assert abs(g_alpha(alpha, 1.0 / 3.0) - 0.2) < 1e-12
        assert g_alpha(alpha, 1.0 / 3.0 - 1e-9) == pytest.approx(0.2, abs=1e-12)

    def test_continuity_and_endpoint(self):
        s = math.sin(0.4)
        kink = 2.0 * s / (1.0 + s)
        assert abs(g_alpha(0.4, kink + 1e-9) - s) < 1e-8
        assert abs(g_alpha(0.4, 1.0) - 1.0) < 1e-15

    def test_monotone(self):
        for alpha in (0.1, 0.4, 1.0):
            values = [g_alpha(alpha, x) for x in np.linspace(0.0, 1.0, 200)]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestF2Phi:
    def test_frozen_strong_branch(self):
        assert abs(f2_phi(math.pi / 3, 0.95, 0.9) - F2_PI3_095_09) < 1e-15

    def test_fallback_equals_f_theta(self):
        # Below the activation threshold the key-basis distance adds nothing.
        phi, z, v = math.pi / 3, 0.2, 0.6
        q = z * v - math.sqrt((1 - z * z) * (1 - v * v))
        assert q < math.cos(phi)
        assert f2_phi(phi, z, v) == f_theta(phi, v)

    def test_dominates_f_theta(self):
        rng = np.random.default_rng(2)
        for _ in range(500):
            phi = rng.uniform(0.05, math.pi - 0.05)
            z, v = rng.uniform(0.0, 1.0, size=2)
            folded = phi if phi <= math.pi / 2 else math.pi - phi
            assert f2_phi(phi, z, v) >= f_theta(folded, v) - 1e-12

    def test_obtuse_angle_folds(self):
        for z, v in ((0.9, 0.8), (0.99, 0.95), (0.3, 0.4)):
            assert abs(f2_phi(2.0, z, v) - f2_phi(math.pi - 2.0, z, v)) < 1e-14

    def test_strong_branch_inverts_norm_inequality(self):
        # The strong branch is the smallest x consistent with
        # sqrt(1 - v^2) >= sin(phi) sqrt(1 - x^2) - cos(phi) sqrt(1 - z^2);
        # recover that x by bisection on the constraint and compare.
        rng = np.random.default_rng(8)
        checked = 0
        while checked < 50:
            phi = rng.uniform(0.3, math.pi / 2)
            z = rng.uniform(0.7, 1.0)
            v = rng.uniform(0.7, 1.0)
            q = z * v - math.sqrt((1 - z * z) * (1 - v * v))
            if q < math.cos(phi):
                continue
            checked += 1

            def slack(x):
                return (
                    math.sqrt(1 - v * v)
                    + math.cos(phi) * math.sqrt(1 - z * z)
                    - math.sin(phi) * math.sqrt(1 - x * x)
                )

            lo, hi = 0.0, 1.0
            if slack(lo) >= 0.0:
                hi = 0.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if slack(mid) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            assert abs(f2_phi(phi, z, v) - hi) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            f2_phi(0.0, 0.5, 0.5)
        with pytest.raises(DomainError):
            f2_phi(math.pi, 0.5, 0.5)
        with pytest.raises(DomainError):
            f2_phi(1.0, 1.5, 0.5)


class TestComposedBounds:
    def test_arbitrary_delegates(self):
        char = OverlapCharacterization.from_theta(math.pi / 3)
        assert fidelity_bound_arbitrary(char, 0.9) == f_theta(math.pi / 3, 0.9)

    def test_arbitrary_requires_applicable(self):
        char = OverlapCharacterization(delta=0.5, theta=None)
        with pytest.raises(CertificationUnavailableError):
            fidelity_bound_arbitrary(char, 0.9)

    def test_qubit_ideal_angles_reduce_to_f_theta(self):
        for phi in (0.5, 1.0, math.pi / 2):
            angles = QubitSourceAngles(0.0, 0.0, phi)
            for x in (0.0, 0.5, 0.9, 1.0):
                assert abs(fidelity_bound_qubit(angles, x) - f_theta(phi, x)) < 1e-15

    def test_qubit_obtuse_phi_folds(self):
        angles_acute = QubitSourceAngles(0.1, 0.2, 1.0)
        angles_obtuse = QubitSourceAngles(0.1, 0.2, math.pi - 1.0)
        for x in (0.3, 0.6, 0.9):
            assert abs(
                fidelity_bound_qubit(angles_acute, x)
                - fidelity_bound_qubit(angles_obtuse, x)
            ) < 1e-14

    def test_qubit_ratio_domain(self):
        angles = QubitSourceAngles(0.0, 0.8, math.pi / 2)
        # x beyond cos(beta) is inconsistent with any attack.
        with pytest.raises(DomainError):
            fidelity_bound_qubit(angles, math.cos(0.8) + 1e-6)
        # Within the roundoff clamp it saturates.
        top = fidelity_bound_qubit(angles, math.cos(0.8))
        assert abs(top - 1.0) < 1e-12

    def test_dim2_dominates_qubit(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            alpha = rng.uniform(0.0, 0.6)
            beta = rng.uniform(0.0, 0.6)
            phi = rng.uniform(0.3, math.pi - 0.3)
            z = rng.uniform(0.0, math.cos(alpha))
            x = rng.uniform(0.0, math.cos(beta))
            angles = QubitSourceAngles(alpha, beta, phi)
            two = fidelity_bound_qubit_dim2(angles, z, x)
            one = fidelity_bound_qubit(angles, x)
            assert two >= one - 1e-12

    def test_dim2_ideal_reduces_to_f2(self):
        angles = QubitSourceAngles(0.0, 0.0, math.pi / 3)
        assert abs(fidelity_bound_qubit_dim2(angles, 0.95, 0.9) - F2_PI3_095_09) < 1e-15


class TestFuchsRelation:
    def test_holds_inside_disc(self):
        assert fuchs_relation_check(0.6, 0.8)
        assert fuchs_relation_check(0.0, 1.0)

    def test_fails_outside(self):
        assert not fuchs_relation_check(0.8, 0.8)

    def test_domain(self):
        with pytest.raises(DomainError):
            fuchs_relation_check(1.2, 0.0)
