"""Scalar bound functions linking Bob-side disturbance to Eve-side fidelity.

The central objects are three piecewise maps:

  f_theta(theta, v)    dimension-independent: a lower bound on the fidelity
                       of Eve's conditional states given a lower bound v on
                       the trace distance Bob could observe between the
                       test-basis states.
  g_alpha(alpha, x)    corrects for nonorthogonal key-basis states.
  f2_phi(phi, z, v)    two-dimensional detectors only: also feeds in the
                       key-basis trace distance z, switching to a stronger
                       branch when q(z, v) = z v - sqrt((1-z^2)(1-v^2))
                       reaches |cos phi|.

All functions clamp radicands that are negative by at most RADICAND_TOL and
raise DomainError beyond that.
"""

from __future__ import annotations

import math

from .errors import DegenerateSourceError, DomainError
from .source import OverlapCharacterization, QubitSourceAngles

RADICAND_TOL = 1e-12

# Slack allowed when a disturbance ratio lands just beyond 1 from roundoff.
RATIO_CLAMP_TOL = 1e-9


def _checked_unit(x: float, name: str) -> float:
    x = float(x)
    if x < -RADICAND_TOL or x > 1.0 + RADICAND_TOL:
        raise DomainError(f"{name} = {x!r} outside [0, 1]")
    return min(1.0, max(0.0, x))


def _sqrt_one_minus_sq(x: float) -> float:
    rad = 1.0 - x * x
    if rad < -RADICAND_TOL:
        raise DomainError(f"radicand 1 - {x!r}**2 is negative beyond tolerance")
    return math.sqrt(max(rad, 0.0))


def _fold_acute(angle: float) -> float:
    # f_theta and f2_phi depend on the angle only through |sin| and |cos|,
    # so obtuse Bloch angles fold onto (0, pi/2].
    return angle if angle <= math.pi / 2.0 else math.pi - angle


def helstrom_lower(delta: float) -> float:
    """Trace-distance lower bound |1 - 2 delta| certified by an error rate delta."""
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"error rate {delta!r} outside [0, 1]")
    return abs(1.0 - 2.0 * delta)


def f_theta(theta: float, v: float) -> float:
    """Dimension-independent fidelity bound.

    Returns |sin theta| v - |cos theta| sqrt(1 - v^2) when v >= |cos theta|
    and 0 otherwise; continuous at the breakpoint.

    Args:
        theta: overlap angle in (0, pi/2].
        v: certified trace-distance lower bound in [0, 1].
    """
    theta = float(theta)
    if not 0.0 < theta <= math.pi / 2.0:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta!r}")
    v = _checked_unit(v, "disturbance bound v")
    cos_t = abs(math.cos(theta))
    if v < cos_t:
        return 0.0
    return abs(math.sin(theta)) * v - cos_t * _sqrt_one_minus_sq(v)


def g_alpha(alpha: float, x: float) -> float:
    """Key-basis nonorthogonality correction.

    Returns (1 + |sin alpha|) x - |sin alpha| when x is at least
    2|sin alpha| / (1 + |sin alpha|), and |sin alpha| below that; the two
    branches meet at the breakpoint.
    """
    alpha = float(alpha)
    x = _checked_unit(x, "fidelity bound x")
    s = abs(math.sin(alpha))
    if x < 2.0 * s / (1.0 + s):
        return s
    return (1.0 + s) * x - s


def f2_phi(phi: float, z: float, v: float) -> float:
    """Two-dimensional refinement of f_theta using both disturbances.

    When q(z, v) = z v - sqrt((1-z^2)(1-v^2)) >= |cos phi| the bound is

        sqrt(1 - [(sqrt(1-v^2) + |cos phi| sqrt(1-z^2)) / |sin phi|]^2)

    (ties included), otherwise it falls back to f_theta(phi, v).  Inside the
    first branch the bracketed term never exceeds 1, so the radicand only
    needs the roundoff clamp.

    Args:
        phi: Bloch angle between the basis axes, in (0, pi), sin(phi) != 0.
        z: key-basis trace-distance bound in [0, 1].
        v: test-basis trace-distance bound in [0, 1].
    """
    phi = float(phi)
    if not 0.0 < phi < math.pi:
        raise DomainError(f"phi must lie strictly inside (0, pi), got {phi!r}")
    if abs(math.sin(phi)) < 1e-12:
        raise DegenerateSourceError("sin(phi) = 0: basis axes coincide")
    z = _checked_unit(z, "key-basis bound z")
    v = _checked_unit(v, "test-basis bound v")
    sin_p = abs(math.sin(phi))
    cos_p = abs(math.cos(phi))
    q = z * v - _sqrt_one_minus_sq(z) * _sqrt_one_minus_sq(v)
    if q >= cos_p:
        bracket = (_sqrt_one_minus_sq(v) + cos_p * _sqrt_one_minus_sq(z)) / sin_p
        return _sqrt_one_minus_sq(bracket)
    return f_theta(_fold_acute(phi), v)


def fidelity_bound_arbitrary(char: OverlapCharacterization, x_lower: float) -> float:
    """f_theta evaluated at the source's extracted theta.

    Raises:
        CertificationUnavailableError: the characterization is inapplicable.
    """
    return f_theta(char.require_theta(), x_lower)


def _disturbance_ratio(lower: float, cosine: float, which: str) -> float:
    lower = _checked_unit(lower, f"{which} disturbance bound")
    if cosine < 1e-12:
        raise DegenerateSourceError(
            f"cos of the {which} overlap angle vanishes; the bound is undefined"
        )
    ratio = lower / cosine
    if ratio > 1.0 + RATIO_CLAMP_TOL:
        raise DomainError(
            f"{which} disturbance bound {lower!r} exceeds the overlap cosine "
            f"{cosine!r}; no attack is consistent with these inputs"
        )
    return min(ratio, 1.0)


def fidelity_bound_qubit(angles: QubitSourceAngles, x_lower: float) -> float:
    """Qubit-source fidelity bound g_alpha(f_phi(x_lower / |cos beta|))."""
    v = _disturbance_ratio(x_lower, abs(math.cos(angles.beta)), "test-basis")
    return g_alpha(angles.alpha, f_theta(_fold_acute(angles.phi), v))


def fidelity_bound_qubit_dim2(
    angles: QubitSourceAngles, z_lower: float, x_lower: float
) -> float:
    """Qubit-source bound for two-dimensional detectors, using both bases.

    Never weaker than fidelity_bound_qubit on the same inputs.
    """
    z = _disturbance_ratio(z_lower, abs(math.cos(angles.alpha)), "key-basis")
    v = _disturbance_ratio(x_lower, abs(math.cos(angles.beta)), "test-basis")
    return g_alpha(angles.alpha, f2_phi(angles.phi, z, v))


def fuchs_relation_check(d_eve: float, d_bob: float, tol: float = 1e-9) -> bool:
    """Whether d_eve^2 + d_bob^2 <= 1 + tol (the information-disturbance tradeoff)."""
    d_eve = _checked_unit(d_eve, "Eve trace distance")
    d_bob = _checked_unit(d_bob, "Bob trace distance")
    return d_eve * d_eve + d_bob * d_bob <= 1.0 + tol
