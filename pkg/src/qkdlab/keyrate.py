"""Certified asymptotic keyrates against collective attacks.

Every certifying variant has the same shape: a fidelity lower bound on
Eve's conditional states is converted to a conditional-entropy bound, and
the error-correction leakage h(delta_z) is subtracted.  The variants differ
only in which fidelity bound they use.  Rates are reported unfloored (they
can be negative); positivity is a separate flag on the report.
"""

from __future__ import annotations

import dataclasses
import math

from .bounds import (
    fidelity_bound_arbitrary,
    fidelity_bound_qubit,
    fidelity_bound_qubit_dim2,
    helstrom_lower,
)
from .errors import DomainError, ValidationError
from .quantum import binary_entropy
from .source import OverlapCharacterization, QubitSourceAngles

VARIANT_ARBITRARY = "arbitrary-theta"
VARIANT_QUBIT = "qubit"
VARIANT_QUBIT_DIM2 = "qubit-dim2"
VARIANT_UNCERTAINTY = "uncertainty-comparison"
VARIANT_MINENTROPY = "minentropy"

ALL_VARIANTS = (
    VARIANT_ARBITRARY,
    VARIANT_QUBIT,
    VARIANT_QUBIT_DIM2,
    VARIANT_UNCERTAINTY,
    VARIANT_MINENTROPY,
)


@dataclasses.dataclass(frozen=True)
class ObservedStats:
    """Observed sifted error rates in the two bases."""

    delta_z: float
    delta_x: float

    def __post_init__(self) -> None:
        for name, value in (("delta_z", self.delta_z), ("delta_x", self.delta_x)):
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")


@dataclasses.dataclass(frozen=True)
class DisturbanceBounds:
    """Trace-distance lower bounds certified from the observed error rates."""

    z_lower: float
    x_lower: float

    def __post_init__(self) -> None:
        for name, value in (("z_lower", self.z_lower), ("x_lower", self.x_lower)):
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")

    @classmethod
    def from_stats(cls, stats: ObservedStats) -> "DisturbanceBounds":
        return cls(
            z_lower=helstrom_lower(stats.delta_z),
            x_lower=helstrom_lower(stats.delta_x),
        )


@dataclasses.dataclass(frozen=True)
class KeyrateReport:
    """A computed rate together with what produced it.

    ``certifying`` is False for the uncertainty-relation comparison rate,
    which is reproduced for reference only.  ``inputs`` echoes the scalar
    inputs so reports serialize self-contained.
    """

    variant: str
    rate: float
    fidelity_bound: float | None
    inputs: dict

    certifying: bool = True

    def __post_init__(self) -> None:
        if self.variant not in ALL_VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.rate > 1.0 + 1e-9:
            raise ValidationError(f"rate {self.rate!r} exceeds 1")

    @property
    def positive(self) -> bool:
        return self.rate > 0.0

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "rate": self.rate,
            "positive": self.positive,
            "fidelityBound": self.fidelity_bound,
            "certifying": self.certifying,
            "inputs": dict(self.inputs),
        }


def entropy_bound_from_fidelity(fid: float, bias: float = 0.0) -> float:
    """Lower bound on H(Z|E) given a fidelity bound on Eve's states.

    Returns h(p) - h(1/2 + 1/2 sqrt(bias^2 + (1 - bias^2) fid^2)) with
    p = (1 + bias)/2.  At zero bias this is 1 - h(1/2 + fid/2); at fid = 1
    it is h(p), the entropy of the raw key itself.
    """
    fid = float(fid)
    bias = float(bias)
    if fid < -1e-12 or fid > 1.0 + 1e-12:
        raise DomainError(f"fidelity bound {fid!r} outside [0, 1]")
    fid = min(1.0, max(0.0, fid))
    if not -1.0 < bias < 1.0:
        raise DomainError(f"bias must lie strictly inside (-1, 1), got {bias!r}")
    p = (1.0 + bias) / 2.0
    inner = math.sqrt(bias * bias + (1.0 - bias * bias) * fid * fid)
    return binary_entropy(p) - binary_entropy(0.5 + 0.5 * inner)


def _devetak_winter(
    variant: str,
    fid: float,
    stats: ObservedStats,
    bias: float,
    inputs: dict,
) -> KeyrateReport:
    rate = entropy_bound_from_fidelity(fid, bias) - binary_entropy(stats.delta_z)
    return KeyrateReport(variant=variant, rate=rate, fidelity_bound=fid, inputs=inputs)


def keyrate_arbitrary(
    char: OverlapCharacterization, stats: ObservedStats, bias: float = 0.0
) -> KeyrateReport:
    """Keyrate from the dimension-independent theta characterization."""
    fid = fidelity_bound_arbitrary(char, helstrom_lower(stats.delta_x))
    inputs = {
        "theta": char.theta,
        "delta": char.delta,
        "deltaZ": stats.delta_z,
        "deltaX": stats.delta_x,
        "bias": bias,
    }
    return _devetak_winter(VARIANT_ARBITRARY, fid, stats, bias, inputs)


def keyrate_qubit(
    angles: QubitSourceAngles, stats: ObservedStats, bias: float = 0.0
) -> KeyrateReport:
    """Keyrate for qubit sources via the angle-triple fidelity bound."""
    fid = fidelity_bound_qubit(angles, helstrom_lower(stats.delta_x))
    inputs = {
        "alpha": angles.alpha,
        "beta": angles.beta,
        "phi": angles.phi,
        "deltaZ": stats.delta_z,
        "deltaX": stats.delta_x,
        "bias": bias,
    }
    return _devetak_winter(VARIANT_QUBIT, fid, stats, bias, inputs)


def keyrate_qubit_dim2(
    angles: QubitSourceAngles, stats: ObservedStats, bias: float = 0.0
) -> KeyrateReport:
    """Keyrate for qubit sources measured by two-dimensional detectors."""
    fid = fidelity_bound_qubit_dim2(
        angles, helstrom_lower(stats.delta_z), helstrom_lower(stats.delta_x)
    )
    inputs = {
        "alpha": angles.alpha,
        "beta": angles.beta,
        "phi": angles.phi,
        "deltaZ": stats.delta_z,
        "deltaX": stats.delta_x,
        "bias": bias,
    }
    return _devetak_winter(VARIANT_QUBIT_DIM2, fid, stats, bias, inputs)


def keyrate_uncertainty_comparison(theta: float, stats: ObservedStats) -> KeyrateReport:
    """Reference rate 1 - log2(1 + |cos theta|) - h(delta_x) - h(delta_z).

    This reproduces the entropic-uncertainty style of bound for comparison;
    it is not part of the certification chain and is flagged accordingly.
    """
    theta = float(theta)
    if not 0.0 < theta <= math.pi / 2.0:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta!r}")
    rate = (
        1.0
        - math.log2(1.0 + abs(math.cos(theta)))
        - binary_entropy(stats.delta_x)
        - binary_entropy(stats.delta_z)
    )
    inputs = {"theta": theta, "deltaZ": stats.delta_z, "deltaX": stats.delta_x}
    return KeyrateReport(
        variant=VARIANT_UNCERTAINTY,
        rate=rate,
        fidelity_bound=None,
        inputs=inputs,
        certifying=False,
    )


def minentropy_rate(d_eve_upper: float) -> float:
    """Collective-attack min-entropy rate 1 - log2(1 + d_eve_upper).

    ``d_eve_upper`` is an upper bound on the trace distance between Eve's
    conditional states; sqrt(1 - fid^2) for a certified fidelity bound.
    """
    d = float(d_eve_upper)
    if d < -1e-12 or d > 1.0 + 1e-12:
        raise DomainError(f"trace-distance bound {d!r} outside [0, 1]")
    d = min(1.0, max(0.0, d))
    return 1.0 - math.log2(1.0 + d)
