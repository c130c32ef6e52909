"""Monte Carlo simulation of prepare-and-measure rounds through an attack.

Randomness is drawn from the Philox 4x64 counter-based generator.  Round i
consumes exactly the four 64-bit words of counter block i, so the substream
of a round is fully determined by (seed, i): evaluating rounds one by one
with ``round_generator`` and drawing all rounds in one vectorized sweep
produce identical bits, and any parallel split over rounds reproduces the
sequential result exactly.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .attacks import AttackIsometry, PropagatedStates, apply_attack
from .errors import DimensionError, DomainError, ValidationError
from .keyrate import (
    KeyrateReport,
    ObservedStats,
    VARIANT_ARBITRARY,
    VARIANT_QUBIT,
    VARIANT_QUBIT_DIM2,
    keyrate_arbitrary,
    keyrate_qubit,
    keyrate_qubit_dim2,
)
from .quantum import HERMITIAN_TOL, PSD_CLAMP_TOL
from .source import SourceSpec, compute_theta, extract_qubit_angles

_SIM_VARIANTS = (VARIANT_ARBITRARY, VARIANT_QUBIT, VARIANT_QUBIT_DIM2)


@dataclasses.dataclass(frozen=True)
class DetectorSpec:
    """Binary POVMs for the two measurement bases.

    Each stored effect corresponds to outcome 0; outcome 1 is its
    complement.  Effects must be Hermitian with spectrum inside [0, 1].
    """

    z_effect: np.ndarray
    x_effect: np.ndarray

    def __post_init__(self) -> None:
        for name in ("z_effect", "x_effect"):
            arr = np.array(getattr(self, name), dtype=np.complex128)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise DimensionError(f"{name} must be a square matrix")
            if np.max(np.abs(arr - arr.conj().T)) > HERMITIAN_TOL:
                raise ValidationError(f"{name} is not Hermitian")
            eigs = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
            if eigs.min() < -PSD_CLAMP_TOL or eigs.max() > 1.0 + PSD_CLAMP_TOL:
                raise ValidationError(f"{name} has spectrum outside [0, 1]")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.z_effect.shape != self.x_effect.shape:
            raise DimensionError("detector effects must act on the same space")

    @property
    def dim(self) -> int:
        return self.z_effect.shape[0]


def helstrom_detector(src: SourceSpec, attack: AttackIsometry) -> DetectorSpec:
    """Detectors matched to the channel: optimal discrimination per basis.

    The outcome-0 effect in each basis is the projector onto the
    nonnegative eigenspace of the difference of Bob's two reduced states,
    which attains the Helstrom error (1 - D)/2 for equal priors.
    """
    from .quantum import optimal_distinguishing_unitary

    prop = apply_attack(src, attack)
    eye = np.eye(attack.label.dim_b)
    u_z = optimal_distinguishing_unitary(prop.rho_b - prop.rho_b_prime)
    u_x = optimal_distinguishing_unitary(prop.sigma_b - prop.sigma_b_prime)
    return DetectorSpec(z_effect=0.5 * (eye + u_z), x_effect=0.5 * (eye + u_x))


def ideal_qubit_detector() -> DetectorSpec:
    """Projective Z/X measurements on a two-dimensional Bob."""
    z = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    x = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    return DetectorSpec(z_effect=z, x_effect=x)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    rounds: int
    seed: int
    basis_prob_z: float = 0.5

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise DomainError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 < self.basis_prob_z < 1.0:
            raise DomainError(
                f"basis_prob_z must lie strictly inside (0, 1), got {self.basis_prob_z}"
            )


@dataclasses.dataclass(frozen=True)
class RunResult:
    sifted_z: int
    sifted_x: int
    errors_z: int
    errors_x: int
    empirical_delta_z: float
    empirical_delta_x: float
    keyrate_at_empirical: KeyrateReport

    def to_dict(self) -> dict:
        return {
            "siftedZ": self.sifted_z,
            "siftedX": self.sifted_x,
            "errorsZ": self.errors_z,
            "errorsX": self.errors_x,
            "empiricalDeltaZ": self.empirical_delta_z,
            "empiricalDeltaX": self.empirical_delta_x,
            "keyrateAtEmpirical": self.keyrate_at_empirical.to_dict(),
        }


def round_generator(seed: int, index: int) -> np.random.Generator:
    """The RNG substream of round ``index``: Philox keyed by seed at block index."""
    return np.random.Generator(np.random.Philox(key=seed, counter=index))


def _outcome_probabilities(
    prop: PropagatedStates, det: DetectorSpec, dim_b: int
) -> np.ndarray:
    """p0[state, basis]: probability of outcome 0 per emitted state and basis."""
    reduced = (prop.rho_b, prop.rho_b_prime, prop.sigma_b, prop.sigma_b_prime)
    table = np.empty((4, 2))
    for i, rho in enumerate(reduced):
        for j, effect in enumerate((det.z_effect, det.x_effect)):
            table[i, j] = float(np.trace(effect @ rho).real)
    return np.clip(table, 0.0, 1.0)


def theoretical_rates(
    src: SourceSpec, attack: AttackIsometry, det: DetectorSpec
) -> tuple[float, float]:
    """Exact sifted error rates (delta_z, delta_x) of the configuration.

    Key-basis states carry the emission weights (pZ, 1 - pZ); test-basis
    states are emitted with equal probability.
    """
    if det.dim != attack.label.dim_b:
        raise DimensionError(
            f"detector dimension {det.dim} does not match Bob dimension "
            f"{attack.label.dim_b}"
        )
    prop = apply_attack(src, attack)
    p0 = _outcome_probabilities(prop, det, attack.label.dim_b)
    p = src.p_z
    delta_z = p * (1.0 - p0[0, 0]) + (1.0 - p) * p0[1, 0]
    delta_x = 0.5 * (1.0 - p0[2, 1]) + 0.5 * p0[3, 1]
    return float(delta_z), float(delta_x)


def _empirical_keyrate(
    src: SourceSpec, stats: ObservedStats, variant: str
) -> KeyrateReport:
    if variant == VARIANT_ARBITRARY:
        return keyrate_arbitrary(compute_theta(src), stats, bias=src.bias)
    if variant == VARIANT_QUBIT:
        return keyrate_qubit(extract_qubit_angles(src), stats, bias=src.bias)
    if variant == VARIANT_QUBIT_DIM2:
        return keyrate_qubit_dim2(extract_qubit_angles(src), stats, bias=src.bias)
    raise DomainError(
        f"variant {variant!r} is not simulatable; choose one of {_SIM_VARIANTS}"
    )


def simulate(
    src: SourceSpec,
    attack: AttackIsometry,
    det: DetectorSpec,
    cfg: RunConfig,
    variant: str = VARIANT_ARBITRARY,
) -> RunResult:
    """Runs ``cfg.rounds`` prepare-and-measure rounds and sifts the results.

    Each round draws four uniforms from its own substream, in order: Alice's
    basis, Alice's bit, Bob's basis, Bob's outcome.  Results are
    bit-identical for identical configs; the keyrate report evaluates the
    chosen variant at the empirical error rates with Helstrom conversion.
    """
    if det.dim != attack.label.dim_b:
        raise DimensionError(
            f"detector dimension {det.dim} does not match Bob dimension "
            f"{attack.label.dim_b}"
        )
    prop = apply_attack(src, attack)
    p0 = _outcome_probabilities(prop, det, attack.label.dim_b)

    draws = np.random.Generator(np.random.Philox(key=cfg.seed)).random(
        (cfg.rounds, 4)
    )
    alice_z = draws[:, 0] < cfg.basis_prob_z
    bit_prob0 = np.where(alice_z, src.p_z, 0.5)
    alice_bit = (draws[:, 1] >= bit_prob0).astype(np.int64)
    bob_z = draws[:, 2] < cfg.basis_prob_z

    state_index = np.where(alice_z, alice_bit, 2 + alice_bit)
    basis_index = np.where(bob_z, 0, 1)
    outcome = (draws[:, 3] >= p0[state_index, basis_index]).astype(np.int64)

    match_z = alice_z & bob_z
    match_x = ~alice_z & ~bob_z
    wrong = alice_bit != outcome
    sifted_z = int(match_z.sum())
    sifted_x = int(match_x.sum())
    errors_z = int((match_z & wrong).sum())
    errors_x = int((match_x & wrong).sum())

    delta_z = errors_z / sifted_z if sifted_z else 0.0
    delta_x = errors_x / sifted_x if sifted_x else 0.0
    stats = ObservedStats(delta_z=delta_z, delta_x=delta_x)
    return RunResult(
        sifted_z=sifted_z,
        sifted_x=sifted_x,
        errors_z=errors_z,
        errors_x=errors_x,
        empirical_delta_z=delta_z,
        empirical_delta_x=delta_x,
        keyrate_at_empirical=_empirical_keyrate(src, stats, variant),
    )
