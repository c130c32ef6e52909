"""Characterization of imperfect BB84 sources.

A source is described operationally by the four pure states it can emit:
two key-basis states (alpha, alphaPrime encoding bits 0 and 1) and two
test-basis states (beta, betaPrime), plus the key-basis emission probability
pZ.  From the four states alone we derive:

  * the scalar overlap quality delta and the angle theta defined through
    sqrt(1 + |sin theta|) = sqrt(2) * delta, which feeds the
    dimension-independent fidelity bound, and
  * for two-dimensional sources, the angle triple (alpha, beta, phi):
    |sin alpha| and |sin beta| are the intra-basis overlaps and phi is the
    Bloch angle between the two basis axes.

Phases of the emitted kets are physically irrelevant, so delta is defined
as a maximum over the admissible per-ket phase choices; the maximization
runs a coarse phase grid followed by simplex refinement.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
from scipy import optimize

from .errors import (
    CertificationUnavailableError,
    DegenerateSourceError,
    DimensionError,
    ValidationError,
)
from .quantum import PureState

_SQRT2 = math.sqrt(2.0)

# Phase grid resolution for the delta maximization; 64 points per free phase
# followed by Nelder-Mead refinement of the best candidates.
_PHASE_GRID = 64
_REFINE_TOP = 3


@dataclasses.dataclass(frozen=True)
class SourceSpec:
    """The four emitted states and the key-basis emission probability."""

    alpha: PureState
    alpha_prime: PureState
    beta: PureState
    beta_prime: PureState
    p_z: float = 0.5

    def __post_init__(self) -> None:
        dims = {s.dim for s in self.states()}
        if len(dims) != 1:
            raise DimensionError(f"source states have mixed dimensions {sorted(dims)}")
        if not 0.0 < self.p_z < 1.0:
            raise ValidationError(f"pZ must lie strictly inside (0, 1), got {self.p_z!r}")

    def states(self) -> tuple[PureState, PureState, PureState, PureState]:
        return (self.alpha, self.alpha_prime, self.beta, self.beta_prime)

    @property
    def dim(self) -> int:
        return self.alpha.dim

    @property
    def bias(self) -> float:
        """epsilon = 2 pZ - 1, the key-basis bit bias."""
        return 2.0 * self.p_z - 1.0


@dataclasses.dataclass(frozen=True)
class OverlapCharacterization:
    """Result of the delta/theta extraction.

    ``theta`` is None when sqrt(2)*delta <= 1, in which case the
    dimension-independent bound certifies nothing.
    """

    delta: float
    theta: float | None

    @property
    def applicable(self) -> bool:
        return self.theta is not None

    def require_theta(self) -> float:
        if self.theta is None:
            raise CertificationUnavailableError(
                f"sqrt(2)*delta = {_SQRT2 * self.delta!r} <= 1: "
                "the overlap characterization certifies no key"
            )
        return self.theta

    @classmethod
    def from_theta(cls, theta: float) -> "OverlapCharacterization":
        """Builds the characterization corresponding to a stated theta."""
        theta = float(theta)
        if not 0.0 < theta <= math.pi / 2.0:
            raise ValidationError(f"theta must lie in (0, pi/2], got {theta!r}")
        return cls(delta=math.sqrt((1.0 + math.sin(theta)) / 2.0), theta=theta)


@dataclasses.dataclass(frozen=True)
class QubitSourceAngles:
    """Angle triple (alpha, beta, phi) describing a two-dimensional source.

    alpha, beta in [0, pi/2) give the intra-basis overlaps through
    |sin alpha| = |<alpha|alphaPrime>| and |sin beta| = |<beta|betaPrime>|;
    phi in (0, pi) is the Bloch angle between the basis axes.
    """

    alpha: float
    beta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < math.pi / 2.0:
            raise ValidationError(f"alpha must lie in [0, pi/2), got {self.alpha!r}")
        if not 0.0 <= self.beta < math.pi / 2.0:
            raise ValidationError(f"beta must lie in [0, pi/2), got {self.beta!r}")
        if not 0.0 < self.phi < math.pi:
            raise ValidationError(f"phi must lie strictly inside (0, pi), got {self.phi!r}")


def _pair_overlaps(src: SourceSpec) -> tuple[complex, complex, complex, complex]:
    a, ap, b, bp = src.states()
    return (a.overlap(b), ap.overlap(b), a.overlap(bp), ap.overlap(bp))


def compute_delta(src: SourceSpec) -> float:
    """Overlap quality delta of the source.

    delta is (|<a|b> + <a'|b> + <a|b'> - <a'|b'>|) / (2 sqrt 2) maximized
    over per-ket phase redefinitions.  Rephasing the four kets shifts the
    four overlap phases by (t1, t2, t3, t4) subject to t1 + t4 = t2 + t3,
    leaving three free parameters; those are scanned on a coarse grid and
    the best grid points are polished with Nelder-Mead.
    """
    c1, c2, c3, c4 = _pair_overlaps(src)

    def combined(t1, t2, t3):
        return (
            c1 * np.exp(1j * t1)
            + c2 * np.exp(1j * t2)
            + c3 * np.exp(1j * t3)
            - c4 * np.exp(1j * (t2 + t3 - t1))
        )

    ticks = np.linspace(0.0, 2.0 * math.pi, _PHASE_GRID, endpoint=False)
    t1, t2, t3 = np.meshgrid(ticks, ticks, ticks, indexing="ij", sparse=True)
    values = np.abs(combined(t1, t2, t3))
    flat = values.ravel()
    top = np.argsort(flat)[-_REFINE_TOP:]

    def negated(t):
        return -abs(combined(t[0], t[1], t[2]))

    best = float(flat[top[-1]])
    for idx in top:
        i, j, k = np.unravel_index(idx, values.shape)
        start = np.array([ticks[i], ticks[j], ticks[k]])
        res = optimize.minimize(
            negated,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000},
        )
        best = max(best, -float(res.fun))
    # Cauchy-Schwarz caps delta at 1; shave the roundoff excess.
    return min(best / (2.0 * _SQRT2), 1.0)


def compute_theta(src: SourceSpec) -> OverlapCharacterization:
    """Extracts theta from delta via sin(theta) = 2*delta**2 - 1.

    Returns an inapplicable characterization (theta None) when
    sqrt(2)*delta <= 1.  delta exceeding 1 beyond 1e-9 indicates a broken
    input and raises ValidationError.
    """
    delta = compute_delta(src)
    sine = 2.0 * delta * delta - 1.0
    # Boundary cases land within roundoff of sine = 0; resolve them toward
    # inapplicable, where the bound certifies nothing anyway.
    if sine <= 1e-12:
        return OverlapCharacterization(delta=delta, theta=None)
    if sine > 1.0 + 1e-9:
        raise ValidationError(f"delta = {delta!r} exceeds 1 beyond tolerance")
    return OverlapCharacterization(delta=delta, theta=math.asin(min(sine, 1.0)))


def _bloch_of_traceless(m: np.ndarray) -> np.ndarray:
    # m = r . (X, Y, Z)/1 for a traceless Hermitian 2x2 matrix.
    return np.array([m[1, 0].real, m[1, 0].imag, m[0, 0].real])


def extract_qubit_angles(src: SourceSpec) -> QubitSourceAngles:
    """Angle triple of a two-dimensional source.

    Raises:
        DimensionError: the source is not two-dimensional.
        DegenerateSourceError: a basis pair is (numerically) a single state,
            or the two basis axes coincide so phi is undefined.
    """
    if src.dim != 2:
        raise DimensionError(f"qubit angles require dimension 2, got {src.dim}")
    ov_z = abs(src.alpha.overlap(src.alpha_prime))
    ov_x = abs(src.beta.overlap(src.beta_prime))

    diff_z = src.alpha.projector() - src.alpha_prime.projector()
    diff_x = src.beta.projector() - src.beta_prime.projector()
    axis_z = _bloch_of_traceless(diff_z)
    axis_x = _bloch_of_traceless(diff_x)
    norm_z = float(np.linalg.norm(axis_z))
    norm_x = float(np.linalg.norm(axis_x))
    if norm_z < 1e-12:
        raise DegenerateSourceError("key-basis states coincide; alpha axis undefined")
    if norm_x < 1e-12:
        raise DegenerateSourceError("test-basis states coincide; beta axis undefined")

    cos_phi = float(np.dot(axis_z, axis_x) / (norm_z * norm_x))
    phi = math.acos(min(1.0, max(-1.0, cos_phi)))
    if phi < 1e-9 or phi > math.pi - 1e-9:
        raise DegenerateSourceError("basis axes coincide; phi is degenerate")
    return QubitSourceAngles(
        alpha=math.asin(min(1.0, ov_z)),
        beta=math.asin(min(1.0, ov_x)),
        phi=phi,
    )


def build_qubit_source(angles: QubitSourceAngles, p_z: float = 0.5) -> SourceSpec:
    """Constructs the canonical qubit source with the given angle triple.

    Key-basis states are cos(a/2)|0> + sin(a/2)|1> and its partner with the
    amplitudes swapped, so their difference operator is cos(alpha) Z.  The
    test-basis pair is the same construction at angle beta, rotated about
    the Bloch y-axis by phi, so its difference is cos(beta) (cos phi Z +
    sin phi X).  The triple round-trips through extract_qubit_angles.
    """
    a2 = angles.alpha / 2.0
    b2 = angles.beta / 2.0
    half = angles.phi / 2.0
    rot = np.array(
        [[math.cos(half), -math.sin(half)], [math.sin(half), math.cos(half)]]
    )
    ket_a = np.array([math.cos(a2), math.sin(a2)])
    ket_ap = np.array([math.sin(a2), math.cos(a2)])
    ket_b = rot @ np.array([math.cos(b2), math.sin(b2)])
    ket_bp = rot @ np.array([math.sin(b2), math.cos(b2)])
    return SourceSpec(
        alpha=PureState(ket_a.astype(complex)),
        alpha_prime=PureState(ket_ap.astype(complex)),
        beta=PureState(ket_b.astype(complex)),
        beta_prime=PureState(ket_bp.astype(complex)),
        p_z=p_z,
    )


_KET_KEYS = ("alpha", "alphaPrime", "beta", "betaPrime")


def _ket_to_json(state: PureState) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in state.amplitudes]


def _ket_from_json(entry, dim: int, name: str) -> PureState:
    if not isinstance(entry, list) or len(entry) != dim:
        raise ValidationError(f"{name}: expected a list of {dim} [re, im] pairs")
    amps = []
    for pair in entry:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) for x in pair)
        ):
            raise ValidationError(f"{name}: each amplitude must be an [re, im] pair")
        amps.append(complex(pair[0], pair[1]))
    return PureState.normalized(np.array(amps), tol=1e-6, name=name)


def save_source(src: SourceSpec, path) -> None:
    """Writes the source to JSON; floats keep their full decimal repr."""
    payload = {
        "dim": src.dim,
        "alpha": _ket_to_json(src.alpha),
        "alphaPrime": _ket_to_json(src.alpha_prime),
        "beta": _ket_to_json(src.beta),
        "betaPrime": _ket_to_json(src.beta_prime),
        "pZ": float(src.p_z),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def load_source(path) -> SourceSpec:
    """Reads a source description from JSON.

    Validation errors name the offending ket.  States are renormalized after
    the 1e-6 norm check, so save/load round-trips are exact on the decimal
    representation.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: expected a JSON object at top level")
    for key in ("dim", *_KET_KEYS, "pZ"):
        if key not in payload:
            raise ValidationError(f"{path}: missing required key {key!r}")
    dim = payload["dim"]
    if not isinstance(dim, int) or dim < 2:
        raise ValidationError(f"{path}: dim must be an integer >= 2, got {dim!r}")
    kets = [_ket_from_json(payload[key], dim, key) for key in _KET_KEYS]
    p_z = payload["pZ"]
    if not isinstance(p_z, (int, float)):
        raise ValidationError(f"{path}: pZ must be a number, got {p_z!r}")
    return SourceSpec(
        alpha=kets[0], alpha_prime=kets[1], beta=kets[2], beta_prime=kets[3],
        p_z=float(p_z),
    )


def ideal_bb84_source(p_z: float = 0.5) -> SourceSpec:
    """The textbook source: exact Z eigenstates and exact X eigenstates."""
    s = 1.0 / _SQRT2
    return SourceSpec(
        alpha=PureState(np.array([1.0, 0.0], dtype=complex)),
        alpha_prime=PureState(np.array([0.0, 1.0], dtype=complex)),
        beta=PureState(np.array([s, s], dtype=complex)),
        beta_prime=PureState(np.array([s, -s], dtype=complex)),
        p_z=p_z,
    )
