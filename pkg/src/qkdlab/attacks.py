"""Numerical laboratory for explicit collective attacks.

An attack is an isometry from the source space into Bob (x) Eve.  The
module propagates the four source states through an attack, computes the
diagnostic quantities the bounds talk about (Bob-side trace distances,
Eve-side fidelity and trace distance, the conditional entropy of the key
given Eve), checks every certified inequality against them, and runs
derivative-free searches over attack space: minimizing Eve's fidelity or
the conditional entropy at a pinned disturbance, and hunting for violations
of the two-dimensional norm inequality in higher detector dimensions.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
from scipy import optimize

from .bounds import (
    f2_phi,
    f_theta,
    fidelity_bound_qubit,
    g_alpha,
    _fold_acute,
)
from .errors import DegenerateSourceError, DimensionError, DomainError, ValidationError
from .keyrate import entropy_bound_from_fidelity
from .quantum import (
    BipartiteLabel,
    PureState,
    binary_entropy,
    fidelity,
    haar_random_isometry,
    partial_trace,
    trace_distance,
    trace_norm,
    von_neumann_entropy,
)
from .source import (
    OverlapCharacterization,
    SourceSpec,
    compute_theta,
    extract_qubit_angles,
)

ORTHONORMALITY_TOL = 1e-10

# |D(sigma_B, sigma_B') - target| band accepted by the constrained searches.
DISTURBANCE_BAND = 1e-3
_PENALTY_WEIGHTS = (1e2, 1e4, 1e6)
_PENALTY_SHARES = (0.3, 0.3, 0.4)

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclasses.dataclass(frozen=True)
class AttackIsometry:
    """An isometry from the source space into H_B (x) H_E.

    ``matrix`` has shape (dim_b * dim_e, d) with orthonormal columns;
    column j is the image of source basis state |j>.
    """

    matrix: np.ndarray
    label: BipartiteLabel

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2:
            raise DimensionError("attack matrix must be 2-d")
        rows, cols = mat.shape
        if rows != self.label.total:
            raise DimensionError(
                f"attack matrix has {rows} rows, label implies {self.label.total}"
            )
        if cols < 1 or cols > rows:
            raise DimensionError(
                f"attack matrix must have 1..{rows} columns, got {cols}"
            )
        gram = mat.conj().T @ mat
        if np.max(np.abs(gram - np.eye(cols))) > ORTHONORMALITY_TOL:
            raise ValidationError(
                f"attack columns are not orthonormal within {ORTHONORMALITY_TOL}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]


def identity_attack(dim: int) -> AttackIsometry:
    """The do-nothing channel: Bob receives the state, Eve a trivial system."""
    return AttackIsometry(np.eye(dim, dtype=complex), BipartiteLabel(dim, 1))


def swap_attack(dim: int) -> AttackIsometry:
    """Everything to Eve: Bob is left with a trivial one-dimensional system."""
    return AttackIsometry(np.eye(dim, dtype=complex), BipartiteLabel(1, dim))


def full_copy_attack() -> AttackIsometry:
    """The basis-copy map |0> -> |00>, |1> -> |11> on a qubit source."""
    mat = np.zeros((4, 2), dtype=complex)
    mat[0, 0] = 1.0
    mat[3, 1] = 1.0
    return AttackIsometry(mat, BipartiteLabel(2, 2))


@dataclasses.dataclass(frozen=True)
class PropagatedStates:
    """The four joint output states and their reductions."""

    joint_alpha: PureState
    joint_alpha_prime: PureState
    joint_beta: PureState
    joint_beta_prime: PureState
    rho_b: np.ndarray
    rho_b_prime: np.ndarray
    sigma_b: np.ndarray
    sigma_b_prime: np.ndarray
    rho_e: np.ndarray
    rho_e_prime: np.ndarray


def apply_attack(src: SourceSpec, attack: AttackIsometry) -> PropagatedStates:
    """Propagates the source states through the attack isometry."""
    if attack.dim_in != src.dim:
        raise DimensionError(
            f"attack acts on dimension {attack.dim_in}, source emits {src.dim}"
        )
    label = attack.label
    joints = [PureState(attack.matrix @ s.amplitudes) for s in src.states()]
    reduced_b = [partial_trace(j.projector(), label, "B") for j in joints]
    reduced_e = [partial_trace(j.projector(), label, "E") for j in joints[:2]]
    return PropagatedStates(
        joint_alpha=joints[0],
        joint_alpha_prime=joints[1],
        joint_beta=joints[2],
        joint_beta_prime=joints[3],
        rho_b=reduced_b[0],
        rho_b_prime=reduced_b[1],
        sigma_b=reduced_b[2],
        sigma_b_prime=reduced_b[3],
        rho_e=reduced_e[0],
        rho_e_prime=reduced_e[1],
    )


@dataclasses.dataclass(frozen=True)
class AttackDiagnostics:
    """Scalar diagnostics of one attack against one source.

    The Pauli-frame norms (z_norm_bob, x_norm_bob, v_norm_bob and the alias
    gamma = x_norm_bob) are defined only for two-dimensional sources with a
    nondegenerate angle frame; otherwise they are NaN.
    """

    d_z_bob: float
    d_x_bob: float
    fidelity_eve: float
    d_eve: float
    cond_entropy: float
    z_norm_bob: float = math.nan
    x_norm_bob: float = math.nan
    v_norm_bob: float = math.nan

    def __post_init__(self) -> None:
        # Trace distance never exceeds sqrt(1 - F^2); failing this indicates
        # a numerically broken input, not an interesting attack.
        limit = math.sqrt(max(0.0, 1.0 - self.fidelity_eve**2))
        if self.d_eve > limit + 1e-9:
            raise ValidationError(
                f"d_eve = {self.d_eve!r} exceeds sqrt(1 - fidelity^2) = {limit!r}"
            )

    @property
    def gamma(self) -> float:
        return self.x_norm_bob

    def to_dict(self) -> dict:
        def scrub(x: float):
            return None if math.isnan(x) else x

        return {
            "dZBob": self.d_z_bob,
            "dXBob": self.d_x_bob,
            "fidelityEve": self.fidelity_eve,
            "dEve": self.d_eve,
            "condEntropy": self.cond_entropy,
            "zNormBob": scrub(self.z_norm_bob),
            "xNormBob": scrub(self.x_norm_bob),
            "vNormBob": scrub(self.v_norm_bob),
            "gamma": scrub(self.gamma),
        }


def _qubit_frame_operators(src: SourceSpec):
    """Unit-Pauli operators (Z, X, V) of a qubit source's angle frame.

    Z is the normalized key-basis difference, V the normalized test-basis
    difference, and X completes the frame so that V = cos(phi) Z +
    sin(phi) X.  Returns None when the frame is degenerate.
    """
    if src.dim != 2:
        return None
    diff_z = src.alpha.projector() - src.alpha_prime.projector()
    diff_x = src.beta.projector() - src.beta_prime.projector()
    paulis = (_PAULI_X, _PAULI_Y, _PAULI_Z)
    axis_z = np.array([0.5 * np.trace(p @ diff_z).real for p in paulis])
    axis_v = np.array([0.5 * np.trace(p @ diff_x).real for p in paulis])
    norm_z = float(np.linalg.norm(axis_z))
    norm_v = float(np.linalg.norm(axis_v))
    if norm_z < 1e-9 or norm_v < 1e-9:
        return None
    unit_z = axis_z / norm_z
    unit_v = axis_v / norm_v
    cos_phi = float(np.dot(unit_z, unit_v))
    sin_phi = math.sqrt(max(0.0, 1.0 - cos_phi * cos_phi))
    if sin_phi < 1e-9:
        return None
    unit_x = (unit_v - cos_phi * unit_z) / sin_phi

    def pauli_dot(axis):
        return axis[0] * _PAULI_X + axis[1] * _PAULI_Y + axis[2] * _PAULI_Z

    return pauli_dot(unit_z), pauli_dot(unit_x), pauli_dot(unit_v)


def _push_to_bob(op: np.ndarray, attack: AttackIsometry) -> np.ndarray:
    return partial_trace(attack.matrix @ op @ attack.matrix.conj().T, attack.label, "B")


def conditional_entropy(src: SourceSpec, prop: PropagatedStates) -> float:
    """H(Z|E) of the key bit given Eve, with emission weights (pZ, 1 - pZ).

    The classical-quantum state is block diagonal, so the joint entropy
    splits as h(pZ) + pZ S(rho_E) + (1-pZ) S(rho_E'), and the conditional
    entropy subtracts the entropy of Eve's average state.
    """
    p = src.p_z
    avg = p * prop.rho_e + (1.0 - p) * prop.rho_e_prime
    return (
        binary_entropy(p)
        + p * von_neumann_entropy(prop.rho_e)
        + (1.0 - p) * von_neumann_entropy(prop.rho_e_prime)
        - von_neumann_entropy(avg)
    )


def diagnostics(
    src: SourceSpec, attack: AttackIsometry, prop: PropagatedStates | None = None
) -> AttackDiagnostics:
    """Computes the full diagnostic record for one attack."""
    if prop is None:
        prop = apply_attack(src, attack)
    frame = _qubit_frame_operators(src)
    norms = {}
    if frame is not None:
        for name, op in zip(("z_norm_bob", "x_norm_bob", "v_norm_bob"), frame):
            norms[name] = 0.5 * trace_norm(_push_to_bob(op, attack))
    return AttackDiagnostics(
        d_z_bob=trace_distance(prop.rho_b, prop.rho_b_prime),
        d_x_bob=trace_distance(prop.sigma_b, prop.sigma_b_prime),
        fidelity_eve=fidelity(prop.rho_e, prop.rho_e_prime),
        d_eve=trace_distance(prop.rho_e, prop.rho_e_prime),
        cond_entropy=conditional_entropy(src, prop),
        **norms,
    )


def build_tightness_attack(theta: float, gamma: float) -> tuple[SourceSpec, AttackIsometry]:
    """The explicit source/attack family saturating the theta bound.

    The source emits orthonormal basis pairs at Bloch angle theta (key pair
    at polar angle gamma - theta, test pair at gamma); the attack is the
    basis-copy map.  The resulting diagnostics satisfy
    D(sigma_B, sigma_B') = |cos gamma| and F_E = |sin(theta - gamma)| =
    f_theta(|cos gamma|) exactly.

    Requires 0 <= gamma <= theta <= pi/2.
    """
    if not (0.0 <= gamma <= theta <= math.pi / 2.0):
        raise DomainError(
            f"need 0 <= gamma <= theta <= pi/2, got gamma={gamma!r}, theta={theta!r}"
        )
    a = (gamma - theta) / 2.0
    b = gamma / 2.0

    def pair(angle: float):
        ket = np.array([math.cos(angle), math.sin(angle)], dtype=complex)
        ket_perp = np.array([-math.sin(angle), math.cos(angle)], dtype=complex)
        return PureState(ket), PureState(ket_perp)

    ka, kap = pair(a)
    kb, kbp = pair(b)
    src = SourceSpec(alpha=ka, alpha_prime=kap, beta=kb, beta_prime=kbp, p_z=0.5)
    return src, full_copy_attack()


@dataclasses.dataclass(frozen=True)
class BoundCheck:
    """Signed slack of one inequality on one attack.

    slack >= 0 means the inequality holds.  ``certified`` is False for the
    naive fidelity conjecture, where negative slack is a finding rather
    than an error.
    """

    name: str
    applicable: bool
    slack: float | None
    certified: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "applicable": self.applicable,
            "slack": self.slack,
            "certified": self.certified,
            "note": self.note,
        }


def verify_bounds(
    src: SourceSpec,
    attack: AttackIsometry,
    diag: AttackDiagnostics | None = None,
    char: OverlapCharacterization | None = None,
) -> list[BoundCheck]:
    """Evaluates every bound's slack against one attack's diagnostics.

    ``char`` may be passed to avoid re-running the delta maximization when
    verifying many attacks against the same source.
    """
    if diag is None:
        diag = diagnostics(src, attack)
    if char is None:
        char = compute_theta(src)
    checks: list[BoundCheck] = []

    if char.applicable:
        slack = diag.fidelity_eve - f_theta(char.theta, diag.d_x_bob)
        checks.append(BoundCheck("theta-fidelity", True, slack))
    else:
        checks.append(
            BoundCheck("theta-fidelity", False, None, note="theta inapplicable")
        )

    have_frame = not math.isnan(diag.x_norm_bob)
    angles = None
    if src.dim == 2 and have_frame:
        try:
            angles = extract_qubit_angles(src)
        except DegenerateSourceError:
            angles = None

    if angles is not None:
        slack = diag.fidelity_eve - g_alpha(angles.alpha, diag.x_norm_bob)
        checks.append(BoundCheck("qubit-fidelity", True, slack))
        slack = diag.fidelity_eve - fidelity_bound_qubit(angles, diag.d_x_bob)
        checks.append(BoundCheck("qubit-composed-fidelity", True, slack))
        checks.append(
            BoundCheck(
                "naive-fidelity-conjecture",
                True,
                diag.fidelity_eve - diag.x_norm_bob,
                certified=False,
                note="refuted for nonorthogonal key states; negative slack is a finding",
            )
        )
    else:
        for name in ("qubit-fidelity", "qubit-composed-fidelity"):
            checks.append(BoundCheck(name, False, None, note="no qubit angle frame"))
        checks.append(
            BoundCheck(
                "naive-fidelity-conjecture", False, None, certified=False,
                note="no qubit angle frame",
            )
        )

    if angles is not None and attack.label.dim_b == 2:
        z, x, v = diag.z_norm_bob, diag.x_norm_bob, diag.v_norm_bob
        s = abs(math.sin(angles.phi))
        c = abs(math.cos(angles.phi))
        rad_v = max(0.0, 1.0 - v * v)
        rad_z = max(0.0, 1.0 - z * z)
        rad_x = max(0.0, 1.0 - x * x)
        # Residual of the squared inequality, with the cross term's product
        # kept under one root: the naive difference of roots loses half the
        # working precision whenever a norm sits at 1 (every dimE=1 attack
        # lands exactly there), while this form evaluates saturation exactly.
        residual = (
            rad_v + c * c * rad_z + 2.0 * c * math.sqrt(rad_v * rad_z)
            - s * s * rad_x
        )
        scale = math.sqrt(rad_v) + c * math.sqrt(rad_z) + s * math.sqrt(rad_x)
        checks.append(BoundCheck("dim2-norms", True, residual / max(scale, 1.0)))
    else:
        checks.append(
            BoundCheck(
                "dim2-norms", False, None,
                note="needs a qubit source frame and a two-dimensional detector",
            )
        )

    if char.applicable and char.theta > math.pi / 2.0 - 1e-6:
        slack = 1.0 - diag.d_eve**2 - diag.d_x_bob**2
        checks.append(BoundCheck("fidelity-tradeoff", True, slack))
    else:
        checks.append(
            BoundCheck(
                "fidelity-tradeoff", False, None,
                note="certified only for theta = pi/2 sources",
            )
        )

    slack = diag.cond_entropy - entropy_bound_from_fidelity(diag.fidelity_eve, src.bias)
    checks.append(BoundCheck("entropy-fidelity", True, slack))
    return checks


# ---------------------------------------------------------------------------
# Derivative-free searches over attack space.
#
# Attacks are parameterized by an unconstrained real vector holding the real
# and imaginary parts of a (dim_b*dim_e) x d matrix; QR orthonormalization
# (with the R-diagonal phases absorbed) maps it onto a valid isometry.  The
# map is smooth away from rank deficiency, which random starts avoid.
# ---------------------------------------------------------------------------


def _orthonormalize(raw: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(raw)
    diag = np.diagonal(r).copy()
    diag[np.abs(diag) < 1e-300] = 1.0
    return q * (diag / np.abs(diag))


def _params_to_matrix(params: np.ndarray, rows: int, cols: int) -> np.ndarray:
    half = rows * cols
    raw = params[:half].reshape(rows, cols) + 1j * params[half:].reshape(rows, cols)
    return _orthonormalize(raw)


def _matrix_to_params(matrix: np.ndarray) -> np.ndarray:
    return np.concatenate([matrix.real.ravel(), matrix.imag.ravel()])


def _fast_channel_views(matrix: np.ndarray, src: SourceSpec, dim_b: int, dim_e: int):
    """Reshaped joint kets M[state] with M[b, e] = amplitude of |b>|e>."""
    kets = np.stack([s.amplitudes for s in src.states()], axis=1)
    joint = matrix @ kets
    return [joint[:, i].reshape(dim_b, dim_e) for i in range(4)]


def _eve_fidelity_from_views(m0: np.ndarray, m1: np.ndarray) -> float:
    # Joint states are purifications of Eve's reductions with Bob as the
    # purifying factor, so F(rho_E, rho_E') is the nuclear norm of the
    # dim_b x dim_b cross operator.
    cross = m1 @ m0.conj().T
    return float(np.linalg.svd(cross, compute_uv=False).sum())


def _bob_trace_distance_from_views(m2: np.ndarray, m3: np.ndarray) -> float:
    diff = m2 @ m2.conj().T - m3 @ m3.conj().T
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def _entropy_of_eigs(eigs: np.ndarray) -> float:
    eigs = eigs[eigs > 1e-18]
    if eigs.size == 0:
        return 0.0
    return float(-(eigs * np.log2(eigs)).sum())


def _cond_entropy_from_views(m0: np.ndarray, m1: np.ndarray, p: float) -> float:
    s0 = _entropy_of_eigs(np.linalg.eigvalsh(m0 @ m0.conj().T))
    s1 = _entropy_of_eigs(np.linalg.eigvalsh(m1 @ m1.conj().T))
    rho0 = m0.T @ m0.conj()
    rho1 = m1.T @ m1.conj()
    mix = _entropy_of_eigs(np.linalg.eigvalsh(p * rho0 + (1.0 - p) * rho1))
    return binary_entropy(p) + p * s0 + (1.0 - p) * s1 - mix


@dataclasses.dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a constrained attack search.

    ``objective`` includes the disturbance penalty; ``feasible`` records
    whether the best attack landed inside the disturbance band, so an
    infeasible target shows up here instead of raising.
    """

    kind: str
    target: float
    value: float
    objective: float
    constraint_residual: float
    feasible: bool
    attack: AttackIsometry
    diag: AttackDiagnostics
    evaluations: int
    restarts: int
    budget: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "value": self.value,
            "objective": self.objective,
            "constraintResidual": self.constraint_residual,
            "feasible": self.feasible,
            "evaluations": self.evaluations,
            "restarts": self.restarts,
            "budget": self.budget,
            "seed": self.seed,
            "dimB": self.attack.label.dim_b,
            "dimE": self.attack.label.dim_e,
            "diagnostics": self.diag.to_dict(),
            "attack": attack_to_json_dict(self.attack),
        }


def _constrained_search(
    kind: str,
    src: SourceSpec,
    target: float,
    dim_e: int,
    budget: int,
    seed: int,
    restarts: int,
) -> OptimizationResult:
    if not 0.0 <= target <= 1.0:
        raise DomainError(f"target disturbance {target!r} outside [0, 1]")
    if dim_e < 1:
        raise DimensionError(f"dim_e must be >= 1, got {dim_e}")
    if budget < restarts:
        raise DomainError(f"budget {budget} cannot cover {restarts} restarts")
    if restarts < 1:
        raise DomainError("need at least one restart")

    dim_b = src.dim
    rows = dim_b * dim_e
    cols = src.dim
    n_params = 2 * rows * cols
    p_z = src.p_z

    count = 0

    def objective_at(params: np.ndarray, weight: float) -> float:
        nonlocal count
        count += 1
        mat = _params_to_matrix(params, rows, cols)
        views = _fast_channel_views(mat, src, dim_b, dim_e)
        if kind == "fidelity":
            value = _eve_fidelity_from_views(views[0], views[1])
        else:
            value = _cond_entropy_from_views(views[0], views[1], p_z)
        residual = _bob_trace_distance_from_views(views[2], views[3]) - target
        return value + weight * residual * residual

    rng = np.random.default_rng(seed)
    per_restart = budget // restarts
    best_obj = math.inf
    best_params = None
    for index in range(restarts):
        start = rng.standard_normal(n_params)
        if count >= budget:
            break
        # Quadratic-penalty continuation: a flat weight strong enough to pin
        # the disturbance also walls off the early search, so escalate it over
        # warm-started stages instead.
        point = start
        res = None
        for weight, share in zip(_PENALTY_WEIGHTS, _PENALTY_SHARES):
            stage_budget = min(int(per_restart * share), budget - count)
            if stage_budget < 1:
                break
            res = optimize.minimize(
                objective_at,
                point,
                args=(weight,),
                method="Nelder-Mead",
                options={
                    "maxfev": stage_budget,
                    "xatol": 1e-10,
                    "fatol": 1e-12,
                    "adaptive": True,
                },
            )
            point = res.x
        if res is None:
            break
        # Strictly better objective wins; ties keep the earliest restart.
        # Final-stage weights match across restarts, so res.fun is comparable.
        if res.fun < best_obj:
            best_obj = float(res.fun)
            best_params = res.x

    matrix = _params_to_matrix(best_params, rows, cols)
    attack = AttackIsometry(matrix, BipartiteLabel(dim_b, dim_e))
    diag = diagnostics(src, attack)
    residual = abs(diag.d_x_bob - target)
    value = diag.fidelity_eve if kind == "fidelity" else diag.cond_entropy
    return OptimizationResult(
        kind=kind,
        target=target,
        value=value,
        objective=best_obj,
        constraint_residual=residual,
        feasible=residual <= DISTURBANCE_BAND + 1e-9,
        attack=attack,
        diag=diag,
        evaluations=count,
        restarts=restarts,
        budget=budget,
        seed=seed,
    )


def minimize_fidelity(
    src: SourceSpec,
    target_disturbance: float,
    dim_e: int = 2,
    budget: int = 40000,
    seed: int = 0,
    restarts: int = 20,
) -> OptimizationResult:
    """Minimizes F(rho_E, rho_E') over attacks with pinned test disturbance.

    Nelder-Mead over the raw-matrix parameterization with ``restarts``
    seeded random starts; the best penalized objective wins, ties resolved
    toward the earliest restart.  Deterministic for a fixed seed.
    """
    return _constrained_search(
        "fidelity", src, target_disturbance, dim_e, budget, seed, restarts
    )


def minimize_conditional_entropy(
    src: SourceSpec,
    target_disturbance: float,
    dim_e: int = 2,
    budget: int = 40000,
    seed: int = 0,
    restarts: int = 20,
) -> OptimizationResult:
    """Minimizes H(Z|E) over attacks with pinned test disturbance."""
    return _constrained_search(
        "entropy", src, target_disturbance, dim_e, budget, seed, restarts
    )


@dataclasses.dataclass(frozen=True)
class ZvxFinding:
    """Best violation of the two-dimensional norm inequality found."""

    phi: float
    dim_b: int
    dim_e: int
    margin: float
    violated: bool
    z_norm: float
    x_norm: float
    v_norm: float
    attack: AttackIsometry
    evaluations: int
    budget: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "dimB": self.dim_b,
            "dimE": self.dim_e,
            "margin": self.margin,
            "violated": self.violated,
            "zNorm": self.z_norm,
            "xNorm": self.x_norm,
            "vNorm": self.v_norm,
            "evaluations": self.evaluations,
            "budget": self.budget,
            "seed": self.seed,
            "attack": attack_to_json_dict(self.attack),
        }


def break_zvx_search(
    phi: float,
    dim_b: int,
    budget: int = 20000,
    seed: int = 0,
    dim_e: int = 2,
    refine_top: int = 5,
) -> ZvxFinding:
    """Searches channels maximizing violation of the norm inequality.

    The inequality sqrt(1 - v^2) >= |sin phi| sqrt(1 - x^2) -
    |cos phi| sqrt(1 - z^2) on the halved trace norms of the pushed-forward
    Pauli frame holds for two-dimensional detectors; for dim_b >= 3 it can
    fail.  The search screens Haar-random isometries and polishes the
    ``refine_top`` best with Nelder-Mead (set it to 0 for a pure random
    control run).  margin > 0 means the inequality is violated.
    """
    if not 0.0 < phi < math.pi:
        raise DomainError(f"phi must lie strictly inside (0, pi), got {phi!r}")
    if dim_b < 2:
        raise DimensionError(f"dim_b must be >= 2, got {dim_b}")
    if dim_e < 1 or budget < 1:
        raise DomainError("dim_e and budget must be positive")

    sin_p = abs(math.sin(phi))
    cos_p = abs(math.cos(phi))
    rows = dim_b * dim_e
    count = 0

    def norms_of(matrix: np.ndarray):
        m0 = matrix[:, 0].reshape(dim_b, dim_e)
        m1 = matrix[:, 1].reshape(dim_b, dim_e)
        g00 = m0 @ m0.conj().T
        g11 = m1 @ m1.conj().T
        g01 = m0 @ m1.conj().T
        z_b = g00 - g11
        x_b = g01 + g01.conj().T
        v_b = math.cos(phi) * z_b + math.sin(phi) * x_b
        halves = []
        for op in (z_b, x_b, v_b):
            halves.append(float(0.5 * np.abs(np.linalg.eigvalsh(op)).sum()))
        return tuple(halves)

    def margin_of(matrix: np.ndarray) -> float:
        nonlocal count
        count += 1
        z, x, v = norms_of(matrix)

        def croot(t):
            return math.sqrt(max(0.0, t))

        return sin_p * croot(1.0 - x * x) - cos_p * croot(1.0 - z * z) - croot(1.0 - v * v)

    rng = np.random.default_rng(seed)
    refine_budget = 0 if refine_top == 0 else budget // 2
    screen_budget = budget - refine_budget

    candidates: list[tuple[float, int, np.ndarray]] = []
    for index in range(screen_budget):
        mat = haar_random_isometry(2, rows, rng)
        m = margin_of(mat)
        candidates.append((m, index, mat))
    candidates.sort(key=lambda item: (-item[0], item[1]))

    best_margin, _, best_matrix = candidates[0]
    if refine_top > 0:
        per_candidate = max(1, refine_budget // max(1, min(refine_top, len(candidates))))
        for m0, _, mat in candidates[:refine_top]:
            if count >= budget:
                break
            res = optimize.minimize(
                lambda p: -margin_of(_params_to_matrix(p, rows, 2)),
                _matrix_to_params(mat),
                method="Nelder-Mead",
                options={
                    "maxfev": max(1, min(per_candidate, budget - count)),
                    "xatol": 1e-10,
                    "fatol": 1e-12,
                    "adaptive": True,
                },
            )
            refined = -float(res.fun)
            if refined > best_margin:
                best_margin = refined
                best_matrix = _params_to_matrix(res.x, rows, 2)

    z, x, v = norms_of(best_matrix)
    attack = AttackIsometry(best_matrix, BipartiteLabel(dim_b, dim_e))
    return ZvxFinding(
        phi=phi,
        dim_b=dim_b,
        dim_e=dim_e,
        margin=best_margin,
        violated=best_margin > 0.0,
        z_norm=z,
        x_norm=x,
        v_norm=v,
        attack=attack,
        evaluations=count,
        budget=budget,
        seed=seed,
    )


def attack_to_json_dict(attack: AttackIsometry) -> dict:
    return {
        "dimB": attack.label.dim_b,
        "dimE": attack.label.dim_e,
        "matrix": [
            [[float(z.real), float(z.imag)] for z in row] for row in attack.matrix
        ],
    }


def save_attack(attack: AttackIsometry, path) -> None:
    """Writes the attack isometry to JSON."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(attack_to_json_dict(attack), handle, indent=2)
        handle.write("\n")


def load_attack(path) -> AttackIsometry:
    """Reads an attack isometry from JSON, validating orthonormality."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: expected a JSON object at top level")
    for key in ("dimB", "dimE", "matrix"):
        if key not in payload:
            raise ValidationError(f"{path}: missing required key {key!r}")
    dim_b, dim_e = payload["dimB"], payload["dimE"]
    if not isinstance(dim_b, int) or not isinstance(dim_e, int):
        raise ValidationError(f"{path}: dimB and dimE must be integers")
    rows = payload["matrix"]
    if not isinstance(rows, list) or not rows:
        raise ValidationError(f"{path}: matrix must be a nonempty list of rows")
    try:
        matrix = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in rows]
        )
    except (TypeError, IndexError) as exc:
        raise ValidationError(f"{path}: matrix entries must be [re, im] pairs") from exc
    return AttackIsometry(matrix, BipartiteLabel(dim_b, dim_e))
