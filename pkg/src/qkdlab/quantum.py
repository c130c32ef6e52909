"""Dense linear-algebra primitives for finite-dimensional quantum states.

Everything here works on plain numpy arrays with complex dtype.  Operators
are square matrices, pure states are unit vectors wrapped in PureState.
Hermitian eigenproblems go through numpy's dedicated Hermitian solver;
eigenvalues that are negative by less than ``PSD_CLAMP_TOL`` are treated as
exact zeros, anything more negative is rejected as invalid input.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import DimensionError, DomainError, ValidationError

# Eigenvalues of nominally positive semidefinite operators may come out
# slightly negative; within this tolerance they are clamped to zero.
PSD_CLAMP_TOL = 1e-9

# Entrywise tolerance for accepting a matrix as Hermitian.
HERMITIAN_TOL = 1e-10

# Tolerance on Tr[rho] = 1 for density operators.
TRACE_TOL = 1e-9

_LOG2 = np.log(2.0)


@dataclasses.dataclass(frozen=True)
class BipartiteLabel:
    """Names the tensor factorization H_B (x) H_E of a composite space.

    Index convention: basis state ``b * dim_e + e`` of the composite space
    is ``|b>|e>``.
    """

    dim_b: int
    dim_e: int

    def __post_init__(self) -> None:
        if self.dim_b < 1 or self.dim_e < 1:
            raise DimensionError(
                f"factor dimensions must be positive, got ({self.dim_b}, {self.dim_e})"
            )

    @property
    def total(self) -> int:
        return self.dim_b * self.dim_e


@dataclasses.dataclass(frozen=True)
class PureState:
    """A unit vector in C^d.  The amplitudes array is frozen on construction."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        vec = np.array(self.amplitudes, dtype=np.complex128)
        if vec.ndim != 1 or vec.size == 0:
            raise DimensionError("a pure state must be a nonempty 1-d vector")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"state vector norm is {norm!r}, expected 1")
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @classmethod
    def normalized(cls, vec, tol: float = 1e-6, name: str = "state") -> "PureState":
        """Builds a PureState from ``vec``, rescaling away norm error up to ``tol``."""
        arr = np.asarray(vec, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError(f"{name}: expected a nonempty 1-d vector")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > tol:
            raise ValidationError(f"{name}: vector norm {norm!r} deviates from 1 beyond {tol}")
        return cls(arr / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        """Returns the rank-one density operator |psi><psi|."""
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap(self, other: "PureState") -> complex:
        """Returns <self|other>."""
        if self.dim != other.dim:
            raise DimensionError("overlap requires states of equal dimension")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _as_operator(m, name: str = "operator") -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name}: expected a square matrix, got shape {arr.shape}")
    return arr


def _check_hermitian(arr: np.ndarray, name: str = "operator") -> np.ndarray:
    if np.max(np.abs(arr - arr.conj().T)) > HERMITIAN_TOL:
        raise ValidationError(f"{name}: matrix is not Hermitian within {HERMITIAN_TOL}")
    # Symmetrize so the Hermitian eigensolver sees an exactly Hermitian input.
    return 0.5 * (arr + arr.conj().T)


def trace_norm(m) -> float:
    """Sum of singular values of ``m`` (the Schatten 1-norm)."""
    arr = _as_operator(m, "trace_norm")
    return float(np.linalg.svd(arr, compute_uv=False).sum())


def trace_distance(a, b) -> float:
    """Trace distance D(a, b) = 0.5 * ||a - b||_1 between density operators.

    Args:
        a: density operator (Hermitian, PSD, unit trace).
        b: density operator of the same dimension.

    Raises:
        DimensionError: shapes differ or are not square.
        ValidationError: a trace deviates from 1 beyond TRACE_TOL, or an
            input is not Hermitian.
    """
    ma = _as_operator(a, "trace_distance: first argument")
    mb = _as_operator(b, "trace_distance: second argument")
    if ma.shape != mb.shape:
        raise DimensionError(
            f"trace_distance: operands have shapes {ma.shape} and {mb.shape}"
        )
    for name, m in (("first", ma), ("second", mb)):
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(
                f"trace_distance: {name} argument has trace {tr!r}, expected 1"
            )
    diff = _check_hermitian(ma - mb, "trace_distance: difference")
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def _psd_sqrt(m: np.ndarray, name: str) -> np.ndarray:
    herm = _check_hermitian(m, name)
    eigs, vecs = np.linalg.eigh(herm)
    if eigs.min() < -PSD_CLAMP_TOL:
        raise ValidationError(
            f"{name}: negative eigenvalue {eigs.min()!r} below -{PSD_CLAMP_TOL}"
        )
    root = np.sqrt(np.maximum(eigs, 0.0))
    return (vecs * root) @ vecs.conj().T


def fidelity(a, b) -> float:
    """Fidelity F(a, b) = ||sqrt(a) sqrt(b)||_1 between density operators.

    This is the square-root convention: for pure states it reduces to
    |<psi|phi>|.  Square roots are taken through Hermitian eigendecomposition
    with small negative eigenvalues clamped to zero.

    Raises:
        DimensionError: shapes differ.
        ValidationError: an eigenvalue is below -PSD_CLAMP_TOL.
    """
    ma = _as_operator(a, "fidelity: first argument")
    mb = _as_operator(b, "fidelity: second argument")
    if ma.shape != mb.shape:
        raise DimensionError(f"fidelity: operands have shapes {ma.shape} and {mb.shape}")
    ra = _psd_sqrt(ma, "fidelity: first argument")
    rb = _psd_sqrt(mb, "fidelity: second argument")
    return trace_norm(ra @ rb)


def partial_trace(m, label: BipartiteLabel, keep: str) -> np.ndarray:
    """Partial trace of an operator on H_B (x) H_E.

    Args:
        m: operator on the composite space, shape (dim_b*dim_e,)*2.
        label: the factorization.
        keep: "B" keeps the first factor, "E" the second.
    """
    arr = _as_operator(m, "partial_trace")
    if arr.shape[0] != label.total:
        raise DimensionError(
            f"partial_trace: operator dimension {arr.shape[0]} does not match "
            f"{label.dim_b}*{label.dim_e}"
        )
    if keep not in ("B", "E"):
        raise DomainError(f"partial_trace: keep must be 'B' or 'E', got {keep!r}")
    four = arr.reshape(label.dim_b, label.dim_e, label.dim_b, label.dim_e)
    if keep == "B":
        return np.einsum("iaja->ij", four)
    return np.einsum("aiaj->ij", four)


def von_neumann_entropy(m) -> float:
    """Von Neumann entropy S(m) = -Tr[m log2 m] of a density operator.

    Eigenvalues in [-PSD_CLAMP_TOL, 0) are treated as exact zeros, with
    0 * log 0 = 0; eigenvalues below that raise ValidationError.
    """
    arr = _as_operator(m, "von_neumann_entropy")
    eigs = np.linalg.eigvalsh(_check_hermitian(arr, "von_neumann_entropy"))
    if eigs.min() < -PSD_CLAMP_TOL:
        raise ValidationError(
            f"von_neumann_entropy: negative eigenvalue {eigs.min()!r} below -{PSD_CLAMP_TOL}"
        )
    eigs = eigs[eigs > 0.0]
    if eigs.size == 0:
        return 0.0
    return float(-(eigs * (np.log(eigs) / _LOG2)).sum())


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x), with h(0) = h(1) = 0."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary_entropy: argument {x!r} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-(x * np.log(x) + (1.0 - x) * np.log(1.0 - x)) / _LOG2)


def optimal_distinguishing_unitary(m) -> np.ndarray:
    """The Hermitian unitary U = P - Q extremizing Tr[U m].

    P projects onto the nonnegative eigenspace of the Hermitian input and Q
    onto the negative one, so 0.5 * Tr[U m] equals half the trace norm of m.
    Zero eigenvalues are assigned to P; in particular the zero matrix maps
    to the identity.
    """
    arr = _check_hermitian(_as_operator(m, "optimal_distinguishing_unitary"),
                           "optimal_distinguishing_unitary")
    eigs, vecs = np.linalg.eigh(arr)
    signs = np.where(eigs >= 0.0, 1.0, -1.0)
    return (vecs * signs) @ vecs.conj().T


def haar_random_isometry(dim_in: int, dim_out: int, seed) -> np.ndarray:
    """Draws a Haar-distributed isometry C^dim_in -> C^dim_out.

    Implementation: QR decomposition of a complex Ginibre matrix with the
    phases of the R diagonal absorbed into Q, which makes the distribution
    exactly invariant.  ``seed`` feeds numpy's default generator (PCG64), so
    an integer seed pins the draw; an existing Generator is used as-is.

    Raises:
        DimensionError: if dim_out < dim_in.
    """
    if dim_in < 1 or dim_out < dim_in:
        raise DimensionError(
            f"haar_random_isometry: need 1 <= dim_in <= dim_out, got ({dim_in}, {dim_out})"
        )
    rng = np.random.default_rng(seed)
    ginibre = rng.standard_normal((dim_out, dim_in)) + 1j * rng.standard_normal((dim_out, dim_in))
    q, r = np.linalg.qr(ginibre)
    diag = np.diagonal(r).copy()
    diag[np.abs(diag) < 1e-300] = 1.0
    return q * (diag / np.abs(diag))
