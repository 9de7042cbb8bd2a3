"""Single-qubit states, distances and matrix norms.

Basis convention: index 0 is the excited state |1>, index 1 is |0>, so the
Bloch component z = +1 is the excited state and sigma_z = diag(1, -1).
All 2x2 eigenvalue and singular-value computations use closed forms.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from core.constants import TOL
from core.exceptions import NonphysicalStateError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# Raising takes |0> (index 1) to |1> (index 0).
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class BlochVector:
    """Real Bloch vector r of a qubit state."""

    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, values) -> "BlochVector":
        x, y, z = (float(v) for v in np.asarray(values, dtype=float).reshape(3))
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated 2x2 density matrix.

    Raises:
        NonphysicalStateError: if the entries are not Hermitian, not of unit
            trace or not positive semidefinite within ``tolerance``.
    """

    entries: np.ndarray
    tolerance: float = TOL.construction

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.shape != (2, 2):
            raise NonphysicalStateError(f"Density matrix must be 2x2, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise NonphysicalStateError("Density matrix has non-finite entries")

        tol = self.tolerance
        if abs(rho[1, 0] - np.conj(rho[0, 1])) > tol or abs(rho[0, 0].imag) > tol or abs(rho[1, 1].imag) > tol:
            raise NonphysicalStateError("Density matrix is not Hermitian")
        trace = rho[0, 0].real + rho[1, 1].real
        if abs(trace - 1.0) > tol:
            raise NonphysicalStateError(f"Density matrix trace {trace:.15g} differs from 1")
        low, _ = _hermitian_eigenvalues(rho)
        if low < -tol:
            raise NonphysicalStateError(f"Density matrix has negative eigenvalue {low:.3e}")

        object.__setattr__(self, "entries", _frozen(rho))

    @cached_property
    def eigenvalues(self) -> Tuple[float, float]:
        return _hermitian_eigenvalues(self.entries)

    def bloch(self) -> BlochVector:
        return BlochVector.from_array(density_to_bloch_array(self.entries))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())


@dataclass(frozen=True)
class PureState:
    """|psi> = sqrt(a)|1> + exp(i theta) sqrt(1 - a)|0>.

    ``a`` is the excited-state population, ``theta`` the relative phase.
    """

    a: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"Excited population a must lie in [0, 1], got {self.a}")
        if not np.isfinite(self.theta):
            raise ValueError("Phase theta must be finite")
        object.__setattr__(self, "theta", float(np.mod(self.theta, 2.0 * np.pi)))

    @property
    def ket(self) -> np.ndarray:
        return np.array([np.sqrt(self.a), np.exp(1j * self.theta) * np.sqrt(1.0 - self.a)])

    @property
    def orthogonal_ket(self) -> np.ndarray:
        # Global phase fixed so that the first amplitude is real and non-negative.
        return np.array([np.sqrt(1.0 - self.a), -np.exp(1j * self.theta) * np.sqrt(self.a)])

    def density(self) -> DensityMatrix:
        ket = self.ket
        return DensityMatrix(np.outer(ket, ket.conj()))

    def bloch_array(self) -> np.ndarray:
        radial = 2.0 * np.sqrt(self.a * (1.0 - self.a))
        return np.array(
            [radial * np.cos(self.theta), radial * np.sin(self.theta), 2.0 * self.a - 1.0]
        )

    def bloch(self) -> BlochVector:
        return BlochVector.from_array(self.bloch_array())


@dataclass(frozen=True)
class NormTriple:
    """Operator, trace and Hilbert-Schmidt norms of a 2x2 matrix."""

    op: float
    tr: float
    hs: float


# --------------------------------------------------
# Conversions
# --------------------------------------------------


def _hermitian_eigenvalues(rho: np.ndarray) -> Tuple[float, float]:
    mean = 0.5 * (rho[0, 0].real + rho[1, 1].real)
    half_gap = np.hypot(0.5 * (rho[0, 0].real - rho[1, 1].real), abs(rho[0, 1]))
    return float(mean - half_gap), float(mean + half_gap)


def bloch_to_density_array(r: np.ndarray) -> np.ndarray:
    """Vectorized (I + r.sigma)/2 over a trailing axis of length 3."""
    r = np.asarray(r, dtype=float)
    rho = np.empty(r.shape[:-1] + (2, 2), dtype=complex)
    rho[..., 0, 0] = 0.5 * (1.0 + r[..., 2])
    rho[..., 1, 1] = 0.5 * (1.0 - r[..., 2])
    rho[..., 0, 1] = 0.5 * (r[..., 0] - 1j * r[..., 1])
    rho[..., 1, 0] = 0.5 * (r[..., 0] + 1j * r[..., 1])
    return rho


def velocity_to_matrix_array(v: np.ndarray) -> np.ndarray:
    """Vectorized v.sigma/2: the traceless matrix whose Bloch velocity is v."""
    v = np.asarray(v, dtype=float)
    out = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 0.5 * v[..., 2]
    out[..., 1, 1] = -0.5 * v[..., 2]
    out[..., 0, 1] = 0.5 * (v[..., 0] - 1j * v[..., 1])
    out[..., 1, 0] = 0.5 * (v[..., 0] + 1j * v[..., 1])
    return out


def density_to_bloch_array(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.stack(
        [
            2.0 * rho[..., 1, 0].real,
            2.0 * rho[..., 1, 0].imag,
            (rho[..., 0, 0] - rho[..., 1, 1]).real,
        ],
        axis=-1,
    )


def bloch_to_density(r: BlochVector) -> DensityMatrix:
    """Map a Bloch vector to its density matrix.

    Raises:
        NonphysicalStateError: if ``|r| > 1 + 1e-9``.
    """
    if r.norm > 1.0 + TOL.physics_drift:
        raise NonphysicalStateError(f"Bloch vector norm {r.norm:.12g} exceeds 1")
    return DensityMatrix(bloch_to_density_array(r.as_array()))


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    return rho.bloch()


# --------------------------------------------------
# Distances
# --------------------------------------------------


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """D = (1/2) tr|rho1 - rho2|, from the eigenvalues +-mu of the traceless difference."""
    delta = rho1.entries - rho2.entries
    mu = np.hypot(0.5 * (delta[0, 0].real - delta[1, 1].real), abs(delta[0, 1]))
    return float(min(mu, 1.0))


def trace_distance_bloch(r1: BlochVector, r2: BlochVector) -> float:
    return 0.5 * float(np.linalg.norm(r1.as_array() - r2.as_array()))


def fidelity_and_bures(psi0: PureState, rho_tau: DensityMatrix) -> Tuple[float, float]:
    """Fidelity <psi0|rho|psi0> and Bures angle arccos(sqrt(F))."""
    ket = psi0.ket
    fidelity = float(np.clip(np.real(ket.conj() @ rho_tau.entries @ ket), 0.0, 1.0))
    return fidelity, float(np.arccos(np.sqrt(fidelity)))


# --------------------------------------------------
# Norms
# --------------------------------------------------


def singular_values_array(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form singular values (s1 >= s2) of 2x2 matrices over leading axes.

    Writes M = m0 I + m.sigma with complex coefficients. Then
    s1^2 + s2^2 = 2(|m0|^2 + |m|^2), s1 s2 = |m0^2 - m.m| and
    s1^2 - s2^2 = 2|2 Re(m0* m) + i m* x m|, which keeps the degenerate
    pair of a Hermitian traceless input exact.
    """
    m = np.asarray(m, dtype=complex)
    m0 = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    mx = 0.5 * (m[..., 0, 1] + m[..., 1, 0])
    my = 0.5j * (m[..., 0, 1] - m[..., 1, 0])
    mz = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    vec = np.stack([mx, my, mz], axis=-1)

    alpha = np.abs(m0) ** 2 + np.sum(np.abs(vec) ** 2, axis=-1)
    det = m0**2 - np.sum(vec * vec, axis=-1)
    beta = 2.0 * np.real(np.conj(m0)[..., None] * vec) + np.real(1j * np.cross(np.conj(vec), vec))

    s_sum = np.sqrt(2.0 * alpha + 2.0 * np.abs(det))
    with np.errstate(invalid="ignore", divide="ignore"):
        s_diff = np.where(s_sum > 0.0, 2.0 * np.linalg.norm(beta, axis=-1) / s_sum, 0.0)
    s1 = 0.5 * (s_sum + s_diff)
    s2 = np.maximum(0.5 * (s_sum - s_diff), 0.0)
    return s1, s2


def norm_triple_array(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    s1, s2 = singular_values_array(m)
    return s1, s1 + s2, np.hypot(s1, s2)


def norm_triple(m: np.ndarray) -> NormTriple:
    """Operator, trace and Hilbert-Schmidt norm of any 2x2 complex matrix."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"norm_triple expects a 2x2 matrix, got shape {m.shape}")
    op, tr, hs = norm_triple_array(m)
    return NormTriple(op=float(op), tr=float(tr), hs=float(hs))


def fibonacci_sphere(count: int) -> np.ndarray:
    """Deterministic, nearly uniform unit vectors (count, 3)."""
    if count < 1:
        raise ValueError("count must be positive")
    index = np.arange(count) + 0.5
    z = 1.0 - 2.0 * index / count
    radial = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * index
    return np.stack([radial * np.cos(phi), radial * np.sin(phi), z], axis=-1)
