"""
Density-matrix state of the three-level atom and its vectorized form.

The generator acts on the 9-vector
    (rho11, rho22, rho33, rho12, rho21, rho13, rho31, rho23, rho32)
and that ordering is part of the public contract.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from core.errors import LocalizationError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POPULATION_SLACK = 1e-8

STATE_LABELS: Tuple[str, ...] = (
    "rho11", "rho22", "rho33", "rho12", "rho21", "rho13", "rho31", "rho23", "rho32",
)

# (row, col) of the 3x3 matrix for each vector slot (0-based levels)
STATE_ORDER: Tuple[Tuple[int, int], ...] = (
    (0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1),
)
SLOT: Dict[Tuple[int, int], int] = {ij: k for k, ij in enumerate(STATE_ORDER)}

# slot k holds rho_ij; CONJUGATE_SLOT[k] holds rho_ji
CONJUGATE_SLOT: Tuple[int, ...] = tuple(SLOT[(j, i)] for (i, j) in STATE_ORDER)

POPULATION_SLOTS = (0, 1, 2)

_ROWS = np.array([ij[0] for ij in STATE_ORDER])
_COLS = np.array([ij[1] for ij in STATE_ORDER])


class InvalidState(LocalizationError):
    """A 3x3 matrix failed the density-matrix invariants."""

    code = "invalid_state"


def matrix_to_vector(matrix: np.ndarray) -> np.ndarray:
    """(..., 3, 3) matrices -> (..., 9) vectors in generator order."""
    matrix = np.asarray(matrix, dtype=complex)
    return matrix[..., _ROWS, _COLS]


def vector_to_matrix(vector: np.ndarray) -> np.ndarray:
    """(..., 9) vectors -> (..., 3, 3) matrices."""
    vector = np.asarray(vector, dtype=complex)
    matrix = np.zeros(vector.shape[:-1] + (3, 3), dtype=complex)
    matrix[..., _ROWS, _COLS] = vector
    return matrix


def state_defects(matrix: np.ndarray) -> Dict[str, float]:
    """Hermiticity, trace and diagonal defects of one 3x3 matrix."""
    matrix = np.asarray(matrix, dtype=complex)
    diagonal = np.diag(matrix)
    return {
        "hermiticity": float(np.max(np.abs(matrix - matrix.conj().T))),
        "trace": float(abs(np.trace(matrix) - 1.0)),
        "diagonal_imag": float(np.max(np.abs(diagonal.imag))),
        "population_min": float(np.min(diagonal.real)),
        "population_max": float(np.max(diagonal.real)),
    }


def check_state(matrix: np.ndarray) -> List[str]:
    """List the density-matrix invariants a 3x3 matrix violates."""
    matrix = np.asarray(matrix)
    if matrix.shape != (3, 3):
        return [f"shape must be (3, 3) (got {matrix.shape})"]
    if not np.all(np.isfinite(matrix)):
        return ["entries must be finite"]

    defects = state_defects(matrix)
    problems = []
    if defects["hermiticity"] > HERMITIAN_TOL:
        problems.append(f"not Hermitian (defect {defects['hermiticity']:.3e})")
    if defects["trace"] > TRACE_TOL:
        problems.append(f"trace != 1 (defect {defects['trace']:.3e})")
    if defects["diagonal_imag"] > HERMITIAN_TOL:
        problems.append(f"diagonal not real (defect {defects['diagonal_imag']:.3e})")
    if defects["population_min"] < -POPULATION_SLACK or defects["population_max"] > 1 + POPULATION_SLACK:
        problems.append(
            "populations outside [0, 1] "
            f"(min {defects['population_min']:.3e}, max {defects['population_max']:.3e})"
        )
    return problems


@dataclass(frozen=True)
class DensityMatrix:
    """3x3 complex Hermitian unit-trace state. Validated on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        problems = check_state(matrix)
        if problems:
            raise InvalidState("invalid density matrix: " + "; ".join(problems))
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "DensityMatrix":
        return cls(vector_to_matrix(vector))

    @classmethod
    def diagonal(cls, p1: float, p2: float, p3: float) -> "DensityMatrix":
        return cls(np.diag([p1, p2, p3]).astype(complex))

    def to_vector(self) -> np.ndarray:
        return matrix_to_vector(self.matrix)

    def element(self, i: int, j: int) -> complex:
        """rho_ij with 1-based level labels, as written in the equations."""
        return complex(self.matrix[i - 1, j - 1])

    def populations(self) -> Tuple[float, float, float]:
        diagonal = np.diag(self.matrix).real
        return float(diagonal[0]), float(diagonal[1]), float(diagonal[2])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_physical(self, tol: float = 1e-8) -> bool:
        return bool(np.min(self.eigenvalues()) >= -tol)

    def to_dict(self) -> Dict[str, List[float]]:
        """Real/imag parts per slot, keyed by the generator labels."""
        vector = self.to_vector()
        return {label: [float(v.real), float(v.imag)] for label, v in zip(STATE_LABELS, vector)}
