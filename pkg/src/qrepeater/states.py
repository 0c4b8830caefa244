"""Bell-diagonal two-qubit states and their QKD error rates.

Coefficient order is (phi+, phi-, psi+, psi-). The first qubit of every pair
belongs to Alice, the second to Bob.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
NORM_REJECT = 1e-6


@dataclass(frozen=True)
class BellCoefficients:
    """Weights of the four Bell projectors in a Bell-diagonal state."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d)
        if not min(vals) >= -NORM_TOL:  # also catches NaN
            raise ValueError(f"invalid Bell coefficients {vals}")
        total = self.a + self.b + self.c + self.d
        if not abs(total - 1.0) <= NORM_TOL:
            raise ValueError(f"Bell coefficients sum to {total!r}, not 1")

    @classmethod
    def from_weights(cls, weights) -> "BellCoefficients":
        """Build from a possibly slightly drifted 4-vector.

        Tiny negative entries are clipped and the vector is renormalized when
        the sum drifts by more than 1e-12; drift above 1e-6 is an error.
        """
        w = [float(x) for x in weights]
        if len(w) != 4:
            raise ValueError("expected four Bell weights")
        if min(w) < -NORM_REJECT:
            raise ValueError(f"negative Bell weight {w}")
        w = [x if x > 0.0 else 0.0 for x in w]
        total = w[0] + w[1] + w[2] + w[3]
        if abs(total - 1.0) > NORM_REJECT:
            raise ValueError(f"Bell weights sum to {total!r}")
        if abs(total - 1.0) > NORM_TOL:
            w = [x / total for x in w]
        return cls(*w)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def fidelity(self) -> float:
        return self.a

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


def _check_fidelity(F: float) -> float:
    F = float(F)
    if not 0.0 <= F <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {F}")
    return F


def depolarized(F: float) -> BellCoefficients:
    """Werner state with fidelity `F`; the remaining weight is spread evenly."""
    F = _check_fidelity(F)
    rest = (1.0 - F) / 3.0
    return BellCoefficients(F, rest, rest, rest)


def binary(F: float) -> BellCoefficients:
    """Mixture of phi+ (weight `F`) and phi- only."""
    F = _check_fidelity(F)
    return BellCoefficients(F, 1.0 - F, 0.0, 0.0)


INPUT_STATES = {"depolarized": depolarized, "binary": binary}


def input_state(kind: str, F: float) -> BellCoefficients:
    try:
        return INPUT_STATES[kind](F)
    except KeyError:
        raise ValueError(f"unknown input state {kind!r}") from None


def fidelity(s: BellCoefficients) -> float:
    """Overlap with phi+."""
    return s.a


def error_rates(s: BellCoefficients) -> tuple[float, float, float]:
    """Return (e_X, e_Y, e_Z).

    An error is an outcome that breaks the phi+ correlation pattern: equal
    results in X and Z, opposite results in Y.
    """
    return (s.b + s.d, s.b + s.c, s.c + s.d)


# --- dense representations, used by the circuit engine and the test oracles ---

_S = 1.0 / np.sqrt(2.0)
BELL_VECTORS = np.array(
    [
        [_S, 0, 0, _S],  # phi+
        [_S, 0, 0, -_S],  # phi-
        [0, _S, _S, 0],  # psi+
        [0, _S, -_S, 0],  # psi-
    ],
    dtype=complex,
)


def to_density_matrix(s: BellCoefficients) -> np.ndarray:
    """4x4 density matrix sum_i w_i |Bell_i><Bell_i|."""
    w = s.as_array()
    return np.einsum("i,ij,ik->jk", w, BELL_VECTORS, BELL_VECTORS.conj())


def bell_basis_matrix(rho: np.ndarray) -> np.ndarray:
    """Express a 4x4 operator in the Bell basis, rows/cols in coefficient order."""
    return BELL_VECTORS.conj() @ rho @ BELL_VECTORS.T
