"""Noisy distillation and swapping maps on Bell-diagonal pairs.

The maps are obtained by running the protocol circuits on dense density
matrices. Every two-qubit gate is followed by depolarizing noise: with
probability p_G the gate acts perfectly, otherwise the two qubits it touches
are replaced by the maximally mixed state. Single-qubit rotations and
measurements are error free.

Because each circuit is linear in rho_1 (x) rho_2, the output Bell weights are
a bilinear function of the input weights. `distillation_tensor` and
`swap_tensor` tabulate that bilinear form once per gate quality by running the
circuit on the 16 pairs of Bell projectors; the public maps evaluate it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .states import BellCoefficients, bell_basis_matrix, to_density_matrix

MIN_SUCCESS = 1e-15
OFFDIAG_TOL = 1e-10


class DistillationImpossible(ArithmeticError):
    """Raised when a distillation round succeeds with negligible probability."""


@dataclass(frozen=True)
class NoiseParams:
    p_G: float = 1.0
    eta_d: float = 1.0

    def __post_init__(self):
        for name in ("p_G", "eta_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class MapOutcome:
    state: BellCoefficients
    success_prob: float


# --- dense engine ---------------------------------------------------------

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def rx(theta: float) -> np.ndarray:
    """Rotation exp(-i theta X / 2)."""
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * X


def _n_qubits(rho: np.ndarray) -> int:
    n = int(round(np.log2(rho.shape[0])))
    if rho.shape != (2**n, 2**n):
        raise ValueError(f"bad density matrix shape {rho.shape}")
    return n


def check_density_matrix(rho: np.ndarray, atol: float = 1e-12) -> None:
    """Raise ValueError unless `rho` is Hermitian, unit trace and PSD."""
    _n_qubits(rho)
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix has trace {tr}")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix has negative eigenvalues")


def _reorder(full: np.ndarray, order: list[int], n: int) -> np.ndarray:
    """Map an operator written in qubit order `order` back to natural order."""
    t = full.reshape([2] * (2 * n))
    inv = list(np.argsort(order))
    return t.transpose(inv + [n + i for i in inv]).reshape(2**n, 2**n)


def embed(op: np.ndarray, qubits, n: int) -> np.ndarray:
    """Lift an operator on `qubits` to the full n-qubit space."""
    qubits = list(qubits)
    rest = [q for q in range(n) if q not in qubits]
    full = np.kron(op, np.eye(2 ** len(rest)))
    return _reorder(full, qubits + rest, n)


def partial_trace(rho: np.ndarray, traced, n: int) -> np.ndarray:
    """Trace out `traced`; the kept qubits stay in increasing order."""
    traced = sorted(traced)
    kept = [q for q in range(n) if q not in traced]
    t = rho.reshape([2] * (2 * n))
    order = kept + traced
    t = t.transpose(order + [n + q for q in order])
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    return np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))


def apply_unitary(rho: np.ndarray, unitary: np.ndarray, qubits) -> np.ndarray:
    n = _n_qubits(rho)
    U = embed(unitary, qubits, n)
    return U @ rho @ U.conj().T


def depolarize(rho: np.ndarray, qubits) -> np.ndarray:
    """Replace `qubits` by the maximally mixed state."""
    n = _n_qubits(rho)
    qubits = list(qubits)
    rest = [q for q in range(n) if q not in qubits]
    reduced = partial_trace(rho, qubits, n)
    k = len(qubits)
    full = np.kron(np.eye(2**k) / 2**k, reduced)
    return _reorder(full, qubits + rest, n)


def noisy_two_qubit_gate(rho, ideal_unitary, target_pair, p_G: float) -> np.ndarray:
    """Apply a two-qubit gate followed by depolarizing noise on its qubits."""
    q0, q1 = target_pair
    if q0 == q1:
        raise ValueError("target qubits must be distinct")
    check_density_matrix(rho, atol=1e-10)
    ideal = apply_unitary(rho, ideal_unitary, (q0, q1))
    if p_G == 1.0:
        return ideal
    return p_G * ideal + (1.0 - p_G) * depolarize(rho, (q0, q1))


def _measured_block(rho: np.ndarray, outcome: tuple[int, int], measured):
    """Unnormalized state of the other two qubits after projecting `measured`."""
    t = rho.reshape([2] * 8)
    idx: list = [slice(None)] * 8
    for q, m in zip(measured, outcome):
        idx[q] = m
        idx[4 + q] = m
    # remaining axes are the kept qubits in increasing order, rows then columns
    return t[tuple(idx)].reshape(4, 4)


def distillation_circuit(pair1, pair2, p_G: float) -> np.ndarray:
    """Run one recurrence round; return the unnormalized kept 4x4 state.

    Qubits are (A1, B1, A2, B2). Alice rotates her qubits by +pi/2 about X,
    Bob by -pi/2, each side applies a noisy CNOT from pair 1 onto pair 2, and
    pair 2 is measured in the computational basis. Only coinciding outcomes
    are kept. The trace of the returned matrix is the success probability.
    """
    rho = np.kron(to_density_matrix(pair1), to_density_matrix(pair2))
    for q, sign in ((0, 1), (1, -1), (2, 1), (3, -1)):
        rho = apply_unitary(rho, rx(sign * np.pi / 2), (q,))
    rho = noisy_two_qubit_gate(rho, CNOT, (0, 2), p_G)
    rho = noisy_two_qubit_gate(rho, CNOT, (1, 3), p_G)
    return sum(_measured_block(rho, (m, m), (2, 3)) for m in (0, 1))


# Pauli frame fix on Bob's qubit for each (m_H, m_target) Bell-measurement outcome
_SWAP_CORRECTIONS = {
    (0, 0): I2,
    (1, 0): Z,
    (0, 1): X,
    (1, 1): X @ Z,
}


def swap_circuit(left, right, p_G: float) -> np.ndarray:
    """Entanglement swapping; return the 4x4 state of the outer qubits.

    Qubits are (A, C1, C2, B) with `left` on (A, C1) and `right` on (C2, B).
    The middle station applies a noisy CNOT C1 -> C2, a perfect Hadamard on
    C1 and measures both; Bob's qubit is Pauli-corrected per outcome.
    """
    rho = np.kron(to_density_matrix(left), to_density_matrix(right))
    rho = noisy_two_qubit_gate(rho, CNOT, (1, 2), p_G)
    rho = apply_unitary(rho, H, (1,))
    out = np.zeros((4, 4), dtype=complex)
    for outcome, pauli in _SWAP_CORRECTIONS.items():
        block = _measured_block(rho, outcome, (1, 2))
        fix = np.kron(I2, pauli)
        out += fix @ block @ fix.conj().T
    return out


def _bell_diagonal(rho: np.ndarray) -> np.ndarray:
    """Bell weights of a 4x4 operator, asserting it is Bell diagonal."""
    m = bell_basis_matrix(rho)
    off = m - np.diag(np.diag(m))
    if np.abs(off).max() > OFFDIAG_TOL:
        raise AssertionError(f"output not Bell diagonal (off-diagonal {np.abs(off).max():.2e})")
    return np.diag(m).real.copy()


def _basis_state(i: int) -> BellCoefficients:
    w = [0.0] * 4
    w[i] = 1.0
    return BellCoefficients(*w)


def _tabulate(circuit, p_G: float) -> np.ndarray:
    T = np.empty((4, 4, 4))
    for j in range(4):
        for k in range(4):
            T[:, j, k] = _bell_diagonal(circuit(_basis_state(j), _basis_state(k), p_G))
    T[np.abs(T) < 1e-15] = 0.0
    T.setflags(write=False)
    return T


@lru_cache(maxsize=256)
def distillation_tensor(p_G: float) -> np.ndarray:
    """T[i, j, k]: unnormalized output weight i for Bell inputs j (kept) and k."""
    return _tabulate(distillation_circuit, p_G)


@lru_cache(maxsize=256)
def swap_tensor(p_G: float) -> np.ndarray:
    return _tabulate(swap_circuit, p_G)


def _distill(kept: BellCoefficients, sacrificed: BellCoefficients, noise: NoiseParams) -> MapOutcome:
    out = np.einsum("ijk,j,k->i", distillation_tensor(noise.p_G), kept.as_array(), sacrificed.as_array())
    p = float(out.sum())
    if p < MIN_SUCCESS:
        raise DistillationImpossible(f"distillation success probability {p:.3e}")
    return MapOutcome(BellCoefficients.from_weights(out / p), min(p, 1.0))


def deutsch_round(pair1: BellCoefficients, pair2: BellCoefficients, noise: NoiseParams) -> MapOutcome:
    """One recurrence round on two pairs; pair1 is kept on success."""
    return _distill(pair1, pair2, noise)


def pump_round(current: BellCoefficients, elementary: BellCoefficients, noise: NoiseParams) -> MapOutcome:
    """One pumping round: `current` is purified by sacrificing `elementary`."""
    return _distill(current, elementary, noise)


def swap(left: BellCoefficients, right: BellCoefficients, noise: NoiseParams) -> MapOutcome:
    """Entanglement swapping; deterministic before detector losses."""
    out = np.einsum("ijk,j,k->i", swap_tensor(noise.p_G), left.as_array(), right.as_array())
    return MapOutcome(BellCoefficients.from_weights(out), 1.0)


def apply_detector_efficiency(p: float, noise: NoiseParams) -> float:
    """Two-fold click requirement: success probability scales with eta_d**2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return noise.eta_d**2 * p
