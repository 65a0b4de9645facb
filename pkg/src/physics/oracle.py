"""
Explicit density-matrix dephasing model, used to check the coherence-factor
tracker. Qubit 0 is the most significant bit of the basis index.
"""

from functools import reduce
from typing import Sequence

import numpy as np

from .dephasing import dephase_prob

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
BELL_BASIS = (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)


def _on_qubit(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return reduce(np.kron, [op if k == qubit else I2 for k in range(n)])


def dephase(rho: np.ndarray, qubit: int, p: float) -> np.ndarray:
    """Phase-flip channel with flip probability p on one qubit."""
    n = int(np.log2(rho.shape[0]))
    z = _on_qubit(Z, qubit, n)
    return (1 - p) * rho + p * (z @ rho @ z)


def dephased_bell_pair(dwell_ns: Sequence[float], T2_ns: float) -> np.ndarray:
    rho = np.outer(PSI_PLUS, PSI_PLUS.conj())
    for qubit, dt in enumerate(dwell_ns):
        rho = dephase(rho, qubit, dephase_prob(dt, T2_ns))
    return rho


def fidelity(rho: np.ndarray, target: np.ndarray = PSI_PLUS) -> float:
    return float(np.real(target.conj() @ rho @ target))


def stored_pair_fidelity(dwell_ns: Sequence[float], T2_ns: float) -> float:
    """Fidelity of |Psi+> after independent dephasing of both qubits."""
    return fidelity(dephased_bell_pair(dwell_ns, T2_ns))


def _measure_middle(rho16: np.ndarray, bell: np.ndarray) -> np.ndarray:
    """Unnormalized state of qubits (0, 3) after projecting qubits (1, 2)
    onto `bell`."""
    proj = np.kron(np.kron(I2, np.outer(bell, bell.conj())), I2)
    post = (proj @ rho16 @ proj).reshape([2] * 8)
    return np.einsum("ijklmjkn->ilmn", post).reshape(4, 4)


def _correction(bell: np.ndarray) -> np.ndarray:
    """Pauli on qubit 3 mapping the ideal post-measurement state to |Psi+>."""
    ideal = np.kron(np.outer(PSI_PLUS, PSI_PLUS.conj()), np.outer(PSI_PLUS, PSI_PLUS.conj()))
    sigma = _measure_middle(ideal, bell)
    sigma = sigma / np.trace(sigma)
    best = max((I2, X, Y, Z), key=lambda P: fidelity(np.kron(I2, P) @ sigma @ np.kron(I2, P).conj().T))
    return np.kron(I2, best)


def swap_fidelity_oracle(dwell_a: Sequence[float], dwell_b: Sequence[float], T2_ns: float) -> float:
    """Fidelity of the pair left by an ideal Bell measurement on the inner
    qubits of two dephased |Psi+> pairs, after Pauli correction.

    Qubit order is (a_end, a_switch, b_switch, b_end).
    """
    rho = np.kron(dephased_bell_pair(dwell_a, T2_ns), dephased_bell_pair(dwell_b, T2_ns))
    out = np.zeros((4, 4), dtype=complex)
    for bell in BELL_BASIS:
        c = _correction(bell)
        out += c @ _measure_middle(rho, bell) @ c.conj().T
    return fidelity(out)
