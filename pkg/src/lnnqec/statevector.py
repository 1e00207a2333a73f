"""Dense pure-state simulator for small linear qubit arrays.

Qubit 0 is the most significant bit of the basis index, so the amplitude of
``|q0 q1 ... q(n-1)>`` lives at index ``q0 * 2**(n-1) + ... + q(n-1)``.

The single-state operations return new :class:`StateVector` objects.  The
``*_batch`` kernels work on raw ``(batch, 2**n)`` arrays and are what the
Monte Carlo cycle uses; every kernel is elementwise per batch row, so a row's
result never depends on how many other rows share the batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 12
NORM_TOL = 1e-9
UNITARY_TOL = 1e-6
PURITY_TOL = 1e-9


class NotUnitaryError(ValueError):
    """A gate matrix failed the unitarity check."""


class EntangledQubitError(ValueError):
    """Raised by :func:`extract_qubit` when the qubit is not in a product state."""

    def __init__(self, qubit: int, purity: float):
        super().__init__(
            f"qubit {qubit} is entangled with the rest of the register "
            f"(reduced-state purity {purity:.12f})"
        )
        self.qubit = qubit
        self.purity = purity


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got shape {amps.shape}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)


def new_basis_state(num_qubits: int, basis_index: int) -> StateVector:
    dim = 2**num_qubits
    if not 0 <= basis_index < dim:
        raise ValueError(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(dim, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def prepare_test_state() -> StateVector:
    """The probe state (5|0> + 12|1>)/13.

    X and Z errors each leave it with overlap^2 close to 1/2 and an XZ error
    makes it orthogonal, so every error type shows up in the fidelity.
    """
    return StateVector(1, np.array([5 / 13, 12 / 13], dtype=complex))


def tensor(*states: StateVector) -> StateVector:
    amps = np.array([1.0 + 0j])
    for s in states:
        amps = np.kron(amps, s.amplitudes)
    return StateVector(sum(s.num_qubits for s in states), amps)


def check_unitary(gate, size: int, tol: float = UNITARY_TOL) -> np.ndarray:
    g = np.asarray(gate, dtype=complex)
    if g.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got shape {g.shape}")
    err = np.max(np.abs(g @ g.conj().T - np.eye(size)))
    if err > tol:
        raise NotUnitaryError(f"gate is not unitary (max |UU^dag - I| = {err:.3e})")
    return g


def _check_qubit(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise ValueError(f"qubit index {q} out of range for {n} qubits")


# -- batched kernels -------------------------------------------------------


def apply_1q_batch(amps: np.ndarray, gates: np.ndarray, q: int, num_qubits: int) -> np.ndarray:
    """Apply a 2x2 gate to qubit ``q`` of every row of ``amps``.

    ``gates`` is either one 2x2 matrix shared by all rows or a ``(batch, 2, 2)``
    stack with one matrix per row.
    """
    b = amps.shape[0]
    view = amps.reshape(b, 2**q, 2, 2 ** (num_qubits - q - 1))
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    if gates.ndim == 2:
        g00, g01, g10, g11 = gates[0, 0], gates[0, 1], gates[1, 0], gates[1, 1]
    else:
        g00, g01, g10, g11 = (gates[:, i, j, None, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    out = np.empty_like(view)
    out[:, :, 0, :] = g00 * a0 + g01 * a1
    out[:, :, 1, :] = g10 * a0 + g11 * a1
    return out.reshape(b, -1)


def apply_2q_batch(amps: np.ndarray, gate: np.ndarray, q_low: int, num_qubits: int) -> np.ndarray:
    """Apply one shared 4x4 gate to the adjacent pair (q_low, q_low + 1)."""
    b = amps.shape[0]
    view = amps.reshape(b, 2**q_low, 4, 2 ** (num_qubits - q_low - 2))
    out = np.zeros_like(view)
    for i in range(4):
        for j in range(4):
            if gate[i, j] != 0:
                out[:, :, i, :] += gate[i, j] * view[:, :, j, :]
    return out.reshape(b, -1)


def prob_one_batch(amps: np.ndarray, q: int, num_qubits: int) -> np.ndarray:
    b = amps.shape[0]
    view = amps.reshape(b, 2**q, 2, -1)
    return np.sum(np.abs(view[:, :, 1, :]) ** 2, axis=(1, 2))


def measure_batch(amps: np.ndarray, q: int, num_qubits: int, uniforms: np.ndarray):
    """Projectively measure qubit ``q`` in every row.

    Outcome 1 is chosen when ``uniform < P(1)``, so a zero-probability branch is
    never selected.  Returns ``(outcomes, collapsed_amps)``.
    """
    b = amps.shape[0]
    p1 = prob_one_batch(amps, q, num_qubits)
    outcomes = (uniforms < p1).astype(np.int64)
    view = amps.reshape(b, 2**q, 2, -1).copy()
    keep = np.where(outcomes == 1, p1, 1.0 - p1)
    view[outcomes == 1, :, 0, :] = 0
    view[outcomes == 0, :, 1, :] = 0
    view /= np.sqrt(keep)[:, None, None, None]
    return outcomes, view.reshape(b, -1)


# -- single-state API ----------------------------------------------------


def apply_1q(state: StateVector, gate, q: int) -> StateVector:
    g = check_unitary(gate, 2)
    _check_qubit(q, state.num_qubits)
    amps = apply_1q_batch(state.amplitudes[None, :], g, q, state.num_qubits)[0]
    return StateVector(state.num_qubits, amps)


def apply_2q(state: StateVector, gate, q_low: int, strict_lnn: bool = True) -> StateVector:
    """Apply a 4x4 gate to qubits ``(q_low, q_low + 1)``.

    Row/column order of ``gate`` is ``|q_low, q_low+1>`` with ``q_low`` the
    high bit, matching the register convention.  Only adjacent pairs can be
    addressed; ``strict_lnn`` is kept so harness code can assert it.
    """
    if not strict_lnn:
        raise ValueError("non-adjacent two-qubit gates are not supported; strict_lnn must hold")
    g = check_unitary(gate, 4)
    if q_low < 0 or q_low + 1 >= state.num_qubits:
        raise ValueError(
            f"pair ({q_low}, {q_low + 1}) is not inside a {state.num_qubits}-qubit array"
        )
    amps = apply_2q_batch(state.amplitudes[None, :], g, q_low, state.num_qubits)[0]
    return StateVector(state.num_qubits, amps)


def probability_one(state: StateVector, q: int) -> float:
    _check_qubit(q, state.num_qubits)
    return float(prob_one_batch(state.amplitudes[None, :], q, state.num_qubits)[0])


def measure_qubit(state: StateVector, q: int, rng: np.random.Generator) -> tuple[int, StateVector]:
    _check_qubit(q, state.num_qubits)
    u = np.array([rng.random()])
    outcomes, amps = measure_batch(state.amplitudes[None, :], q, state.num_qubits, u)
    return int(outcomes[0]), StateVector(state.num_qubits, amps[0])


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(max(f, 0.0), 1.0))


def reduced_density_matrix(state: StateVector, q: int) -> np.ndarray:
    _check_qubit(q, state.num_qubits)
    m = np.moveaxis(state.amplitudes.reshape((2,) * state.num_qubits), q, 0).reshape(2, -1)
    return m @ m.conj().T


def purity(state: StateVector, q: int) -> float:
    rho = reduced_density_matrix(state, q)
    return float(np.real(np.trace(rho @ rho)))


def extract_qubit(state: StateVector, q: int) -> StateVector:
    """Return the pure state of qubit ``q`` (global phase unspecified).

    Raises :class:`EntangledQubitError` when the reduced state is mixed.
    """
    pur = purity(state, q)
    if pur < 1.0 - PURITY_TOL:
        raise EntangledQubitError(q, pur)
    m = np.moveaxis(state.amplitudes.reshape((2,) * state.num_qubits), q, 0).reshape(2, -1)
    col = m[:, int(np.argmax(np.sum(np.abs(m) ** 2, axis=0)))]
    return StateVector(1, col / np.linalg.norm(col))
