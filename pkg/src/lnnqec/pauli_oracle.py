"""Exact evaluation of the discrete-noise cycle by Pauli-class propagation.

Under the discrete model every fault is a Pauli and every gate in the cycle
is Clifford, so the register's state is always ``P |codeword>`` for some
Pauli ``P``.  Tracking a probability distribution over the 4**5 sign-free
classes of ``P`` therefore gives the cycle's outcome statistics exactly:

* an ancilla reads 1 after decoding iff its letter has an X component;
* the data qubit ends as ``C·P_data |psi>``, whose infidelity
  ``1 - |<psi|C P_data|psi>|^2`` does not depend on the sign of the Pauli.

Class index: qubit ``q`` occupies bits ``2q`` (x) and ``2q + 1`` (z), matching
the single-qubit letter codes I=0, X=1, Z=2, XZ=3.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import statevector as sv
from .error_models import PauliChannelDist, compose_discrete_steps, discrete_channel
from .qec_circuit import (
    ANCILLA_INDICES,
    CLIFFORD_ALPHABET,
    DATA_INDEX,
    NUM_QUBITS,
    Circuit,
    CycleSchedule,
    Moment,
    SyndromeTable,
    build_decoder,
    build_encoder,
    cached_table,
)

NUM_CLASSES = 4**NUM_QUBITS
_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _CHARS.items()}


@dataclass(frozen=True)
class PauliClass:
    """A five-qubit Pauli with its phase dropped, as x/z bit masks (bit q = qubit q)."""

    x: int
    z: int

    @classmethod
    def from_string(cls, letters: str) -> "PauliClass":
        if len(letters) != NUM_QUBITS:
            raise ValueError(f"need {NUM_QUBITS} letters, got {letters!r}")
        x = z = 0
        for q, ch in enumerate(letters.upper()):
            bx, bz = _BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(x, z)

    @classmethod
    def from_index(cls, index: int) -> "PauliClass":
        x = z = 0
        for q in range(NUM_QUBITS):
            x |= ((index >> (2 * q)) & 1) << q
            z |= ((index >> (2 * q + 1)) & 1) << q
        return cls(x, z)

    @property
    def index(self) -> int:
        i = 0
        for q in range(NUM_QUBITS):
            i |= ((self.x >> q) & 1) << (2 * q) | ((self.z >> q) & 1) << (2 * q + 1)
        return i

    def letter(self, q: int) -> int:
        return ((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)

    def __str__(self) -> str:
        return "".join(_CHARS[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(NUM_QUBITS))


def _conj_gate(x: int, z: int, gate: str, qubits: tuple[int, ...]) -> tuple[int, int]:
    if gate not in CLIFFORD_ALPHABET:
        raise ValueError(f"gate {gate} is not in the Clifford alphabet {sorted(CLIFFORD_ALPHABET)}")
    if gate == "H":
        b = 1 << qubits[0]
        xb, zb = x & b, z & b
        x, z = (x & ~b) | zb, (z & ~b) | xb
    elif gate in ("S", "SDG"):
        b = 1 << qubits[0]
        if x & b:
            z ^= b
    elif gate == "CNOT":
        c, t = qubits
        if (x >> c) & 1:
            x ^= 1 << t
        if (z >> t) & 1:
            z ^= 1 << c
    elif gate == "SWAP":
        a, b = qubits

        def swap_bits(v):
            if ((v >> a) ^ (v >> b)) & 1:
                v ^= (1 << a) | (1 << b)
            return v

        x, z = swap_bits(x), swap_bits(z)
    # Paulis only flip signs
    return x, z


def conjugate_class(c: PauliClass, moment: Moment) -> PauliClass:
    """Sign-free class of ``M P M^dag``."""
    x, z = c.x, c.z
    for pl in moment.placements:
        x, z = _conj_gate(x, z, pl.gate, pl.qubits)
    return PauliClass(x, z)


def moment_permutation(moment: Moment) -> np.ndarray:
    return np.array([conjugate_class(PauliClass.from_index(i), moment).index for i in range(NUM_CLASSES)])


def point_mass(cls: PauliClass | None = None) -> np.ndarray:
    d = np.zeros(NUM_CLASSES)
    d[0 if cls is None else cls.index] = 1.0
    return d


def permute(dist: np.ndarray, perm: np.ndarray) -> np.ndarray:
    out = np.zeros_like(dist)
    out[perm] = dist  # conjugation is a bijection on classes
    return out


def apply_channel(dist: np.ndarray, channel: PauliChannelDist, qubits=range(NUM_QUBITS)) -> np.ndarray:
    """Convolve each listed qubit's letter with an independent Pauli channel."""
    ch = channel.by_code()
    d = dist.reshape((4,) * NUM_QUBITS)
    for q in qubits:
        ax = NUM_QUBITS - 1 - q
        d = np.moveaxis(d, ax, 0)
        d = np.stack([sum(ch[a ^ b] * d[b] for b in range(4)) for a in range(4)])
        d = np.moveaxis(d, 0, ax)
    return d.reshape(NUM_CLASSES)


class CycleOracle:
    """Exact discrete-model statistics for one encoder/table pair."""

    def __init__(self, encoder: Circuit | None = None, table: SyndromeTable | None = None, data=None):
        self.encoder = encoder or build_encoder()
        self.decoder = build_decoder(self.encoder)
        self.table = table or cached_table()
        self._enc = [moment_permutation(m) for m in self.encoder.moments]
        self._dec = [moment_permutation(m) for m in self.decoder.moments]
        data = sv.prepare_test_state() if data is None else data
        self.weights = letter_weights(data)
        idx = np.arange(NUM_CLASSES)
        syn = np.zeros(NUM_CLASSES, dtype=np.int64)
        for i, a in enumerate(ANCILLA_INDICES):
            syn |= ((idx >> (2 * a)) & 1) << (len(ANCILLA_INDICES) - 1 - i)
        self.syndrome_of = syn
        data_letter = (idx >> (2 * DATA_INDEX)) & 3
        self.residual_of = data_letter ^ self.table.correction_codes()[syn]
        self._encoded: dict[float, np.ndarray] = {}

    def schedule(self, t_wait: int) -> CycleSchedule:
        return CycleSchedule(self.encoder, self.decoder, t_wait)

    def after_encode(self, p: float) -> np.ndarray:
        if p in self._encoded:
            return self._encoded[p]
        ch = discrete_channel(p)
        d = point_mass()
        for perm in self._enc:
            d = apply_channel(permute(d, perm), ch)
        if len(self._encoded) > 64:
            self._encoded.clear()
        self._encoded[p] = d
        return d

    def after_decode(self, p: float, t_wait: int, start: np.ndarray | None = None) -> np.ndarray:
        """Distribution entering the measure moment.

        The ``t_wait`` idle moments carry no gates, so their noise collapses to
        one per-qubit application of the ``t_wait``-fold composed channel.
        """
        d = self.after_encode(p) if start is None else start
        d = apply_channel(d, compose_discrete_steps(p, t_wait))
        ch = discrete_channel(p)
        for perm in self._dec:
            d = apply_channel(permute(d, perm), ch)
        return d

    def residual_distribution(self, p: float, t_wait: int, start=None) -> np.ndarray:
        """Letter distribution (I, X, Z, XZ) of the data qubit's leftover error at the end."""
        d = self.after_decode(p, t_wait, start)
        res = np.bincount(self.residual_of, weights=d, minlength=4)
        # data noise from the measure and correct moments; ancilla noise there is never read
        final = np.zeros(4)
        ch = compose_discrete_steps(p, 2).by_code()
        for a in range(4):
            for b in range(4):
                final[a ^ b] += res[a] * ch[b]
        return final

    def epsilon_final(self, p: float, t_wait: int, start=None) -> float:
        return float(self.residual_distribution(p, t_wait, start) @ self.weights)

    def epsilon_final_curve(self, p: float, t_waits) -> np.ndarray:
        start = self.after_encode(p)
        return np.array([self.epsilon_final(p, int(t), start) for t in t_waits])

    def syndrome_distribution(self, p: float, t_wait: int) -> dict[str, float]:
        d = self.after_decode(p, t_wait)
        probs = np.bincount(self.syndrome_of, weights=d, minlength=16)
        return {format(s, "04b"): float(probs[s]) for s in range(16)}


def letter_weights(data: sv.StateVector) -> np.ndarray:
    """Infidelity ``1 - |<psi|P|psi>|^2`` for P = I, X, Z, XZ."""
    from .error_models import PAULI_MATRICES

    psi = data.amplitudes
    return np.array([1.0 - abs(np.vdot(psi, P @ psi)) ** 2 for P in PAULI_MATRICES])


def evolve(dist: np.ndarray, schedule: CycleSchedule, p: float) -> np.ndarray:
    """Propagate a class distribution through encode, wait and decode moments.

    Conjugation by each moment alternates with per-qubit discrete noise,
    mirroring the state-vector cycle up to (not including) the measure moment.
    """
    ch = discrete_channel(p)
    d = np.asarray(dist, dtype=float)
    for step in range(schedule.measure_step):
        moment = schedule.gate_moment(step)
        if moment.placements:
            d = permute(d, moment_permutation(moment))
        d = apply_channel(d, ch)
    return d


@lru_cache(maxsize=4)
def default_oracle() -> CycleOracle:
    return CycleOracle()


def exact_epsilon_final(p: float, t_wait: int) -> float:
    return default_oracle().epsilon_final(p, t_wait)


def exact_syndrome_distribution(p: float, t_wait: int) -> dict[str, float]:
    return default_oracle().syndrome_distribution(p, t_wait)
