"""The 5-qubit code on a linear array: circuits, syndrome table, and the full storage cycle.

Layout: the data qubit enters the encoder and leaves the decoder at index 0;
qubits 1..4 are ancillas initialised to |0>.  Syndrome bit ``i`` is the
measured value of ancilla ``i + 1``, written left to right, so after decoding
the basis index of an error-free register is ``data * 16 + int(syndrome, 2)``.

A cycle is 6 encode moments, ``t_wait`` idle moments, 6 decode moments, one
moment measuring all four ancillas and one moment applying the correction to
the data qubit.  Noise acts on all five qubits at the end of every moment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import statevector as sv
from .error_models import (
    LETTER_CODE,
    LETTERS,
    PAULI_MATRICES,
    ContinuousModel,
    DiscreteModel,
    ErrorModel,
    continuous_unitaries,
    discrete_codes_from_uniform,
)
from .gates import inverse_name, is_two_qubit, standard_gate
from .statevector import StateVector

NUM_QUBITS = 5
DATA_INDEX = 0
ANCILLA_INDICES = (1, 2, 3, 4)
ENCODE_DEPTH = 6
OVERHEAD_STEPS = 14  # encode 6 + decode 6 + measure 1 + correct 1
CORRECTIONS = ("I", "X", "Z", "XZ")
CLIFFORD_ALPHABET = frozenset({"I", "H", "S", "SDG", "X", "Y", "Z", "XZ", "CNOT", "SWAP"})
DETERMINISM_TOL = 1e-9

# Depth-6 encoder; two-qubit placements only touch neighbours.
ENCODER_TEXT = """\
# 5-qubit code encoder, data enters on qubit 0
CNOT 0,1; S 2; H 3; S 4
H 0; S 1; H 2; S 3; H 4
CNOT 0,1; CNOT 2,3; S 4
SWAP 1,2; CNOT 3,4
CNOT 0,1; CNOT 2,3; H 4
CNOT 1,2; SWAP 3,4
"""


class CircuitError(ValueError):
    """Structural problem in a circuit (overlap, non-adjacent pair, bad index)."""


class EncoderInvalidError(RuntimeError):
    """The encoder fails the single-error-correction checks."""


@dataclass(frozen=True)
class Placement:
    gate: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gate", self.gate.upper())
        two = is_two_qubit(self.gate)
        if two and len(self.qubits) != 2 or not two and len(self.qubits) != 1:
            raise CircuitError(f"gate {self.gate} placed on {self.qubits}")
        if two and self.qubits[1] != self.qubits[0] + 1:
            raise CircuitError(f"{self.gate} on non-adjacent qubits {self.qubits}")

    def matrix(self) -> np.ndarray:
        return standard_gate(self.gate)

    def inverse(self) -> "Placement":
        return Placement(inverse_name(self.gate), self.qubits)

    def __str__(self) -> str:
        return f"{self.gate} {','.join(str(q) for q in self.qubits)}"


@dataclass(frozen=True)
class Moment:
    placements: tuple[Placement, ...] = ()

    def __post_init__(self):
        seen: set[int] = set()
        for pl in self.placements:
            for q in pl.qubits:
                if q in seen:
                    raise CircuitError(f"qubit {q} used twice in one moment")
                seen.add(q)

    def qubits(self) -> set[int]:
        return {q for pl in self.placements for q in pl.qubits}

    def inverse(self) -> "Moment":
        return Moment(tuple(pl.inverse() for pl in self.placements))

    def __str__(self) -> str:
        return "; ".join(str(pl) for pl in self.placements) or "IDLE"


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    moments: tuple[Moment, ...]

    def __post_init__(self):
        for m in self.moments:
            for q in m.qubits():
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(f"qubit {q} outside a {self.num_qubits}-qubit array")

    @property
    def depth(self) -> int:
        return len(self.moments)

    def inverse(self) -> "Circuit":
        return Circuit(self.num_qubits, tuple(m.inverse() for m in reversed(self.moments)))

    def to_text(self, header: str | None = None) -> str:
        lines = [f"# {header}"] if header else []
        lines += [str(m) for m in self.moments]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, num_qubits: int = NUM_QUBITS) -> "Circuit":
        """Parse the dump format: one moment per line, ``GATE q`` / ``GATE q,q+1``
        tokens separated by ``;``, ``#`` starting a comment, ``IDLE`` for an empty moment."""
        moments = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            placements = []
            if line.upper() != "IDLE":
                for tok in line.split(";"):
                    tok = tok.strip()
                    if not tok:
                        continue
                    try:
                        name, qs = tok.split()
                        qubits = tuple(int(q) for q in qs.split(","))
                    except ValueError:
                        raise CircuitError(f"cannot parse placement {tok!r}") from None
                    placements.append(Placement(name, qubits))
            moments.append(Moment(tuple(placements)))
        return cls(num_qubits, tuple(moments))


def apply_moment(state: StateVector, moment: Moment) -> StateVector:
    for pl in moment.placements:
        if len(pl.qubits) == 1:
            state = sv.apply_1q(state, pl.matrix(), pl.qubits[0])
        else:
            state = sv.apply_2q(state, pl.matrix(), pl.qubits[0], strict_lnn=True)
    return state


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    for m in circuit.moments:
        state = apply_moment(state, m)
    return state


def _apply_moment_batch(amps: np.ndarray, moment: Moment, n: int) -> np.ndarray:
    for pl in moment.placements:
        if len(pl.qubits) == 1:
            amps = sv.apply_1q_batch(amps, pl.matrix(), pl.qubits[0], n)
        else:
            amps = sv.apply_2q_batch(amps, pl.matrix(), pl.qubits[0], n)
    return amps


def build_encoder() -> Circuit:
    return Circuit.from_text(ENCODER_TEXT)


def build_decoder(encoder: Circuit | None = None) -> Circuit:
    """The encoder run backwards with every gate inverted."""
    return (encoder or build_encoder()).inverse()


def inject_error(state: StateVector, pauli: str, q: int) -> StateVector:
    """Apply X, Z or XZ (= X·Z) to qubit ``q``."""
    key = pauli.upper()
    if key not in ("X", "Z", "XZ", "I"):
        raise ValueError(f"unknown error {pauli!r}")
    return sv.apply_1q(state, standard_gate(key), q)


def encoded_input(data: StateVector) -> StateVector:
    return sv.tensor(data, sv.new_basis_state(4, 0))


def syndrome_string(bits: Iterable[int]) -> str:
    return "".join(str(int(b)) for b in bits)


# -- syndrome table -----------------------------------------------------------


@dataclass(frozen=True)
class SyndromeTable:
    """Correction for the data qubit per 4-bit syndrome.

    ``errors`` records which single-qubit error produced each syndrome when
    the table was derived (``"I"`` for none), for reporting only.
    """

    entries: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.entries) != 16 or set(self.entries) != {format(i, "04b") for i in range(16)}:
            raise ValueError("syndrome table must have exactly the 16 four-bit keys")
        if not set(self.entries.values()) <= set(CORRECTIONS):
            raise ValueError(f"corrections must come from {CORRECTIONS}")

    def correction(self, syndrome: str) -> str:
        return self.entries[syndrome]

    def correction_codes(self) -> np.ndarray:
        """Letter code of the correction, indexed by the syndrome integer."""
        return np.array([LETTER_CODE[self.entries[format(i, "04b")]] for i in range(16)])

    def rows(self) -> list[tuple[str, str, str]]:
        return [(s, self.entries[s], self.errors.get(s, "")) for s in sorted(self.entries)]


def single_errors() -> list[tuple[str, int | None]]:
    return [("I", None)] + [(p, q) for q in range(NUM_QUBITS) for p in ("X", "Z", "XZ")]


def _decoded_outcome(data: StateVector, pauli: str, q: int | None, encoder: Circuit, decoder: Circuit):
    state = apply_circuit(encoded_input(data), encoder)
    if q is not None:
        state = inject_error(state, pauli, q)
    return apply_circuit(state, decoder)


def _read_syndrome(state: StateVector) -> str:
    bits = []
    for a in ANCILLA_INDICES:
        p1 = sv.probability_one(state, a)
        if min(p1, 1.0 - p1) > DETERMINISM_TOL:
            raise EncoderInvalidError(f"ancilla {a} outcome is not deterministic (P(1) = {p1:.3e})")
        bits.append(int(p1 > 0.5))
    return syndrome_string(bits)


def _data_after(state: StateVector, syndrome: str) -> StateVector:
    idx = int(syndrome, 2)
    amps = state.amplitudes[[idx, 16 + idx]]
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > 1e-9:
        raise EncoderInvalidError("data qubit is still entangled with the ancillas after decoding")
    return StateVector(1, amps / norm)


def restoring_corrections(
    data: StateVector, encoder: Circuit | None = None
) -> dict[str, tuple[str, int | None, set[str]]]:
    """For each single error: its syndrome and every correction restoring ``data``."""
    encoder = encoder or build_encoder()
    decoder = build_decoder(encoder)
    out = {}
    for pauli, q in single_errors():
        state = _decoded_outcome(data, pauli, q, encoder, decoder)
        syn = _read_syndrome(state)
        if syn in out:
            raise EncoderInvalidError(f"syndrome {syn} produced by two different errors")
        d = _data_after(state, syn)
        ok = {
            c
            for c in CORRECTIONS
            if sv.fidelity(sv.apply_1q(d, standard_gate(c), 0), data) > 1.0 - 1e-9
        }
        out[syn] = (pauli, q, ok)
    return out


def derive_syndrome_table(
    data: StateVector | None = None, encoder: Circuit | None = None
) -> SyndromeTable:
    """Derive the table by simulating every single-qubit error through encode/decode."""
    data = data or sv.prepare_test_state()
    found = restoring_corrections(data, encoder)
    if found.get("0000", (None, None, None))[0] != "I":
        raise EncoderInvalidError("the error-free cycle does not give syndrome 0000")
    if len(found) != 16:
        raise EncoderInvalidError(f"only {len(found)} distinct syndromes")
    entries, errors = {}, {}
    for syn, (pauli, q, ok) in found.items():
        if len(ok) != 1:
            raise EncoderInvalidError(
                f"syndrome {syn}: expected one restoring correction, found {sorted(ok)}"
            )
        entries[syn] = ok.pop()
        errors[syn] = "I" if q is None else f"{pauli}{q}"
    return SyndromeTable(entries, errors)


# Published syndrome table (different encoder): syndrome -> action on the data qubit.
PUBLISHED_TABLE1 = {
    "0000": "I", "0001": "I", "0010": "Z", "0011": "I",
    "0100": "I", "0101": "X", "0110": "Z", "0111": "X",
    "1000": "Z", "1001": "I", "1010": "X", "1011": "X",
    "1100": "Z", "1101": "X", "1110": "XZ", "1111": "Z",
}  # fmt: skip


# -- the storage cycle ---------------------------------------------------------


@dataclass
class CycleResult:
    epsilon_final: float
    syndrome: str
    final_state: StateVector | None = None
    t_wait: int = 0
    trials: int = 1

    @property
    def total_steps(self) -> int:
        return self.t_wait + OVERHEAD_STEPS


@dataclass(frozen=True)
class CycleSchedule:
    """The moment list of one cycle; indices count from 0 at the first encode moment."""

    encoder: Circuit
    decoder: Circuit
    t_wait: int

    @property
    def total_steps(self) -> int:
        return self.encoder.depth + self.t_wait + self.decoder.depth + 2

    @property
    def measure_step(self) -> int:
        return self.total_steps - 2

    @property
    def correct_step(self) -> int:
        return self.total_steps - 1

    def gate_moment(self, step: int) -> Moment | None:
        e, w = self.encoder.depth, self.t_wait
        if step < e:
            return self.encoder.moments[step]
        if step < e + w:
            return Moment()
        if step < e + w + self.decoder.depth:
            return self.decoder.moments[step - e - w]
        return None

    def wait_steps(self) -> range:
        return range(self.encoder.depth, self.encoder.depth + self.t_wait)


def draw_trial_randomness(model: ErrorModel, total_steps: int, rng: np.random.Generator) -> dict:
    """All random numbers one cycle consumes, drawn in a fixed order."""
    if isinstance(model, DiscreteModel):
        noise = rng.random((total_steps, NUM_QUBITS))
    else:
        noise = rng.normal(0.0, model.sigma, size=(total_steps, NUM_QUBITS, 3)) if model.sigma > 0 \
            else np.zeros((total_steps, NUM_QUBITS, 3))
    measure = rng.random(len(ANCILLA_INDICES))
    return {"noise": noise, "measure": measure}


def _noise_gates(model: ErrorModel, noise: np.ndarray) -> np.ndarray:
    """Per-row 2x2 noise unitaries for one qubit and one step; ``noise`` is that slice."""
    if isinstance(model, DiscreteModel):
        return PAULI_MATRICES[discrete_codes_from_uniform(noise, model.p)]
    return continuous_unitaries(noise)


def simulate_cycles(
    data_amps: np.ndarray,
    model: ErrorModel,
    schedule: CycleSchedule,
    table: SyndromeTable,
    noise: np.ndarray,
    measure_uniforms: np.ndarray,
    injections: Sequence[tuple[int, str, int]] = (),
):
    """Run a batch of cycles.

    ``noise`` has shape ``(batch, T, 5)`` (discrete uniforms) or
    ``(batch, T, 5, 3)`` (continuous angles); ``measure_uniforms`` is
    ``(batch, 4)``.  ``injections`` are ``(step, pauli, qubit)`` faults applied
    to every row at the end of ``step``, before that step's model noise.
    Returns ``(syndromes int array, final data amplitudes (batch, 2))``.
    """
    n = NUM_QUBITS
    b = data_amps.shape[0]
    amps = np.zeros((b, 2**n), dtype=complex)
    amps[:, 0] = data_amps[:, 0]
    amps[:, 16] = data_amps[:, 1]
    by_step: dict[int, list] = {}
    for step, pauli, q in injections:
        by_step.setdefault(step, []).append((pauli, q))
    syndromes = np.zeros(b, dtype=np.int64)
    corr_codes = table.correction_codes()
    apply_noise = not (isinstance(model, DiscreteModel) and model.p == 0) and not (
        isinstance(model, ContinuousModel) and model.sigma == 0
    )
    for step in range(schedule.total_steps):
        moment = schedule.gate_moment(step)
        if moment is not None:
            amps = _apply_moment_batch(amps, moment, n)
        elif step == schedule.measure_step:
            for i, a in enumerate(ANCILLA_INDICES):
                bits, amps = sv.measure_batch(amps, a, n, measure_uniforms[:, i])
                syndromes |= bits << (len(ANCILLA_INDICES) - 1 - i)
        else:
            gates = PAULI_MATRICES[corr_codes[syndromes]]
            amps = sv.apply_1q_batch(amps, gates, DATA_INDEX, n)
        for pauli, q in by_step.get(step, ()):
            amps = sv.apply_1q_batch(amps, standard_gate(pauli), q, n)
        if apply_noise:
            for q in range(n):
                amps = sv.apply_1q_batch(amps, _noise_gates(model, noise[:, step, q]), q, n)
    return syndromes, extract_data_batch(amps)


def extract_data_batch(amps: np.ndarray) -> np.ndarray:
    """Pure data-qubit states of a batch whose ancillas have been measured."""
    m = amps.reshape(amps.shape[0], 2, -1)
    rho = np.einsum("bis,bjs->bij", m, m.conj())
    purity = np.real(np.einsum("bij,bji->b", rho, rho))
    if np.any(purity < 1.0 - sv.PURITY_TOL):
        raise RuntimeError(
            f"internal fault: data qubit entangled at extraction (purity {purity.min():.12f})"
        )
    col = np.argmax(np.sum(np.abs(m) ** 2, axis=1), axis=1)
    vec = m[np.arange(m.shape[0]), :, col]
    return vec / np.linalg.norm(vec, axis=1, keepdims=True)


def infidelity_batch(final: np.ndarray, target: np.ndarray) -> np.ndarray:
    overlap = final @ target.conj()
    return np.clip(1.0 - np.abs(overlap) ** 2, 0.0, 1.0)


def run_cycle(
    data: StateVector,
    model: ErrorModel,
    t_wait: int,
    rng: np.random.Generator,
    injections: Sequence[tuple[int, str, int]] = (),
    encoder: Circuit | None = None,
    table: SyndromeTable | None = None,
) -> CycleResult:
    """One encode-wait-decode-measure-correct cycle on a single input state.

    ``injections`` adds deterministic faults ``(step, pauli, qubit)``; use a
    zero-noise model to study them in isolation.
    """
    if t_wait < 0:
        raise ValueError("t_wait must be non-negative")
    if data.num_qubits != 1:
        raise ValueError("the cycle stores a single data qubit")
    encoder = encoder or build_encoder()
    table = table or cached_table()
    schedule = CycleSchedule(encoder, build_decoder(encoder), t_wait)
    draws = draw_trial_randomness(model, schedule.total_steps, rng)
    syn, final = simulate_cycles(
        data.amplitudes[None, :],
        model,
        schedule,
        table,
        draws["noise"][None],
        draws["measure"][None],
        injections,
    )
    eps = float(infidelity_batch(final, data.amplitudes)[0])
    return CycleResult(eps, format(int(syn[0]), "04b"), StateVector(1, final[0]), t_wait)


_TABLE_CACHE: dict = {}


def cached_table() -> SyndromeTable:
    if "table" not in _TABLE_CACHE:
        _TABLE_CACHE["table"] = derive_syndrome_table()
    return _TABLE_CACHE["table"]
