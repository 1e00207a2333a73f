"""Five-qubit quantum error correction on a linear nearest-neighbour qubit array.

Submodules: ``statevector`` (simulator), ``gates`` and ``canonical`` (gate
set, KAK coordinates, synthesis), ``error_models``, ``qec_circuit`` (encoder,
syndrome table, storage cycle), ``pauli_oracle`` (exact discrete-noise
results), ``experiments`` and ``cli``.
"""

from .canonical import CanonicalClass, canonical_invariants, synthesize_from_interaction
from .error_models import ContinuousModel, DiscreteModel
from .experiments import Evaluator, epsilon_step, estimate_epsilon_final_mc, find_t_opt, single_qubit_baseline
from .pauli_oracle import exact_epsilon_final
from .qec_circuit import derive_syndrome_table, run_cycle
from .statevector import StateVector, prepare_test_state

__version__ = "0.1.0"

__all__ = [
    "CanonicalClass", "ContinuousModel", "Evaluator", "DiscreteModel", "StateVector", "canonical_invariants",
    "derive_syndrome_table", "epsilon_step", "estimate_epsilon_final_mc", "exact_epsilon_final",
    "find_t_opt", "prepare_test_state", "run_cycle", "single_qubit_baseline",
    "synthesize_from_interaction",
]
