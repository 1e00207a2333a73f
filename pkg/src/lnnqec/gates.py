"""Named gate matrices.

Two-qubit matrices use the basis order ``|00>, |01>, |10>, |11>`` where the
first bit is the lower qubit index, so CNOT's control is the lower index.
"""

from __future__ import annotations

import re

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG = S.conj().T
XZ = X @ Z

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

_FIXED = {
    "I": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "H": H,
    "S": S,
    "SDG": SDG,
    "XZ": XZ,
    "CNOT": CNOT,
    "SWAP": SWAP,
}

# gate name -> name of its inverse, for the fixed gates
INVERSES = {
    "I": "I",
    "X": "X",
    "Y": "Y",
    "Z": "Z",
    "H": "H",
    "S": "SDG",
    "SDG": "S",
    "XZ": "XZ",
    "CNOT": "CNOT",
    "SWAP": "SWAP",
}

TWO_QUBIT = frozenset({"CNOT", "SWAP"})

_ROT = re.compile(r"^(RX|RZ)\((.+)\)$")


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _parse_angle(text: str) -> float:
    expr = text.strip().lower().replace(" ", "")
    if not re.fullmatch(r"[0-9.e+\-*/pi]+", expr):
        raise ValueError(f"cannot parse angle {text!r}")
    return float(eval(expr, {"__builtins__": {}}, {"pi": np.pi}))


def standard_gate(name: str, theta: float | None = None) -> np.ndarray:
    """Return the matrix for a gate name.

    Accepts the fixed names (``I X Y Z H S SDG XZ CNOT SWAP``) and the
    rotations ``Rx``/``Rz``, either as ``standard_gate("Rz", theta)`` or as the
    string form ``"Rz(pi/2)"``.  ``XZ`` is the product X.Z.
    """
    key = name.strip().upper()
    if key in _FIXED:
        if theta is not None:
            raise ValueError(f"gate {name} takes no angle")
        return _FIXED[key].copy()
    m = _ROT.match(key.replace(" ", ""))
    if m:
        key, theta = m.group(1), _parse_angle(m.group(2))
    if key in ("RX", "RZ"):
        if theta is None:
            raise ValueError(f"gate {name} needs an angle")
        return rx(theta) if key == "RX" else rz(theta)
    raise ValueError(f"unknown gate {name!r}")


def is_two_qubit(name: str) -> bool:
    return name.upper() in TWO_QUBIT


def inverse_name(name: str) -> str:
    try:
        return INVERSES[name.upper()]
    except KeyError:
        raise ValueError(f"no inverse registered for gate {name!r}") from None
