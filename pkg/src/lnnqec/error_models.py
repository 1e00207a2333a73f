"""Per-qubit, per-time-step noise processes.

Two models act on every qubit at the end of every time step:

* discrete: with probability ``p`` one of X, Z or XZ, each equally likely;
* continuous: a random unitary whose three angles are independent
  ``Normal(0, sigma**2)`` draws.

Letters are encoded as two-bit integers ``(x bit) | (z bit) << 1``, so
``I=0, X=1, Z=2, XZ=3`` and composing two errors (phases dropped) is XOR.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .gates import I2, X, XZ, Z

LETTERS = ("I", "X", "Z", "XZ")
LETTER_CODE = {name: code for code, name in enumerate(LETTERS)}
LETTER_CODE["Y"] = 3
PAULI_MATRICES = np.stack([I2, X, Z, XZ])


@dataclass(frozen=True)
class DiscreteModel:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def name(self) -> str:
        return "discrete"

    @property
    def param(self) -> float:
        return self.p


@dataclass(frozen=True)
class ContinuousModel:
    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def name(self) -> str:
        return "continuous"

    @property
    def param(self) -> float:
        return self.sigma


ErrorModel = Union[DiscreteModel, ContinuousModel]


@dataclass(frozen=True)
class PauliChannelDist:
    """Single-qubit Pauli channel probabilities ``(p_I, p_X, p_Y, p_Z)``.

    ``p_Y`` stands for the XZ error.
    """

    p_i: float
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        probs = self.as_array()
        if np.any(probs < -1e-15) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a probability distribution: {probs}")

    def as_array(self) -> np.ndarray:
        return np.array([self.p_i, self.p_x, self.p_y, self.p_z])

    def by_code(self) -> np.ndarray:
        """Probabilities indexed by letter code (I, X, Z, XZ)."""
        return np.array([self.p_i, self.p_x, self.p_z, self.p_y])

    @classmethod
    def from_codes(cls, probs) -> "PauliChannelDist":
        pi, px, pz, py = (float(v) for v in probs)
        return cls(pi, px, py, pz)

    def error_probability(self) -> float:
        return self.p_x + self.p_y + self.p_z


def convolve(a: PauliChannelDist, b: PauliChannelDist) -> PauliChannelDist:
    """Distribution of the product of two independent Pauli errors (signs ignored)."""
    pa, pb = a.by_code(), b.by_code()
    out = np.zeros(4)
    for i in range(4):
        for j in range(4):
            out[i ^ j] += pa[i] * pb[j]
    return PauliChannelDist.from_codes(out)


def discrete_channel(p: float) -> PauliChannelDist:
    return PauliChannelDist(1.0 - p, p / 3, p / 3, p / 3)


def compose_discrete_steps(p: float, n: int) -> PauliChannelDist:
    """The discrete channel applied ``n`` times.

    ``p_I = 1/4 + (3/4)(1 - 4p/3)**n`` and the three errors share the rest
    equally.  The error mass is evaluated with expm1/log1p so that tiny
    ``p`` and large ``n`` keep full relative precision.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if n == 0:
        return PauliChannelDist(1.0, 0.0, 0.0, 0.0)
    r = 1.0 - 4.0 * p / 3.0
    if r > 0:
        err = -0.75 * np.expm1(n * np.log1p(-4.0 * p / 3.0))
    else:
        err = 0.75 * (1.0 - r**n)
    err = float(err)
    return PauliChannelDist(1.0 - err, err / 3, err / 3, err / 3)


def discrete_codes_from_uniform(u, p: float):
    """Map uniforms in [0, 1) to letter codes: I below ``1 - p``, then X, Z, XZ in thirds."""
    u = np.asarray(u, dtype=float)
    codes = np.zeros(u.shape, dtype=np.int64)
    if p > 0:
        hit = u >= 1.0 - p
        third = np.floor((u - (1.0 - p)) / (p / 3.0)).astype(np.int64)
        codes = np.where(hit, 1 + np.clip(third, 0, 2), 0)
    return codes


def sample_discrete(model: DiscreteModel, rng: np.random.Generator) -> str:
    """Return ``"I"`` (no error), ``"X"``, ``"Z"`` or ``"XZ"``."""
    return LETTERS[int(discrete_codes_from_uniform(rng.random(), model.p))]


def continuous_unitary(alpha: float, beta: float, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [c * np.exp(0.5j * (alpha + beta)), s * np.exp(0.5j * (alpha - beta))],
            [-s * np.exp(0.5j * (-alpha + beta)), c * np.exp(0.5j * (-alpha - beta))],
        ]
    )


def continuous_unitaries(angles: np.ndarray) -> np.ndarray:
    """Vectorised :func:`continuous_unitary` over a ``(..., 3)`` array of (alpha, beta, theta)."""
    alpha, beta, theta = angles[..., 0], angles[..., 1], angles[..., 2]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(angles.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c * np.exp(0.5j * (alpha + beta))
    out[..., 0, 1] = s * np.exp(0.5j * (alpha - beta))
    out[..., 1, 0] = -s * np.exp(0.5j * (beta - alpha))
    out[..., 1, 1] = c * np.exp(-0.5j * (alpha + beta))
    return out


def sample_angles(model: ContinuousModel, rng: np.random.Generator, size=()) -> np.ndarray:
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    return rng.normal(0.0, model.sigma, size=shape + (3,)) if model.sigma > 0 else np.zeros(shape + (3,))


def sample_continuous(model: ContinuousModel, rng: np.random.Generator) -> np.ndarray:
    return continuous_unitary(*sample_angles(model, rng))


def mean_infidelity_quadrature(sigma: float, state=None, order: int = 40) -> float:
    """E[1 - |<psi|U|psi>|^2] for one continuous-model step, by Gauss-Hermite quadrature.

    Deterministic reference for the sampler; ``state`` defaults to the probe
    state (5|0> + 12|1>)/13.
    """
    psi = np.array([5 / 13, 12 / 13], dtype=complex) if state is None else np.asarray(state)
    if sigma == 0:
        return 0.0
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / weights.sum()
    a, b, t = np.meshgrid(nodes * sigma, nodes * sigma, nodes * sigma, indexing="ij")
    w = weights[:, None, None] * weights[None, :, None] * weights[None, None, :]
    U = continuous_unitaries(np.stack([a, b, t], axis=-1))
    amp = np.einsum("i,...ij,j->...", psi.conj(), U, psi)
    return float(np.sum(w * (1.0 - np.abs(amp) ** 2)))
