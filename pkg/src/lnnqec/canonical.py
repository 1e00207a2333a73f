"""Canonical (KAK) coordinates of two-qubit gates and synthesis from a fixed interaction.

Every two-qubit unitary can be written ``(V_A ⊗ V_B)^† · U_d · (U_A ⊗ U_B)`` with
``U_d = exp[i(ax XX + ay YY + az ZZ)]``.  The coordinates ``(ax, ay, az)``,
reduced to the chamber ``π/4 ≥ ax ≥ ay ≥ |az|`` (with ``az ≥ 0`` on the
``ax = π/4`` face), label the local-equivalence class of the gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
from scipy.optimize import minimize

from .gates import X, Y, Z
from .statevector import check_unitary

# Bell ("magic") basis: columns are |Φ+>, i|Ψ+>, |Ψ->, i|Φ->
MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / sqrt(2)

BOUNDARY_TOL = 1e-9
XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)
I4 = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class CanonicalClass:
    alpha_x: float
    alpha_y: float
    alpha_z: float

    def __post_init__(self):
        ax, ay, az = self.as_tuple()
        tol = 1e-7
        if not (pi / 4 + tol >= ax >= ay - tol and ay + tol >= abs(az) and ay >= -tol):
            raise ValueError(f"({ax}, {ay}, {az}) is outside the canonical chamber")
        if abs(ax - pi / 4) < BOUNDARY_TOL and az < -tol:
            raise ValueError("alpha_z must be non-negative on the alpha_x = pi/4 face")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha_x, self.alpha_y, self.alpha_z)

    def isclose(self, other: "CanonicalClass", tol: float = 1e-8) -> bool:
        return all(abs(a - b) <= tol for a, b in zip(self.as_tuple(), other.as_tuple()))

    def __str__(self) -> str:
        return "({})".format(", ".join(_angle_str(a) for a in self.as_tuple()))


def _angle_str(a: float) -> str:
    for k in range(-8, 9):
        if abs(a - k * pi / 8) < 1e-9:
            if k == 0:
                return "0"
            num = {1: "", -1: "-"}.get(k // np.gcd(k, 8), str(k // np.gcd(k, 8)))
            den = 8 // np.gcd(k, 8)
            return f"{num}pi" + (f"/{den}" if den != 1 else "")
    return f"{a:.6f}"


def u_d(alpha_x: float, alpha_y: float, alpha_z: float) -> np.ndarray:
    """``exp[i(ax XX + ay YY + az ZZ)]`` in closed form (the three terms commute)."""
    out = I4.copy()
    for a, P in ((alpha_x, XX), (alpha_y, YY), (alpha_z, ZZ)):
        out = out @ (np.cos(a) * I4 + 1j * np.sin(a) * P)
    return out


def reduce_to_chamber(alpha_x: float, alpha_y: float, alpha_z: float) -> CanonicalClass:
    """Map raw coordinates to the chamber representative.

    Uses the local symmetries: shifting any coordinate by π/2, permuting
    coordinates, and flipping the sign of any two coordinates.
    """
    vals = []
    for a in (alpha_x, alpha_y, alpha_z):
        r = a - (pi / 2) * np.floor(a / (pi / 2) + 0.5)  # into [-π/4, π/4)
        if abs(abs(r) - pi / 4) < BOUNDARY_TOL:
            r = pi / 4
        vals.append(float(r))
    negative = sum(1 for v in vals if v < 0) % 2 == 1 and all(v != 0 for v in vals)
    ax, ay, az = sorted((abs(v) for v in vals), reverse=True)
    if negative:
        az = -az
    if abs(ax - pi / 4) < BOUNDARY_TOL:
        ax = pi / 4
        az = abs(az)
    if abs(az) < 1e-15:
        az = 0.0
    return CanonicalClass(ax, ay, az)


def canonical_invariants(U) -> CanonicalClass:
    U = check_unitary(U, 4)
    U = U / np.linalg.det(U) ** 0.25
    um = MAGIC.conj().T @ U @ MAGIC
    eig = np.linalg.eigvals(um.T @ um)
    lam = np.angle(eig) / 2
    lam[3] = -(lam[0] + lam[1] + lam[2])
    # eigenphase combinations of U_d on Φ+, Ψ+, Φ-, Ψ-
    ax = (lam[0] + lam[1]) / 2
    ay = (lam[1] + lam[2]) / 2
    az = (lam[0] + lam[2]) / 2
    return reduce_to_chamber(ax, ay, az)


def is_locally_equivalent(U, V, tol: float = 1e-8) -> bool:
    return canonical_invariants(U).isclose(canonical_invariants(V), tol)


# -- synthesis ----------------------------------------------------------------


def _su2(theta: float, phi: float, lam: float) -> np.ndarray:
    """Rz(phi) Ry(theta) Rz(lam)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [np.exp(-0.5j * (phi + lam)) * c, -np.exp(-0.5j * (phi - lam)) * s],
            [np.exp(0.5j * (phi - lam)) * s, np.exp(0.5j * (phi + lam)) * c],
        ]
    )


def phase_invariant_infidelity(built: np.ndarray, target: np.ndarray) -> float:
    f = abs(np.trace(built.conj().T @ target)) / 4
    return float(min(max(1.0 - f, 0.0), 1.0))


@dataclass
class SynthesisResult:
    layer_count: int
    local_unitaries: list  # [(A_0, B_0), ..., (A_k, B_k)], applied first to last
    residual_infidelity: float
    interaction: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)

    def rebuild(self) -> np.ndarray:
        return build_layered(self.interaction, self.local_unitaries)

    def check(self) -> float:
        return phase_invariant_infidelity(self.rebuild(), self.target)


def build_layered(interaction: np.ndarray, locals_: list) -> np.ndarray:
    """``L_k · W · L_{k-1} · ... · W · L_0`` with ``L_j = A_j ⊗ B_j``."""
    A, B = locals_[0]
    out = np.kron(A, B)
    for A, B in locals_[1:]:
        out = np.kron(A, B) @ interaction @ out
    return out


def _locals_from_params(x: np.ndarray) -> list:
    x = x.reshape(-1, 6)
    return [(_su2(*row[:3]), _su2(*row[3:])) for row in x]


_HALF_Y = -0.5j * Y
_HALF_Z = -0.5j * Z


def _su2_grads(theta: float, phi: float, lam: float) -> list:
    rz_phi = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    rz_lam = np.diag([np.exp(-0.5j * lam), np.exp(0.5j * lam)])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return [
        rz_phi @ (_HALF_Y @ ry) @ rz_lam,
        _HALF_Z @ rz_phi @ ry @ rz_lam,
        rz_phi @ ry @ rz_lam @ _HALF_Z,
    ]


def _cost_and_grad(x: np.ndarray, interaction: np.ndarray, target: np.ndarray):
    rows = x.reshape(-1, 6)
    locs = _locals_from_params(x)
    kr = [np.kron(A, B) for A, B in locs]
    # prefix[j]: everything applied before L_j; suffix[j]: everything after it
    prefix = [I4]
    for j in range(1, len(kr)):
        prefix.append(interaction @ kr[j - 1] @ prefix[-1])
    suffix = [I4] * len(kr)
    for j in range(len(kr) - 2, -1, -1):
        suffix[j] = suffix[j + 1] @ kr[j + 1] @ interaction
    built = kr[-1] @ prefix[-1]
    tdag = target.conj().T
    g = np.trace(tdag @ built)
    mag = abs(g)
    cost = 1.0 - mag / 4
    grad = np.zeros(x.size)
    if mag == 0:
        return cost, grad
    for j, (A, B) in enumerate(locs):
        env = (prefix[j] @ tdag @ suffix[j]).T
        dA = _su2_grads(*rows[j, :3])
        dB = _su2_grads(*rows[j, 3:])
        for k in range(3):
            for off, dl in ((0, np.kron(dA[k], B)), (3, np.kron(A, dB[k]))):
                dg = np.sum(env * dl)
                grad[6 * j + off + k] = -(np.conj(g) * dg).real / (4 * mag)
    return cost, grad


def synthesize_from_interaction(
    target,
    interaction,
    max_layers: int,
    seed: int = 0,
    budget: int = 20_000,
    starts: int = 16,
    success_tol: float = 1e-6,
) -> SynthesisResult:
    """Find the fewest uses of ``interaction`` (dressed by local gates) that build ``target``.

    For each layer count ``k = 1..max_layers`` runs ``starts`` seeded L-BFGS
    refinements over the ``6(k+1)`` local Euler angles, keeping the best by
    (infidelity, start index).  Returns the first ``k`` whose best infidelity is
    below ``success_tol``, else the best result at ``max_layers``.
    """
    target = check_unitary(target, 4)
    interaction = check_unitary(interaction, 4)
    if max_layers < 1:
        raise ValueError("max_layers must be at least 1")
    if canonical_invariants(interaction).isclose(CanonicalClass(0.0, 0.0, 0.0), 1e-9):
        raise ValueError("interaction is not entangling; it cannot generate a nonlocal target")

    result = None
    for layers in range(1, max_layers + 1):
        rng = np.random.default_rng([seed, layers])
        nparam = 6 * (layers + 1)

        best = None
        for start in range(starts):
            x0 = rng.uniform(-pi, pi, nparam)
            if start == 0:
                x0 = np.zeros(nparam)
            res = minimize(
                _cost_and_grad,
                x0,
                args=(interaction, target),
                jac=True,
                method="L-BFGS-B",
                options={"maxfun": budget, "maxiter": budget, "ftol": 1e-16, "gtol": 1e-12},
            )
            val = _cost_and_grad(res.x, interaction, target)[0]
            if best is None or val < best[0]:
                best = (val, res.x)
            if val < 1e-14:
                break  # no later start can beat this by more than rounding
        locals_ = _locals_from_params(best[1])
        built = build_layered(interaction, locals_)
        result = SynthesisResult(
            layers, locals_, phase_invariant_infidelity(built, target), interaction, target
        )
        if result.residual_infidelity < success_tol:
            break
    return result
