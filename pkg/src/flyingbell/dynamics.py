"""Unitary cavity passages, the noisy flight channel and the protocol pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    POSITIVITY_TOL,
    SIGMA_MINUS,
    SIGMA_Z,
    DensityMatrix,
    SpaceLayout,
    ValidationError,
    dag,
    expm_hermitian_generator,
    partial_trace,
)
from .model import (
    FLY,
    ION1,
    ION2,
    PROTOCOL_LAYOUT,
    TWO_ION_LAYOUT,
    EffectiveParams,
    after_cavity_a_state,
    bell_state,
    effective_hamiltonian,
    protocol_initial_state,
)

DEFAULT_STEPS = 2000
TRACE_DRIFT_TOL = 1e-9
NEGATIVITY_TOL = 1e-6
MODES = ("ideal", "analytic-noisy", "numeric-noisy")

# How the flight channel's coherence decays:
#   "lindblad": exact solution of the amplitude+phase damping master equation,
#               coherence rate gamma/2 + gamma_p.
#   "additive": coherence rate gamma + gamma_p, the closed form behind the
#               quoted concurrence/FEF/bound formulas. Equals the master
#               equation with dephasing rate gamma_p + gamma/2.
COHERENCE_MODELS = ("lindblad", "additive")


class IntegrationError(RuntimeError):
    """Numerical integration drifted outside the density-matrix invariants."""


@dataclass(frozen=True)
class ChannelSpec:
    gamma: float = 0.0
    gamma_p: float = 0.0
    t_flight: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "gamma_p", "t_flight"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and nonnegative, got {value}")

    def population_factor(self) -> float:
        return math.exp(-self.gamma * self.t_flight)

    def coherence_factor(self, model: str = "lindblad") -> float:
        if model == "lindblad":
            return math.exp(-(0.5 * self.gamma + self.gamma_p) * self.t_flight)
        if model == "additive":
            return math.exp(-(self.gamma + self.gamma_p) * self.t_flight)
        raise ValidationError(f"unknown coherence model {model!r}; expected one of {COHERENCE_MODELS}")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on column-stacked density matrices."""

    layout: SpaceLayout
    matrix: np.ndarray

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.layout.dim
        return unvec(self.matrix @ vec(rho), d)


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    mode: str
    state_after_A: DensityMatrix
    state_after_flight: DensityMatrix
    state_after_B: DensityMatrix
    final_two_ion_state: DensityMatrix
    checkpoints: list[tuple[str, float]]

    def checkpoint(self, label: str) -> float:
        return dict(self.checkpoints)[label]


def vec(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


def evolve_unitary(state: DensityMatrix, h: np.ndarray, t: float) -> DensityMatrix:
    h = np.asarray(h, dtype=complex)
    if h.shape != state.matrix.shape:
        raise ValidationError(f"Hamiltonian shape {h.shape} does not match state dimension {state.matrix.shape}")
    if t == 0:
        return state
    u = expm_hermitian_generator(h, t)
    return DensityMatrix(state.layout, u @ state.matrix @ dag(u), check=state.check)


def _dissipator(c: np.ndarray) -> np.ndarray:
    # vec(A X B) = (B^T kron A) vec(X)
    d = c.shape[0]
    eye = np.eye(d)
    cdc = dag(c) @ c
    return np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)


def lindblad_superoperator(spec: ChannelSpec, target: str = FLY, layout: SpaceLayout = PROTOCOL_LAYOUT) -> Superoperator:
    """Amplitude damping (rate gamma) plus sigma_z dephasing (gamma_p/2 prefactor) on ``target``."""
    if layout.dim_of(target) != 2:
        raise ValidationError(f"damping target {target!r} is not a qubit")
    lower = layout.embed({target: SIGMA_MINUS})
    sz = layout.embed({target: SIGMA_Z})
    gen = spec.gamma * _dissipator(lower) + 0.5 * spec.gamma_p * (np.kron(sz.conj(), sz) - np.eye(layout.dim**2))
    return Superoperator(layout, gen)


def integrate_master_equation(rho0: DensityMatrix, gen: Superoperator, t: float, dt: float | None = None) -> DensityMatrix:
    """Fixed-step classical RK4 for ``d rho/dt = L[rho]``.

    ``dt`` defaults to ``t / 2000``; the step is shrunk so an integer number of
    steps lands exactly on ``t``.
    """
    if t < 0:
        raise ValidationError("integration time must be nonnegative")
    if t == 0:
        return rho0
    if dt is None:
        dt = t / DEFAULT_STEPS
    if not dt > 0:
        raise ValidationError("dt must be positive")
    n = max(1, math.ceil(t / dt - 1e-9))
    h = t / n
    # RK4 on an autonomous linear system is the degree-4 Taylor polynomial of h*L
    hl = h * gen.matrix
    step = np.eye(hl.shape[0], dtype=complex)
    term = step
    for k in range(1, 5):
        term = term @ hl / k
        step = step + term
    v = vec(rho0.matrix).astype(complex)
    v = np.linalg.matrix_power(step, n) @ v
    d = rho0.layout.dim
    rho = unvec(v, d)
    rho = 0.5 * (rho + dag(rho))
    drift = abs(np.trace(rho) - np.trace(rho0.matrix))
    if drift > TRACE_DRIFT_TOL:
        raise IntegrationError(f"trace drifted by {drift:.3e} over {n} steps; use a smaller dt")
    wmin = np.linalg.eigvalsh(rho)[0]
    if wmin < -NEGATIVITY_TOL:
        raise IntegrationError(f"negative eigenvalue {wmin:.3e} after integration; use a smaller dt")
    return DensityMatrix(rho0.layout, rho, check=wmin >= -POSITIVITY_TOL)


def analytic_channel_output(spec: ChannelSpec, model: str = "lindblad") -> DensityMatrix:
    """Closed-form (f, ion1, ion2) state after the flight, starting from the post-cavity-A state."""
    pop = spec.population_factor()
    coh = spec.coherence_factor(model)
    idx = PROTOCOL_LAYOUT.basis_index
    eg = idx({FLY: 0, ION1: 1, ION2: 1})
    ge = idx({FLY: 1, ION1: 0, ION2: 1})
    gg = idx({FLY: 1, ION1: 1, ION2: 1})
    rho = np.zeros((8, 8), dtype=complex)
    rho[ge, ge] = 0.5
    rho[eg, eg] = 0.5 * pop
    rho[gg, gg] = 0.5 * (1 - pop)
    rho[ge, eg] = -0.5j * coh
    rho[eg, ge] = 0.5j * coh
    return DensityMatrix(PROTOCOL_LAYOUT, rho)


def two_ion_channel_state(spec: ChannelSpec, model: str = "lindblad") -> DensityMatrix:
    """Closed-form two-ion state at the end of the noisy protocol (an X-state)."""
    pop = spec.population_factor()
    coh = spec.coherence_factor(model)
    idx = TWO_ION_LAYOUT.basis_index
    eg = idx({ION1: 0, ION2: 1})
    ge = idx({ION1: 1, ION2: 0})
    gg = idx({ION1: 1, ION2: 1})
    rho = np.zeros((4, 4), dtype=complex)
    rho[eg, eg] = 0.5
    rho[ge, ge] = 0.5 * pop
    rho[gg, gg] = 0.5 * (1 - pop)
    rho[eg, ge] = rho[ge, eg] = 0.5 * coh
    return DensityMatrix(TWO_ION_LAYOUT, rho)


def _flight(state: DensityMatrix, spec: ChannelSpec, mode: str, model: str, dt: float | None) -> DensityMatrix:
    if mode == "ideal":
        return state
    if mode == "analytic-noisy":
        return analytic_channel_output(spec, model)
    return integrate_master_equation(state, lindblad_superoperator(spec), spec.t_flight, dt)


def run_protocol(
    eff: EffectiveParams,
    spec: ChannelSpec | None = None,
    mode: str = "ideal",
    model: str = "lindblad",
    dt: float | None = None,
) -> ProtocolResult:
    """Cavity A exchange, flight, cavity B exchange, then trace out the flying atom.

    ``analytic-noisy`` substitutes the closed-form flight output, which assumes
    the canonical pulse in cavity A; ``numeric-noisy`` integrates the master
    equation from whatever state cavity A produced.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
    spec = spec or ChannelSpec()
    rho = protocol_initial_state()
    after_a = evolve_unitary(rho, effective_hamiltonian(eff.lambda1, (FLY, ION1)), eff.tA)
    after_flight = _flight(after_a, spec, mode, model, dt)
    after_b = evolve_unitary(after_flight, effective_hamiltonian(eff.lambda2, (FLY, ION2)), eff.tB)
    final = partial_trace(after_b, {ION1, ION2})
    fly = partial_trace(after_b, {FLY})
    checkpoints = [
        ("after_A", after_a.fidelity_to_pure(after_cavity_a_state())),
        ("fly_ground", float(fly.matrix[1, 1].real)),
        ("fly_purity", fly.purity()),
        ("bell", final.fidelity_to_pure(bell_state())),
    ]
    return ProtocolResult(mode, after_a, after_flight, after_b, final, checkpoints)
