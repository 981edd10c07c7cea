"""States and Hamiltonians for the two-cavity ion/flying-atom setup.

Two Hamiltonians live here:

* the dispersive exchange model ``lam (s+^a s-^b + s-^a s+^b)`` between the
  flying atom and one ion, used by the protocol pipeline;
* the full single-cavity model (flying atom, ion, cavity mode, ion motion)
  with the ``cos[eta (a + a^dag)]`` motional factor on the ion coupling, used
  to check the exchange model numerically.

Units: hbar = 1, rates in 1/s, times in s.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .linalg import (
    KET_E,
    KET_G,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    DensityMatrix,
    SpaceLayout,
    ValidationError,
    annihilation,
    dag,
    operator_cosine,
    product_state,
)

# Factor labels.
FLY = "f"
ION1 = "ion1"
ION2 = "ion2"
ION = "ion"
FIELD = "field"
VIB = "vib"

PROTOCOL_LAYOUT = SpaceLayout.qubits(FLY, ION1, ION2)
TWO_ION_LAYOUT = SpaceLayout.qubits(ION1, ION2)

# Truncated thermal/coherent tail weight allowed before renormalization.
TAIL_TOL = 1e-5
DEFAULT_N_FIELD_MAX = 10
DEFAULT_N_VIB_MAX = 2


class TruncationError(ValueError):
    """Fock truncation discards more probability than ``TAIL_TOL``."""


class RegimeWarning(UserWarning):
    """Full-model parameters leave the dispersive / no-sideband regime."""


@dataclass(frozen=True)
class EffectiveParams:
    lambda1: float
    lambda2: float
    tA: float
    tB: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "tA", "tB"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and nonnegative, got {value}")

    @classmethod
    def canonical(cls, transit_time: float = 1.0) -> "EffectiveParams":
        """Equal transit times; couplings tuned so lambda1*tA = pi/4, lambda2*tB = pi/2."""
        return cls(math.pi / 4 / transit_time, math.pi / 2 / transit_time, transit_time, transit_time)

    @property
    def pulse_areas(self) -> tuple[float, float]:
        return self.lambda1 * self.tA, self.lambda2 * self.tB

    def is_canonical(self, tol: float = 1e-12) -> bool:
        a, b = self.pulse_areas
        return abs(a - math.pi / 4) <= tol and abs(b - math.pi / 2) <= tol


@dataclass(frozen=True)
class FullModelParams:
    g_ion: float
    g_fly: float
    delta: float
    nu: float
    eta: float
    n_field_max: int = DEFAULT_N_FIELD_MAX
    n_vib_max: int = DEFAULT_N_VIB_MAX

    def __post_init__(self):
        if self.n_field_max < 1 or self.n_vib_max < 1:
            raise ValidationError("Fock truncations must be >= 1")
        for name in ("g_ion", "g_fly", "nu", "eta"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")

    @classmethod
    def matched(cls, g_fly: float, delta_over_g: float, eta: float, nu_over_delta: float = 10.0, **kw) -> "FullModelParams":
        """Parameters with the motionally averaged ion coupling equal to ``g_fly``."""
        delta = delta_over_g * g_fly
        return cls(g_ion=g_fly * math.exp(eta**2 / 2), g_fly=g_fly, delta=delta, nu=nu_over_delta * delta, eta=eta, **kw)

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout.of((FLY, 2), (ION, 2), (FIELD, self.n_field_max + 1), (VIB, self.n_vib_max + 1))

    @property
    def g_ion_averaged(self) -> float:
        return self.g_ion * math.exp(-self.eta**2 / 2)

    def effective_coupling(self) -> float:
        """Exchange rate predicted for the ion in its motional ground state."""
        return self.g_ion_averaged * self.g_fly / self.delta

    def regime_warnings(self) -> list[str]:
        out = []
        g = max(self.g_ion, self.g_fly)
        if abs(self.delta) < 10 * g:
            out.append(f"not dispersive: |delta| = {abs(self.delta):.4g} < 10 * max coupling = {10 * g:.4g}")
        if abs(self.delta) > self.nu / 10:
            out.append(f"sidebands not suppressed: |delta| = {abs(self.delta):.4g} > nu/10 = {self.nu / 10:.4g}")
        return out


@dataclass(frozen=True)
class FieldStateSpec:
    kind: str  # "fock" | "thermal" | "coherent"
    parameter: float = 0.0
    truncation: int = DEFAULT_N_FIELD_MAX

    def __post_init__(self):
        if self.kind not in ("fock", "thermal", "coherent"):
            raise ValidationError(f"unknown field state kind {self.kind!r}")

    def label(self) -> str:
        p = int(self.parameter) if self.kind == "fock" else self.parameter
        return f"{self.kind}({p})"


def effective_hamiltonian(lam: float, pair: tuple[str, str], layout: SpaceLayout = PROTOCOL_LAYOUT) -> np.ndarray:
    """Exchange Hamiltonian ``lam (s+^a s-^b + s-^a s+^b)`` embedded in ``layout``."""
    a, b = pair
    if a == b:
        raise ValidationError("exchange pair needs two distinct factors")
    for label in pair:
        if layout.dim_of(label) != 2:
            raise ValidationError(f"factor {label!r} is not a qubit")
    h = layout.embed({a: SIGMA_PLUS, b: SIGMA_MINUS})
    return lam * (h + dag(h))


def field_density_matrix(spec: FieldStateSpec) -> np.ndarray:
    n_max = spec.truncation
    n = np.arange(n_max + 1)
    if spec.kind == "fock":
        k = int(spec.parameter)
        if k != spec.parameter or not 0 <= k <= n_max:
            raise TruncationError(f"Fock state {spec.parameter} not representable with n_max = {n_max}")
        rho = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        rho[k, k] = 1.0
        return rho
    if spec.kind == "thermal":
        nbar = float(spec.parameter)
        if nbar < 0:
            raise ValidationError("thermal occupation must be nonnegative")
        if nbar == 0:
            p = (n == 0).astype(float)
            tail = 0.0
        else:
            ratio = nbar / (1 + nbar)
            p = ratio**n / (1 + nbar)
            tail = ratio ** (n_max + 1)
        _check_tail(spec, tail)
        return np.diag(p / p.sum()).astype(complex)
    alpha = complex(spec.parameter)
    mean = abs(alpha) ** 2
    tail = float(poisson.sf(n_max, mean)) if mean > 0 else 0.0
    _check_tail(spec, tail)
    # amplitudes e^{-|a|^2/2} a^n / sqrt(n!), evaluated in log space
    logmag = -mean / 2 + n * (np.log(abs(alpha)) if alpha != 0 else 0.0) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    if alpha == 0:
        amp = (n == 0).astype(complex)
    amp /= np.linalg.norm(amp)
    return np.outer(amp, amp.conj())


def _check_tail(spec: FieldStateSpec, tail: float) -> None:
    if tail > TAIL_TOL:
        raise TruncationError(
            f"{spec.label()} loses {tail:.3e} probability above n_max = {spec.truncation} (limit {TAIL_TOL:g}); raise n_field_max"
        )


def full_hamiltonian(p: FullModelParams, omega_qubit: float, omega_cavity: float | None = None) -> np.ndarray:
    """Single-cavity Hamiltonian on (f, ion, field, vib), Schrodinger picture.

    ``omega_cavity`` defaults to ``omega_qubit + p.delta``.
    """
    if omega_cavity is None:
        omega_cavity = omega_qubit + p.delta
    layout = p.layout
    b = annihilation(p.n_field_max)
    a = annihilation(p.n_vib_max)
    cos_motion = operator_cosine(p.eta * (a + dag(a)))

    h0 = (
        p.nu * layout.embed({VIB: dag(a) @ a})
        + omega_cavity * layout.embed({FIELD: dag(b) @ b})
        + 0.5 * omega_qubit * layout.embed({ION: SIGMA_Z})
        + 0.5 * omega_qubit * layout.embed({FLY: SIGMA_Z})
    )
    fly_term = p.g_fly * layout.embed({FLY: SIGMA_PLUS, FIELD: b})
    ion_term = p.g_ion * layout.embed({ION: SIGMA_PLUS, FIELD: b, VIB: cos_motion})
    h = h0 + fly_term + dag(fly_term) + ion_term + dag(ion_term)
    return 0.5 * (h + dag(h))


def excitation_number(p: FullModelParams) -> np.ndarray:
    """``b^dag b + (sz_f + sz_ion)/2``; conserved by the full model when eta = 0."""
    layout = p.layout
    b = annihilation(p.n_field_max)
    return layout.embed({FIELD: dag(b) @ b}) + 0.5 * (layout.embed({FLY: SIGMA_Z}) + layout.embed({ION: SIGMA_Z}))


def _qubit_ket(value: str) -> np.ndarray:
    if value == "e":
        return KET_E
    if value == "g":
        return KET_G
    raise ValidationError(f"qubit state must be 'e' or 'g', got {value!r}")


def build_initial_state(
    electronic: dict[str, str],
    field_state: FieldStateSpec,
    n_vib_max: int = DEFAULT_N_VIB_MAX,
) -> DensityMatrix:
    """``|electronic><electronic| (x) rho_field (x) |0><0|_vib`` on (f, ion, field, vib)."""
    layout = SpaceLayout.of((FLY, 2), (ION, 2), (FIELD, field_state.truncation + 1), (VIB, n_vib_max + 1))
    vib0 = np.zeros(n_vib_max + 1, dtype=complex)
    vib0[0] = 1.0
    kets = {FLY: _qubit_ket(electronic[FLY]), ION: _qubit_ket(electronic[ION])}
    qubits = product_state(SpaceLayout.qubits(FLY, ION), kets).amplitudes
    rho = np.kron(np.kron(np.outer(qubits, qubits.conj()), field_density_matrix(field_state)), np.outer(vib0, vib0))
    return DensityMatrix(layout, rho)


def protocol_initial_state() -> DensityMatrix:
    """``|e_f, g_1, g_2>``: flying atom excited, both ions in the ground state."""
    return product_state(PROTOCOL_LAYOUT, {FLY: KET_E, ION1: KET_G, ION2: KET_G}).projector()


def bell_state() -> np.ndarray:
    """Target ``(|e1 g2> + |g1 e2>)/sqrt(2)`` on (ion1, ion2)."""
    psi = np.zeros(4, dtype=complex)
    psi[TWO_ION_LAYOUT.basis_index({ION1: 0, ION2: 1})] = 1
    psi[TWO_ION_LAYOUT.basis_index({ION1: 1, ION2: 0})] = 1
    return psi / np.sqrt(2)


def after_cavity_a_state() -> np.ndarray:
    """Reference ``(|e_f g_1> - i |g_f e_1>)/sqrt(2) (x) |g_2>`` on (f, ion1, ion2)."""
    psi = np.zeros(8, dtype=complex)
    psi[PROTOCOL_LAYOUT.basis_index({FLY: 0, ION1: 1, ION2: 1})] = 1
    psi[PROTOCOL_LAYOUT.basis_index({FLY: 1, ION1: 0, ION2: 1})] = -1j
    return psi / np.sqrt(2)


def final_protocol_state() -> np.ndarray:
    """Reference ``|g_f> (x) bell_state()`` (global phase dropped)."""
    return np.kron(KET_G, bell_state())


def warn_regime(p: FullModelParams) -> list[str]:
    msgs = p.regime_warnings()
    for msg in msgs:
        warnings.warn(msg, RegimeWarning, stacklevel=2)
    return msgs
