"""Two-qubit entanglement measures and teleportation-quality bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ChannelSpec, two_ion_channel_state
from .linalg import SIGMA_Y, DensityMatrix, ValidationError, hermitian_eig, kron
from .model import TWO_ION_LAYOUT

CLAMP_TOL = 1e-10
# eigenvalues of rho below this are treated as exact zeros inside sqrt(rho)
_EIG_FLOOR = 1e-14
ORACLE_SAMPLES = 2000
CLASSICAL_FIDELITY = 2 / 3

_YY = kron(SIGMA_Y, SIGMA_Y)
# Rows are the magic-basis vectors in the computational basis.
_MAGIC = np.array(
    [
        [1, 0, 0, 1],
        [1j, 0, 0, -1j],
        [0, 1j, 1j, 0],
        [0, 1, -1, 0],
    ],
    dtype=complex,
) / math.sqrt(2)


def _as_two_qubit(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValidationError(f"two-qubit density matrix expected, got shape {m.shape}")
    if not isinstance(rho, DensityMatrix):
        DensityMatrix(TWO_ION_LAYOUT, m)
    return m


def _clamp01(x: float) -> float:
    if x < -CLAMP_TOL or x > 1 + CLAMP_TOL:
        raise ValidationError(f"value {x} outside [0, 1] beyond numerical noise")
    return min(max(x, 0.0), 1.0)


def concurrence(rho) -> float:
    """Wootters concurrence.

    Uses the singular values of ``W^T (sy x sy) W`` with ``rho = W W^dag``;
    they equal the square roots of the eigenvalues of ``rho rho~`` without
    square-rooting tiny eigenvalue noise.
    """
    m = _as_two_qubit(rho)
    w, v = hermitian_eig(m)
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    root = v * np.sqrt(w)
    tau = root.T @ _YY @ root
    mu = np.linalg.svd(tau, compute_uv=False)
    return _clamp01(max(0.0, float(mu[0] - mu[1] - mu[2] - mu[3])))


def fully_entangled_fraction(rho) -> float:
    """Largest eigenvalue of the real part of ``rho`` in the magic basis."""
    m = _as_two_qubit(rho)
    in_magic = _MAGIC.conj() @ m @ _MAGIC.T
    w, _ = hermitian_eig(in_magic.real.astype(complex))
    return _clamp01(float(w[0]))


def _su2(params: np.ndarray) -> np.ndarray:
    theta, phi, chi = params[..., 0], params[..., 1], params[..., 2]
    c, s = np.cos(theta), np.sin(theta)
    u = np.empty(params.shape[:-1] + (2, 2), dtype=complex)
    u[..., 0, 0] = c * np.exp(1j * phi)
    u[..., 0, 1] = s * np.exp(1j * chi)
    u[..., 1, 0] = -s * np.exp(-1j * chi)
    u[..., 1, 1] = c * np.exp(-1j * phi)
    return u


def _overlaps(m: np.ndarray, params: np.ndarray) -> np.ndarray:
    # (U x I)|Phi+> has amplitude U[j, i]/sqrt(2) on |j i>
    psi = _su2(params).reshape(params.shape[:-1] + (4,)) / math.sqrt(2)
    return np.einsum("...i,ij,...j->...", psi.conj(), m, psi).real


def fef_bruteforce_oracle(rho, samples: int = ORACLE_SAMPLES, seed: int = 0, refine: int = 4) -> float:
    """Maximize ``<Psi|rho|Psi>`` over ``(U x I)|Phi+>`` by direct search over SU(2).

    Random multi-start over three Euler-type angles, then compass-search
    refinement of the best ``refine`` starts.
    """
    if samples < 1000:
        raise ValidationError("the oracle needs at least 1000 samples")
    m = _as_two_qubit(rho)
    rng = np.random.default_rng(seed)
    starts = rng.uniform([0, -np.pi, -np.pi], [np.pi / 2, np.pi, np.pi], size=(samples, 3))
    values = _overlaps(m, starts)
    best = -np.inf
    directions = np.vstack([np.eye(3), -np.eye(3)])
    for i in np.argsort(values)[::-1][:refine]:
        x, fx, step = starts[i], values[i], 0.25
        while step > 1e-10:
            cand = x + step * directions
            fc = _overlaps(m, cand)
            j = int(np.argmax(fc))
            if fc[j] > fx:
                x, fx = cand[j], fc[j]
            else:
                step /= 2
        best = max(best, fx)
    return _clamp01(float(best))


def teleportation_fidelity(fef: float) -> float:
    """Optimal average teleportation fidelity reachable with LQCC."""
    if not -CLAMP_TOL <= fef <= 1 + CLAMP_TOL:
        raise ValidationError(f"fully entangled fraction must lie in [0, 1], got {fef}")
    return (2 * fef + 1) / 3


@dataclass(frozen=True)
class MetricsReport:
    concurrence: float
    fef: float
    fef_oracle: float
    teleport_fidelity: float
    classical_beaten: bool
    concurrence_closed: float | None = None
    fef_closed: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def metrics_report(rho, samples: int = ORACLE_SAMPLES, seed: int = 0, oracle: bool = True) -> MetricsReport:
    fef = fully_entangled_fraction(rho)
    f = teleportation_fidelity(fef)
    return MetricsReport(
        concurrence=concurrence(rho),
        fef=fef,
        fef_oracle=fef_bruteforce_oracle(rho, samples, seed) if oracle else float("nan"),
        teleport_fidelity=f,
        classical_beaten=fef >= 0.5,
    )


def channel_concurrence(spec: ChannelSpec, model: str = "additive") -> float:
    return spec.coherence_factor(model)


def channel_fef(spec: ChannelSpec, model: str = "additive") -> float:
    return 0.25 * (1 + spec.population_factor() + 2 * spec.coherence_factor(model))


def analytic_channel_metrics(spec: ChannelSpec, model: str = "additive", samples: int = ORACLE_SAMPLES, seed: int = 0) -> MetricsReport:
    """Closed-form metrics next to the spectral and oracle values on the same X-state."""
    rho = two_ion_channel_state(spec, model)
    numeric = metrics_report(rho, samples, seed)
    return MetricsReport(
        concurrence=numeric.concurrence,
        fef=numeric.fef,
        fef_oracle=numeric.fef_oracle,
        teleport_fidelity=numeric.teleport_fidelity,
        classical_beaten=numeric.classical_beaten,
        concurrence_closed=channel_concurrence(spec, model),
        fef_closed=channel_fef(spec, model),
    )


@dataclass(frozen=True)
class BoundResult:
    t_max: float
    distance_max: float | None = None
    closed_form: float | None = None


def closed_form_flight_bound(gamma: float, gamma_p: float, model: str = "additive") -> float | None:
    """Known closed forms for the F = 1/2 crossing, or None if there is none."""
    if gamma <= 0:
        return None
    if model == "additive":
        if gamma_p == 0:
            return math.log(3) / gamma
        if gamma_p == gamma:
            return math.log(2) / gamma
    elif model == "lindblad" and gamma_p == 0:
        # 1 + x + 2 sqrt(x) = 2 with x = exp(-gamma t)
        return 2 * math.log(1 + math.sqrt(2)) / gamma
    return None


def max_flight_time(gamma: float, gamma_p: float, velocity: float | None = None, model: str = "additive") -> BoundResult:
    """Longest flight keeping the fully entangled fraction at or above 1/2."""
    if gamma < 0 or gamma_p < 0:
        raise ValidationError("decay rates must be nonnegative")
    # for gamma = 0 the fraction only tends to 1/2 from above
    if gamma == 0:
        return BoundResult(math.inf, math.inf if velocity is not None else None)

    def excess(t: float) -> float:
        return channel_fef(ChannelSpec(gamma, gamma_p, t), model) - 0.5

    lo, hi = 0.0, 1.0 / gamma
    while excess(hi) > 0:
        lo, hi = hi, 2 * hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    t_max = 0.5 * (lo + hi)
    distance = velocity * t_max if velocity is not None else None
    return BoundResult(t_max, distance, closed_form_flight_bound(gamma, gamma_p, model))
