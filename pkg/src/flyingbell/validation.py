"""Numerical check of the dispersive exchange model against the full cavity model.

The full Hamiltonian is diagonalized once; every state on the time grid is then
``V exp(-i E t) V^dag psi0``, so no ODE integration error enters the comparison.
Populations are compared in the product basis, where the free Hamiltonian is
diagonal, so the Schrodinger-picture run can be set against the
interaction-picture exchange model directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import hermitian_eig
from .model import (
    FIELD,
    FLY,
    ION,
    VIB,
    FieldStateSpec,
    FullModelParams,
    build_initial_state,
    full_hamiltonian,
)

FREQ_TOL = 0.05
LEAKAGE_TOL = 1e-3
PEAK_MIN = 0.95
NO_EXCHANGE = 1e-3
COMPONENT_MIN_WEIGHT = 1e-3


@dataclass
class ValidationReport:
    field_state: str
    predicted_coupling: float
    fitted_frequency: float | None
    relative_deviation: float | None
    t_peak: float | None
    peak_transfer: float
    transfer_at_predicted: float
    fock_frequencies: dict[int, float | None]
    fock_spread: float | None
    vib_leakage: float
    field_number_variance: float
    warnings: list[str] = field(default_factory=list)

    @property
    def flags(self) -> dict[str, bool]:
        exchanged = self.fitted_frequency is not None
        return {
            "exchange": exchanged,
            "frequency_within_tol": exchanged and self.relative_deviation <= FREQ_TOL,
            "fock_spread_within_tol": self.fock_spread is not None and self.fock_spread <= FREQ_TOL,
            "vib_leakage_within_tol": self.vib_leakage <= LEAKAGE_TOL,
            "peak_transfer_ok": self.peak_transfer >= PEAK_MIN,
        }

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out["fock_frequencies"] = {str(k): v for k, v in self.fock_frequencies.items()}
        out["flags"] = self.flags
        return out


@dataclass
class _Trajectories:
    ion_excited: np.ndarray
    vib_excited: np.ndarray
    photons: np.ndarray


def default_time_grid(p: FullModelParams, periods: float = 2.0, points_per_detuning_period: int = 16) -> np.ndarray:
    """Uniform grid out to ``periods`` times the predicted transfer time."""
    lam = p.effective_coupling()
    t_end = periods * math.pi / (2 * lam) if lam > 0 else periods * 2 * math.pi / abs(p.delta) * 100
    dt = 2 * math.pi / abs(p.delta) / points_per_detuning_period
    return np.linspace(0.0, t_end, int(math.ceil(t_end / dt)) + 1)


class _Propagator:
    def __init__(self, p: FullModelParams, omega_qubit: float):
        self.p = p
        self.energies, self.vectors = hermitian_eig(full_hamiltonian(p, omega_qubit))
        layout = p.layout
        # product-basis index grids for each factor
        idx = np.indices(layout.dims).reshape(len(layout.dims), -1)
        self.ion_mask = idx[layout.index(ION)] == 0
        self.vib_mask = idx[layout.index(VIB)] > 0
        self.photons = idx[layout.index(FIELD)].astype(float)

    def trajectories(self, kets: list[np.ndarray], weights: list[float], t: np.ndarray) -> _Trajectories:
        ion = np.zeros(t.size)
        vib = np.zeros(t.size)
        nph = np.zeros(t.size)
        phases = np.exp(-1j * np.outer(self.energies, t))
        for ket, w in zip(kets, weights):
            coeffs = self.vectors.conj().T @ ket
            prob = np.abs(self.vectors @ (phases * coeffs[:, None])) ** 2
            ion += w * prob[self.ion_mask].sum(axis=0)
            vib += w * prob[self.vib_mask].sum(axis=0)
            nph += w * (self.photons @ prob)
        return _Trajectories(ion, vib, nph)


def _pure_components(rho: np.ndarray) -> tuple[list[np.ndarray], list[float]]:
    w, v = hermitian_eig(rho)
    keep = w > 1e-14
    return [v[:, i] for i in np.flatnonzero(keep)], list(w[keep])


def locate_first_maximum(t: np.ndarray, signal: np.ndarray, window: int) -> float | None:
    """Time of the first maximum of the slow exchange oscillation.

    A centred moving average over ``window`` samples (one detuning period)
    removes the small fast ripple. The first lobe is the run of samples above
    half the lobe height; a quadratic fitted to its top 20% gives the peak.
    Returns None when the signal never rises or the lobe is cut off by the
    end of the grid.
    """
    window = max(1, int(window) | 1)
    if signal.size < window + 5 or np.max(signal) < NO_EXCHANGE:
        return None
    smooth = np.convolve(signal, np.ones(window) / window, mode="valid")
    ts = t[window // 2 : window // 2 + smooth.size]
    half = 0.5 * smooth.max()
    above = smooth >= half
    start = int(np.argmax(above))
    stop = start + int(np.argmin(above[start:])) if not above[start:].all() else smooth.size
    if stop >= smooth.size:
        return None
    lobe_t, lobe = ts[start:stop], smooth[start:stop]
    top = lobe >= lobe.min() + 0.8 * (lobe.max() - lobe.min())
    if top.sum() < 3:
        return float(lobe_t[np.argmax(lobe)])
    c2, c1, _ = np.polyfit(lobe_t[top] - lobe_t[top][0], lobe[top], 2)
    if c2 >= 0:
        return float(lobe_t[np.argmax(lobe)])
    return float(lobe_t[top][0] - c1 / (2 * c2))


def _frequency(t, ion, window) -> tuple[float | None, float | None]:
    t_peak = locate_first_maximum(t, ion, window)
    if t_peak is None or t_peak <= 0:
        return None, None
    return math.pi / (2 * t_peak), t_peak


def _spread(freqs) -> float | None:
    vals = [f for f in freqs if f is not None]
    if len(vals) < 1 or len(vals) != len(list(freqs)):
        return None
    return (max(vals) - min(vals)) / min(vals)


def validate_effective_model(
    p: FullModelParams,
    field_state: FieldStateSpec,
    t_grid: np.ndarray | None = None,
    omega_qubit: float | None = None,
) -> ValidationReport:
    """Run the full model from ``|e_f, g_ion> (x) field (x) |0>_vib`` and compare with the exchange model."""
    warnings = p.regime_warnings()
    if field_state.truncation != p.n_field_max:
        field_state = replace(field_state, truncation=p.n_field_max)
    if omega_qubit is None:
        omega_qubit = 50 * abs(p.delta)
    t = default_time_grid(p) if t_grid is None else np.asarray(t_grid, dtype=float)
    prop = _Propagator(p, omega_qubit)
    rho0 = build_initial_state({FLY: "e", ION: "g"}, field_state, p.n_vib_max)
    kets, weights = _pure_components(rho0.matrix)

    dt = t[1] - t[0] if t.size > 1 else 0.0
    window = int(round(2 * math.pi / abs(p.delta) / dt)) if dt > 0 else 1
    traj = prop.trajectories(kets, weights, t)
    freq, t_peak = _frequency(t, traj.ion_excited, window)
    lam = p.effective_coupling()
    deviation = abs(freq - lam) / lam if freq is not None and lam > 0 else None
    if freq is None:
        warnings.append("no exchange: ion excitation never exceeds threshold")

    # per-photon-number frequencies; the initial field is diagonal for fock/thermal
    fock_freqs: dict[int, float | None] = {}
    field_pops = np.real(np.diag(_field_marginal(rho0.matrix, p)))
    for n in np.flatnonzero(field_pops >= COMPONENT_MIN_WEIGHT):
        spec_n = FieldStateSpec("fock", int(n), p.n_field_max)
        kn, wn = _pure_components(build_initial_state({FLY: "e", ION: "g"}, spec_n, p.n_vib_max).matrix)
        fock_freqs[int(n)] = _frequency(t, prop.trajectories(kn, wn, t).ion_excited, window)[0]

    at_pred = float("nan")
    if lam > 0:
        at_pred = float(prop.trajectories(kets, weights, np.array([math.pi / (2 * lam)])).ion_excited[0])
    return ValidationReport(
        field_state=field_state.label(),
        predicted_coupling=lam,
        fitted_frequency=freq,
        relative_deviation=deviation,
        t_peak=t_peak,
        peak_transfer=float(traj.ion_excited.max()),
        transfer_at_predicted=at_pred,
        fock_frequencies=fock_freqs,
        fock_spread=_spread(fock_freqs.values()),
        vib_leakage=float(traj.vib_excited.max()),
        field_number_variance=float(np.var(traj.photons)),
        warnings=warnings,
    )


def _field_marginal(rho: np.ndarray, p: FullModelParams) -> np.ndarray:
    dims = p.layout.dims
    t = rho.reshape(dims + dims)
    return np.einsum("abcdabfd->cf", t)


@dataclass
class FieldComparison:
    reports: list[ValidationReport]
    frequency_spread: float | None

    @property
    def spread_within_tol(self) -> bool:
        return self.frequency_spread is not None and self.frequency_spread <= FREQ_TOL

    def as_dict(self) -> dict:
        return {
            "reports": [r.as_dict() for r in self.reports],
            "frequency_spread": self.frequency_spread,
            "spread_within_tol": self.spread_within_tol,
        }


def compare_field_states(
    p: FullModelParams,
    fields: list[FieldStateSpec],
    t_grid: np.ndarray | None = None,
    omega_qubit: float | None = None,
) -> FieldComparison:
    """Validate several initial field states and report the relative spread of fitted frequencies."""
    reports = [validate_effective_model(p, f, t_grid, omega_qubit) for f in fields]
    return FieldComparison(reports, _spread([r.fitted_frequency for r in reports]))
