"""Acceptance suite. Each test records exactly one PASS/FAIL line at the stated tolerance."""
import itertools
import math
import time

import numpy as np

from flyingbell.dynamics import (
    ChannelSpec,
    analytic_channel_output,
    evolve_unitary,
    integrate_master_equation,
    lindblad_superoperator,
    run_protocol,
    two_ion_channel_state,
)
from flyingbell.linalg import (
    KET_G,
    DensityMatrix,
    dag,
    expm_hermitian_generator,
    partial_trace,
    random_density_matrix,
    random_hermitian,
    random_unitary,
)
from flyingbell.metrics import (
    concurrence,
    fef_bruteforce_oracle,
    fully_entangled_fraction,
    max_flight_time,
    teleportation_fidelity,
)
from flyingbell.model import FLY, PROTOCOL_LAYOUT, EffectiveParams, FieldStateSpec, FullModelParams, after_cavity_a_state, bell_state
from flyingbell.validation import FREQ_TOL, LEAKAGE_TOL, PEAK_MIN, compare_field_states

CANON = EffectiveParams.canonical(1e-4)
GRID5 = list(itertools.product(np.linspace(0, 400, 5), np.linspace(0, 400, 5), np.linspace(0, 1e-2, 5)))


def reference_two_ion_state(spec: ChannelSpec) -> np.ndarray:
    """Reference two-ion X-state with coherence rate gamma + gamma_p, entered by hand in the (ion1, ion2) basis."""
    g, gp, t = spec.gamma, spec.gamma_p, spec.t_flight
    c = math.exp(-(g + gp) * t)
    m = np.zeros((4, 4), dtype=complex)
    eg, ge, gg = 1, 2, 3
    m[eg, eg] = 0.5
    m[ge, ge] = 0.5 * math.exp(-g * t)
    m[gg, gg] = 0.5 * (1 - math.exp(-g * t))
    m[eg, ge] = m[ge, eg] = 0.5 * c
    return m


def test_1_ideal_protocol(acceptance):
    start = time.perf_counter()
    res = run_protocol(CANON)
    elapsed = time.perf_counter() - start
    fid = res.final_two_ion_state.fidelity_to_pure(bell_state())
    fly = partial_trace(res.state_after_B, {FLY}).matrix
    fly_err = float(np.max(np.abs(fly - np.outer(KET_G, KET_G))))
    ok = fid >= 1 - 1e-10 and fly_err <= 1e-10 and elapsed < 1.0
    acceptance("1 ideal protocol", ok, f"1-F={1 - fid:.2e} fly_err={fly_err:.2e} t={elapsed:.3f}s")
    assert ok


def test_2a_numeric_matches_analytic_channel(acceptance):
    start = time.perf_counter()
    psi = after_cavity_a_state()
    rho_a = DensityMatrix(PROTOCOL_LAYOUT, np.outer(psi, psi.conj()))
    worst = 0.0
    for g, gp, t in GRID5:
        spec = ChannelSpec(g, gp, t)
        num = integrate_master_equation(rho_a, lindblad_superoperator(spec), t)
        worst = max(worst, float(np.max(np.abs(num.matrix - analytic_channel_output(spec).matrix))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed < 30
    acceptance("2a numeric RK4 vs analytic channel (5x5x5)", ok, f"max_err={worst:.2e} t={elapsed:.2f}s")
    assert ok


def test_2b_pipeline_reproduces_reference_two_ion_state(acceptance):
    """Expected to fail whenever gamma > 0.

    The master equation damps the |g_f e_1><e_f g_1| coherence at gamma/2 + gamma_p.
    The reference closed form uses gamma + gamma_p, so the two cannot agree to 1e-7.
    """
    start = time.perf_counter()
    worst, worst_at = 0.0, None
    for g, gp, t in GRID5:
        spec = ChannelSpec(g, gp, t)
        out = run_protocol(CANON, spec, "numeric-noisy").final_two_ion_state.matrix
        err = float(np.max(np.abs(out - reference_two_ion_state(spec))))
        if err > worst:
            worst, worst_at = err, (float(g), float(gp), float(t))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and elapsed < 30
    acceptance("2b numeric pipeline vs reference two-ion state", ok, f"max_err={worst:.2e} at (gamma, gamma_p, t_f)={worst_at} t={elapsed:.2f}s")
    assert ok


def test_2c_pipeline_reproduces_exact_two_ion_state(acceptance):
    # supplementary: same pipeline against the X-state with the exact coherence rate
    worst = 0.0
    for g, gp, t in GRID5:
        spec = ChannelSpec(g, gp, t)
        out = run_protocol(CANON, spec, "numeric-noisy").final_two_ion_state.matrix
        worst = max(worst, float(np.max(np.abs(out - two_ion_channel_state(spec, "lindblad").matrix))))
    ok = worst <= 1e-7
    acceptance("2c numeric pipeline vs exact-rate two-ion state (supplementary)", ok, f"max_err={worst:.2e}")
    assert ok


def test_3_metric_closed_forms(acceptance):
    start = time.perf_counter()
    gammas = np.linspace(0, 400, 10)
    gps = np.linspace(0, 400, 10)
    ts = np.linspace(0, 1e-2, 10)
    c_err = f_err = o_err = 0.0
    tele_exact = True
    for g, gp, t in itertools.product(gammas, gps, ts):
        rho = reference_two_ion_state(ChannelSpec(g, gp, t))
        c_err = max(c_err, abs(concurrence(rho) - math.exp(-(g + gp) * t)))
        fef = fully_entangled_fraction(rho)
        closed = (1 + math.exp(-g * t) + 2 * math.exp(-(g + gp) * t)) / 4
        f_err = max(f_err, abs(fef - closed))
        o_err = max(o_err, abs(fef_bruteforce_oracle(rho) - fef))
        tele_exact &= teleportation_fidelity(fef) == (2 * fef + 1) / 3
    elapsed = time.perf_counter() - start
    ok = c_err <= 1e-9 and f_err <= 1e-9 and o_err <= 1e-4 and tele_exact
    acceptance(
        "3 metric closed forms (10x10x10)",
        ok,
        f"C_err={c_err:.1e} F_err={f_err:.1e} oracle_gap={o_err:.1e} f_exact={tele_exact} t={elapsed:.1f}s",
    )
    assert ok


def test_4_flight_bounds(acceptance):
    start = time.perf_counter()
    b3 = max_flight_time(200.0, 0.0, 300.0)
    b2 = max_flight_time(200.0, 200.0)
    r3 = abs(b3.t_max - math.log(3) / 200) / (math.log(3) / 200)
    r2 = abs(b2.t_max - math.log(2) / 200) / (math.log(2) / 200)
    elapsed = time.perf_counter() - start
    ok = (
        r3 <= 1e-10
        and r2 <= 1e-10
        and round(b3.t_max * 1e3, 3) == 5.493
        and round(b3.distance_max, 3) == 1.648
        and elapsed < 1.0
    )
    acceptance(
        "4 flight-time bounds",
        ok,
        f"t_ln3={b3.t_max * 1e3:.4f}ms d={b3.distance_max:.4f}m rel_ln3={r3:.1e} rel_ln2={r2:.1e} t={elapsed:.3f}s",
    )
    assert ok


def test_5_effective_model_validation(acceptance):
    start = time.perf_counter()
    p = FullModelParams.matched(1.0, 20, 0.05, n_field_max=10, n_vib_max=2)
    fields = [FieldStateSpec("fock", n, 10) for n in (0, 1, 2)] + [FieldStateSpec("thermal", 0.5, 10)]
    comp = compare_field_states(p, fields)
    elapsed = time.perf_counter() - start
    devs = [r.relative_deviation for r in comp.reports]
    leak = max(r.vib_leakage for r in comp.reports)
    peak = min(r.peak_transfer for r in comp.reports)
    ok = (
        all(d is not None and d <= FREQ_TOL for d in devs)
        and comp.frequency_spread is not None
        and comp.frequency_spread <= FREQ_TOL
        and leak <= LEAKAGE_TOL
        and peak >= PEAK_MIN
        and elapsed < 120
    )
    acceptance(
        "5 effective-model validation",
        ok,
        f"max_dev={max(devs):.3f} spread={comp.frequency_spread:.3f} leak={leak:.1e} peak={peak:.4f} t={elapsed:.1f}s",
    )
    assert ok


def test_6_invariant_suites(acceptance):
    rng = np.random.default_rng(2024)
    failures = []
    for _ in range(30):
        rho = DensityMatrix(PROTOCOL_LAYOUT, random_density_matrix(8, rng))
        h = random_hermitian(8, rng)
        out = evolve_unitary(rho, h, rng.uniform(-3, 3))
        spec = ChannelSpec(*rng.uniform(0, 3, size=2), rng.uniform(0.01, 2))
        damped = integrate_master_equation(rho, lindblad_superoperator(spec), spec.t_flight)
        for name, m in (("unitary", out.matrix), ("lindblad", damped.matrix)):
            if abs(np.trace(m) - 1) > 1e-9:
                failures.append(f"{name} trace")
            if np.max(np.abs(m - dag(m))) > 1e-10:
                failures.append(f"{name} hermiticity")
            if np.linalg.eigvalsh(m)[0] < -1e-8:
                failures.append(f"{name} positivity")

        dephased = integrate_master_equation(rho, lindblad_superoperator(ChannelSpec(0.0, spec.gamma_p, 1.0)), 1.0)
        if np.max(np.abs(np.diag(dephased.matrix) - np.diag(rho.matrix))) > 1e-9:
            failures.append("pure dephasing populations")

        t1, t2 = rng.uniform(-3, 3, size=2)
        u12 = expm_hermitian_generator(h, t1) @ expm_hermitian_generator(h, t2)
        if np.max(np.abs(u12 - expm_hermitian_generator(h, t1 + t2))) > 1e-10:
            failures.append("group property")

        m4 = random_density_matrix(4, rng)
        loc = np.kron(random_unitary(2, rng), random_unitary(2, rng))
        m4u = loc @ m4 @ dag(loc)
        if abs(concurrence(m4) - concurrence(m4u)) > 1e-8 or abs(fully_entangled_fraction(m4) - fully_entangled_fraction(m4u)) > 1e-8:
            failures.append("local-unitary invariance")
    ok = not failures
    acceptance("6 invariant suites", ok, "all checks hold" if ok else ", ".join(sorted(set(failures))))
    assert ok
