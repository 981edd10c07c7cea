# Does the exchange model hold up?
#
# The two-qubit exchange Hamiltonian comes from eliminating a far-detuned
# cavity mode and the ion's motion. Here the full model (atom, ion, cavity
# mode, vibrational mode) is diagonalized exactly and its ion-excitation
# curve is compared with the predicted exchange rate, for several initial
# cavity fields.

from flyingbell import FieldStateSpec, FullModelParams, compare_field_states

p = FullModelParams.matched(g_fly=1.0, delta_over_g=20, eta=0.05)
print("== 1. parameters ==")
print("   g_ion, g_fly, delta, nu, eta:", p.g_ion, p.g_fly, p.delta, p.nu, p.eta)
print("   predicted exchange rate:", p.effective_coupling())
print("   regime warnings:", p.regime_warnings() or "none")

fields = [FieldStateSpec("fock", n, p.n_field_max) for n in (0, 1, 2)]
fields.append(FieldStateSpec("thermal", 0.5, p.n_field_max))

print("== 2. fitted exchange rates ==")
comp = compare_field_states(p, fields)
for r in comp.reports:
    print(
        f"   {r.field_state:14s} rate {r.fitted_frequency:.6f}  deviation {r.relative_deviation:6.2%}"
        f"  peak {r.peak_transfer:.4f}  vib leakage {r.vib_leakage:.1e}"
    )
print(f"   spread across field states: {comp.frequency_spread:.2%}")

print("== 3. closer to resonance ==")
# At delta/g = 5 the elimination is poorer and the field dependence grows.
near = FullModelParams.matched(g_fly=1.0, delta_over_g=5, eta=0.05)
comp = compare_field_states(near, fields)
print("   warnings:", near.regime_warnings())
for r in comp.reports:
    dev = "n/a" if r.relative_deviation is None else f"{r.relative_deviation:.2%}"
    print(f"   {r.field_state:14s} deviation {dev}")
print("   spread:", comp.frequency_spread)
