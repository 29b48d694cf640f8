"""
How many copies does the Doeblin information need?
==================================================

For depolarizing channels the per-copy value never moves. For amplitude
damping a second copy already sends it to infinity, so the one-copy number
is only a lower bound on the regularized quantity.
"""
from retrocap import channels as ch
from retrocap import measures as ms

for label, n in [("depolarizing 0.5", ch.depolarizing(2, 0.5)),
                 ("erasure 0.5", ch.erasure(2, 0.5)),
                 ("amplitude damping 0.5", ch.amplitude_damping(0.5))]:
    per_copy = [ms.n_copy_doeblin(n, k) for k in range(1, ms.max_feasible_copies(n, 2) + 1)]
    print(f"{label:<24} per-copy Doeblin {per_copy}   I_pm {ms.pm_information(n).value:.5f}")

# the two-copy optimum for amplitude damping: no positive pi (x) Z fits under J (x) J
nn = ch.tensor(ch.amplitude_damping(0.5), ch.amplitude_damping(0.5))
r = ms.doeblin_information(nn)
print("two-copy max Tr Z", r.solver_diag["max_trace"], "certified bound", r.solver_diag["certificate_value"])
