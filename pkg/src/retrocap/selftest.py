"""Invariant checks run by ``retrocap selftest``.

Each check returns a :class:`Check` holding the measured deviation and the
tolerance it is compared against.  Random inputs come from fixed seeds, so
repeated runs print identical tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import capacity as cap
from . import channels as ch
from . import linalg as la
from . import measures as ms
from . import pctc
from .channels import QuantumMap


@dataclass
class Check:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str = ""


def _check(name: str, deviation: float, tol: float, detail: str = "") -> Check:
    ok = bool(np.isfinite(deviation) and deviation <= tol)
    return Check(name, ok, float(deviation), tol, detail)


# -- loop identities -----------------------------------------------------------

def swap_loop_deviation(d: int = 2, rng: np.random.Generator | None = None) -> float:
    """Unnormalized ``Gamma_B{swap}`` against ``id / d^2`` on a random input."""
    rng = rng or np.random.default_rng(11)
    g = pctc.loop_supermap(pctc.LoopedMap(ch.swap(d, d), ch._dims(d)))
    rho = la.random_density(d * d, rng)
    out = ch.apply(g, rho, (d, d), 1)
    return float(np.max(np.abs(out - rho / d ** 2)))


def loop_tensor_pair(t1: pctc.LoopedMap, t2: pctc.LoopedMap) -> pctc.LoopedMap:
    """``T1 (x) T2`` regrouped to ``(E1 E2 A1 A2) -> (F1 F2 A1 A2)``."""
    joint = ch.tensor(t1.inner, t2.inner)
    ki1, ki2 = len(t1.in_dims), len(t2.in_dims)
    ko1, ko2 = len(t1.out_dims), len(t2.out_dims)
    ka1, ka2 = len(t1.loop_dims), len(t2.loop_dims)

    def order(k1, k2):
        # factors of (X1, A1, X2, A2) reordered to (X1, X2, A1, A2)
        x1 = list(range(k1))
        a1 = list(range(k1, k1 + ka1))
        x2 = list(range(k1 + ka1, k1 + ka1 + k2))
        a2 = list(range(k1 + ka1 + k2, k1 + ka1 + k2 + ka2))
        return tuple(x1 + x2 + a1 + a2)

    joint = ch.permute_outputs(joint, order(ko1, ko2))
    joint = ch.permute_inputs(joint, order(ki1, ki2))
    return pctc.LoopedMap(joint, t1.loop_dims + t2.loop_dims)


def tensor_loop_deviation(rng: np.random.Generator | None = None) -> float:
    rng = rng or np.random.default_rng(12)
    t1 = pctc.LoopedMap(ch.random_cp_map(4, 4, rng).regroup((2, 2), (2, 2)), (2,))
    t2 = pctc.LoopedMap(ch.random_cp_map(6, 6, rng).regroup((2, 3), (2, 3)), (3,))
    joint = pctc.loop_supermap(loop_tensor_pair(t1, t2))
    split = ch.tensor(pctc.loop_supermap(t1), pctc.loop_supermap(t2))
    return float(np.max(np.abs(joint.choi - split.choi)))


def cyclic_pair(t: QuantumMap, w: QuantumMap) -> tuple[pctc.LoopedMap, pctc.LoopedMap]:
    """Loops ``Gamma_A{T o W}`` and ``Gamma_B{W o T}`` on ``E G -> F H``.

    ``t: (E, B) -> (F, A)`` and ``w: (G, A) -> (H, B)``, single factors each.
    """
    (e, b), (f, a) = t.in_dims, t.out_dims
    (g, a2), (h, b2) = w.in_dims, w.out_dims
    if a != a2 or b != b2:
        raise la.DimensionError("T and W must share the loop systems A and B")
    # T o W with loop A: (E, G, A) -> (E, H, B) -> (H, E, B) -> (H, F, A) -> (F, H, A)
    tw = ch.permute_outputs(ch.extend(w, (e, g, a), 1), (1, 0, 2))
    tw = ch.permute_outputs(ch.chain(tw, ch.extend(t, (h, e, b), 1)), (1, 0, 2))
    # W o T with loop B: (E, G, B) as (G, E, B) -> (G, F, A) -> (F, G, A) -> (F, H, B)
    wt = ch.permute_inputs(ch.extend(t, (g, e, b), 1), (1, 0, 2))
    wt = ch.chain(ch.permute_outputs(wt, (1, 0, 2)), ch.extend(w, (f, g, a), 1))
    return pctc.LoopedMap(tw, (a,)), pctc.LoopedMap(wt, (b,))


def cyclicity_deviation(trials: int = 10, rng: np.random.Generator | None = None) -> float:
    rng = rng or np.random.default_rng(13)
    worst = 0.0
    for i in range(trials):
        da, db = (2, 3) if i % 2 else (3, 2)
        t = ch.random_cp_map(2 * db, 2 * da, rng).regroup((2, db), (2, da))
        w = ch.random_cp_map(2 * da, 2 * db, rng).regroup((2, da), (2, db))
        l1, l2 = cyclic_pair(t, w)
        rho = la.random_density(8, rng)
        o1 = pctc.renormalized_loop(l1, rho, ref_dim=2)
        o2 = pctc.renormalized_loop(l2, rho, ref_dim=2)
        worst = max(worst, float(np.max(np.abs(o1 - o2))))
    return worst


def replacement_probe_deviation(rng: np.random.Generator | None = None) -> float:
    """Strategies around a replacement map produce probe-independent outputs."""
    rng = rng or np.random.default_rng(14)
    tau = la.random_density(2, rng)
    n = ch.replacement(tau, 2)
    worst = 0.0
    for kind in ("quantum", "classical"):
        s = pctc.build_strategy(n, 2, kind, ch.random_channel(2, 2, rng), ch.random_channel(2, 2, rng))
        g = pctc.effective_map(s, n)
        outs = [pctc.renormalized_loop(g, la.random_density(2, rng)) for _ in range(5)]
        worst = max(worst, max(float(np.max(np.abs(o - outs[0]))) for o in outs))
    return worst


def boundary_equivalence_deviation(rng: np.random.Generator | None = None) -> float:
    """Boundary-condition evolution against the loop of ``T o N`` with ``N`` from the boundary."""
    rng = rng or np.random.default_rng(15)
    d_e, d_f, d_a, d_b, d_c = 2, 2, 2, 2, 2
    t = ch.random_cp_map(d_e * d_b, d_f * d_a, rng).regroup((d_e, d_b), (d_f, d_a))
    bc = ch.BoundaryCondition(la.random_density(d_b * d_c, rng), la.random_density(d_a * d_c, rng),
                              d_a, d_b, d_c)
    rho = la.random_density(d_e, rng)
    # direct: Tr_AC[final (T (x) id_C)[rho (x) init]]
    x = la.kron(rho, bc.rho_init)
    y, dims = ch.apply_to_system(t, x, (d_e, d_b, d_c), 0)
    fin = la.kron(np.eye(d_f), bc.rho_final)
    direct = la.partial_trace(fin @ y, dims, [0])
    direct = direct / np.trace(direct)
    n = ch.boundary_to_map(bc)
    loop = pctc.LoopedMap(ch.compose(t, ch.extend(n, (d_e, d_a), 1)), (d_a,))
    return float(np.max(np.abs(direct - pctc.renormalized_loop(loop, rho))))


# -- measures --------------------------------------------------------------------

def analytic_deviation() -> float:
    worst = 0.0
    for p in (0.1, 0.5, 0.9):
        for n in (ch.depolarizing(2, p), ch.erasure(2, p)):
            worst = max(worst,
                        abs(ms.max_information(n).value - math.log2(4 * (1 - p) + p)),
                        abs(ms.doeblin_information(n).value + math.log2(p)))
    for g in (0.2, 0.5, 0.8):
        n = ch.amplitude_damping(g)
        s = math.sqrt(1 - g)
        worst = max(worst,
                    abs(ms.max_information(n).value - math.log2(2 * (1 + s) - g)),
                    abs(ms.doeblin_information(n).value + 2 * math.log2(1 - s)))
    return worst


def singlet_duality_deviation(trials: int = 5, rng: np.random.Generator | None = None) -> float:
    rng = rng or np.random.default_rng(16)
    worst = 0.0
    for _ in range(trials):
        n = ch.random_cp_map(2, 2, rng)
        ext = ms.singlet_fraction_extremes(n)
        worst = max(worst, abs(ms.max_information(n).value - (2.0 + math.log2(ext.f_max))))
        i_doe = ms.doeblin_information(n).value
        if math.isfinite(i_doe):
            worst = max(worst, abs(i_doe + 2.0 + math.log2(ext.f_min)))
    return worst


def additivity_deviation(trials: int = 3, rng: np.random.Generator | None = None) -> float:
    rng = rng or np.random.default_rng(17)
    worst = 0.0
    for _ in range(trials):
        n = ch.random_channel(2, 2, rng)
        worst = max(worst, abs(ms.max_information(ch.tensor(n, n)).value - 2 * ms.max_information(n).value))
    return worst


def sandwich_violation(trials: int = 3, rng: np.random.Generator | None = None) -> float:
    """Largest violation of ``I_doe <= I_doe(N (x) N) / 2 <= I_pm``."""
    rng = rng or np.random.default_rng(18)
    worst = 0.0
    for _ in range(trials):
        n = ch.random_channel(2, 2, rng)
        one = ms.doeblin_information(n).value
        two = ms.n_copy_doeblin(n, 2)
        upper = ms.pm_information(n).value
        if math.isfinite(two):
            worst = max(worst, one - two)
        if math.isfinite(upper):
            worst = max(worst, two - upper)
    return max(worst, 0.0)


def strategy_deviation() -> float:
    n = ch.depolarizing(2, 0.5)
    i_max, i_doe = ms.max_information(n).value, ms.doeblin_information(n).value
    worst = 0.0
    for d_m in (2, 3):
        q = pctc.simulated_quantum_infidelity(pctc.build_strategy(n, d_m, "quantum"), n)
        c = pctc.simulated_classical_error(pctc.build_strategy(n, d_m, "classical"), n)
        worst = max(worst,
                    abs(q["phi"] - pctc.quantum_infidelity_target(i_max, i_doe, d_m)),
                    abs(c["worst"] - pctc.classical_error_target(i_max, i_doe, d_m)))
    return worst


def forward_equivalence_deviation() -> float:
    n = ch.amplitude_damping(0.3)
    s = pctc.build_strategy(n, 2, "quantum")
    phi = la.max_entangled(2)
    a = pctc.renormalized_loop(pctc.strategy_loop(s, n), phi, ref_dim=2)
    b = pctc.renormalized_loop(pctc.forward_loop(s, n), phi, ref_dim=2)
    return float(np.max(np.abs(a - b)))


def one_shot_deviation() -> float:
    n = ch.depolarizing(2, 0.5)
    return max(abs(cap.one_shot_quantum_capacity(n, 0.5) - 1.0),
               abs(cap.one_shot_classical_capacity(n, 0.5) - math.log2(6)))


def cp_validation(n: QuantumMap, label: str) -> Check:
    dev = max(0.0, -n.min_choi_eigenvalue)
    return Check(f"cp:{label}", n.is_cp, dev, la.PSD_TOL, "min Choi eigenvalue %.3g" % n.min_choi_eigenvalue)


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("swap_loop", swap_loop_deviation, 1e-12),
    ("tensor_loop", tensor_loop_deviation, 1e-10),
    ("loop_cyclicity", cyclicity_deviation, 1e-9),
    ("replacement_probe_independence", replacement_probe_deviation, 1e-9),
    ("boundary_equivalence", boundary_equivalence_deviation, 1e-9),
    ("forward_equivalence", forward_equivalence_deviation, 1e-9),
    ("analytic_measures", analytic_deviation, 1e-6),
    ("singlet_duality", singlet_duality_deviation, 1e-6),
    ("imax_additivity", additivity_deviation, 1e-6),
    ("doeblin_sandwich", sandwich_violation, 1e-6),
    ("strategy_closed_form", strategy_deviation, 1e-6),
    ("one_shot_formula", one_shot_deviation, 1e-12),
]


def builtin_samples() -> list[tuple[str, QuantumMap]]:
    out = []
    for p in (0.0, 0.5, 1.0):
        out.append((f"depolarizing(2,{p:g})", ch.depolarizing(2, p)))
        out.append((f"erasure(2,{p:g})", ch.erasure(2, p)))
        out.append((f"amplitude_damping({p:g})", ch.amplitude_damping(p)))
    out.append(("depolarizing(3,0.5)", ch.depolarizing(3, 0.5)))
    return out


def run(extra: list[tuple[str, QuantumMap]] = ()) -> list[Check]:
    """All checks in a fixed order; ``extra`` maps get a CP validation row each."""
    results = [cp_validation(n, label) for label, n in builtin_samples()]
    results += [cp_validation(n, label) for label, n in extra]
    for name, fn, tol in CHECKS:
        try:
            results.append(_check(name, fn(), tol))
        except Exception as exc:  # a crash is a failed check, reported by name
            results.append(Check(name, False, math.inf, tol, f"{type(exc).__name__}: {exc}"))
    return results


def format_table(results: list[Check]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  deviation     tolerance"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}    {r.deviation:<12.3e}  {r.tolerance:.0e}"
                     + (f"  {r.detail}" if r.detail and not r.passed else ""))
    return "\n".join(lines)
