"""Retrocausal capacities and exponents, plus baseline capacities of the
example channel families.

One-shot capacities are floors of closed-form expressions in
``s = I_max + I_doe``; asymptotic capacities and exponents use the
regularized Doeblin information, reported as an interval unless the map is
known to have an additive Doeblin information.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from . import linalg as la
from . import measures as ms
from .channels import QuantumMap, depolarizing

INF = math.inf
# relative slack absorbed before taking a floor; solver values are good to ~1e-10
FLOOR_SLACK = 1e-9
GOLDEN_TOL = 1e-9
INTERVAL_SLACK = 1e-6

Interval = tuple[float, float]


@dataclass
class CapacityReport:
    i_max: float
    i_doe: float
    i_doe_lower: float
    i_pm_upper: float
    asymptotic_quantum: Interval
    asymptotic_classical: Interval
    doeblin_copies_used: int
    additive: bool
    epsilon: float | None = None
    one_shot_quantum: float | None = None
    one_shot_classical: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExponentReport:
    rate: float
    kind: str
    error_exponent: Interval
    strong_converse_exponent: Interval

    def to_dict(self) -> dict:
        return asdict(self)


def _check_eps(eps: float) -> None:
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie strictly between 0 and 1, got {eps!r}")


def _floor_argument(eps: float, s: float) -> float:
    return eps / (1.0 - eps) * 2.0 ** round(s, 12) + 1.0


def one_shot_from_measures(i_max: float, i_doe: float, eps: float, kind: str) -> float:
    """``log2 floor(x)`` (classical) or ``log2 floor(sqrt x)`` (quantum) with
    ``x = eps/(1-eps) 2^{I_max + I_doe} + 1``."""
    _check_eps(eps)
    if kind not in ("quantum", "classical"):
        raise ValueError(f"kind must be 'quantum' or 'classical', got {kind!r}")
    s = i_max + i_doe
    if math.isinf(s) and s > 0:
        return INF
    x = _floor_argument(eps, s)
    if math.isinf(x):
        return INF
    x *= 1.0 + FLOOR_SLACK
    k = math.isqrt(math.floor(x)) if kind == "quantum" else math.floor(x)
    return math.log2(k)


def one_shot_quantum_capacity(n: QuantumMap, eps: float) -> float:
    _check_eps(eps)
    return one_shot_from_measures(ms.max_information(n).value, ms.doeblin_information(n).value,
                                  eps, "quantum")


def one_shot_classical_capacity(n: QuantumMap, eps: float) -> float:
    _check_eps(eps)
    return one_shot_from_measures(ms.max_information(n).value, ms.doeblin_information(n).value,
                                  eps, "classical")


# -- additivity ----------------------------------------------------------------

def is_quantum_to_classical(n: QuantumMap, tol: float = 1e-12) -> bool:
    """Output always diagonal in the computational basis."""
    t = n.choi_tensor()
    off = t.copy()
    for b in range(n.d_out):
        off[:, b, :, b] = 0.0
    return float(np.max(np.abs(off), initial=0.0)) <= tol


def is_depolarizing(n: QuantumMap, tol: float = 1e-12) -> bool:
    if n.d_in != n.d_out:
        return False
    d = n.d_in
    phi = la.max_entangled(d)
    overlap = float(np.vdot(phi, n.choi).real)
    # overlap = (1 - p) + p / d^2
    p = (1.0 - overlap) * d * d / (d * d - 1) if d > 1 else 0.0
    if not (-tol <= p <= 1.0 + tol):
        return False
    ref = depolarizing(d, min(max(p, 0.0), 1.0))
    return float(np.max(np.abs(ref.choi - n.choi))) <= tol


def known_additive(n: QuantumMap) -> bool:
    """Maps whose Doeblin information is invariant under regularization."""
    return is_depolarizing(n) or is_quantum_to_classical(n)


# -- asymptotic quantities -----------------------------------------------------

def asymptotic_capacities(n: QuantumMap, max_copies: int = 1, eps: float | None = None,
                          additive: bool | None = None) -> CapacityReport:
    """Interval-valued asymptotic capacities, optionally with one-shot values at ``eps``.

    ``max_copies`` is clipped to what the embedded-size cap allows.
    """
    if eps is not None:
        _check_eps(eps)
    i_max = ms.max_information(n).value
    i_doe = ms.doeblin_information(n).value
    additive = known_additive(n) if additive is None else additive
    if additive or math.isinf(i_doe):
        lower = upper = i_doe
        copies = 1
    else:
        copies = ms.max_feasible_copies(n, max_copies)
        lower = max([i_doe] + [ms.n_copy_doeblin(n, k) for k in range(2, copies + 1)])
        upper = ms.pm_information(n).value
        if lower > upper and lower - upper <= INTERVAL_SLACK:
            # both ends agree up to solver accuracy; keep the interval well ordered
            upper = lower
    classical = (i_max + lower, i_max + upper)
    quantum = (0.5 * classical[0], 0.5 * classical[1])
    report = CapacityReport(i_max, i_doe, lower, upper, quantum, classical, copies, additive)
    if eps is not None:
        report.epsilon = eps
        report.one_shot_quantum = one_shot_from_measures(i_max, i_doe, eps, "quantum")
        report.one_shot_classical = one_shot_from_measures(i_max, i_doe, eps, "classical")
    return report


def exponents_from_measures(i_max: float, doeblin: Interval, r: float, kind: str) -> ExponentReport:
    if not (r >= 0 and math.isfinite(r)):
        raise ValueError(f"rate must be a finite non-negative number, got {r!r}")
    if kind not in ("quantum", "classical"):
        raise ValueError(f"kind must be 'quantum' or 'classical', got {kind!r}")
    c = (2.0 if kind == "quantum" else 1.0) * r
    lo, hi = i_max + doeblin[0], i_max + doeblin[1]
    err = (max(0.0, lo - c), max(0.0, hi - c))
    sc = (max(0.0, c - hi), max(0.0, c - lo))
    return ExponentReport(r, kind, err, sc)


def exponents(n: QuantumMap, r: float, kind: str = "quantum", max_copies: int = 1,
              report: CapacityReport | None = None) -> ExponentReport:
    """Error exponent ``max{0, I_max + I_doe^inf - c r}`` and strong-converse
    exponent ``max{0, c r - I_max - I_doe^inf}`` with ``c = 2`` (quantum) or 1."""
    if report is None:
        report = asymptotic_capacities(n, max_copies)
    return exponents_from_measures(report.i_max, (report.i_doe_lower, report.i_pm_upper), r, kind)


# -- baseline capacities -------------------------------------------------------

def h2(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def golden_max(f, lo: float = 0.0, hi: float = 1.0, tol: float = GOLDEN_TOL, seeds: int = 2) -> float:
    """Maximum of ``f`` on ``[lo, hi]``: ``seeds + 1`` grid points, then
    golden-section on the bracket around the best of them."""
    xs = np.linspace(lo, hi, seeds + 1)
    vals = [f(x) for x in xs]
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, seeds)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return float(max(vals[i], fc, fd, f(0.5 * (a + b))))


def _depolarizing_baselines(d: int, p: float) -> dict:
    x = p * (d * d - 1) / (d * d)
    c_ea = 2 * math.log2(d) - h2(x) - (x * math.log2(d * d - 1) if x > 0 else 0.0)
    # depolarizing output (1-p) rho + p pi: a wrong outcome has weight q = p (d-1)/d
    q = p * (d - 1) / d
    c = math.log2(d) - h2(q) - (q * math.log2(d - 1) if q > 0 and d > 2 else 0.0)
    return {"c_ea": c_ea, "c": c}


def _erasure_baselines(d: int, p: float) -> dict:
    return {"c_ea": 2 * (1 - p) * math.log2(d), "c": (1 - p) * math.log2(d)}


def _amplitude_damping_baselines(gamma: float) -> dict:
    g = gamma
    q_ea = 0.5 * golden_max(lambda lam: h2(lam) + h2((1 - g) * lam) - h2(g * lam))
    q = golden_max(lambda lam: h2((1 - g) * lam) - h2(g * lam))
    return {"q_ea": max(q_ea, 0.0), "q": max(q, 0.0)}


def baseline_capacities(family: str, *, d: int = 2, p: float | None = None,
                        gamma: float | None = None) -> dict:
    """Entanglement-assisted and unassisted capacities for a builtin family.

    Keys present depend on the family: ``c_ea``, ``c`` for depolarizing and
    erasure; ``q_ea``, ``q`` for amplitude damping.
    """
    if family in ("depolarizing", "erasure"):
        if p is None or not (0.0 <= p <= 1.0):
            raise ValueError(f"{family} needs p in [0, 1], got {p!r}")
        if d < 2:
            raise ValueError(f"dimension must be at least 2, got {d}")
        return (_depolarizing_baselines if family == "depolarizing" else _erasure_baselines)(d, p)
    if family == "amplitude_damping":
        if gamma is None or not (0.0 <= gamma <= 1.0):
            raise ValueError(f"amplitude_damping needs gamma in [0, 1], got {gamma!r}")
        return _amplitude_damping_baselines(gamma)
    raise ValueError(f"no baseline capacities for family {family!r}")
