"""Information measures of CP maps: max-relative entropy, max-information,
Doeblin information, the two-sided bound I_pm, singlet-fraction extremes and
multi-copy Doeblin bounds.

Every measure is an SDP over the Choi state ``J`` on ``(A', B)``.  The
sign-indefinite Hermitian unknown (``X``, ``Z`` or ``W`` below) is written in
an orthonormal Hermitian basis and carried by the dual multipliers of the
standard-form problem, so each program has only PSD primal blocks::

    I_max:  min  Tr X   s.t.  pi (x) X - J >= 0
    I_doe:  max  Tr Z   s.t.  J - pi (x) Z >= 0          I_doe = -log2 max
    I_pm:   max  Tr W   s.t.  J -+ pi (x) W >= 0         I_pm  = -log2 max
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import sdp
from .channels import QuantumMap, tensor_power

INF_THRESHOLD = 1e-9
LOW_CONFIDENCE = 1e-6
MEASURE_GAP_TOL = 1e-10
MAX_EMBEDDED_SIDE = 256
MAX_COPIES = 3


class NotCPError(ValueError):
    """The map's Choi state has eigenvalues below the PSD tolerance."""


class LowConfidenceWarning(UserWarning):
    pass


@dataclass
class MeasureResult:
    name: str
    value: float
    optimizer: np.ndarray | None
    certificate: np.ndarray | None
    solver_diag: dict = field(default_factory=dict)
    low_confidence: bool = False

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


@dataclass
class SingletExtremes:
    f_max: float
    f_min: float
    k0_choi: np.ndarray
    k1_choi: np.ndarray
    solver_diag: dict = field(default_factory=dict)


def _require_cp(n: QuantumMap) -> None:
    if not n.is_cp:
        raise NotCPError(f"map is not completely positive (min Choi eigenvalue {n.min_choi_eigenvalue:.3g})")


def _require_optimal(sol: sdp.SdpSolution, what: str) -> None:
    if not sol.optimal:
        raise sdp.SolverError(
            f"{what}: solver status {sol.status} after {sol.iterations} iterations "
            f"(gap {sol.gap:.2e}, residuals {sol.residuals[0]:.2e}/{sol.residuals[1]:.2e})")


def _log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf


# -- max-relative entropy ----------------------------------------------------

def dmax(rho: np.ndarray, sigma: np.ndarray, tol: float = la.PSD_TOL) -> float:
    """``log2 min {lam : rho <= lam sigma}``; ``+inf`` if no such ``lam`` exists.

    Positive semidefinite inputs use the closed form on the support of
    ``sigma``; anything else goes through a small SDP.
    """
    rho, sigma = la.as_matrix(rho), la.as_matrix(sigma)
    if rho.shape != sigma.shape or rho.shape[0] != rho.shape[1]:
        raise la.DimensionError(f"dmax needs equal square shapes, got {rho.shape} and {sigma.shape}")
    for name, m in (("rho", rho), ("sigma", sigma)):
        if not la.is_hermitian(m):
            raise ValueError(f"{name} is not Hermitian")
    rho, sigma = la.hermitize(rho), la.hermitize(sigma)
    if la.is_psd(rho, tol) and la.is_psd(sigma, tol):
        return _dmax_psd(rho, sigma, tol)
    return _dmax_sdp(rho, sigma)


def _dmax_psd(rho, sigma, tol):
    w, v = la.hermitian_eig(sigma)
    keep = w > tol * max(1.0, w[0])
    if not keep.any():
        return math.inf if np.max(np.abs(rho)) > tol else -math.inf
    p, q = v[:, keep], v[:, ~keep]
    if q.shape[1] and np.max(np.abs(q.conj().T @ rho @ q)) > tol:
        return math.inf
    inv_sqrt = p / np.sqrt(w[keep])[None, :]
    core = inv_sqrt.conj().T @ rho @ inv_sqrt
    lam = la.eigvalsh(la.hermitize(core))[0]
    return _log2(float(lam))


def _dmax_sdp(rho, sigma):
    # min lam s.t. lam*sigma - rho >= 0: lam is the single dual multiplier
    sol = sdp.solve(sdp.SdpProblem([rho.shape[0]], [-rho], [([-sigma], -1.0)]),
                    gap_tol=MEASURE_GAP_TOL)
    if sol.status == "infeasible":
        return math.inf
    _require_optimal(sol, "dmax")
    return _log2(-sol.dual_value)


# -- channel measures --------------------------------------------------------

def _marginal_constraints(n: QuantumMap, sign: float = 1.0, blocks: int = 1):
    d_a, d_b = n.d_in, n.d_out
    pi = la.uniform(d_a)
    cons = []
    for e in la.hermitian_basis(d_b):
        a = la.kron(pi, e)
        coeffs = [a] if blocks == 1 else [a, -a]
        cons.append(([sign * c for c in coeffs], sign * float(np.trace(e).real)))
    return cons


def _coords_to_operator(y: np.ndarray, d: int) -> np.ndarray:
    return la.hermitize(la.from_hermitian_coords(y, d))


def max_information(n: QuantumMap) -> MeasureResult:
    """``log2 min {Tr X : pi (x) X >= J}`` with optimizer ``sigma = X / Tr X``."""
    _require_cp(n)
    j = np.array(n.choi)
    p = sdp.SdpProblem([j.shape[0]], [-j], _marginal_constraints(n, sign=-1.0))
    sol = sdp.solve(p, gap_tol=MEASURE_GAP_TOL)
    _require_optimal(sol, "max-information")
    x = _coords_to_operator(sol.dual_multipliers, n.d_out)
    lam = float(np.trace(x).real)
    if lam <= 0:
        # only the zero map gets here
        return MeasureResult("I_max", -math.inf, None, sol.primal_blocks[0], sol.diagnostics())
    return MeasureResult("I_max", _log2(lam), x / lam, sol.primal_blocks[0], sol.diagnostics())


def _doeblin_value(t: float, name: str) -> tuple[float, bool]:
    if t <= INF_THRESHOLD:
        return math.inf, False
    low = t < LOW_CONFIDENCE
    if low:
        warnings.warn(f"{name}: optimum {t:.3g} is close to the infinity threshold", LowConfidenceWarning)
    return -math.log2(t), low


def doeblin_information(n: QuantumMap) -> MeasureResult:
    """``-log2 max {Tr Z : J >= pi (x) Z}``, ``+inf`` when the maximum is not positive.

    The optimizer is ``tau = Z / Tr Z``; the certificate is the primal block
    ``W >= 0`` with ``Tr_{A'} W = d_A I``, whose value ``<J, W>`` upper bounds
    ``max Tr Z`` (and so certifies infinity when it vanishes).
    """
    _require_cp(n)
    j = np.array(n.choi)
    p = sdp.SdpProblem([j.shape[0]], [j], _marginal_constraints(n))
    sol = sdp.solve(p, gap_tol=MEASURE_GAP_TOL)
    _require_optimal(sol, "Doeblin information")
    z = _coords_to_operator(sol.dual_multipliers, n.d_out)
    t = float(np.trace(z).real)
    value, low = _doeblin_value(t, "I_doe")
    tau = z / t if math.isfinite(value) else None
    # <J, W> bounds max Tr Z from above for any feasible W
    diag = sol.diagnostics() | {"max_trace": t, "certificate_value": sol.primal_value}
    return MeasureResult("I_doe", value, tau, sol.primal_blocks[0], diag, low)


def pm_information(n: QuantumMap) -> MeasureResult:
    """``-log2 max {Tr W : -J <= pi (x) W <= J}``, same infinity convention as Doeblin."""
    _require_cp(n)
    j = np.array(n.choi)
    p = sdp.SdpProblem([j.shape[0]] * 2, [j, j], _marginal_constraints(n, blocks=2))
    sol = sdp.solve(p, gap_tol=MEASURE_GAP_TOL)
    _require_optimal(sol, "I_pm")
    w = _coords_to_operator(sol.dual_multipliers, n.d_out)
    t = float(np.trace(w).real)
    value, low = _doeblin_value(t, "I_pm")
    tau = w / t if math.isfinite(value) else None
    diag = sol.diagnostics() | {"max_trace": t}
    return MeasureResult("I_pm", value, tau, sol.primal_blocks, diag, low)


# -- singlet fractions -------------------------------------------------------

def _singlet_objective(n: QuantumMap) -> np.ndarray:
    """``G`` on (B, A) with ``Tr[Phi (K o N)[Phi]] = Tr[G Choi(K)]``."""
    d_a, d_b = n.d_in, n.d_out
    t = n.choi_tensor()
    g = (d_b / d_a) * t.transpose(3, 2, 1, 0)
    return la.hermitize(g.reshape(d_a * d_b, d_a * d_b))


def _polish_channel_choi(k: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Clip tiny negative eigenvalues and restore ``Tr_out = pi`` exactly."""
    w, v = np.linalg.eigh(la.hermitize(k))
    k = (v * np.clip(w, 0.0, None)) @ v.conj().T
    m = d_in * la.partial_trace(k, (d_in, d_out), [0])
    mw, mv = np.linalg.eigh(la.hermitize(m))
    inv = (mv / np.sqrt(np.clip(mw, 1e-300, None))) @ mv.conj().T
    s = la.kron(inv, np.eye(d_out))
    return la.hermitize(s @ k @ s)


def singlet_fraction_extremes(n: QuantumMap) -> SingletExtremes:
    """Largest and smallest ``Tr[Phi (K o N)[Phi]]`` over channels ``K: B -> A``.

    ``k0_choi`` attains ``f_max`` and ``k1_choi`` attains ``f_min``; both are
    channel Choi states on (B, A).
    """
    _require_cp(n)
    d_a, d_b = n.d_in, n.d_out
    g = _singlet_objective(n)
    cons = [([la.kron(e, np.eye(d_a))], float(np.trace(e).real) / d_b) for e in la.hermitian_basis(d_b)]
    out = {}
    diag = {}
    for key, sense in (("max", "maximize"), ("min", "minimize")):
        sol = sdp.solve(sdp.SdpProblem([d_a * d_b], [g], cons, sense), gap_tol=MEASURE_GAP_TOL)
        _require_optimal(sol, f"singlet fraction {key}")
        k = _polish_channel_choi(sol.primal_blocks[0], d_b, d_a)
        out[key] = (float(np.clip(np.vdot(g, k).real, 0.0, 1.0)), k)
        diag[key] = sol.diagnostics()
    return SingletExtremes(out["max"][0], out["min"][0], out["max"][1], out["min"][1], diag)


# -- multi-copy bounds ---------------------------------------------------------

def n_copy_doeblin(n: QuantumMap, copies: int) -> float:
    """Per-copy Doeblin information ``I_doe(N^{(x) copies}) / copies``."""
    if copies < 1 or copies > MAX_COPIES:
        raise ValueError(f"copies must be in 1..{MAX_COPIES}, got {copies}")
    side = (n.d_in * n.d_out) ** copies
    if 2 * side > MAX_EMBEDDED_SIDE:
        raise ValueError(f"{copies} copies give an embedded side of {2 * side} > {MAX_EMBEDDED_SIDE}")
    m = n if copies == 1 else tensor_power(n, copies)
    return doeblin_information(m).value / copies


def max_feasible_copies(n: QuantumMap, limit: int = MAX_COPIES) -> int:
    k = 1
    while k < limit and 2 * (n.d_in * n.d_out) ** (k + 1) <= MAX_EMBEDDED_SIDE:
        k += 1
    return k


def regularized_doeblin_bounds(n: QuantumMap, max_copies: int = 1) -> tuple[float, float]:
    """Interval ``[lower, upper]`` containing the regularized Doeblin information.

    ``lower`` is the best per-copy Doeblin value over ``1..max_copies`` copies,
    ``upper`` is ``I_pm``.
    """
    if max_copies < 1 or max_copies > MAX_COPIES:
        raise ValueError(f"max_copies must be in 1..{MAX_COPIES}, got {max_copies}")
    lower = max(n_copy_doeblin(n, k) for k in range(1, max_copies + 1))
    upper = pm_information(n).value
    return lower, upper
