"""Dense primal-dual interior-point solver for small Hermitian SDPs.

Standard form, with block-diagonal Hermitian variables::

    primal:  minimize  <C, X>   s.t.  <A_i, X> = b_i  (i = 1..m),   X >= 0
    dual:    maximize  b . y    s.t.  S = C - sum_i y_i A_i >= 0

Free (sign-indefinite) Hermitian unknowns are best expressed through the
dual multipliers ``y``, which are unconstrained by construction.

Complex blocks are mapped to real symmetric blocks of twice the side by
:func:`hermitian_to_real_embedding`.  Iterations use Nesterov-Todd scaling and
Mehrotra's predictor-corrector; the start point is ``X = S = xi * I``.
Setting the environment variable ``RETROCAP_SDP_TRACE`` to a file path makes
every solve append one JSON line with its iterate history.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg as la

GAP_TOL = 1e-8
FEAS_TOL = 1e-9
MAX_ITER = 200
DIVERGENCE = 1e10


class SolverError(RuntimeError):
    """The interior-point iteration could not produce a certified solution."""


def hermitian_to_real_embedding(m: np.ndarray) -> np.ndarray:
    """``[[Re m, -Im m], [Im m, Re m]]``; each eigenvalue of ``m`` appears twice."""
    m = la.as_matrix(m)
    if not la.is_hermitian(m, la.HERMITIAN_TOL * max(1.0, float(np.max(np.abs(m), initial=0.0)))):
        raise ValueError("real embedding requires a Hermitian matrix")
    re, im = m.real, m.imag
    return np.block([[re, -im], [im, re]])


def real_to_hermitian(y: np.ndarray) -> np.ndarray:
    """Inverse of the embedding, averaged over the two copies it contains."""
    n = y.shape[0] // 2
    y11, y12, y21, y22 = y[:n, :n], y[:n, n:], y[n:, :n], y[n:, n:]
    x = 0.5 * ((y11 + y22) + 1j * (y21 - y12))
    return la.hermitize(x)


@dataclass
class SdpProblem:
    """Block SDP in standard form.

    ``objective[k]`` is the block-``k`` part of ``C``; each constraint is a
    pair ``(coefficients, rhs)`` with one Hermitian matrix per block (``None``
    for a zero block).
    """

    block_sizes: list[int]
    objective: list[np.ndarray]
    constraints: list[tuple[list[np.ndarray | None], float]]
    sense: str = "minimize"

    def __post_init__(self):
        if not self.block_sizes:
            raise ValueError("an SDP needs at least one block")
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"sense must be 'minimize' or 'maximize', got {self.sense!r}")
        if len(self.objective) != len(self.block_sizes):
            raise ValueError("one objective block per variable block is required")
        for k, (n, c) in enumerate(zip(self.block_sizes, self.objective)):
            if n < 1 or c.shape != (n, n):
                raise ValueError(f"objective block {k} must be {n}x{n}")
            if not la.is_hermitian(c):
                raise ValueError(f"objective block {k} is not Hermitian")
        for i, (coeffs, rhs) in enumerate(self.constraints):
            if len(coeffs) != len(self.block_sizes):
                raise ValueError(f"constraint {i} must give one coefficient per block")
            if not np.isfinite(rhs):
                raise ValueError(f"constraint {i} has a non-finite right-hand side")
            for k, a in enumerate(coeffs):
                if a is None:
                    continue
                n = self.block_sizes[k]
                if a.shape != (n, n) or not la.is_hermitian(a):
                    raise ValueError(f"constraint {i}, block {k}: need a Hermitian {n}x{n} matrix")

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    primal_blocks: list[np.ndarray]
    dual_multipliers: np.ndarray
    dual_slack: list[np.ndarray]
    gap: float
    residuals: tuple[float, float]
    iterations: int
    history: list[dict] = field(default_factory=list, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def diagnostics(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "gap": self.gap,
            "primal_residual": self.residuals[0],
            "dual_residual": self.residuals[1],
        }


class _RealForm:
    """The embedded real problem with vectorized constraint operators."""

    def __init__(self, p: SdpProblem):
        sign = 1.0 if p.sense == "minimize" else -1.0
        self.sizes = [2 * n for n in p.block_sizes]
        self.m = p.n_constraints
        self.c = [sign * hermitian_to_real_embedding(c) for c in p.objective]
        self.b = 2.0 * np.array([rhs for _, rhs in p.constraints], dtype=float)
        self.a = []
        for k, n in enumerate(self.sizes):
            rows = np.zeros((self.m, n * n))
            for i, (coeffs, _) in enumerate(p.constraints):
                if coeffs[k] is not None:
                    rows[i] = hermitian_to_real_embedding(coeffs[k]).reshape(-1)
            self.a.append(rows)
        self.sign = sign

    def op(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        return sum(a @ x.reshape(-1) for a, x in zip(self.a, xs))

    def adj(self, y: np.ndarray) -> list[np.ndarray]:
        return [(a.T @ y).reshape(n, n) for a, n in zip(self.a, self.sizes)]


def _inner(xs, ys) -> float:
    return float(sum(np.vdot(x, y).real for x, y in zip(xs, ys)))


def _sym(m):
    return 0.5 * (m + m.T)


def _max_step(lam: np.ndarray, d: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha * d >= 0 (lam > 0)."""
    r = 1.0 / np.sqrt(lam)
    w = np.linalg.eigvalsh(_sym(r[:, None] * d * r[None, :]))
    lo = w[0]
    return np.inf if lo >= 0 else -1.0 / lo


def solve(p: SdpProblem, gap_tol: float = GAP_TOL, feas_tol: float = FEAS_TOL,
          max_iter: int = MAX_ITER) -> SdpSolution:
    """Solve ``p`` and return values in the problem's own sense and complex domain."""
    rf = _RealForm(p)
    nblk = len(rf.sizes)
    ntot = sum(rf.sizes)
    data_max = max(
        [float(np.max(np.abs(c))) for c in rf.c]
        + [float(np.max(np.abs(a), initial=0.0)) for a in rf.a]
        + [float(np.max(np.abs(rf.b), initial=0.0))]
    )
    xi = 1.0 + data_max
    xs = [xi * np.eye(n) for n in rf.sizes]
    ss = [xi * np.eye(n) for n in rf.sizes]
    y = np.zeros(rf.m)
    bnorm = 1.0 + np.linalg.norm(rf.b)
    cnorm = 1.0 + np.sqrt(sum(np.sum(c * c) for c in rf.c))

    history: list[dict] = []
    status = "max_iterations"
    it = 0
    best = None

    def measures(xs, y, ss):
        rp = rf.b - rf.op(xs)
        aty = rf.adj(y)
        rd = [c - s - a for c, s, a in zip(rf.c, ss, aty)]
        pobj = _inner(rf.c, xs)
        dobj = float(rf.b @ y)
        pinf = np.linalg.norm(rp) / bnorm
        dinf = np.sqrt(sum(np.sum(r * r) for r in rd)) / cnorm
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        return rp, rd, pobj, dobj, pinf, dinf, relgap

    for it in range(max_iter + 1):
        rp, rd, pobj, dobj, pinf, dinf, relgap = measures(xs, y, ss)
        mu = _inner(xs, ss) / ntot
        history.append({"iter": it, "pobj": pobj / 2, "dobj": dobj / 2, "relgap": relgap,
                        "pinf": pinf, "dinf": dinf, "mu": mu})
        score = max(relgap, pinf, dinf)
        if best is None or score < best[0]:
            best = (score, [x.copy() for x in xs], y.copy(), [s.copy() for s in ss])
        if relgap <= gap_tol and pinf <= feas_tol and dinf <= feas_tol:
            status = "optimal"
            break
        if it == max_iter:
            break
        xmax = max(float(np.max(np.abs(x))) for x in xs)
        smax = max(float(np.max(np.abs(s))) for s in ss)
        if xmax > DIVERGENCE and pinf <= 1e-6:
            status = "unbounded"
            break
        if (smax > DIVERGENCE or np.max(np.abs(y), initial=0.0) > DIVERGENCE) and dinf <= 1e-6:
            status = "infeasible"
            break

        try:
            gs, lams, ws = [], [], []
            for x, s in zip(xs, ss):
                lx = np.linalg.cholesky(x)
                ls = np.linalg.cholesky(s)
                u, d, vt = np.linalg.svd(ls.T @ lx)
                g = (lx @ vt.T) / np.sqrt(d)[None, :]
                gs.append(g)
                lams.append(d)
                ws.append(g @ g.T)
            schur = np.zeros((rf.m, rf.m))
            for a, w, n in zip(rf.a, ws, rf.sizes):
                wa = np.einsum("ij,kjl,lm->kim", w, a.reshape(rf.m, n, n), w, optimize=True)
                schur += a @ wa.reshape(rf.m, -1).T
            schur = _sym(schur)
            chol = np.linalg.cholesky(schur + 1e-14 * np.trace(schur) / max(rf.m, 1) * np.eye(rf.m))
        except np.linalg.LinAlgError:
            break

        def direction(rtilde):
            # rtilde: per-block scaled complementarity correction, symmetric
            gr = [g @ r @ g.T for g, r in zip(gs, rtilde)]
            wrw = [w @ r @ w for w, r in zip(ws, rd)]
            rhs = rp - rf.op(gr) + rf.op(wrw)
            dy = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            aty = rf.adj(dy)
            ds = [r - a for r, a in zip(rd, aty)]
            dx = [_sym(grr - w @ d @ w) for grr, w, d in zip(gr, ws, ds)]
            return dx, dy, ds

        def steps(dx, ds):
            ap = ad = 1.0
            for g, lam, d1, d2 in zip(gs, lams, dx, ds):
                ginv = np.linalg.inv(g)
                dxt = _sym(ginv @ d1 @ ginv.T)
                dst = _sym(g.T @ d2 @ g)
                ap = min(ap, _max_step(lam, dxt))
                ad = min(ad, _max_step(lam, dst))
            return ap, ad

        # predictor
        r_aff = [-np.diag(lam) for lam in lams]
        dx_a, dy_a, ds_a = direction(r_aff)
        ap, ad = steps(dx_a, ds_a)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = _inner([x + ap * d for x, d in zip(xs, dx_a)],
                        [s + ad * d for s, d in zip(ss, ds_a)]) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        r_cor = []
        for g, lam, d1, d2 in zip(gs, lams, dx_a, ds_a):
            ginv = np.linalg.inv(g)
            dxt = ginv @ d1 @ ginv.T
            dst = g.T @ d2 @ g
            second = 0.5 * (dxt @ dst + dst @ dxt)
            rhs = sigma * mu * np.eye(len(lam)) - np.diag(lam * lam) - _sym(second)
            r_cor.append(2.0 * rhs / (lam[:, None] + lam[None, :]))
        dx, dy, ds = direction(r_cor)
        ap, ad = steps(dx, ds)
        gamma = 0.9 + 0.09 * min(min(ap, ad), 1.0)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)
        xs = [_sym(x + ap * d) for x, d in zip(xs, dx)]
        y = y + ad * dy
        ss = [_sym(s + ad * d) for s, d in zip(ss, ds)]
        history[-1].update({"alpha_p": ap, "alpha_d": ad, "sigma": sigma})

    if status == "max_iterations" and best is not None:
        _, xs, y, ss = best
    rp, rd, pobj, dobj, pinf, dinf, relgap = measures(xs, y, ss)
    sol = SdpSolution(
        status=status,
        primal_value=rf.sign * pobj / 2.0,
        dual_value=rf.sign * dobj / 2.0,
        primal_blocks=[real_to_hermitian(x) for x in xs],
        dual_multipliers=rf.sign * y,
        dual_slack=[real_to_hermitian(s) for s in ss],
        gap=abs(pobj - dobj) / 2.0,
        residuals=(float(pinf), float(dinf)),
        iterations=it,
        history=history,
    )
    _trace(p, sol)
    return sol


def _trace(p: SdpProblem, sol: SdpSolution) -> None:
    path = os.environ.get("RETROCAP_SDP_TRACE")
    if not path:
        return
    record = {
        "block_sizes": list(p.block_sizes),
        "n_constraints": p.n_constraints,
        "sense": p.sense,
        "status": sol.status,
        "iterations": sol.history,
    }
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record) + "\n")
