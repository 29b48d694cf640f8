"""Postselected closed-timelike-curve machinery.

The loop supermap closes a system ``A`` that appears both as the last input
and the last output factor of a map ``T: E (x) A -> F (x) A``::

    Gamma_A{T}[rho] = Tr_{A A''}[Phi_{A A''} T[rho (x) Phi_{A A''}]]

On Choi states this is a partial contraction,
``K[e, f; e', f'] = (1/d_A) sum_{a, b} J[e, a, f, a; e', b, f', b]``.
The physical (nonlinear) evolution renormalizes the output.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from . import channels as ch
from . import linalg as la
from .channels import QuantumMap
from .linalg import DimensionError

NORMALIZATION_FLOOR = 1e-12


class DegeneratePostselection(ArithmeticError):
    """The loop's postselection probability is numerically zero."""


@dataclass(frozen=True)
class LoopedMap:
    """A map ``E (x) A -> F (x) A`` whose trailing factors ``A`` form the loop."""

    inner: QuantumMap
    loop_dims: tuple[int, ...]

    def __post_init__(self):
        k = len(self.loop_dims)
        if k == 0:
            raise DimensionError("a looped map needs a non-trivial loop system")
        if self.inner.in_dims[-k:] != tuple(self.loop_dims) or self.inner.out_dims[-k:] != tuple(self.loop_dims):
            raise DimensionError(
                f"loop dims {self.loop_dims} must close the trailing factors of "
                f"{self.inner.in_dims} -> {self.inner.out_dims}")

    @property
    def in_dims(self):
        return self.inner.in_dims[:-len(self.loop_dims)]

    @property
    def out_dims(self):
        return self.inner.out_dims[:-len(self.loop_dims)]


def loop_supermap(t: LoopedMap) -> QuantumMap:
    d_e, d_f = prod(t.in_dims), prod(t.out_dims)
    d_a = prod(t.loop_dims)
    j = np.asarray(t.inner.choi).reshape(d_e, d_a, d_f, d_a, d_e, d_a, d_f, d_a)
    k = np.einsum("eafaxbyb->efxy", j) / d_a
    return QuantumMap(k.reshape(d_e * d_f, d_e * d_f), t.in_dims, t.out_dims)


def normalize(out: np.ndarray) -> np.ndarray:
    tr = float(np.trace(out).real)
    if tr <= NORMALIZATION_FLOOR:
        raise DegeneratePostselection(f"postselection probability {tr:.3g} is numerically zero")
    return la.hermitize(out / tr)


def renormalized_loop(t: LoopedMap | QuantumMap, rho: np.ndarray, ref_dim: int = 1) -> np.ndarray:
    """Normalized ``(id_R (x) Gamma_A{T})[rho]`` for ``rho`` on ``R (x) E``.

    ``t`` may also be an already-looped map, reused across many inputs.
    """
    g = loop_supermap(t) if isinstance(t, LoopedMap) else t
    dims = ((ref_dim,) if ref_dim > 1 else ()) + g.in_dims
    at = 1 if ref_dim > 1 else 0
    if not g.in_dims:
        # trivial E: the loop yields a state; the reference simply rides along
        out = la.kron(rho, g.choi)
        return normalize(out)
    return normalize(ch.apply(g, rho, dims, at))


# -- strategies --------------------------------------------------------------

@dataclass(frozen=True)
class StrategyPair:
    """Encoder ``M L1 L2 -> A`` and decoder ``B -> M^ L1 L2`` with ``L1 ~ M``, ``L2 ~ B``."""

    encoder: QuantumMap
    decoder: QuantumMap
    d_m: int
    kind: str
    k0_choi: np.ndarray
    k1_choi: np.ndarray

    @property
    def d_l(self) -> tuple[int, int]:
        return self.d_m, self.decoder.d_in


def _k_map(k, d_b: int, d_a: int) -> QuantumMap:
    if isinstance(k, QuantumMap):
        if (k.d_in, k.d_out) != (d_b, d_a):
            raise DimensionError(f"recovery map must be {d_b}->{d_a}, got {k.d_in}->{k.d_out}")
        return k
    return ch.from_choi(np.asarray(k), d_b, d_a)


def build_strategy(n: QuantumMap, d_m: int, kind: str = "quantum", k0=None, k1=None) -> StrategyPair:
    """Amplified probabilistic teleportation, quantum or classical.

    The encoder tests ``M L1`` against ``Phi`` (quantum) or the comparator
    ``Omega`` (classical) and applies ``k0`` to ``L2`` on success, ``k1``
    otherwise.  The decoder prepares ``Phi`` or ``Upsilon`` on ``M^ L1`` and
    relays ``B`` into ``L2``.  Omitted recovery maps default to the
    singlet-fraction optimizers of ``n``.
    """
    from .measures import singlet_fraction_extremes

    if kind not in ("quantum", "classical"):
        raise ValueError(f"kind must be 'quantum' or 'classical', got {kind!r}")
    if d_m < 1:
        raise ValueError(f"d_M must be >= 1, got {d_m}")
    d_a, d_b = n.d_in, n.d_out
    if k0 is None or k1 is None:
        ext = singlet_fraction_extremes(n)
        k0 = ext.k0_choi if k0 is None else k0
        k1 = ext.k1_choi if k1 is None else k1
    k0m, k1m = _k_map(k0, d_b, d_a), _k_map(k1, d_b, d_a)

    test = la.max_entangled(d_m) if kind == "quantum" else la.comparator(d_m)
    shared = la.max_entangled(d_m) if kind == "quantum" else la.classical_corr(d_m)
    pair_dims = (d_m, d_m) if d_m > 1 else ()
    yes = ch.effect(test, pair_dims)
    no = ch.effect(np.eye(d_m * d_m) - test, pair_dims)
    encoder = ch.tensor(yes, k0m) + ch.tensor(no, k1m)
    decoder = ch.tensor(ch.preparation(shared, pair_dims), ch.identity(d_b))
    return StrategyPair(encoder, decoder, d_m, kind, np.array(k0m.choi), np.array(k1m.choi))


def strategy_loop(s: StrategyPair, n: QuantumMap) -> LoopedMap:
    """``T = (id_M^ (x) E) o swap o (id_M (x) D) o (id_M (x) N)`` on ``M A -> M^ A``."""
    d_m, d_a, d_b = s.d_m, n.d_in, n.d_out
    m = ch._dims(d_m)
    if s.decoder.d_in != d_b or s.encoder.d_out != d_a:
        raise DimensionError("strategy does not match the channel's input/output dimensions")
    step1 = ch.tensor(ch.identity(m), n) if m else n
    # id_M (x) D, outputs reordered from (M, M^, L1, L2) to (M^, M, L1, L2)
    step2 = ch.permute_outputs(ch.tensor(ch.identity(m), s.decoder), (1, 0, 2, 3)) if m else s.decoder
    step3 = ch.tensor(ch.identity(m), s.encoder) if m else s.encoder
    t = ch.chain(step1, step2, step3)
    return LoopedMap(t, ch._dims(d_a))


def forward_loop(s: StrategyPair, n: QuantumMap) -> LoopedMap:
    """The same protocol closed over the memory ``L`` instead: ``D o N o E`` on ``M L -> M^ L``."""
    t = ch.chain(s.encoder, n, s.decoder)
    k = len(s.decoder.out_dims) - len(ch._dims(s.d_m))
    return LoopedMap(t, t.out_dims[-k:] if k else ())


def effective_map(s: StrategyPair, n: QuantumMap) -> QuantumMap:
    """Unnormalized linear map ``M -> M^`` realized by the strategy and the loop."""
    return loop_supermap(strategy_loop(s, n))


def simulated_quantum_infidelity(s: StrategyPair, n: QuantumMap,
                                 probes: Sequence[np.ndarray] = ()) -> dict:
    """Infidelity ``1 - <psi| omega |psi>`` over probe vectors on ``R (x) M`` (``d_R = d_M``).

    Returns the value at the maximally entangled probe and the maximum over
    all probes (which always include it); both are lower bounds on the true
    worst case.
    """
    if s.kind != "quantum":
        raise ValueError("quantum infidelity needs a quantum strategy")
    d = s.d_m
    if d == 1:
        return {"phi": 0.0, "worst": 0.0, "per_probe": [0.0]}
    g = effective_map(s, n)
    phi_vec = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    vals = []
    for v in [phi_vec, *probes]:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape[0] != d * d:
            raise DimensionError(f"probe must be a vector on R (x) M of length {d * d}")
        v = v / np.linalg.norm(v)
        omega = renormalized_loop(g, np.outer(v, v.conj()), ref_dim=d)
        vals.append(float(1.0 - np.vdot(v, omega @ v).real))
    return {"phi": vals[0], "worst": max(vals), "per_probe": vals}


def simulated_classical_error(s: StrategyPair, n: QuantumMap) -> dict:
    """Largest ``1 - Pr{m | m}`` over message symbols, with the per-symbol list."""
    if s.kind != "classical":
        raise ValueError("classical error needs a classical strategy")
    d = s.d_m
    if d == 1:
        return {"worst": 0.0, "per_symbol": [0.0]}
    g = effective_map(s, n)
    errs = []
    for m in range(d):
        omega = renormalized_loop(g, la.projector(la.ket(m, d)))
        errs.append(float(1.0 - omega[m, m].real))
    return {"worst": max(errs), "per_symbol": errs}


def quantum_infidelity_target(i_max: float, i_doe: float, d_m: int) -> float:
    """Closed-form optimum ``(d^2 - 1) / (2^{I_max + I_doe} + d^2 - 1)``."""
    k = d_m * d_m - 1
    s = i_max + i_doe
    return 0.0 if k == 0 or s == np.inf else k / (2.0 ** s + k)


def classical_error_target(i_max: float, i_doe: float, d_m: int) -> float:
    k = d_m - 1
    s = i_max + i_doe
    return 0.0 if k == 0 or s == np.inf else k / (2.0 ** s + k)
