"""Completely positive maps stored as Choi states.

The Choi state of ``N: X -> Z`` is ``(id (x) N)[Phi_{X'X}]``, laid out with the
reference copy ``X'`` first and the output ``Z`` second, so its trace equals
``Tr N[pi_X]`` and a channel has a unit-trace Choi state.  Both sides may be
multipartite; ``in_dims`` and ``out_dims`` keep the factor structure, and an
empty tuple stands for the trivial one-dimensional system (state preparations
have ``in_dims == ()``, effects have ``out_dims == ()``).

Composition uses the link product written directly on Choi tensors::

    J[N2 o N1][x, z; x', z'] = d_Y * sum_{y, y'} J1[x, y; x', y'] J2[y, z; y', z']
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg as la
from .linalg import Dims, DimensionError

TP_TOL = 1e-9


def _dims(d: int | Sequence[int]) -> Dims:
    if isinstance(d, (int, np.integer)):
        return () if d == 1 else (int(d),)
    dims = tuple(int(x) for x in d)
    if any(x < 1 for x in dims):
        raise DimensionError(f"subsystem dimensions must be >= 1, got {dims}")
    return dims


@dataclass(frozen=True, eq=False)
class QuantumMap:
    """A linear, Hermiticity-preserving map between finite systems.

    Validity (complete positivity, trace preservation) is measured lazily and
    reported through flags; CP maps that scale the trace are legitimate
    values here, not errors.
    """

    choi: np.ndarray
    in_dims: Dims
    out_dims: Dims

    def __post_init__(self):
        choi = la.as_matrix(self.choi)
        in_dims, out_dims = _dims(self.in_dims), _dims(self.out_dims)
        n = prod(in_dims) * prod(out_dims)
        if choi.shape != (n, n):
            raise DimensionError(
                f"Choi matrix of a {in_dims}->{out_dims} map must be {n}x{n}, got {choi.shape}")
        scale = max(1.0, float(np.max(np.abs(choi), initial=0.0)))
        defect = la.hermiticity_defect(choi)
        if defect > la.HERMITIAN_TOL * scale:
            raise ValueError(f"Choi matrix is not Hermitian (max |J - J^H| = {defect:.3g})")
        choi = la.hermitize(choi)
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)

    @property
    def d_in(self) -> int:
        return prod(self.in_dims)

    @property
    def d_out(self) -> int:
        return prod(self.out_dims)

    @property
    def choi_dims(self) -> Dims:
        return (self.d_in, self.d_out)

    def choi_tensor(self) -> np.ndarray:
        """Choi state as a 4-index array ``[x, z, x', z']``."""
        return self.choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)

    @cached_property
    def min_choi_eigenvalue(self) -> float:
        return la.min_eigenvalue(self.choi)

    @cached_property
    def tp_defect(self) -> float:
        marginal = la.partial_trace(self.choi, self.choi_dims, keep=[0])
        return float(np.max(np.abs(marginal - la.uniform(self.d_in))))

    @property
    def is_cp(self) -> bool:
        return self.min_choi_eigenvalue >= -la.PSD_TOL

    @property
    def is_tp(self) -> bool:
        return self.tp_defect <= TP_TOL

    @property
    def is_channel(self) -> bool:
        return self.is_cp and self.is_tp

    @property
    def trace(self) -> float:
        """``Tr N[pi]``, equal to 1 for channels."""
        return float(np.trace(self.choi).real)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return apply(self, x)

    def __add__(self, other: "QuantumMap") -> "QuantumMap":
        if self.in_dims != other.in_dims or self.out_dims != other.out_dims:
            raise DimensionError("cannot add maps with different system structure")
        return QuantumMap(self.choi + other.choi, self.in_dims, self.out_dims)

    def __mul__(self, c: float) -> "QuantumMap":
        return QuantumMap(float(c) * self.choi, self.in_dims, self.out_dims)

    __rmul__ = __mul__

    def regroup(self, in_dims: Sequence[int], out_dims: Sequence[int]) -> "QuantumMap":
        """Same map with the factor structure of either side re-declared."""
        in_dims, out_dims = _dims(in_dims), _dims(out_dims)
        if prod(in_dims) != self.d_in or prod(out_dims) != self.d_out:
            raise DimensionError("regrouping must preserve total dimensions")
        return QuantumMap(self.choi, in_dims, out_dims)

    def __repr__(self) -> str:
        return f"QuantumMap(in_dims={self.in_dims}, out_dims={self.out_dims}, trace={self.trace:.6g})"


# -- constructors ------------------------------------------------------------

def from_choi(choi: np.ndarray, in_dims: int | Sequence[int], out_dims: int | Sequence[int]) -> QuantumMap:
    return QuantumMap(np.array(choi, dtype=complex), _dims(in_dims), _dims(out_dims))


def from_kraus(kraus: Sequence[np.ndarray], in_dims: int | Sequence[int] | None = None,
               out_dims: int | Sequence[int] | None = None) -> QuantumMap:
    """Choi state ``(1/d_in) sum_k |K_k>><<K_k|`` of the map ``X -> sum_k K X K^H``."""
    ops = [la.as_matrix(k) for k in kraus]
    if not ops:
        raise ValueError("at least one Kraus operator is required")
    d_out, d_in = ops[0].shape
    if any(k.shape != (d_out, d_in) for k in ops):
        raise DimensionError("Kraus operators must share one shape")
    in_dims = _dims(d_in if in_dims is None else in_dims)
    out_dims = _dims(d_out if out_dims is None else out_dims)
    if prod(in_dims) != d_in or prod(out_dims) != d_out:
        raise DimensionError("declared dims do not match Kraus operator shape")
    vecs = np.stack([k.T.reshape(-1) for k in ops])
    choi = vecs.T @ vecs.conj() / d_in
    return QuantumMap(choi, in_dims, out_dims)


def identity(d: int | Sequence[int]) -> QuantumMap:
    dims = _dims(d)
    return QuantumMap(la.max_entangled(prod(dims)), dims, dims)


def replacement(sigma: np.ndarray, d_in: int | Sequence[int],
                out_dims: Sequence[int] | None = None) -> QuantumMap:
    """``X -> Tr[X] sigma`` with Choi state ``pi (x) sigma``."""
    sigma = la.as_matrix(sigma)
    in_dims = _dims(d_in)
    out_dims = _dims(sigma.shape[0] if out_dims is None else out_dims)
    return QuantumMap(la.kron(la.uniform(prod(in_dims)), sigma), in_dims, out_dims)


def preparation(rho: np.ndarray, dims: Sequence[int] | None = None) -> QuantumMap:
    """The map from the trivial system that outputs ``rho``."""
    rho = la.as_matrix(rho)
    return QuantumMap(rho, (), _dims(rho.shape[0] if dims is None else dims))


def effect(e: np.ndarray, dims: Sequence[int] | None = None) -> QuantumMap:
    """The functional ``X -> Tr[e X]`` (a map onto the trivial system)."""
    e = la.as_matrix(e)
    d = e.shape[0]
    return QuantumMap(e.T / d, _dims(d if dims is None else dims), ())


def trace_map(d: int | Sequence[int]) -> QuantumMap:
    dims = _dims(d)
    return effect(np.eye(prod(dims)), dims)


def permutation(dims: Sequence[int], perm: Sequence[int]) -> QuantumMap:
    """Unitary channel reordering tensor factors: output factor k is input factor perm[k]."""
    dims = tuple(int(x) for x in dims)
    perm = tuple(perm)
    if sorted(perm) != list(range(len(dims))):
        raise DimensionError(f"{perm} is not a permutation of {len(dims)} systems")
    n = prod(dims)
    k = len(dims)
    u = np.eye(n, dtype=complex).reshape(dims + (n,)).transpose(perm + (k,)).reshape(n, n)
    return from_kraus([u], dims, tuple(dims[p] for p in perm))


def permute_outputs(n: QuantumMap, perm: Sequence[int]) -> QuantumMap:
    """``permutation(n.out_dims, perm) o n``, done as an exact reindexing of the Choi state."""
    k_in = len(n.in_dims)
    full = tuple(range(k_in)) + tuple(k_in + p for p in perm)
    choi = la.permute_systems(n.choi, n.in_dims + n.out_dims, full)
    return QuantumMap(choi, n.in_dims, tuple(n.out_dims[p] for p in perm))


def permute_inputs(n: QuantumMap, perm: Sequence[int]) -> QuantumMap:
    """``n o permutation(dims, perm)`` where ``dims[perm[k]] == n.in_dims[k]``: the
    new map takes its input factors in the order ``dims``."""
    k_in = len(n.in_dims)
    inv = tuple(int(i) for i in np.argsort(perm))
    full = inv + tuple(range(k_in, k_in + len(n.out_dims)))
    choi = la.permute_systems(n.choi, n.in_dims + n.out_dims, full)
    return QuantumMap(choi, tuple(n.in_dims[i] for i in inv), n.out_dims)


def swap(d_a: int, d_b: int) -> QuantumMap:
    return permutation((d_a, d_b), (1, 0))


def depolarizing(d: int, p: float) -> QuantumMap:
    _check_prob(p, "p")
    choi = (1.0 - p) * la.max_entangled(d) + p * la.kron(la.uniform(d), la.uniform(d))
    return QuantumMap(choi, _dims(d), _dims(d))


def erasure(d: int, p: float) -> QuantumMap:
    """Erasure channel into ``C^d (+) span(|e>)``; the flag ``|e>`` is the last basis vector."""
    _check_prob(p, "p")
    embed = np.eye(d + 1, d, dtype=complex)
    flag = la.projector(la.ket(d, d + 1))
    return from_kraus([np.sqrt(1.0 - p) * embed], d, d + 1) + replacement(p * flag, d)


def amplitude_damping(gamma: float) -> QuantumMap:
    _check_prob(gamma, "gamma")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]])
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]])
    return from_kraus([k0, k1])


def _check_prob(x: float, name: str) -> None:
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


FAMILIES = ("depolarizing", "erasure", "amplitude_damping", "replacement")


def builtin_channel(family: str, *, d: int = 2, p: float | None = None,
                    gamma: float | None = None, sigma: np.ndarray | None = None) -> QuantumMap:
    """Construct one of the example families by name.

    ``p`` parametrizes depolarizing and erasure, ``gamma`` amplitude damping
    (qubit only), ``sigma`` the replacement target (default ``pi_d``).
    """
    if family == "depolarizing":
        return depolarizing(d, _need(p, "p"))
    if family == "erasure":
        return erasure(d, _need(p, "p"))
    if family == "amplitude_damping":
        if d != 2:
            raise ValueError("amplitude damping is defined for qubits only")
        return amplitude_damping(_need(gamma if gamma is not None else p, "gamma"))
    if family == "replacement":
        target = la.uniform(d) if sigma is None else la.as_matrix(sigma)
        if abs(np.trace(target) - 1.0) > 1e-9 or not la.is_hermitian(target):
            raise ValueError("replacement target must be unit-trace Hermitian")
        return replacement(target, d)
    raise ValueError(f"unknown channel family {family!r}; choose from {FAMILIES}")


def _need(x, name):
    if x is None:
        raise ValueError(f"parameter {name} is required")
    return float(x)


# -- algebra -----------------------------------------------------------------

def apply(n: QuantumMap, x: np.ndarray, dims: Sequence[int] | None = None, at: int = 0) -> np.ndarray:
    """Apply ``n`` to the factors ``dims[at : at + len(n.in_dims)]`` of ``x``.

    Without ``dims`` the operator must live on the input alone.  The output
    factors take the place of the input factors.
    """
    x = la.as_matrix(x)
    if dims is None:
        dims = n.in_dims
        at = 0
    dims = la.check_dims(x, dims)
    k = len(n.in_dims)
    if dims[at:at + k] != n.in_dims:
        raise DimensionError(f"factors {dims[at:at + k]} at position {at} do not match map input {n.in_dims}")
    pre = prod(dims[:at])
    post = prod(dims[at + k:])
    t = x.reshape(pre, n.d_in, post, pre, n.d_in, post)
    out = n.d_in * np.einsum("aXbcYd,XzYw->azbcwd", t, n.choi_tensor())
    m = pre * n.d_out * post
    return out.reshape(m, m)


def apply_to_system(n: QuantumMap, x: np.ndarray, dims: Sequence[int], at: int) -> tuple[np.ndarray, Dims]:
    """Like :func:`apply` but also returns the dims of the result."""
    dims = tuple(dims)
    k = len(n.in_dims)
    return apply(n, x, dims, at), dims[:at] + n.out_dims + dims[at + k:]


def compose(second: QuantumMap, first: QuantumMap) -> QuantumMap:
    """Choi state of ``second o first``."""
    if first.d_out != second.d_in:
        raise DimensionError(f"cannot compose: first outputs {first.out_dims}, second takes {second.in_dims}")
    j1 = first.choi_tensor()
    j2 = second.choi_tensor()
    j = first.d_out * np.einsum("xyXY,yzYZ->xzXZ", j1, j2, optimize=True)
    n = first.d_in * second.d_out
    return QuantumMap(j.reshape(n, n), first.in_dims, second.out_dims)


def chain(*maps: QuantumMap) -> QuantumMap:
    """``chain(a, b, c) == compose(c, compose(b, a))``: maps listed in order of application."""
    out = maps[0]
    for m in maps[1:]:
        out = compose(m, out)
    return out


def tensor(*maps: QuantumMap) -> QuantumMap:
    out = maps[0]
    for b in maps[1:]:
        a = out
        j = la.kron(a.choi, b.choi)
        j = la.permute_systems(j, (a.d_in, a.d_out, b.d_in, b.d_out), (0, 2, 1, 3))
        out = QuantumMap(j, a.in_dims + b.in_dims, a.out_dims + b.out_dims)
    return out


def tensor_power(n: QuantumMap, copies: int) -> QuantumMap:
    if copies < 1:
        raise ValueError("copies must be >= 1")
    return tensor(*([n] * copies))


def adjoint(n: QuantumMap) -> QuantumMap:
    """The Hilbert-Schmidt adjoint, ``Tr[Y N[X]] == Tr[N^dag[Y] X]``."""
    j = n.choi_tensor().transpose(3, 2, 1, 0) * (n.d_in / n.d_out)
    m = n.d_in * n.d_out
    return QuantumMap(j.reshape(m, m), n.out_dims, n.in_dims)


def extend(n: QuantumMap, dims: Sequence[int], at: int) -> QuantumMap:
    """``id (x) n (x) id`` acting on ``dims`` with ``n`` placed on the factors starting at ``at``."""
    dims = tuple(dims)
    k = len(n.in_dims)
    if dims[at:at + k] != n.in_dims:
        raise DimensionError(f"factors {dims[at:at + k]} at {at} do not match map input {n.in_dims}")
    parts = []
    if at > 0:
        parts.append(identity(dims[:at]))
    parts.append(n)
    if at + k < len(dims):
        parts.append(identity(dims[at + k:]))
    return tensor(*parts)


# -- boundary conditions -----------------------------------------------------

@dataclass(frozen=True)
class BoundaryCondition:
    """Initial state on ``B (x) C`` and final state on ``A (x) C``."""

    rho_init: np.ndarray
    rho_final: np.ndarray
    d_a: int
    d_b: int
    d_c: int

    def __post_init__(self):
        la.check_dims(la.as_matrix(self.rho_init), (self.d_b, self.d_c))
        la.check_dims(la.as_matrix(self.rho_final), (self.d_a, self.d_c))
        for name in ("rho_init", "rho_final"):
            rho = getattr(self, name)
            if not la.is_psd(rho) or abs(np.trace(rho) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a density operator")


def boundary_to_map(bc: BoundaryCondition) -> QuantumMap:
    """``N[X] = Tr_AC[rho_final_AC (X_A (x) rho_init_BC)]`` as a map A -> B."""
    f = la.as_matrix(bc.rho_final).reshape(bc.d_a, bc.d_c, bc.d_a, bc.d_c)
    r = la.as_matrix(bc.rho_init).reshape(bc.d_b, bc.d_c, bc.d_b, bc.d_c)
    # N[|i><j|]_{b b'} = sum_c,c' F[j, c, i, c'] R[b, c', b', c]
    action = np.einsum("jcid,bdec->ibje", f, r)
    choi = action.reshape(bc.d_a * bc.d_b, bc.d_a * bc.d_b) / bc.d_a
    return QuantumMap(choi, _dims(bc.d_a), _dims(bc.d_b))


def map_to_boundary(n: QuantumMap) -> tuple[BoundaryCondition, float]:
    """Boundary conditions realizing ``n`` up to a positive factor.

    Returns ``(bc, scale)`` with ``rho_init = (N (x) id)[Phi_AC] / scale``,
    ``rho_final = Phi_AC`` and ``scale = Tr[(N (x) id)[Phi_AC]]``.  Closing the
    loop through the boundary conditions costs a teleportation factor, so
    ``boundary_to_map(bc) == n / (d_A**2 * scale)``.
    """
    scale = n.trace
    if scale <= 1e-14 or np.max(np.abs(n.choi)) == 0.0:
        raise ValueError("map has a vanishing Choi state; no boundary condition realizes it")
    # Choi layout is (A' = C, B); the initial state is ordered (B, C).
    rho_init = la.permute_systems(n.choi, n.choi_dims, (1, 0)) / scale
    bc = BoundaryCondition(rho_init, la.max_entangled(n.d_in), n.d_in, n.d_out, n.d_in)
    return bc, scale


# -- file format -------------------------------------------------------------

class ChannelFormatError(ValueError):
    """A channel file could not be parsed into a valid Choi state."""


def choi_to_json(n: QuantumMap) -> dict:
    return {
        "d_in": n.d_in,
        "d_out": n.d_out,
        "choi": [[[float(z.real), float(z.imag)] for z in row] for row in n.choi],
    }


def choi_from_json(data: dict) -> QuantumMap:
    try:
        d_in = int(data["d_in"])
        d_out = int(data["d_out"])
        rows = data["choi"]
        choi = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in rows])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ChannelFormatError(f"malformed channel description: {exc}") from exc
    if d_in < 1 or d_out < 1:
        raise ChannelFormatError("d_in and d_out must be positive")
    if choi.shape != (d_in * d_out, d_in * d_out):
        raise ChannelFormatError(f"choi must be {d_in * d_out}x{d_in * d_out}, got {choi.shape}")
    try:
        return from_choi(choi, d_in, d_out)
    except ValueError as exc:
        raise ChannelFormatError(str(exc)) from exc


def load_channel(path: str | Path) -> QuantumMap:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ChannelFormatError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ChannelFormatError("channel file must hold a JSON object")
    return choi_from_json(data)


def save_channel(n: QuantumMap, path: str | Path) -> None:
    Path(path).write_text(json.dumps(choi_to_json(n)), encoding="utf-8")


def validation_report(n: QuantumMap) -> dict:
    return {
        "d_in": n.d_in,
        "d_out": n.d_out,
        "min_choi_eigenvalue": n.min_choi_eigenvalue,
        "tp_defect": n.tp_defect,
        "is_cp": n.is_cp,
        "is_tp": n.is_tp,
    }


def random_cp_map(d_in: int, d_out: int, rng: np.random.Generator, rank: int | None = None) -> QuantumMap:
    """CP map with a random (generally full-rank, non-TP) Choi state of unit trace."""
    return from_choi(la.random_density(d_in * d_out, rng, rank), d_in, d_out)


def random_channel(d_in: int, d_out: int, rng: np.random.Generator, n_kraus: int | None = None) -> QuantumMap:
    """Channel from a Haar-random isometry ``C^d_in -> C^d_out (x) C^k``."""
    k = d_in * d_out if n_kraus is None else n_kraus
    u = la.random_unitary(d_out * k, rng)[:, :d_in]
    blocks = u.reshape(k, d_out, d_in)
    return from_kraus(list(blocks), d_in, d_out)

