"""Dense complex matrix algebra and the canonical operators used everywhere else.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Multipartite
operators carry their subsystem dimensions separately as a tuple of ints
(``dims``); the tensor factors are ordered left to right, so the basis index
of ``|i_0 i_1 ... i_k>`` is the row-major flattening of ``(i_0, ..., i_k)``.
"""
from __future__ import annotations

from math import prod
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9

Dims = tuple[int, ...]


class DimensionError(ValueError):
    """Operator shape and subsystem dimensions disagree."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of shape {a.shape}")
    return a


def check_dims(m: np.ndarray, dims: Sequence[int]) -> Dims:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dimensions must be >= 1, got {dims}")
    n = prod(dims)
    if m.shape != (n, n):
        raise DimensionError(f"dims {dims} index a {n}x{n} matrix, got {m.shape}")
    return dims


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def hermiticity_defect(m: np.ndarray) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m - m.conj().T), initial=0.0))


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(m) <= tol


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators, left factor outermost."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, as_matrix(op))
    return out


def permute_systems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new factor ``k`` is old factor ``perm[k]``.

    This is an exact index permutation; no arithmetic touches the entries.
    """
    m = as_matrix(m)
    dims = check_dims(m, dims)
    perm = tuple(perm)
    if sorted(perm) != list(range(len(dims))):
        raise DimensionError(f"{perm} is not a permutation of {len(dims)} systems")
    k = len(dims)
    t = m.reshape(dims + dims)
    t = t.transpose(perm + tuple(k + p for p in perm))
    n = prod(dims)
    return t.reshape(n, n)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems stay in their original relative order. Keeping nothing
    returns the 1x1 matrix holding the full trace.
    """
    m = as_matrix(m)
    dims = check_dims(m, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep={keep} out of range for {len(dims)} systems")
    k = len(dims)
    pool = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * k > len(pool):
        raise DimensionError("too many subsystems")
    row = list(pool[:k])
    col = list(pool[k:2 * k])
    for i in range(k):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    t = m.reshape(dims + dims)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    n = prod(dims[i] for i in keep)
    return r.reshape(n, n)


def partial_transpose(m: np.ndarray, dims: Sequence[int], systems: Iterable[int]) -> np.ndarray:
    m = as_matrix(m)
    dims = check_dims(m, dims)
    k = len(dims)
    axes = list(range(2 * k))
    for s in systems:
        axes[s], axes[k + s] = axes[k + s], axes[s]
    n = prod(dims)
    return m.reshape(dims + dims).transpose(axes).reshape(n, n)


# -- eigensolver -------------------------------------------------------------

def hermitian_eig(m: np.ndarray, tol: float = HERMITIAN_TOL, max_sweeps: int = 60
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.

    Returns ``(w, v)`` with ``w`` real and sorted in descending order and the
    columns of the unitary ``v`` the matching eigenvectors, so that
    ``m == v @ diag(w) @ v.conj().T``.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary and then applies an ordinary real Jacobi rotation.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got {a.shape}")
    defect = hermiticity_defect(a)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian (max |M - M^H| = {defect:.3g})")
    a = hermitize(a).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return a.diagonal().real.copy(), v
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return np.zeros(n), v
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= eps * fro:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= eps * 1e-3 * fro:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                phase = apq / mag
                zeta = (aqq - app) / (2.0 * mag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # R = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                r = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = a[:, [p, q]] @ r
                a[:, p] = cols[:, 0]
                a[:, q] = cols[:, 1]
                rows = r.conj().T @ a[[p, q], :]
                a[p, :] = rows[0]
                a[q, :] = rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                vc = v[:, [p, q]] @ r
                v[:, p] = vc[:, 0]
                v[:, q] = vc[:, 1]
                rotated = True
        if not rotated:
            break
    w = a.diagonal().real
    order = np.argsort(-w, kind="stable")
    return w[order].copy(), v[:, order].copy()


def eigvalsh(m: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix."""
    return hermitian_eig(m)[0]


def min_eigenvalue(m: np.ndarray) -> float:
    return float(hermitian_eig(m)[0][-1])


def is_psd(m: np.ndarray, tol: float = PSD_TOL) -> bool:
    return is_hermitian(m) and min_eigenvalue(m) >= -tol


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = hermitian_eig(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


# -- canonical operators -----------------------------------------------------

def max_entangled(d: int) -> np.ndarray:
    """Phi = (1/d) sum_ij |ii><jj| on C^d (x) C^d."""
    _check_d(d)
    psi = np.eye(d, dtype=complex).reshape(d * d)
    return np.outer(psi, psi) / d


def uniform(d: int) -> np.ndarray:
    _check_d(d)
    return np.eye(d, dtype=complex) / d


def classical_corr(d: int) -> np.ndarray:
    """Upsilon = (1/d) sum_m |mm><mm|."""
    return comparator(d) / d


def comparator(d: int) -> np.ndarray:
    """Omega = sum_m |mm><mm|, a rank-d projector."""
    _check_d(d)
    diag = np.eye(d, dtype=complex).reshape(d * d)
    return np.diag(diag)


_CANONICAL = {
    "max_entangled": max_entangled,
    "uniform": uniform,
    "classical_corr": classical_corr,
    "comparator": comparator,
}


def canonical_operator(kind: str, d: int) -> np.ndarray:
    try:
        factory = _CANONICAL[kind]
    except KeyError:
        raise ValueError(f"unknown canonical operator {kind!r}; choose from {sorted(_CANONICAL)}") from None
    return factory(d)


def _check_d(d: int) -> None:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")


def ket(i: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal basis (Hilbert-Schmidt) of the real space of d x d Hermitian matrices."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    r = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = r
            basis.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[i, j] = -1j * r
            f[j, i] = 1j * r
            basis.append(f)
    return basis


def from_hermitian_coords(coords: np.ndarray, d: int) -> np.ndarray:
    return sum(c * e for c, e in zip(coords, hermitian_basis(d)))


# -- random test objects -----------------------------------------------------

def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return hermitize(g)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (r.diagonal() / np.abs(r.diagonal()))


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
