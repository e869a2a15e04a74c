"""Brute-force verification paths that never touch the point-mass formulas.

Circle side: trigonometric moments from the CMV matrix, point insertion on
the moments, Levinson recursion back to Verblunsky coefficients.

Line side: Gauss quadrature from the Jacobi matrix, point insertion on the
nodes, Lanczos/Stieltjes back to Jacobi coefficients.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from verblunsky.opuc import VerblunskySequence
from verblunsky.point_mass import PointMassSpec
from verblunsky.szego_map import JacobiCoefficients

__all__ = [
    "ConditioningError",
    "DegenerateMeasure",
    "TrigMomentVector",
    "DiscreteMeasure",
    "cmv_matrix",
    "moments_from_alpha",
    "add_point_to_moments",
    "levinson",
    "gauss_quadrature",
    "insert_node",
    "stieltjes",
    "MAX_MOMENTS",
    "DEFAULT_DPS",
]

MAX_MOMENTS = 128


class ConditioningError(ArithmeticError):
    def __init__(self, n: int, detail: str):
        super().__init__(f"Toeplitz recursion broke down at n = {n}: {detail}")
        self.n = n


class DegenerateMeasure(ArithmeticError):
    pass


@dataclass(frozen=True)
class TrigMomentVector:
    """``c_k = int e^{-ik theta} dmu(theta)`` for ``k = 0..K``.

    ``c`` is a complex array, or a list of mpmath numbers when ``dps`` is set.
    """

    c: object
    dps: int | None = None

    def __post_init__(self):
        if self.dps is None:
            object.__setattr__(self, "c", np.asarray(self.c, dtype=complex))
        else:
            object.__setattr__(self, "c", list(self.c))

    def as_complex(self) -> np.ndarray:
        return np.array([complex(v) for v in self.c])

    def __len__(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class DiscreteMeasure:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights must have equal length")
        if not np.all(weights > 0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-13:
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1")
        if len(np.unique(nodes)) != len(nodes):
            raise ValueError("nodes must be distinct")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.nodes)

    def moment(self, k: int) -> float:
        return float(np.dot(self.weights, self.nodes ** k))


def cmv_matrix(alphas) -> np.ndarray:
    """Truncated CMV matrix ``L M`` with ``Theta_j = [[conj(a_j), rho_j], [rho_j, -a_j]]``.

    ``L = Theta_0 + Theta_2 + ...`` and ``M = 1 + Theta_1 + Theta_3 + ...``
    (direct sums).  Rows and columns before the last are exact.
    """
    alphas = np.asarray(alphas, dtype=complex)
    size = len(alphas) + 1
    L = np.zeros((size, size), dtype=complex)
    M = np.zeros((size, size), dtype=complex)
    M[0, 0] = 1.0
    for j, a in enumerate(alphas):
        rho = math.sqrt(1.0 - abs(a) ** 2)
        block = np.array([[a.conjugate(), rho], [rho, -a]])
        target = L if j % 2 == 0 else M
        target[j:j + 2, j:j + 2] = block
    # the last index starts a block that lies beyond the truncation
    if len(alphas) % 2 == 0:
        L[size - 1, size - 1] = 1.0
    else:
        M[size - 1, size - 1] = 1.0
    return L @ M


DEFAULT_DPS = 60


def _theta_blocks(alphas, sqrt):
    return [(a.conjugate(), sqrt(1 - abs(a) ** 2), a) for a in alphas]


def _cmv_apply(v: list, blocks) -> list:
    """``C v = L (M v)`` using the 2x2 blocks directly; works for any number type."""
    w = list(v)
    size = len(w)
    for parity in (1, 0):  # M first (odd blocks), then L (even blocks)
        for j in range(parity, len(blocks), 2):
            if j + 1 >= size:
                break
            ca, rho, a = blocks[j]
            x, y = w[j], w[j + 1]
            w[j] = ca * x + rho * y
            w[j + 1] = rho * x - a * y
    return w


def moments_from_alpha(seq: VerblunskySequence, K: int, dps: int | None = DEFAULT_DPS) -> TrigMomentVector:
    """Moments ``c_0..c_K`` as ``conj(<delta_0, C^k delta_0>)``.

    ``dps`` selects mpmath working precision in decimal digits; ``None``
    runs in binary64.  The coefficients themselves are taken as exact.
    """
    if K > MAX_MOMENTS:
        raise ValueError(f"K = {K} exceeds the moment bound {MAX_MOMENTS}")
    size = 2 * K + 4
    alphas = [complex(seq[j]) for j in range(size - 1)]
    if dps is None:
        return TrigMomentVector(_moments(alphas, K, cmath.sqrt, 1 + 0j, 0j))
    with mpmath.workdps(dps):
        c = _moments([mpmath.mpc(a) for a in alphas], K, mpmath.sqrt, mpmath.mpc(1), mpmath.mpc(0))
    return TrigMomentVector(c, dps)


def _moments(alphas, K, sqrt, one, zero):
    blocks = _theta_blocks(alphas, sqrt)
    v = [one] + [zero] * len(alphas)
    out = []
    for _ in range(K + 1):
        out.append(v[0].conjugate())
        v = _cmv_apply(v, blocks)
    return out


def add_point_to_moments(c: TrigMomentVector, spec: PointMassSpec) -> TrigMomentVector:
    """``c_k(dnu) = (1 - beta) c_k + beta e^{-ik omega}``."""
    if c.dps is None:
        k = np.arange(len(c))
        return TrigMomentVector((1.0 - spec.beta) * c.c + spec.beta * spec.zeta.conjugate() ** k)
    with mpmath.workdps(c.dps):
        beta = mpmath.mpf(spec.beta)
        z = spec.zeta
        zbar = mpmath.mpc(z.real, -z.imag)
        out = [(1 - beta) * ck + beta * zbar ** k for k, ck in enumerate(c.c)]
    return TrigMomentVector(out, c.dps)


def levinson(c: TrigMomentVector, N: int) -> np.ndarray:
    """``alpha_0..alpha_{N-1}`` from the Toeplitz moments, rounded to binary64.

    Monic recursion ``Phi_{n+1} = z Phi_n - conj(alpha_n) Phi_n^*`` with
    ``conj(alpha_n) = <1, z Phi_n> / ||Phi_n||^2`` and ``int z^k dmu = conj(c_k)``.
    Runs at the precision the moments carry.  In binary64 the error grows
    roughly like ``eps / ||Phi_n||^4``, so arc-supported measures with
    coefficients near the circle need the mpmath path.
    """
    if N >= len(c):
        raise ValueError(f"need moments up to c_{N}, have {len(c) - 1}")
    if abs(c.c[0] - 1) > 1e-12:
        raise ValueError("c_0 must equal 1")
    if c.dps is None:
        out = _levinson(list(c.c), N, 1 + 0j, 0j)
    else:
        with mpmath.workdps(c.dps):
            out = _levinson(list(c.c), N, mpmath.mpc(1), mpmath.mpc(0))
    return np.array([complex(a) for a in out])


def _levinson(c: list, N: int, one, zero) -> list:
    zmom = [ck.conjugate() for ck in c]
    phi = [one]  # coefficients of Phi_n, low degree first
    energy = one.real
    out = []
    for n in range(N):
        inner = sum((p * m for p, m in zip(phi, zmom[1:n + 2])), zero)
        a = (inner / energy).conjugate()
        if not abs(a) < 1:
            raise ConditioningError(n, f"|alpha| = {float(abs(a)):.3g}")
        out.append(a)
        ca = a.conjugate()
        shifted = [zero] + phi
        reversed_ = [p.conjugate() for p in reversed(phi)] + [zero]
        phi = [s - ca * r for s, r in zip(shifted, reversed_)]
        energy *= 1 - abs(a) ** 2
        if not energy > 0:
            raise ConditioningError(n, "non-positive pivot")
    return out


def _christoffel_weights(jc: JacobiCoefficients, x: np.ndarray) -> np.ndarray:
    """``1 / sum_{k<N} p_k(x_i)^2`` with per-node power-of-two rescaling."""
    N = len(x)
    a, b = jc.a, jc.b
    p_prev = np.zeros(N)
    p = np.ones(N)
    total = np.ones(N)
    shift = np.zeros(N)  # log2 of the factor removed from total
    for k in range(N - 1):
        p_next = ((x - b[k]) * p - (a[k - 1] * p_prev if k else 0.0)) / a[k]
        p_prev, p = p, p_next
        total += p * p
        big = total > 2.0 ** 600
        if big.any():
            total[big] *= 2.0 ** -600
            p[big] *= 2.0 ** -300
            p_prev[big] *= 2.0 ** -300
            shift[big] += 600
    log2w = -(np.log2(total) + shift)
    return np.exp2(log2w - log2w.max())


def gauss_quadrature(jc: JacobiCoefficients, N: int) -> DiscreteMeasure:
    """``N``-point Gauss rule of the measure with Jacobi parameters ``jc``.

    Nodes are the eigenvalues of the ``N x N`` Jacobi matrix.  Weights are
    the Christoffel numbers ``1 / sum_k p_k(x_i)^2``, which equal the squared
    first eigenvector components but keep full relative accuracy when the
    weights span many orders of magnitude.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if len(jc) < N:
        raise ValueError(f"need {N} Jacobi coefficients, have {len(jc)}")
    if N == 1:
        return DiscreteMeasure(np.array([jc.b[0]]), np.ones(1))
    try:
        nodes = eigh_tridiagonal(jc.b[:N], jc.a[:N - 1], eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"tridiagonal eigensolver failed: {exc}") from exc
    weights = _christoffel_weights(jc, nodes)
    # nodes whose weight underflows carry no information at this precision
    keep = weights > 0.0
    return DiscreteMeasure(nodes[keep], weights[keep] / weights[keep].sum())


def insert_node(dm: DiscreteMeasure, x: float, beta: float) -> DiscreteMeasure:
    """``(1 - beta) dm + beta delta_x``."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    nodes = np.append(dm.nodes, x)
    weights = np.append((1.0 - beta) * dm.weights, beta)
    return DiscreteMeasure(nodes, weights / weights.sum())


def stieltjes(dm: DiscreteMeasure, N: int) -> JacobiCoefficients:
    """Lanczos on ``diag(nodes)`` from ``sqrt(weights)`` with full reorthogonalization."""
    if N >= len(dm):
        raise ValueError("N must be smaller than the number of nodes")
    x = dm.nodes
    Q = np.zeros((N + 1, len(x)))
    Q[0] = np.sqrt(dm.weights)
    Q[0] /= np.linalg.norm(Q[0])
    a = np.empty(N)
    b = np.empty(N)
    for n in range(N):
        v = x * Q[n]
        b[n] = np.dot(Q[n], v)
        v -= b[n] * Q[n]
        if n:
            v -= a[n - 1] * Q[n - 1]
        for _ in range(2):
            v -= Q[: n + 1].T @ (Q[: n + 1] @ v)
        a[n] = np.linalg.norm(v)
        if a[n] <= 1e-14:
            raise DegenerateMeasure(f"Lanczos breakdown at step {n + 1}")
        Q[n + 1] = v / a[n]
    return JacobiCoefficients(a, b)
