"""Coefficient-level Szego mapping between the circle and ``[-2, 2]``.

Indexing: ``alpha_n`` is 0-indexed, ``a_n`` and ``b_n`` are 1-indexed as in
``x p_n = a_{n+1} p_{n+1} + b_{n+1} p_n + a_n p_{n-1}``.  Arrays store
``a_1`` at position 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from verblunsky.opuc import VerblunskySequence

__all__ = [
    "UnsupportedInput",
    "NotInClass",
    "JacobiCoefficients",
    "ScalingMap",
    "direct_geronimus",
    "inverse_symmetric",
    "scale",
    "support_arcs",
]


class UnsupportedInput(ValueError):
    pass


class NotInClass(ValueError):
    """The coefficients are not the image of a symmetric two-band circle measure."""

    def __init__(self, n: int, tau: float):
        super().__init__(f"tau_{n} = {tau:.17g} is outside (-1, 1)")
        self.n = n
        self.tau = tau


@dataclass(frozen=True)
class JacobiCoefficients:
    """Jacobi parameters ``a_1..a_N`` (positive) and ``b_1..b_N``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be 1-d arrays of equal length")
        if not np.all(a > 0):
            raise ValueError("Jacobi a_n must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self) -> int:
        return len(self.a)

    def a_n(self, n: int) -> float:
        return float(self.a[n - 1])

    def b_n(self, n: int) -> float:
        return float(self.b[n - 1])

    def truncate(self, N: int) -> JacobiCoefficients:
        return JacobiCoefficients(self.a[:N], self.b[:N])


@dataclass(frozen=True)
class ScalingMap:
    """Scaling by ``y / 2`` between ``[-2, 2]`` and ``[-y, y]``.

    ``sign`` selects which band edge carries the inserted point: the point
    at ``x = 2 * sign`` scales up to ``x0 = 4 * sign / y``.
    """

    y: float
    sign: int = 1

    def __post_init__(self):
        if not 0.0 < self.y < 2.0:
            raise ValueError(f"y must lie in (0, 2), got {self.y!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_x0(cls, x0: float) -> ScalingMap:
        if not abs(x0) > 2.0:
            raise ValueError(f"|x0| must exceed 2, got {x0!r}")
        return cls(4.0 / abs(x0), 1 if x0 > 0 else -1)

    @classmethod
    def from_tau_inf(cls, tau_inf: float, sign: int = 1) -> ScalingMap:
        if not -1.0 < tau_inf < 0.0:
            raise ValueError(f"tau_inf must lie in (-1, 0), got {tau_inf!r}")
        return cls(2.0 * math.sqrt(1.0 - tau_inf * tau_inf), sign)

    @property
    def factor(self) -> float:
        return self.y / 2.0

    @property
    def x0(self) -> float:
        return self.sign * 4.0 / self.y

    @property
    def tau_inf(self) -> float:
        return -math.sqrt(1.0 - self.factor ** 2)


def _real_alphas(seq, count: int) -> np.ndarray:
    if isinstance(seq, VerblunskySequence):
        if not seq.is_real:
            raise UnsupportedInput("direct_geronimus needs real Verblunsky coefficients")
        vals = seq.values(count)
    else:
        vals = np.asarray(seq)[:count]
        if np.iscomplexobj(vals):
            if np.any(vals.imag != 0):
                raise UnsupportedInput("direct_geronimus needs real Verblunsky coefficients")
            vals = vals.real
        if len(vals) < count:
            raise ValueError(f"need {count} coefficients, got {len(vals)}")
    vals = np.asarray(vals, dtype=float)
    if np.any(np.abs(vals) >= 1.0):
        raise ValueError("Verblunsky coefficients must lie in (-1, 1)")
    return vals


def direct_geronimus(alpha, N: int) -> JacobiCoefficients:
    """``(a_n, b_n)``, ``n = 1..N``, of the Szego image of a symmetric circle measure.

    ``a_{n+1}^2 = (1 - alpha_{2n-1})(1 - alpha_{2n}^2)(1 + alpha_{2n+1})`` and
    ``b_{n+1} = (1 - alpha_{2n-1}) alpha_{2n} - (1 + alpha_{2n-1}) alpha_{2n-2}``
    with ``alpha_{-1} = -1``; ``alpha_{-2}`` only meets the zero factor
    ``1 + alpha_{-1}`` and is set to 0.

    ``alpha`` is a real :class:`VerblunskySequence` or an array holding at
    least ``2N`` coefficients.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    vals = _real_alphas(alpha, 2 * N)
    # ext[k + 2] = alpha_k for k = -2 .. 2N-1
    ext = np.concatenate(([0.0, -1.0], vals))
    n = np.arange(N)
    am1 = ext[2 * n + 1]    # alpha_{2n-1}
    a0 = ext[2 * n + 2]     # alpha_{2n}
    ap1 = ext[2 * n + 3]    # alpha_{2n+1}
    am2 = ext[2 * n]        # alpha_{2n-2}
    a2 = (1.0 - am1) * (1.0 - a0 * a0) * (1.0 + ap1)
    b = (1.0 - am1) * a0 - (1.0 + am1) * am2
    return JacobiCoefficients(np.sqrt(a2), b)


def inverse_symmetric(a, N: int | None = None) -> np.ndarray:
    """``tau_0..tau_{N-1}`` with ``a_{n+1}^2 = (1 - tau_{n-1})(1 + tau_n)``, ``tau_{-1} = -1``.

    Inverts :func:`direct_geronimus` on the ``b = 0`` class, i.e. circle
    measures with ``alpha_{2n} = 0`` and ``alpha_{2n+1} = tau_n``.
    """
    if isinstance(a, JacobiCoefficients):
        a = a.a
    a = np.asarray(a, dtype=float)
    if N is None:
        N = len(a)
    if len(a) < N:
        raise ValueError(f"need {N} values of a, got {len(a)}")
    if np.any(a[:N] <= 0):
        raise ValueError("a_n must be positive")
    taus = np.empty(N)
    prev = -1.0
    for n in range(N):
        t = a[n] * a[n] / (1.0 - prev) - 1.0
        if not -1.0 < t < 1.0:
            raise NotInClass(n, t)
        taus[n] = prev = t
    return taus


def scale(jc: JacobiCoefficients, smap: ScalingMap, direction: str) -> JacobiCoefficients:
    """``down`` multiplies by ``y / 2`` (support ``[-2, 2]`` to ``[-y, y]``), ``up`` divides."""
    if direction == "down":
        return JacobiCoefficients(jc.a * smap.factor, jc.b * smap.factor)
    if direction == "up":
        return JacobiCoefficients(jc.a / smap.factor, jc.b / smap.factor)
    raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")


def support_arcs(y: float) -> tuple[float, tuple[tuple[float, float], tuple[float, float]]]:
    """``theta_y = arccos(y / 2)`` and the arcs ``[theta_y, pi - theta_y]``, ``[pi + theta_y, 2 pi - theta_y]``."""
    if not 0.0 < y < 2.0:
        raise ValueError(f"y must lie in (0, 2), got {y!r}")
    th = math.acos(y / 2.0)
    return th, ((th, math.pi - th), (math.pi + th, 2 * math.pi - th))
