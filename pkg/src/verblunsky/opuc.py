"""Verblunsky sequences and band-edge evaluation of orthonormal OPUC.

Conventions: ``Phi_{n+1}(z) = z Phi_n(z) - conj(alpha_n) Phi_n^*(z)`` for the
monic polynomials, ``phi_n = Phi_n / ||Phi_n||`` and
``||Phi_n|| = prod_{j<n} (1 - |alpha_j|^2)^{1/2}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from verblunsky.scaled import ScaledComplex, ScaledReal

__all__ = [
    "InvalidCoefficient",
    "VerblunskySequence",
    "ExplicitSequence",
    "InterleavedSequence",
    "ConstantInterleaved",
    "make_interleaved",
    "SzegoEvaluation",
    "initial_state",
    "szego_step",
    "szego_states",
    "eval_at_one",
    "kernel_ratio_step",
    "PREFIX_POLICIES",
]

PREFIX_POLICIES = ("clamp", "ramp")


class InvalidCoefficient(ValueError):
    """A Verblunsky coefficient left the open unit disk."""

    def __init__(self, n: int, alpha: complex):
        super().__init__(f"|alpha_{n}| = {abs(alpha):.17g} is not < 1")
        self.n = n
        self.alpha = alpha


class VerblunskySequence:
    """Deterministic generator ``n -> alpha_n`` with ``|alpha_n| < 1``."""

    kind = "abstract"

    def alpha(self, n: int) -> complex:
        raise NotImplementedError

    def __getitem__(self, n: int):
        if n < 0:
            raise IndexError("Verblunsky coefficients are indexed from 0")
        return self.alpha(n)

    @property
    def is_real(self) -> bool:
        return False

    def values(self, count: int) -> np.ndarray:
        """First ``count`` coefficients as an array (real dtype if the sequence is real)."""
        dtype = float if self.is_real else complex
        return np.array([self.alpha(n) for n in range(count)], dtype=dtype)


class ExplicitSequence(VerblunskySequence):
    """Finitely many coefficients followed by zeros (a Bernstein-Szego measure)."""

    kind = "explicit"

    def __init__(self, coefficients: Sequence[complex]):
        coeffs = list(coefficients)
        for n, a in enumerate(coeffs):
            if not abs(a) < 1.0:
                raise InvalidCoefficient(n, a)
        self._real = all(complex(a).imag == 0.0 for a in coeffs)
        self._coeffs = [float(complex(a).real) if self._real else complex(a) for a in coeffs]

    @property
    def is_real(self) -> bool:
        return self._real

    def alpha(self, n: int):
        if n < len(self._coeffs):
            return self._coeffs[n]
        return 0.0 if self._real else 0j

    def __len__(self) -> int:
        return len(self._coeffs)

    def __repr__(self) -> str:
        return f"ExplicitSequence({self._coeffs!r})"


class InterleavedSequence(VerblunskySequence):
    """``alpha_{2k} = 0``, ``alpha_{2k+1} = tau_k`` with ``tau_k = tau_inf - 1/sqrt(k)``.

    The rule is used for ``k >= k0``, the first index where it lands in
    ``(-1, 0)``.  Below ``k0`` the prefix policy decides:

    ``"clamp"``
        ``tau_k = tau_{k0}``.
    ``"ramp"``
        linear from ``-1 + (1 + tau_{k0}) / (k0 + 1)`` up to ``tau_{k0}``;
        strictly increasing, which makes the Jacobi ``a_n`` strictly
        increasing from ``n = 1`` on.
    """

    kind = "interleaved_tau"

    def __init__(self, tau_inf: float, prefix_policy: str = "clamp"):
        tau_inf = float(tau_inf)
        if not -1.0 < tau_inf < 0.0:
            raise ValueError(f"tau_inf must lie in (-1, 0), got {tau_inf!r}")
        if prefix_policy not in PREFIX_POLICIES:
            raise ValueError(f"unknown prefix policy {prefix_policy!r}")
        self.tau_inf = tau_inf
        self.prefix_policy = prefix_policy
        # tau_inf - 1/sqrt(k) > -1  <=>  k > 1/(1 + tau_inf)^2
        bound = 1.0 / (1.0 + tau_inf) ** 2
        k0 = max(1, math.floor(bound) + 1)
        while tau_inf - 1.0 / math.sqrt(k0) <= -1.0:
            k0 += 1
        self.k0 = k0
        self._tau_k0 = tau_inf - 1.0 / math.sqrt(k0)

    @property
    def is_real(self) -> bool:
        return True

    def tau(self, k: int) -> float:
        if k >= self.k0:
            return self.tau_inf - 1.0 / math.sqrt(k)
        if k < 0:
            raise IndexError("tau is indexed from 0")
        if self.prefix_policy == "clamp":
            return self._tau_k0
        step = (1.0 + self._tau_k0) / (self.k0 + 1)
        return self._tau_k0 - (self.k0 - k) * step

    def taus(self, count: int) -> np.ndarray:
        """``tau_0 .. tau_{count-1}`` as an array."""
        k = np.arange(count, dtype=float)
        out = self.tau_inf - 1.0 / np.sqrt(np.maximum(k, self.k0))
        head = min(count, self.k0)
        out[:head] = [self.tau(j) for j in range(head)]
        return out

    def alpha(self, n: int) -> float:
        if n % 2 == 0:
            return 0.0
        return self.tau(n // 2)

    def values(self, count: int) -> np.ndarray:
        out = np.zeros(count)
        out[1::2] = self.taus(count // 2)
        return out

    def __repr__(self) -> str:
        return f"InterleavedSequence(tau_inf={self.tau_inf!r}, prefix_policy={self.prefix_policy!r})"


class ConstantInterleaved(InterleavedSequence):
    """``alpha_{2k} = 0``, ``alpha_{2k+1} = tau`` for a fixed ``tau`` in ``(-1, 1)``."""

    def __init__(self, tau: float):
        tau = float(tau)
        if not -1.0 < tau < 1.0:
            raise ValueError(f"tau must lie in (-1, 1), got {tau!r}")
        self.tau_inf = tau
        self.prefix_policy = "clamp"
        self.k0 = 0
        self._tau_k0 = tau

    def tau(self, k: int) -> float:
        if k < 0:
            raise IndexError("tau is indexed from 0")
        return self.tau_inf

    def taus(self, count: int) -> np.ndarray:
        return np.full(count, self.tau_inf)

    def __repr__(self) -> str:
        return f"ConstantInterleaved({self.tau_inf!r})"


def make_interleaved(tau_inf: float, prefix_policy: str = "clamp") -> InterleavedSequence:
    return InterleavedSequence(tau_inf, prefix_policy)


@dataclass(frozen=True, slots=True)
class SzegoEvaluation:
    """State of the normalized Szego recursion at a point ``zeta`` of the circle.

    ``phi`` and ``phi_star`` are ``phi_n(zeta)`` and ``phi_n^*(zeta)``;
    ``kernel_diag`` is ``K_n(zeta) = sum_{j<=n} |phi_j(zeta)|^2``;
    ``monic_norm`` is ``||Phi_n||``; ``alpha_last_monic`` is ``Phi_n(0)``.
    """

    n: int
    zeta: complex
    phi: ScaledComplex
    phi_star: ScaledComplex
    kernel_diag: ScaledReal
    monic_norm: ScaledReal
    alpha_last_monic: complex

    @property
    def alpha_prev(self) -> complex:
        """``alpha_{n-1}``, recovered from ``Phi_n(0) = -conj(alpha_{n-1})``."""
        return -self.alpha_last_monic.conjugate()


def initial_state(zeta: complex) -> SzegoEvaluation:
    zeta = complex(zeta)
    if abs(abs(zeta) - 1.0) > 1e-14:
        raise ValueError(f"zeta must lie on the unit circle, got |zeta| = {abs(zeta)!r}")
    return SzegoEvaluation(
        n=0,
        zeta=zeta,
        phi=ScaledComplex.one(),
        phi_star=ScaledComplex.one(),
        kernel_diag=ScaledReal.one(),
        monic_norm=ScaledReal.one(),
        alpha_last_monic=1 + 0j,
    )


def szego_step(state: SzegoEvaluation, alpha_n: complex) -> SzegoEvaluation:
    """Advance ``state`` from index ``n`` to ``n + 1`` using ``alpha_n``."""
    alpha_n = complex(alpha_n)
    a2 = alpha_n.real * alpha_n.real + alpha_n.imag * alpha_n.imag
    if not a2 < 1.0:
        raise InvalidCoefficient(state.n, alpha_n)
    rho = math.sqrt(1.0 - a2)
    z = state.zeta
    zphi = state.phi * z
    phi = (zphi - state.phi_star * alpha_n.conjugate()) / rho
    phi_star = (state.phi_star - zphi * alpha_n) / rho
    return SzegoEvaluation(
        n=state.n + 1,
        zeta=z,
        phi=phi,
        phi_star=phi_star,
        kernel_diag=state.kernel_diag + phi.abs2(),
        monic_norm=state.monic_norm * rho,
        alpha_last_monic=-alpha_n.conjugate(),
    )


def szego_states(seq: VerblunskySequence, zeta: complex, n_max: int) -> Iterator[SzegoEvaluation]:
    """Yield the states at indices ``0, 1, ..., n_max``."""
    state = initial_state(zeta)
    yield state
    for n in range(n_max):
        state = szego_step(state, seq[n])
        yield state


def eval_at_one(seq: VerblunskySequence, n: int) -> ScaledReal:
    """``phi_n(1) = prod_{j<n} sqrt((1 - alpha_j) / (1 + alpha_j))`` for real coefficients."""
    if not seq.is_real:
        raise ValueError("eval_at_one needs a real Verblunsky sequence")
    mantissa, exponent = 1.0, 0
    for j in range(n):
        a = float(seq[j])
        if not abs(a) < 1.0:
            raise InvalidCoefficient(j, a)
        if a == 0.0:
            continue
        mantissa *= math.sqrt((1.0 - a) / (1.0 + a))
        m, e = math.frexp(mantissa)
        mantissa, exponent = m, exponent + e
    return ScaledReal.normalized(mantissa, exponent)


def kernel_ratio_step(s_m: float, tau_m: float) -> float:
    """``s_{m+1}`` from ``s_m = K_{2m}(1) / phi_{2m}(1)^2`` for the interleaved family."""
    rho = (1.0 - tau_m) / (1.0 + tau_m)
    return (s_m + 1.0 + rho) / rho


def unit_point(omega: float) -> complex:
    """``e^{i omega}``, exact at the four axis points."""
    quarter = omega / (math.pi / 2)
    if quarter == round(quarter):
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(round(quarter)) % 4]
    return cmath.exp(1j * omega)
