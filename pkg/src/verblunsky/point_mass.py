"""Verblunsky coefficients after inserting a pure point on the unit circle.

The measure ``dnu = (1 - beta) dmu + beta delta_zeta`` is handled three ways:

* the kernel-damped correction ``alpha_n(dnu) = alpha_n + Delta_n(zeta)`` with
  ``Delta_n = rho_n conj(phi_{n+1}(zeta)) phi_n^*(zeta) / (c + K_n(zeta))`` and
  ``c = (1 - beta) / beta`` (general path plus a ratio-space fast path at
  ``zeta = 1`` for the interleaved family),
* the monic kernel update of ``Phi_{n+1}`` evaluated at ``z = 0``,
* the sum over ``alpha_{j-1} ||Phi_{n+1}|| / ||Phi_j|| phi_j(zeta)``.

The last two are O(n) per coefficient and only meant for cross-checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from verblunsky.opuc import (
    InterleavedSequence,
    InvalidCoefficient,
    SzegoEvaluation,
    VerblunskySequence,
    initial_state,
    szego_step,
    unit_point,
)

__all__ = [
    "PointMassSpec",
    "PerturbationRecord",
    "PerturbedSequence",
    "delta_n",
    "fast_deltas",
    "delta_even_fast",
    "delta_odd_fast",
    "perturb_sequence",
    "geronimus_alpha",
    "simon_alpha",
    "perturb_at_minus_one",
    "rotation_defect",
    "SLOW_FORMULA_MAX_N",
]

logger = logging.getLogger(__name__)

SLOW_FORMULA_MAX_N = 64


@dataclass(frozen=True)
class PointMassSpec:
    """Pure point of weight ``beta`` at ``zeta = e^{i omega}``."""

    omega: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"point weight must lie in (0, 1), got {self.beta!r}")
        if not 0.0 <= self.omega < 2 * math.pi:
            raise ValueError(f"omega must lie in [0, 2pi), got {self.omega!r}")

    @classmethod
    def at_one(cls, beta: float) -> PointMassSpec:
        return cls(0.0, beta)

    @classmethod
    def at_minus_one(cls, beta: float) -> PointMassSpec:
        return cls(math.pi, beta)

    @property
    def zeta(self) -> complex:
        return unit_point(self.omega)

    @property
    def damping(self) -> float:
        """``(1 - beta) / beta``, the constant added to the kernel diagonal."""
        return (1.0 - self.beta) / self.beta


@dataclass(frozen=True)
class PerturbationRecord:
    n: int
    delta: complex
    alpha_base: complex
    alpha_perturbed: complex


def delta_n(state: SzegoEvaluation, next_state: SzegoEvaluation, spec: PointMassSpec) -> complex:
    """``Delta_n(zeta)`` from the recursion states at ``n`` and ``n + 1``.

    The quotient is taken between exponent-scaled values, so the geometric
    growth of ``phi`` and ``K`` cancels.  Once ``K_n`` outgrows the damping
    constant by more than the mantissa width the constant drops out, which is
    the intended limit.
    """
    if next_state.n != state.n + 1:
        raise ValueError("next_state must follow state by one step")
    alpha = next_state.alpha_prev
    rho = math.sqrt(1.0 - (alpha.real * alpha.real + alpha.imag * alpha.imag))
    numerator = next_state.phi.conjugate() * state.phi_star * rho
    denominator = state.kernel_diag + spec.damping
    return complex(numerator / denominator)


def _require_fast_path(seq: VerblunskySequence, spec: PointMassSpec) -> InterleavedSequence:
    if not isinstance(seq, InterleavedSequence):
        raise TypeError("the ratio-space path needs an interleaved sequence")
    if spec.zeta != 1:
        raise ValueError("the ratio-space path is only valid at zeta = 1")
    return seq


def fast_deltas(seq: InterleavedSequence, spec: PointMassSpec, count: int) -> tuple[np.ndarray, np.ndarray]:
    """``Delta_{2m}(1)`` and ``Delta_{2m+1}(1)`` for ``m = 0 .. count-1``.

    Works with ``s_m = K_{2m}(1) / phi_{2m}(1)^2`` and
    ``u_m = 1 / phi_{2m}(1)^2`` only, so nothing overflows; ``u_m`` underflows
    to zero, after which the damping constant is invisible.
    """
    seq = _require_fast_path(seq, spec)
    c = spec.damping
    taus = seq.taus(count).tolist()
    even = [0.0] * count
    odd = [0.0] * count
    s, u = 1.0, 1.0
    for m, t in enumerate(taus):
        d = c * u + s
        even[m] = 1.0 / d
        odd[m] = (1.0 - t) / (d + 1.0)
        rho = (1.0 - t) / (1.0 + t)
        s = (s + 1.0 + rho) / rho
        u /= rho
    return np.array(even), np.array(odd)


def delta_even_fast(m: int, seq: InterleavedSequence, spec: PointMassSpec) -> float:
    even, _ = fast_deltas(seq, spec, m + 1)
    return float(even[m])


def delta_odd_fast(m: int, seq: InterleavedSequence, spec: PointMassSpec) -> float:
    _, odd = fast_deltas(seq, spec, m + 1)
    return float(odd[m])


def _record(n: int, base: complex, delta: complex) -> PerturbationRecord:
    perturbed = base + delta
    if not abs(perturbed) < 1.0:
        raise InvalidCoefficient(n, perturbed)
    return PerturbationRecord(n, delta, base, perturbed)


def _general_records(seq: VerblunskySequence, spec: PointMassSpec) -> Iterator[PerturbationRecord]:
    state = initial_state(spec.zeta)
    n = 0
    while True:
        alpha = complex(seq[n])
        nxt = szego_step(state, alpha)
        yield _record(n, alpha, delta_n(state, nxt, spec))
        state = nxt
        n += 1


def _general_alphas(seq: VerblunskySequence, spec: PointMassSpec) -> Iterator[complex]:
    """Same values as :func:`_general_records` with plain floats and one shared exponent.

    ``phi`` and ``phi^*`` have equal modulus on the circle, so a single
    running exponent ``e`` covers both, and the kernel is kept in units of
    ``2^{2e}``.
    """
    z = spec.zeta
    c = spec.damping
    phi = phis = 1 + 0j
    kern = 1.0
    e = 0
    n = 0
    while True:
        alpha = complex(seq[n])
        a2 = alpha.real * alpha.real + alpha.imag * alpha.imag
        if not a2 < 1.0:
            raise InvalidCoefficient(n, alpha)
        rho = math.sqrt(1.0 - a2)
        zp = z * phi
        nphi = (zp - alpha.conjugate() * phis) / rho
        nphis = (phis - alpha * zp) / rho
        delta = rho * nphi.conjugate() * phis / (math.ldexp(c, -2 * e) + kern)
        perturbed = alpha + delta
        if not abs(perturbed) < 1.0:
            raise InvalidCoefficient(n, perturbed)
        yield perturbed
        phi, phis = nphi, nphis
        kern += phi.real * phi.real + phi.imag * phi.imag
        if abs(phi) > 2.0 ** 100:
            phi *= 2.0 ** -100
            phis *= 2.0 ** -100
            kern *= 2.0 ** -200
            e += 100
        n += 1


def perturb_sequence(seq: VerblunskySequence, spec: PointMassSpec, N: int) -> list[PerturbationRecord]:
    """Records for ``n < N`` through the general recursion path."""
    if N < 1:
        raise ValueError("N must be at least 1")
    records = []
    for rec in _general_records(seq, spec):
        records.append(rec)
        if len(records) == N:
            return records
    raise AssertionError("unreachable")


class PerturbedSequence(VerblunskySequence):
    """Overlay ``alpha_n(dnu)`` on a base sequence, computed lazily and cached.

    Uses the ratio-space path for interleaved bases at ``zeta = 1`` and the
    general recursion otherwise.
    """

    kind = "perturbed"

    def __init__(self, base: VerblunskySequence, spec: PointMassSpec, method: str = "auto"):
        if method not in ("auto", "general", "fast"):
            raise ValueError(f"unknown method {method!r}")
        fast_ok = isinstance(base, InterleavedSequence) and spec.zeta == 1
        if method == "fast" and not fast_ok:
            raise ValueError("fast path needs an interleaved base and zeta = 1")
        self.base = base
        self.spec = spec
        self.method = "fast" if (method == "auto" and fast_ok) else ("general" if method == "auto" else method)
        self._real = base.is_real and spec.zeta.imag == 0.0
        self._cache: list = []
        self._general = None

    @property
    def is_real(self) -> bool:
        return self._real

    def _extend(self, count: int) -> None:
        if self.method == "fast":
            m_count = max(count // 2 + 1, len(self._cache))
            even, odd = fast_deltas(self.base, self.spec, m_count)
            taus = self.base.taus(m_count)
            vals = np.empty(2 * m_count)
            vals[0::2] = even
            vals[1::2] = taus + odd
            bad = np.flatnonzero(~(np.abs(vals) < 1.0))
            if bad.size:
                raise InvalidCoefficient(int(bad[0]), complex(vals[bad[0]]))
            self._cache = vals.tolist()
            return
        if self._general is None:
            self._general = _general_alphas(self.base, self.spec)
        while len(self._cache) < count:
            a = next(self._general)
            self._cache.append(a.real if self._real else a)

    def alpha(self, n: int):
        if n >= len(self._cache):
            self._extend(n + 1)
        return self._cache[n]

    def values(self, count: int) -> np.ndarray:
        if count > len(self._cache):
            self._extend(count)
        return np.array(self._cache[:count], dtype=float if self._real else complex)


def _point_values(seq: VerblunskySequence, z: complex, count: int):
    """Plain-float ``phi_j(z)``, ``phi_j^*(z)`` and ``||Phi_j||`` for ``j < count``."""
    phi, phis, norm = [1 + 0j], [1 + 0j], [1.0]
    for j in range(count - 1):
        a = complex(seq[j])
        r2 = 1.0 - abs(a) ** 2
        if not r2 > 0.0:
            raise InvalidCoefficient(j, a)
        rho = math.sqrt(r2)
        p, q = phi[-1], phis[-1]
        phi.append((z * p - a.conjugate() * q) / rho)
        phis.append((q - a * z * p) / rho)
        norm.append(norm[-1] * rho)
    for v in phi:
        if not math.isfinite(abs(v)):
            raise OverflowError("kernel terms left the binary64 range")
    return phi, phis, norm


def _check_slow(n: int, max_n: int) -> None:
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > max_n:
        raise ValueError(f"n = {n} exceeds the cross-check bound {max_n}")


def geronimus_alpha(seq: VerblunskySequence, spec: PointMassSpec, n: int,
                    max_n: int = SLOW_FORMULA_MAX_N) -> complex:
    """``alpha_n(dnu) = -conj(Phi_{n+1}(0, dnu))`` from the monic kernel update.

    ``Phi_{n+1}(z, dnu) = Phi_{n+1}(z) - Phi_{n+1}(zeta) K_n(z, zeta) / (c + K_n(zeta, zeta))``
    with ``K_n(z, w) = sum_{j<=n} conj(phi_j(w)) phi_j(z)``.
    """
    _check_slow(n, max_n)
    zeta = spec.zeta
    phi_z, _, norm = _point_values(seq, zeta, n + 2)
    phi_0, _, _ = _point_values(seq, 0j, n + 2)
    k_zz = sum(abs(v) ** 2 for v in phi_z[: n + 1])
    k_0z = sum(w.conjugate() * v for v, w in zip(phi_0[: n + 1], phi_z[: n + 1]))
    monic_zeta = norm[n + 1] * phi_z[n + 1]
    monic_0 = norm[n + 1] * phi_0[n + 1]
    perturbed_0 = monic_0 - monic_zeta * k_0z / (spec.damping + k_zz)
    return -perturbed_0.conjugate()


def simon_alpha(seq: VerblunskySequence, spec: PointMassSpec, n: int,
                max_n: int = SLOW_FORMULA_MAX_N) -> complex:
    """``alpha_n - beta / q_n * conj(phi_{n+1}(zeta)) * sum_j alpha_{j-1} ||Phi_{n+1}|| / ||Phi_j|| phi_j(zeta)``

    with ``q_n = (1 - beta) + beta K_n(zeta)`` and ``alpha_{-1} = -1``.
    """
    _check_slow(n, max_n)
    beta = spec.beta
    phi, _, norm = _point_values(seq, spec.zeta, n + 2)
    q = (1.0 - beta) + beta * sum(abs(v) ** 2 for v in phi[: n + 1])
    total = 0j
    for j in range(n + 1):
        a_prev = -1.0 if j == 0 else complex(seq[j - 1])
        total += a_prev * (norm[n + 1] / norm[j]) * phi[j]
    return complex(seq[n]) - beta / q * phi[n + 1].conjugate() * total


def rotation_defect(seq: VerblunskySequence, beta: float, N: int) -> float:
    """``max_n |alpha_n(dnu_{-1}) - (-1)^{n+1} alpha_n(dnu_{+1})|`` over ``n < N``.

    Both sides run through the general path independently.
    """
    minus = perturb_sequence(seq, PointMassSpec.at_minus_one(beta), N)
    plus = perturb_sequence(seq, PointMassSpec.at_one(beta), N)
    return max(abs(m.alpha_perturbed - (-1) ** (m.n + 1) * p.alpha_perturbed)
               for m, p in zip(minus, plus))


def perturb_at_minus_one(seq: VerblunskySequence, spec: PointMassSpec, N: int,
                         tol: float = 1e-10) -> list[PerturbationRecord]:
    """Insertion at ``zeta = -1``, cross-checked against the rotated ``zeta = 1`` run.

    The base must be invariant under rotation by pi (``alpha_{2n} = 0``); a
    violated identity is logged, not raised.
    """
    if spec.zeta != -1:
        raise ValueError("spec must put the point at zeta = -1")
    for n in range(0, N, 2):
        if seq[n] != 0:
            raise ValueError("base sequence is not invariant under rotation by pi")
    records = perturb_sequence(seq, spec, N)
    plus = perturb_sequence(seq, PointMassSpec.at_one(spec.beta), N)
    defect = max(abs(m.alpha_perturbed - (-1) ** (m.n + 1) * p.alpha_perturbed)
                 for m, p in zip(records, plus))
    if defect > tol:
        logger.warning("rotation identity violated: defect %.3e > %.1e", defect, tol)
    return records
