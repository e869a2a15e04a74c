"""Limits, expansion peeling and decay-rate fits for the perturbation series.

The expansion model is ``x_m = c0 + c1 m^{-1/2} + c2 m^{-1} + c3 m^{-3/2} + ...``.
Each coefficient is peeled off in turn: ``c_j`` is the extrapolated limit of
``m^{p_j} (x_m - sum_{i<j} c_i m^{-p_i})``, where the extrapolation is a
least-squares Richardson fit that also removes a few higher half-integer
powers.  Data that already lie in the four-term span (joint residual at
roundoff level) are solved jointly instead, which is exact to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from verblunsky.opuc import InterleavedSequence, make_interleaved
from verblunsky.point_mass import PerturbedSequence, PointMassSpec, fast_deltas
from verblunsky.szego_map import ScalingMap, direct_geronimus

__all__ = [
    "CheckpointSeries",
    "ExpansionFit",
    "DecayFit",
    "StolzCesaro",
    "geometric_grid",
    "stolz_cesaro",
    "richardson_limit",
    "peel_expansion",
    "decay_exponent",
    "delta_series",
    "jacobi_perturbation",
    "verify_theorem1",
    "reference_c3",
    "DEFAULT_POWERS",
    "EXP_SLOPE_LIMIT",
]

DEFAULT_POWERS = (0.0, 0.5, 1.0, 1.5)
UNSTABLE = 0.5
EXP_SLOPE_LIMIT = 1e-4


def reference_c3(tau_inf: float) -> float:
    """Third-order constant ``1 + 1/(2 tau_inf)`` claimed for the Delta expansion."""
    return 1.0 + 1.0 / (2.0 * tau_inf)


@dataclass(frozen=True)
class CheckpointSeries:
    m: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if m.shape != v.shape or m.ndim != 1:
            raise ValueError("m and values must be 1-d arrays of equal length")
        if np.any(np.diff(m) <= 0):
            raise ValueError("checkpoint indices must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("checkpoint values must be finite")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.m)

    def window(self, lo: float, hi: float) -> CheckpointSeries:
        keep = (self.m >= lo) & (self.m <= hi)
        return CheckpointSeries(self.m[keep], self.values[keep])


def geometric_grid(lo: int, hi: int, ratio: float = 2.0) -> np.ndarray:
    """Integers ``round(lo * ratio^k)`` up to ``hi``, deduplicated; ``hi`` is included."""
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= lo <= hi")
    if ratio <= 1.0:
        raise ValueError("ratio must exceed 1")
    count = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9)) + 1
    pts = {int(round(lo * ratio ** k)) for k in range(count)}
    pts.add(int(hi))
    return np.array(sorted(p for p in pts if lo <= p <= hi))


class StolzCesaro(NamedTuple):
    limit: float
    error: float


def stolz_cesaro(gamma: CheckpointSeries, theta: CheckpointSeries, tail: int = 1) -> StolzCesaro:
    """Limit of ``gamma_k / theta_k`` through difference quotients.

    ``limit`` averages the last ``tail`` quotients; ``error`` is the spread
    between the last quotient and the one before it.
    """
    g = np.asarray(gamma.values, dtype=float)
    t = np.asarray(theta.values, dtype=float)
    if g.shape != t.shape or len(t) < 3:
        raise ValueError("need two aligned series of length >= 3")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("theta must be positive and strictly increasing")
    q = np.diff(g) / np.diff(t)
    tail = max(1, min(tail, len(q)))
    return StolzCesaro(float(q[-tail:].mean()), float(abs(q[-1] - q[-2])))


def richardson_limit(m, y, exponents: Sequence[float]) -> float:
    """Constant term of the least-squares fit ``y ~ L + sum_k d_k m^{-e_k}``.

    With as many points as unknowns this is classical Richardson
    extrapolation; exponents are dropped from the top if points run short.
    """
    m = np.asarray(m, dtype=float)
    y = np.asarray(y, dtype=float)
    ex = list(exponents)[: max(0, len(m) - 1)]
    if not ex:
        return float(y[-1])
    t = m / m[-1]
    A = np.column_stack([np.ones_like(t)] + [t ** -e for e in ex])
    # column scaling keeps the solve well posed over wide windows
    norms = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / norms, y, rcond=None)
    return float(coef[0] / norms[0])


@dataclass(frozen=True)
class ExpansionFit:
    """Peeled coefficients with per-coefficient stability.

    ``stability[j]`` is ``|c_j(full) - c_j(half)| / max(|c_j(full)|, 1)``
    where the half window drops the upper half (in log scale) of the
    checkpoints, i.e. the change when the window is doubled.
    """

    c0: float
    c1: float
    c2: float
    c3: float
    stability: tuple
    residual: float
    window: tuple
    paper_c3_reference: float | None = None
    flagged: bool = False

    @property
    def coefficients(self) -> tuple:
        return (self.c0, self.c1, self.c2, self.c3)

    @property
    def c3_deviation(self) -> float | None:
        if self.paper_c3_reference is None:
            return None
        return self.c3 - self.paper_c3_reference

    def as_dict(self) -> dict:
        out = asdict(self)
        out["stability"] = list(self.stability)
        out["window"] = list(self.window)
        out["c3_deviation"] = self.c3_deviation
        return out


def _peel(m: np.ndarray, x: np.ndarray, powers, extra: int) -> list[float]:
    tail = [powers[-1] + 0.5 * (k + 1) for k in range(extra)]
    coeffs: list[float] = []
    for j, p in enumerate(powers):
        resid = x - sum(c * m ** -pi for c, pi in zip(coeffs, powers))
        y = m ** p * resid
        ex = [q - p for q in list(powers[j + 1:]) + tail]
        coeffs.append(richardson_limit(m, y, ex))
    return coeffs


def _joint(m: np.ndarray, x: np.ndarray, powers) -> tuple[list[float], float]:
    t = m / m[-1]
    A = np.column_stack([t ** -p for p in powers])
    norms = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / norms, x, rcond=None)
    coeffs = [float(c / s * m[-1] ** p) for c, s, p in zip(coef, norms, powers)]
    resid = float(np.max(np.abs(x - (A / norms) @ coef)))
    return coeffs, resid


def _fit(m: np.ndarray, x: np.ndarray, powers, extra: int) -> list[float]:
    """Joint solve when the data already sit in the model span, peeling otherwise."""
    if len(m) > len(powers):
        coeffs, resid = _joint(m, x, powers)
        if resid <= 64 * np.finfo(float).eps * max(float(np.max(np.abs(x))), 1e-300):
            return coeffs
    return _peel(m, x, powers, extra)


def peel_expansion(series: CheckpointSeries, powers: Sequence[float] = DEFAULT_POWERS,
                   extra_terms: int = 2, paper_c3_reference: float | None = None,
                   min_decades: float = 2.0) -> ExpansionFit:
    """Fit ``sum_j c_j m^{-p_j}`` by successive peeling; see the module docstring."""
    powers = tuple(float(p) for p in powers)
    if len(powers) != 4:
        raise ValueError("expansion model has exactly four powers")
    m, x = series.m, series.values
    if len(m) < 2 or math.log10(m[-1] / m[0]) < min_decades - 1e-12:
        raise ValueError(f"window spans less than {min_decades} decades")
    full = _fit(m, x, powers, extra_terms)
    half_mask = m <= math.sqrt(m[0] * m[-1]) * (1 + 1e-12)
    if half_mask.sum() < 2:
        half_mask[:2] = True
    half = _fit(m[half_mask], x[half_mask], powers, extra_terms)
    stability = tuple(abs(f - h) / max(abs(f), 1.0) for f, h in zip(full, half))
    model = sum(c * m ** -p for c, p in zip(full, powers))
    residual = float(np.max(np.abs(x - model)))
    return ExpansionFit(*full, stability=stability, residual=residual,
                        window=(float(m[0]), float(m[-1])),
                        paper_c3_reference=paper_c3_reference,
                        flagged=any(s > UNSTABLE for s in stability))


@dataclass(frozen=True)
class DecayFit:
    """Power-law fit ``log|v| = slope log n + intercept`` plus the exponential test.

    ``exp_slope`` is the slope of ``log|v|`` against ``n`` over the upper half
    of the window; geometric decay would make it a nonzero constant.
    """

    slope: float
    intercept: float
    r2: float
    exp_slope: float
    window: tuple

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)

    @property
    def non_exponential(self) -> bool:
        return abs(self.exp_slope) <= EXP_SLOPE_LIMIT

    def as_dict(self) -> dict:
        out = asdict(self)
        out["window"] = list(self.window)
        out["non_exponential"] = self.non_exponential
        return out


def decay_exponent(n, values) -> DecayFit:
    """Least-squares decay exponent of positive ``values`` sampled at ``n``."""
    n = np.asarray(n, dtype=float)
    v = np.asarray(values, dtype=float)
    if n.shape != v.shape or len(n) < 3:
        raise ValueError("need at least three aligned samples")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("decay fit needs positive finite values")
    ln, lv = np.log(n), np.log(v)
    slope, intercept = np.polyfit(ln, lv, 1)
    pred = slope * ln + intercept
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    r2 = 1.0 - float(np.sum((lv - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    top = n >= 0.5 * (n[0] + n[-1])
    if top.sum() < 2:
        top[-2:] = True
    exp_slope = float(np.polyfit(n[top], lv[top], 1)[0])
    return DecayFit(float(slope), float(intercept), r2, exp_slope, (float(n[0]), float(n[-1])))


def delta_series(seq: InterleavedSequence, spec: PointMassSpec, m_values) -> tuple[CheckpointSeries, CheckpointSeries]:
    """``Delta_{2m}(1)`` and ``Delta_{2m+1}(1)`` at the checkpoints, via the ratio-space path."""
    m_values = np.asarray(m_values, dtype=int)
    even, odd = fast_deltas(seq, spec, int(m_values.max()) + 1)
    return CheckpointSeries(m_values, even[m_values]), CheckpointSeries(m_values, odd[m_values])


@dataclass
class JacobiPerturbation:
    """Base and perturbed Jacobi parameters at ``y``-level, ``a_1..a_N`` at index 0.."""

    smap: ScalingMap
    beta: float
    a_base: np.ndarray
    b_base: np.ndarray
    a_pert: np.ndarray
    b_pert: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def da2(self) -> np.ndarray:
        return self.a_pert ** 2 - self.a_base ** 2

    @property
    def db(self) -> np.ndarray:
        return self.b_pert - self.b_base

    def scaled_up(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        f = self.smap.factor
        return self.a_base / f, self.b_base / f, self.a_pert / f, self.b_pert / f


def jacobi_perturbation(x0: float, beta: float, N: int, prefix_policy: str = "clamp") -> JacobiPerturbation:
    """Circle-side pipeline: interleaved base, point at ``zeta = sign(x0)``, Geronimus relations."""
    smap = ScalingMap.from_x0(x0)
    seq = make_interleaved(smap.tau_inf, prefix_policy)
    spec = PointMassSpec.at_one(beta) if smap.sign > 0 else PointMassSpec.at_minus_one(beta)
    pert = PerturbedSequence(seq, spec)
    base_jc = direct_geronimus(seq, N)
    pert_jc = direct_geronimus(pert, N)
    return JacobiPerturbation(smap, beta, base_jc.a, base_jc.b, pert_jc.a, pert_jc.b,
                              extra={"seq": seq, "spec": spec, "perturbed": pert})


def _scaled_limit(n: np.ndarray, v: np.ndarray) -> float:
    """Limit of ``n^{3/2} v_n`` with ``n^{-1/2}``, ``n^{-1}`` corrections removed."""
    return richardson_limit(n, n ** 1.5 * v, (0.5, 1.0, 1.5))


def verify_theorem1(x0: float, beta: float, N: int = 10 ** 5, window: tuple = (10 ** 3, 10 ** 5),
                    m_grid: Sequence[int] | None = None, oracle_depth: tuple = (25, 40),
                    line_nodes: int = 200, slope_tol: float = 0.05,
                    oracle_tol: tuple = (1e-6, 1e-8)) -> dict:
    """Run the whole chain for an outside point ``x0`` and gather fits and verdicts.

    The returned mapping follows the report layout
    ``{config, series_stats, fits, oracle, verdicts}``.
    """
    from verblunsky import oracle as orc

    if not abs(x0) > 2.0:
        raise ValueError(f"|x0| must exceed 2, got {x0!r}")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    lo, hi = window
    N = max(N, hi + 1)
    jp = jacobi_perturbation(x0, beta, N)
    smap, seq, spec = jp.smap, jp.extra["seq"], jp.extra["spec"]
    tau_inf = smap.tau_inf

    # row k holds a_{k+1}; the b_{n+1}, a_{n+1}^2 series are indexed by n
    n = np.arange(lo, hi + 1)
    b_series = np.abs(jp.b_pert[n])
    a2_series = np.abs(jp.da2[n])
    fit_b = decay_exponent(n, b_series)
    fit_a2 = decay_exponent(n, a2_series)
    f = smap.factor
    fit_b_up = decay_exponent(n, b_series / f)
    fit_a2_up = decay_exponent(n, a2_series / f ** 2)
    b_const = _scaled_limit(n.astype(float), jp.b_pert[n])
    a2_const = _scaled_limit(n.astype(float), jp.da2[n])

    # Delta magnitudes agree between zeta = +1 and -1, so the fast path serves both
    grid = np.asarray(m_grid) if m_grid is not None else geometric_grid(2 ** 7, 2 ** 20, 2.0)
    even, odd = delta_series(seq, PointMassSpec.at_one(beta), grid)
    c3_ref = reference_c3(tau_inf)
    fit_even = peel_expansion(even, paper_c3_reference=c3_ref)
    fit_odd = peel_expansion(odd, paper_c3_reference=c3_ref)

    circle_depth, line_depth = oracle_depth
    moments = orc.add_point_to_moments(orc.moments_from_alpha(seq, circle_depth), spec)
    circle = orc.levinson(moments, circle_depth)
    pert = jp.extra["perturbed"]
    circle_diff = float(np.max(np.abs(circle - pert.values(circle_depth))))
    quad = orc.gauss_quadrature(direct_geronimus(seq, line_nodes), line_nodes)
    line = orc.stieltjes(orc.insert_node(quad, 2.0 * smap.sign, beta), line_depth)
    line_diff = float(max(np.max(np.abs(line.a - jp.a_pert[:line_depth])),
                          np.max(np.abs(line.b - jp.b_pert[:line_depth]))))
    rotation = None
    if smap.sign < 0:
        from verblunsky.point_mass import rotation_defect
        rotation = rotation_defect(seq, beta, 101)

    cited_b = -0.5
    cited_a2 = 1.0 / (2.0 * (1.0 + tau_inf))
    verdicts = {
        "b_exponent": abs(fit_b.slope + 1.5) <= slope_tol,
        "a2_exponent": abs(fit_a2.slope + 1.5) <= slope_tol,
        "b_non_exponential": fit_b.non_exponential,
        "a2_non_exponential": fit_a2.non_exponential,
        "delta_c0": abs(fit_even.c0 + tau_inf) <= 1e-6 and abs(fit_odd.c0 + tau_inf) <= 1e-6,
        "delta_parity_agreement": all(abs(u - v) <= 1e-4 for u, v in
                                      zip(fit_even.coefficients[:3], fit_odd.coefficients[:3])),
        "circle_oracle": circle_diff <= oracle_tol[0],
        "line_oracle": line_diff <= oracle_tol[1],
    }
    if rotation is not None:
        verdicts["rotation_identity"] = rotation <= 1e-10
    verdicts["all"] = all(verdicts.values())

    return {
        "config": {"x0": x0, "beta": beta, "y": smap.y, "tau_inf": tau_inf, "k0": seq.k0,
                   "zeta": int(smap.sign), "window": [lo, hi], "m_grid": [int(v) for v in grid]},
        "series_stats": {
            "b_pert_y": {"slope": fit_b.slope, "n32_limit": b_const,
                         "exp_slope": fit_b.exp_slope, "r2": fit_b.r2},
            "a2_diff_y": {"slope": fit_a2.slope, "n32_limit": a2_const,
                          "exp_slope": fit_a2.exp_slope, "r2": fit_a2.r2},
            "b_pert_scaled": {"slope": fit_b_up.slope, "n32_limit": b_const / f,
                              "exp_slope": fit_b_up.exp_slope},
            "a2_diff_scaled": {"slope": fit_a2_up.slope, "n32_limit": a2_const / f ** 2,
                               "exp_slope": fit_a2_up.exp_slope},
        },
        "fits": {
            "delta_even": fit_even.as_dict(),
            "delta_odd": fit_odd.as_dict(),
            "c0": fit_even.c0, "c1": fit_even.c1, "c2": fit_even.c2, "c3": fit_even.c3,
            "stability": list(fit_even.stability),
            "paper_reference_values": {
                "c0": -tau_inf, "c1": 1.0, "c2": 0.0, "c3": c3_ref,
                "b_n32_y": cited_b, "a2_n32_y": cited_a2,
                "b_n32_scaled": cited_b / f, "a2_n32_scaled": cited_a2 / f ** 2,
            },
            "deviations": {
                "c0": fit_even.c0 + tau_inf, "c1": fit_even.c1 - 1.0, "c2": fit_even.c2,
                "c3": fit_even.c3 - c3_ref, "c3_odd": fit_odd.c3 - c3_ref,
                "b_n32_y": b_const - cited_b, "a2_n32_y": a2_const - cited_a2,
            },
        },
        "oracle": {
            "max_abs_diff": max(circle_diff, line_diff),
            "circle_max_abs_diff": circle_diff,
            "line_max_abs_diff": line_diff,
            "depth": {"circle": circle_depth, "line": line_depth, "line_nodes": line_nodes},
            "rotation_defect": rotation,
        },
        "verdicts": verdicts,
    }
