"""Command-line front end.

    verblunsky circle   --tau-inf -0.6 --beta 0.3 --n-max 1048576 --out delta.csv
    verblunsky line     --x0 2.5 --beta 0.3
    verblunsky fit      --tau-inf -0.6 --beta 0.3 --out fit.json
    verblunsky verify   --x0 2.5 --beta 0.3 --out report.json
    verblunsky pipeline --x0 2.5 --beta 0.3 --out line.csv

Exit codes: 0 success, 1 computation error, 2 failed verification, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from verblunsky import oracle
from verblunsky.asymptotics import (
    delta_series,
    geometric_grid,
    jacobi_perturbation,
    reference_c3,
    peel_expansion,
    verify_theorem1,
)
from verblunsky.opuc import PREFIX_POLICIES, InvalidCoefficient, make_interleaved
from verblunsky.point_mass import PerturbedSequence, PointMassSpec
from verblunsky.szego_map import ScalingMap, direct_geronimus

logger = logging.getLogger("verblunsky")

EXIT_OK, EXIT_COMPUTE, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64
MODES = ("circle", "line", "fit", "verify", "pipeline")
DEFAULT_N_MAX = {"circle": 2 ** 20, "fit": 2 ** 20, "line": 64, "verify": 10 ** 5, "pipeline": 10 ** 5}
LINE_TOL = 1e-8


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str
    beta: float
    tau_inf: float | None = None
    y: float | None = None
    x0: float | None = None
    n_max: int = 2 ** 20
    n_min: int | None = None
    ratio: float = 2.0
    oracle_depth: tuple = (25, 40)
    line_nodes: int = 200
    prefix_policy: str = "clamp"
    out: str | None = None

    def __post_init__(self):
        if self.n_min is None:
            object.__setattr__(self, "n_min", min(2 ** 7, self.n_max))
        given = [k for k in ("tau_inf", "y", "x0") if getattr(self, k) is not None]
        if len(given) != 1:
            raise UsageError("exactly one of --tau-inf, --y, --x0 is required")
        if not 0.0 < self.beta < 1.0:
            raise UsageError("--beta must lie in (0, 1)")
        if self.n_max < 64:
            raise UsageError("--n-max must be at least 64")
        if not 1 <= self.n_min <= self.n_max:
            raise UsageError("--n-min must lie in [1, n-max]")
        if self.ratio <= 1.0:
            raise UsageError("--ratio must exceed 1")
        if self.prefix_policy not in PREFIX_POLICIES:
            raise UsageError(f"--prefix-policy must be one of {PREFIX_POLICIES}")
        try:
            self.scaling
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    @property
    def scaling(self) -> ScalingMap:
        if self.x0 is not None:
            return ScalingMap.from_x0(self.x0)
        if self.y is not None:
            return ScalingMap(self.y)
        return ScalingMap.from_tau_inf(self.tau_inf)

    @property
    def tau(self) -> float:
        if self.tau_inf is not None:
            return self.tau_inf
        return self.scaling.tau_inf

    @property
    def signed_x0(self) -> float:
        return self.scaling.x0

    def spec(self) -> PointMassSpec:
        if self.scaling.sign > 0:
            return PointMassSpec.at_one(self.beta)
        return PointMassSpec.at_minus_one(self.beta)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["oracle_depth"] = list(self.oracle_depth)
        d["derived"] = {"y": self.scaling.y, "x0": self.signed_x0, "tau_inf": self.tau}
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="verblunsky", description="Point-mass perturbation of Verblunsky and Jacobi coefficients.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--tau-inf", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--n-max", type=int)
    p.add_argument("--n-min", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--oracle-depth", help="circle,line depths, e.g. 25,40")
    p.add_argument("--line-nodes", type=int)
    p.add_argument("--prefix-policy", choices=PREFIX_POLICIES)
    p.add_argument("--out")
    p.add_argument("--config", help="flat key=value file; flags take precedence")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


_CASTS = {"tau_inf": float, "y": float, "x0": float, "beta": float, "n_max": int, "n_min": int,
          "ratio": float, "line_nodes": int, "prefix_policy": str, "out": str, "oracle_depth": str}


def _parse_depth(text) -> tuple:
    parts = [int(v) for v in str(text).split(",")]
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or min(parts) < 1:
        raise UsageError("--oracle-depth takes one or two positive integers")
    return tuple(parts)


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    merged = {}
    if args.config:
        try:
            file_values = read_config_file(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        for key, value in file_values.items():
            if key not in _CASTS:
                raise UsageError(f"unknown config key {key!r}")
            try:
                merged[key] = _CASTS[key](value)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {value!r}") from exc
    for key in _CASTS:
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    if "beta" not in merged:
        raise UsageError("--beta is required")
    if "oracle_depth" in merged:
        merged["oracle_depth"] = _parse_depth(merged["oracle_depth"])
    merged.setdefault("n_max", DEFAULT_N_MAX[args.mode])
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    return RunConfig(mode=args.mode, **merged)


def _fmt(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise FloatingPointError("non-finite value in output")
    return f"{x:.17g}"


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join([str(int(row[0]))] + [_fmt(v) for v in row[1:]]))
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    try:
        return json.dumps(obj, indent=2, allow_nan=False) + "\n"
    except ValueError as exc:
        raise FloatingPointError(str(exc)) from exc


def _interleaved(cfg: RunConfig):
    return make_interleaved(cfg.tau, cfg.prefix_policy)


def run_circle(cfg: RunConfig) -> int:
    seq = _interleaved(cfg)
    spec = cfg.spec()
    grid = geometric_grid(cfg.n_min, cfg.n_max, cfg.ratio)
    taus = seq.taus(int(grid.max()) + 1)
    if spec.zeta == 1:
        even, odd = delta_series(seq, spec, grid)
        de, do = even.values, odd.values
    else:
        vals = PerturbedSequence(seq, spec).values(2 * int(grid.max()) + 2)
        de, do = vals[2 * grid], vals[2 * grid + 1] - taus[grid]
    rows = [(m, de[i], do[i], de[i], taus[m] + do[i]) for i, m in enumerate(grid)]
    _write(cfg, _csv(["m", "delta_even", "delta_odd", "alpha_even_pert", "alpha_odd_pert"], rows))
    return EXIT_OK


def run_line(cfg: RunConfig) -> int:
    seq = _interleaved(cfg)
    spec = cfg.spec()
    depth, nodes = cfg.oracle_depth[1], cfg.line_nodes
    if depth >= nodes:
        raise UsageError("line oracle depth must be below the node count")
    quad = oracle.gauss_quadrature(direct_geronimus(seq, nodes), nodes)
    line = oracle.stieltjes(oracle.insert_node(quad, 2.0 * cfg.scaling.sign, cfg.beta), depth)
    pert = direct_geronimus(PerturbedSequence(seq, spec), depth)
    da, db = np.abs(line.a - pert.a), np.abs(line.b - pert.b)
    rows = [(n + 1, line.a[n], line.b[n], pert.a[n], pert.b[n], da[n], db[n]) for n in range(depth)]
    _write(cfg, _csv(["n", "a_oracle", "b_oracle", "a_pert", "b_pert", "abs_diff_a", "abs_diff_b"], rows))
    worst = float(max(da.max(), db.max()))
    logger.info("line oracle max abs diff %.3e (tolerance %.0e)", worst, LINE_TOL)
    return EXIT_OK if worst <= LINE_TOL else EXIT_VERIFY


def run_fit(cfg: RunConfig) -> int:
    seq = _interleaved(cfg)
    grid = geometric_grid(cfg.n_min, cfg.n_max, cfg.ratio)
    even, odd = delta_series(seq, PointMassSpec.at_one(cfg.beta), grid)
    ref = reference_c3(cfg.tau)
    fe = peel_expansion(even, paper_c3_reference=ref)
    fo = peel_expansion(odd, paper_c3_reference=ref)
    cited = {"c0": -cfg.tau, "c1": 1.0, "c2": 0.0, "c3": ref}
    fits = {"c0": fe.c0, "c1": fe.c1, "c2": fe.c2, "c3": fe.c3,
            "stability": list(fe.stability),
            "paper_reference_values": cited,
            "deviations": {k: v - cited[k] for k, v in zip(("c0", "c1", "c2", "c3"), fe.coefficients)},
            "delta_even": fe.as_dict(), "delta_odd": fo.as_dict()}
    report = {"config": cfg.as_dict(),
              "series_stats": {"m": [int(m) for m in grid], "count": len(grid)},
              "fits": fits,
              "verdicts": {"even_stable": not fe.flagged, "odd_stable": not fo.flagged}}
    _write(cfg, _json(report))
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    report = verify_theorem1(cfg.signed_x0, cfg.beta, N=cfg.n_max + 1,
                             window=(10 ** 3, cfg.n_max),
                             m_grid=geometric_grid(cfg.n_min, 2 ** 20, cfg.ratio),
                             oracle_depth=cfg.oracle_depth, line_nodes=cfg.line_nodes)
    report["config"]["run"] = cfg.as_dict()
    _write(cfg, _json(report))
    return EXIT_OK if report["verdicts"]["all"] else EXIT_VERIFY


def run_pipeline(cfg: RunConfig) -> int:
    grid = geometric_grid(cfg.n_min, cfg.n_max, cfg.ratio)
    jp = jacobi_perturbation(cfg.signed_x0, cfg.beta, int(grid.max()), cfg.prefix_policy)
    a0, b0, a1, b1 = jp.scaled_up()
    rows = []
    for n in grid:
        k = n - 1
        w = float(n) ** 1.5
        rows.append((n, a0[k], b0[k], a1[k], b1[k], w * (a1[k] ** 2 - a0[k] ** 2), w * b1[k]))
    _write(cfg, _csv(["n", "a_base", "b_base", "a_pert", "b_pert", "da2_scaled", "db_scaled"], rows))
    return EXIT_OK


RUNNERS = {"circle": run_circle, "line": run_line, "fit": run_fit,
           "verify": run_verify, "pipeline": run_pipeline}


def run(cfg: RunConfig) -> int:
    return RUNNERS[cfg.mode](cfg)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, InvalidCoefficient, ValueError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
