"""Experiment runner: sieve, count, predict, compare and emit CSV reports.

Reports carry the fully resolved configuration in a '#'-prefixed header
block, print reals with 17 significant digits, and end lines with LF, so
byte-identical reruns are the determinism contract.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from dataclasses import dataclass, field, fields
from math import log

import numpy as np

from . import convolution, counts, density, divisors, minorants, sieve
from .scales import NU_CAP, log2x, nu_scale, script_l


@dataclass
class ExperimentConfig:
    command: str = ""
    x: int = 10**8
    y: int = 10**6
    nu_min: int = 1
    nu_max: int = 8
    a: float = 4.5
    c: float = 0.5
    gamma: float = 6.0
    epsilon: float = 0.1
    b_const: float = 10.0
    cap_mode: str = "bigOmega"
    regime: str = "auto"  # auto | saddle | series | landau
    prime_limit: int = 1_000_000
    tol: float = 1e-4
    newton_tol: float = 1e-12
    tau_cap: int | None = None
    t_cap: int | None = None
    threads: int = 1
    segment_size: int = sieve.DEFAULT_SEGMENT
    seed: int = 0
    out: str = "-"
    config: str | None = None

    def euler(self) -> density.EulerProductConfig:
        return density.EulerProductConfig(
            prime_limit=self.prime_limit,
            tail_tolerance=self.tol,
            newton_tolerance=self.newton_tol,
        )


_INT_KEYS = {
    "x", "y", "nu_min", "nu_max", "prime_limit", "tau_cap", "t_cap",
    "threads", "segment_size", "seed",
}
_FLOAT_KEYS = {"a", "c", "gamma", "epsilon", "b_const", "tol", "newton_tol"}


def load_config_file(path: str) -> dict:
    """Plain `key = value` lines; '#' starts a comment; keys use snake_case."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value, got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key in _INT_KEYS:
                out[key] = int(val)
            elif key in _FLOAT_KEYS:
                out[key] = float(val)
            else:
                out[key] = val
    return out


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """File values override defaults; explicit CLI flags override the file."""
    cfg = ExperimentConfig(command=args.command)
    if getattr(args, "config", None):
        cfg.config = args.config
        file_vals = load_config_file(args.config)
        for key, val in file_vals.items():
            if key in {f.name for f in fields(ExperimentConfig)}:
                setattr(cfg, key, val)
            else:
                raise ValueError(f"unknown config key {key!r}")
    for f in fields(ExperimentConfig):
        cli_val = getattr(args, f.name, None)
        if cli_val is not None and f.name not in ("command", "config"):
            setattr(cfg, f.name, cli_val)
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


class ReportWriter:
    def __init__(self, cfg: ExperimentConfig, columns: list[str]):
        self.cfg = cfg
        self.columns = columns
        self.rows: list[list] = []
        self.row_errors = 0

    def add(self, *values):
        self.rows.append(list(values))
        err_idx = self.columns.index("error") if "error" in self.columns else None
        if err_idx is not None and values[err_idx]:
            self.row_errors += 1

    def render(self) -> str:
        # threads is an execution detail: reports must be byte-identical
        # across thread counts, so it is not echoed
        lines = ["# nufactor report"]
        for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
            if f.name == "threads":
                continue
            lines.append(f"# {f.name} = {_fmt(getattr(self.cfg, f.name))}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self) -> int:
        text = self.render()
        if self.cfg.out == "-":
            sys.stdout.write(text)
        else:
            with open(self.cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return 1 if self.row_errors else 0


def _auto_regime(nu: int, log_x: float, choice: str) -> str:
    if choice != "auto":
        return choice
    return "smallNuSeries" if nu < log2x(log_x) ** 2 else "saddle"


def _predict(nu: int, log_x: float, cfg: ExperimentConfig) -> density.DensityEstimate:
    regime = _auto_regime(nu, log_x, cfg.regime)
    euler = cfg.euler()
    if regime in ("smallNuSeries", "series"):
        return density.density_small_nu(nu, log_x, euler)
    if regime == "landau":
        return density.density_landau(nu, log_x)
    return density.density_ht(nu, log_x, euler)


def run_sieve(cfg: ExperimentConfig) -> int:
    table = sieve.table_for_interval(cfg.x, cfg.y)
    hd = counts.omega_histogram(
        cfg.x, cfg.y, "distinct", table, cfg.threads, cfg.segment_size
    )
    hm = counts.omega_histogram(
        cfg.x, cfg.y, "withMultiplicity", table, cfg.threads, cfg.segment_size
    )
    w = ReportWriter(cfg, ["nu", "count_distinct", "count_with_multiplicity"])
    top = max(int(np.max(np.nonzero(hd.counts)[0])), int(np.max(np.nonzero(hm.counts)[0])))
    for nu in range(0, top + 1):
        w.add(nu, hd[nu], hm[nu])
    return w.write()


def run_compare(cfg: ExperimentConfig) -> int:
    log_x = log(cfg.x)
    if not cfg.x ** (17.0 / 30.0) <= cfg.y <= cfg.x:
        sys.stderr.write(
            f"warning: y={cfg.y} outside the recommended window "
            f"[x^(17/30), x] = [{cfg.x ** (17.0 / 30.0):.4g}, {cfg.x}]\n"
        )
    table = sieve.table_for_interval(cfg.x, cfg.y)
    hist = counts.omega_histogram(
        cfg.x, cfg.y, "distinct", table, cfg.threads, cfg.segment_size
    )
    w = ReportWriter(cfg, ["nu", "exact", "predicted", "ratio", "regime", "shadow"])
    for nu in range(cfg.nu_min, cfg.nu_max + 1):
        est = _predict(nu, log_x, cfg)  # module errors abort the run
        predicted = cfg.y * math.exp(est.log_delta)
        exact = hist[nu]
        ratio = exact / predicted if predicted > 0 else float("nan")
        shadow = nu > script_l(log_x, cfg.a)
        w.add(nu, exact, predicted, ratio, est.regime, shadow)
    return w.write()


def run_minorant(cfg: ExperimentConfig) -> int:
    table = sieve.table_for_interval(cfg.x, cfg.y)
    hist = counts.omega_histogram(
        cfg.x, cfg.y, "distinct", table, cfg.threads, cfg.segment_size
    )
    w = ReportWriter(
        cfg,
        [
            "nu", "pi", "m_prime", "m_sharp", "capture_prime", "capture_sharp",
            "distinct_in_s_nu", "clamps_active", "degenerate", "error",
        ],
    )
    for nu in range(cfg.nu_min, cfg.nu_max + 1):
        try:
            pc = minorants.minorant_prime(
                cfg.x, cfg.y, nu, tau_cap=cfg.tau_cap, table=table,
                segment_size=cfg.segment_size,
            )
            sc = minorants.minorant_sharp(
                cfg.x, cfg.y, nu, a=cfg.a, tau_cap=cfg.tau_cap, t_cap=cfg.t_cap,
                table=table, segment_size=cfg.segment_size,
            )
            pi = hist[nu]
            w.add(
                nu, pi, pc.pairs, sc.count,
                pc.pairs / pi if pi else float("nan"),
                sc.count / pi if pi else float("nan"),
                pc.distinct_in_s_nu,
                sc.clamps_active or cfg.tau_cap is not None,
                sc.degenerate, "",
            )
        except (minorants.ParameterError, sieve.SieveRangeError) as e:
            w.add(nu, hist[nu], 0, 0, float("nan"), float("nan"), 0, False, False, str(e))
    return w.write()


def run_divisor(cfg: ExperimentConfig) -> int:
    table = sieve.table_for_interval(cfg.x, cfg.y)
    w = ReportWriter(
        cfg,
        ["k", "total", "cap", "cap_mode", "paper_bound_log", "within_bound",
         "regime_shadow", "error"],
    )
    for k in range(max(cfg.nu_min, 1), cfg.nu_max + 1):
        try:
            rep = divisors.short_divisor_sum(
                cfg.x, cfg.y, k, a=cfg.a, cap_mode=cfg.cap_mode,
                b_const=cfg.b_const, gamma=cfg.gamma, epsilon=cfg.epsilon,
                table=table, segment_size=cfg.segment_size,
            )
            w.add(k, rep.total, rep.cap, rep.cap_mode, rep.paper_bound_log,
                  rep.within_bound, rep.regime_shadow, "")
        except Exception as e:  # per-row failures recorded, run continues
            w.add(k, 0.0, 0.0, cfg.cap_mode, 0.0, False, True, str(e))
    return w.write()


def run_density(cfg: ExperimentConfig) -> int:
    log_x = log(cfg.x)
    euler = cfg.euler()
    w = ReportWriter(
        cfg,
        ["nu", "log_delta", "regime", "log_delta_landau", "crude_lo", "crude_hi",
         "error_scale", "e_nu", "shadow", "error"],
    )
    for nu in range(cfg.nu_min, cfg.nu_max + 1):
        try:
            est = _predict(nu, log_x, cfg)
            lan = density.density_landau(nu, log_x)
            try:
                crude_lo, crude_hi = density.density_crude_bounds(nu, log_x)
            except ValueError:
                crude_lo = crude_hi = float("nan")
            shadow = nu > script_l(log_x, 2.0)
            w.add(nu, est.log_delta, est.regime, lan.log_delta, crude_lo,
                  crude_hi, est.error_scale, est.e_nu, shadow, "")
        except Exception as e:
            w.add(nu, float("nan"), "", float("nan"), float("nan"), float("nan"),
                  float("nan"), float("nan"), True, str(e))
    return w.write()


def run_saddle(cfg: ExperimentConfig) -> int:
    log_x = log(cfg.x)
    euler = cfg.euler()
    rng = random.Random(cfg.seed)
    w = ReportWriter(
        cfg,
        ["nu", "rho", "alpha", "residual_r", "residual_a", "iterations",
         "prime_limit", "corridor_ok", "star_minimal", "error"],
    )
    for nu in range(cfg.nu_min, cfg.nu_max + 1):
        try:
            sp = density.solve_saddle(nu, log_x, euler)
            obj0 = density.saddle_objective(sp.rho, sp.alpha, nu, log_x, euler)
            star = True
            for _ in range(20):
                r = sp.rho * math.exp(rng.uniform(-0.1, 0.1))
                a = sp.alpha + rng.uniform(-0.3, 0.3) * (sp.alpha - 1.0)
                if density.saddle_objective(r, a, nu, log_x, euler) < obj0:
                    star = False
            corridor = sp.corridor_ok()
            w.add(nu, sp.rho, sp.alpha, sp.residual_r, sp.residual_a,
                  sp.iterations, sp.truncation.prime_limit,
                  "" if corridor is None else corridor, star, "")
        except Exception as e:
            w.add(nu, float("nan"), float("nan"), float("nan"), float("nan"),
                  0, euler.prime_limit, "", False, str(e))
    return w.write()


_COMMANDS = {
    "sieve": run_sieve,
    "compare": run_compare,
    "minorant": run_minorant,
    "divisor": run_divisor,
    "density": run_density,
    "saddle": run_saddle,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nufactor",
        description="Short-interval prime-factor-count statistics "
        "against saddle-point density predictions",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--x", type=int)
        p.add_argument("--y", type=int)
        p.add_argument("--nu-min", dest="nu_min", type=int)
        p.add_argument("--nu-max", dest="nu_max", type=int)
        p.add_argument("--a", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--b-const", dest="b_const", type=float)
        p.add_argument("--cap-mode", dest="cap_mode", choices=["omega", "bigOmega", "none"])
        p.add_argument("--regime", choices=["auto", "saddle", "series", "landau"])
        p.add_argument("--config", type=str)
        p.add_argument("--out", type=str)
        p.add_argument("--threads", type=int)
        p.add_argument("--tau-cap", dest="tau_cap", type=int)
        p.add_argument("--t-cap", dest="t_cap", type=int)
        p.add_argument("--prime-limit", dest="prime_limit", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--newton-tol", dest="newton_tol", type=float)
        p.add_argument("--segment-size", dest="segment_size", type=int)
        p.add_argument("--seed", type=int)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[cfg.command](cfg)
    except Exception as e:
        sys.stderr.write(f"nufactor: error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
