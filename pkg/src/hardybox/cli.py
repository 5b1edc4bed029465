"""Configuration-driven command-line front end.

Verbs: ``characterize`` (functional tables over the scale grid),
``sandwich`` (two-sided constant bounds), ``verify`` (theorem-consistency
checks with a PASS/FAIL verdict), ``sweep`` (parameter scans with a CSV
aggregate) and ``oracle-regen`` (regenerate dense-grid golden values).

Config files are plain text ``key = value`` lines with dotted sections; see
`parse_config`.  Reports are JSON with sorted keys so identical inputs give
byte-identical files; wall-clock timings go to a separate ``timings.json``
sidecar to keep the main report deterministic.

Exit codes: 0 pass, 1 theorem-consistency failure, 2 usage/config error,
3 numerical nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle as oracle_mod
from .bounds import MULTIPLIERS, optimize_sandwich
from .charf import (
    A_limit,
    B1,
    B2,
    D2,
    Exponents,
    ProblemConfig,
    ScalePoint,
    Tolerances,
    pk_transformed_config,
    rect_corner,
)
from .errors import AccuracyError, ConfigError, ExtrapolationError, HardyboxError
from .funcspace import BoundaryFn, BoundaryPair, SearchPoint, Weight1D, Weight2D
from .ops import GridFn, estimate_norm
from .partition import build_sequence, quadrant_decompose
from .witness import WitnessSpec, witness_bound_check

SCHEMA_VERSION = 1

# Corrected inner factor of the descending corner functional; the printed
# source form degenerates to zero and is recorded here for report readers.
_AWTILDE_NOTE = (
    "descending corner variant uses (V_i(d_i) - V_i(x_i)) inside the integral; "
    "the printed formula's (V_i(d_i) - V_i(d_i)) is an evident typo"
)


@dataclass
class RunReport:
    """One structured document per run; timings are emitted separately."""

    config: dict
    sections: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "config": self.config,
            "tolerances": self.tolerances,
            "sections": self.sections,
        }
        return json.dumps(_sanitize(doc), sort_keys=True, indent=2) + "\n"

    def write(self, out_dir: Path, name: str = "report.json") -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / name
        path.write_text(self.to_json())
        (out_dir / ("timings-" + name)).write_text(
            json.dumps(_sanitize(self.timings), sort_keys=True, indent=2) + "\n"
        )
        return path


def _sanitize(obj):
    """JSON-safe copy: non-finite floats become strings, arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "+inf" if obj > 0 else "-inf"
    return obj


# --------------------------------------------------------------------------
# config parsing


def _parse_scalar(text: str):
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def read_keyvalues(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment; errors carry line numbers."""
    out: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = _parse_scalar(value)
    return out


def _number_list(raw, key: str):
    if isinstance(raw, (int, float)):
        return [float(raw)]
    try:
        return [float(x) for x in str(raw).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a comma-separated number list") from exc


def _weight1d_from(kv: dict, prefix: str, default_kind="power") -> Weight1D:
    kind = kv.get(f"{prefix}.kind", default_kind)
    if kind == "power":
        return Weight1D.power(float(kv.get(f"{prefix}.alpha", 0.0)))
    if kind == "exp_scaled":
        return Weight1D.exp_scaled(
            float(kv.get(f"{prefix}.alpha", 0.0)), float(kv.get(f"{prefix}.beta", 0.0))
        )
    if kind == "sampled":
        grid = _number_list(kv.get(f"{prefix}.grid"), f"{prefix}.grid")
        values = _number_list(kv.get(f"{prefix}.values"), f"{prefix}.values")
        return Weight1D.sampled(grid, values)
    raise ConfigError(f"{prefix}.kind: unknown weight family {kind!r}")


def _weight2d_from(kv: dict, prefix: str) -> Weight2D:
    kind = kv.get(f"{prefix}.kind", "power_pair")
    if kind in ("power_pair", "power"):
        return Weight2D.power_pair(
            float(kv.get(f"{prefix}.beta", 0.0)), float(kv.get(f"{prefix}.gamma", 0.0))
        )
    if kind == "unit":
        return Weight2D.unit()
    if kind == "zero":
        return Weight2D.zero()
    if kind == "separable":
        return Weight2D.separable(
            _weight1d_from(kv, f"{prefix}.w1"), _weight1d_from(kv, f"{prefix}.w2")
        )
    if kind == "scaled_unit":
        return Weight2D.scaled(Weight2D.unit(), float(kv.get(f"{prefix}.factor", 1.0)))
    raise ConfigError(f"{prefix}.kind: unknown 2D weight family {kind!r}")


def _boundary_from(kv: dict, key: str) -> BoundaryFn:
    raw = kv.get(key)
    if raw is None:
        raise ConfigError(f"missing boundary descriptor {key!r}")
    if isinstance(raw, str) and raw.startswith("linear:"):
        return BoundaryFn.linear(float(raw.split(":", 1)[1]))
    if isinstance(raw, str) and raw.startswith("power:"):
        _, c, r = raw.split(":")
        return BoundaryFn.power(float(c), float(r))
    if raw == "sampled":
        return BoundaryFn.sampled(
            _number_list(kv.get(f"{key}.grid"), f"{key}.grid"),
            _number_list(kv.get(f"{key}.values"), f"{key}.values"),
        )
    raise ConfigError(f"{key}: expected 'linear:C', 'power:C:R' or 'sampled', got {raw!r}")


def parse_config(path) -> tuple[ProblemConfig, dict]:
    """Parse and validate a problem description file.

    Returns the validated ProblemConfig plus an options dict (seed, grids,
    sweep spec, debug hooks, raw key/value echo).  Validation exercises the
    weight/boundary invariants and the V-transform integrability check, so
    a bad instance fails here with an actionable message.
    """
    kv = read_keyvalues(path)
    mode = kv.get("mode", "hardy")
    if mode not in ("hardy", "pk"):
        raise ConfigError(f"mode must be 'hardy' or 'pk', got {mode!r}")

    try:
        p = float(kv.get("exponents.p", 2.0))
        q = float(kv.get("exponents.q", p))
        if mode == "hardy" and p <= 1.0:
            raise ConfigError(f"p must exceed 1 (got p={p:g})")
        exps = Exponents(p, q)

        pairs = []
        for ax in ("axis1", "axis2"):
            a = _boundary_from(kv, f"boundaries.{ax}.a")
            b = _boundary_from(kv, f"boundaries.{ax}.b")
            pairs.append(BoundaryPair(a, b))

        eps = float(kv.get("window.eps", 1e-6))
        X = float(kv.get("window.X", 1e6))
        eps2 = float(kv.get("window.eps2", eps))
        X2 = float(kv.get("window.X2", X))
        window = ((eps, X), (eps2, X2))

        tols = Tolerances(
            s_grid=int(kv.get("search.s_grid", 9)),
            t_grid=int(kv.get("search.t_grid", 24)),
            x_grid=int(kv.get("search.x_grid", 16)),
        )

        u = _weight2d_from(kv, "weights.u")
        if mode == "hardy":
            v1 = _weight1d_from(kv, "weights.v1")
            v2 = _weight1d_from(kv, "weights.v2")
            cfg = ProblemConfig(exps=exps, u=u, boundaries=tuple(pairs), v1=v1, v2=v2,
                                window=window, tols=tols, label=str(kv.get("label", "")))
            # Constructibility of the V transforms is part of validation.
            from .charf import _compiled

            try:
                _compiled(cfg)
            except HardyboxError as exc:
                raise ConfigError(
                    f"weights not admissible: {exc} (e.g. 'v1 not integrable at 0 for p={p:g}')"
                ) from exc
        else:
            v2d = _weight2d_from(kv, "weights.v")
            cfg = ProblemConfig(exps=exps, u=u, boundaries=tuple(pairs), v2d=v2d,
                                window=window, tols=tols, label=str(kv.get("label", "")))
    except ConfigError:
        raise
    except HardyboxError as exc:
        raise ConfigError(f"{path}: invalid instance: {exc}") from exc

    options = {
        "mode": mode,
        "seed": int(kv.get("seed", 0)),
        "s_grid": int(kv.get("search.s_grid", 9)),
        "resolution": int(kv.get("search.resolution", 64)),
        "corrupt_upper": kv.get("debug.corrupt_upper"),
        "sweep_param": kv.get("sweep.param"),
        "sweep_values": kv.get("sweep.values"),
        "raw": kv,
    }
    return cfg, options


# --------------------------------------------------------------------------
# command bodies


def _s_values(cfg: ProblemConfig, n: int) -> list[float]:
    p = cfg.exps.p
    h = (p - 1.0) / 40.0
    return [float(s) for s in np.linspace(1.0 + h, p - h, n)]


def _cv_dict(cv) -> dict:
    return {
        "value": cv.value,
        "argmax": [cv.argmax.t1, cv.argmax.t2, cv.argmax.x1, cv.argmax.x2],
        "evaluations": cv.evaluations,
        "converged": cv.converged,
        "diagnostics": cv.diagnostics,
    }


def cmd_characterize(cfg: ProblemConfig, s_grid: int, rect=None) -> dict:
    """Functional tables over the scale grid, with divergence sentinels."""
    svals = _s_values(cfg, s_grid)
    table = {}
    fn = B2 if cfg.mode == "hardy" else D2
    for s1 in svals:
        for s2 in svals:
            cv = fn(cfg, ScalePoint(s1, s2), divergence_check=(s1 == svals[0] and s2 == svals[0]))
            table[f"{s1:.6g},{s2:.6g}"] = _cv_dict(cv)
    section = {"functional": "B2" if cfg.mode == "hardy" else "D2",
               "s_values": svals, "table": table}

    if cfg.mode == "hardy":
        try:
            axes = {}
            for i in (0, 1):
                prob = cfg.axis(i)
                mid = 1.0 + 0.5 * (cfg.exps.p - 1.0)
                axes[f"axis{i + 1}"] = {
                    "B1_mid_s": B1(prob, mid, divergence_check=False).value,
                    "A_limit": _a_limit_entry(prob),
                }
            section["one_dimensional"] = axes
        except HardyboxError as exc:
            section["one_dimensional"] = {"unavailable": str(exc)}

    if rect is not None:
        mid = ScalePoint(1.0 + 0.5 * (cfg.exps.p - 1.0), 1.0 + 0.5 * (cfg.exps.p - 1.0))
        corners = {}
        for variant in ("AW", "AWstar", "AWtilde", "AWtilde_star"):
            corners[variant] = _cv_dict(rect_corner(variant, rect, cfg, mid))
        corners["note"] = _AWTILDE_NOTE
        section["corners"] = corners
    return section


def _a_limit_entry(prob) -> dict:
    try:
        cv = A_limit(prob)
        return {"value": cv.value, "spread": cv.diagnostics.get("spread"),
                "raw": cv.diagnostics.get("raw")}
    except (ExtrapolationError, HardyboxError) as exc:
        return {"error": str(exc)}


def cmd_sandwich(cfg: ProblemConfig, theorem: str, s_grid: int, rect=None) -> dict:
    report = optimize_sandwich(cfg, theorem, s_grid=s_grid, rect=rect)
    out = report.to_dict()
    if theorem == "lemma3":
        out["note"] = _AWTILDE_NOTE
    return out


def _verify_gridfn(cfg: ProblemConfig, resolution: int = 33) -> GridFn:
    """A smooth positive bump over the middle decades of the window."""
    (lo1, hi1), (lo2, hi2) = cfg.window
    g1 = np.geomspace(lo1 * 10, hi1 / 10, resolution)
    g2 = np.geomspace(lo2 * 10, hi2 / 10, resolution)
    c1, c2 = math.sqrt(g1[0] * g1[-1]), math.sqrt(g2[0] * g2[-1])

    def bump(x, y):
        return np.exp(-0.5 * (np.log(x / c1) ** 2 + np.log(y / c2) ** 2))

    return GridFn.from_callable(bump, g1, g2)


def _verify_anchors(cfg: ProblemConfig, n: int = 4) -> list[SearchPoint]:
    anchors = []
    for i in range(n):
        frac = (i + 1) / (n + 1)
        pts = []
        for ax in (0, 1):
            lo, hi = cfg.window[ax]
            t = lo * (hi / lo) ** (0.3 + 0.4 * frac)
            cap = min(cfg.boundaries[ax].x_cap(t), hi)
            x = t * (cap / t) ** (0.35 + 0.3 * frac)
            pts.append((t, x))
        pt = SearchPoint(t1=pts[0][0], t2=pts[1][0], x1=pts[0][1], x2=pts[1][1])
        if pt.is_admissible(cfg.boundaries):
            anchors.append(pt)
    return anchors


def cmd_verify(cfg: ProblemConfig, options: dict) -> dict:
    """Run the theorem-consistency battery and return a verdict section."""
    checks = []
    seed = options.get("seed", 0)
    resolution = options.get("resolution", 64)
    s_grid = options.get("s_grid", 9)
    corrupt = options.get("corrupt_upper")

    def add(name, passed, margin, detail=""):
        checks.append({"name": name, "passed": bool(passed), "margin": margin,
                       "detail": detail})

    if cfg.mode == "hardy":
        sandwich = optimize_sandwich(cfg, "hardy_thm1", s_grid=s_grid)
        upper = sandwich.upper_bound
        if corrupt is not None:
            upper *= float(corrupt)
        est = estimate_norm(cfg, grid_resolution=resolution, seed=seed)
        zero_u = cfg.u.is_zero

        budget = 1e-2
        margin = (upper * (1 + budget) - est.value) / max(est.value, 1e-300) if not zero_u else 0.0
        add("containment: norm estimate <= upper bound",
            zero_u or est.value <= upper * (1 + budget), margin,
            f"estimate={est.value:.6g}, upper_bound={upper:.6g}")

        add("sandwich order: lower <= upper",
            sandwich.lower_bound <= upper * (1 + 1e-12),
            upper - sandwich.lower_bound,
            f"lower={sandwich.lower_bound:.6g}, upper={upper:.6g}")

        mid = 1.0 + 0.5 * (cfg.exps.p - 1.0)
        wtol = 1e-3
        for k, anchor in enumerate(_verify_anchors(cfg)):
            chk = witness_bound_check(cfg, WitnessSpec("thm1_hardy", ScalePoint(mid, mid), anchor),
                                      tol=wtol)
            worst = min(chk.margins.values())
            add(f"witness chain at anchor {k}", chk.passed, worst,
                ", ".join(f"{n}={m:.3g}" for n, m in chk.margins.items()))

        if not zero_u:
            f = _verify_gridfn(cfg)
            sup = f.support
            m0 = math.sqrt(sup[0][0] * sup[0][1])
            seqs = (
                build_sequence(cfg.boundaries[0], m0, window=cfg.window[0]),
                build_sequence(cfg.boundaries[1], math.sqrt(sup[1][0] * sup[1][1]),
                               window=cfg.window[1]),
            )
            dec = quadrant_decompose(f, cfg, seqs)
            # The splitting bounds the norm of g = f v1^(1-p') v2^(1-p');
            # for unit inner weights this is the norm of f itself.
            margin = (dec.sum_II * (1 + 1e-3) - dec.lhs_g) / max(dec.lhs_g, 1e-300)
            add("partition splitting: lhs <= sum of corner sums",
                dec.lhs_g <= dec.sum_II * (1 + 1e-3), margin,
                f"lhs_g={dec.lhs_g:.6g}, lhs_f={dec.total_lhs:.6g}, sum_II={dec.sum_II:.6g}")

        sections = {
            "sandwich": sandwich.to_dict(),
            "norm_estimate": {
                "value": est.value,
                "iterations": est.iterations,
                "converged": est.converged,
                "diagnostics": est.diagnostics,
            },
        }
    else:
        sandwich = optimize_sandwich(cfg, "pk_thm2", s_grid=s_grid)
        upper = sandwich.upper_bound
        if corrupt is not None:
            upper *= float(corrupt)
        add("sandwich order: lower <= upper",
            sandwich.lower_bound <= upper * (1 + 1e-12),
            upper - sandwich.lower_bound,
            f"lower={sandwich.lower_bound:.6g}, upper={upper:.6g}")

        if not cfg.u.is_zero:
            mid_s = ScalePoint(1.0 + 0.5 * (cfg.exps.p - 1.0), 1.0 + 0.5 * (cfg.exps.p - 1.0))
            d2 = D2(cfg, mid_s, divergence_check=False)
            b2t = B2(pk_transformed_config(cfg), mid_s, divergence_check=False)
            rel = abs(d2.value - b2t.value) / max(d2.value, 1e-300)
            add("PK reduction: D2 equals B2 of the transformed instance",
                rel <= 1e-4, 1e-4 - rel, f"D2={d2.value:.8g}, B2'={b2t.value:.8g}")

            for k, anchor in enumerate(_verify_anchors(cfg)[:2]):
                chk = witness_bound_check(cfg, WitnessSpec("thm2_pk", mid_s, anchor), tol=1e-3)
                worst = min(chk.margins.values())
                add(f"pk witness chain at anchor {k}", chk.passed, worst,
                    ", ".join(f"{n}={m:.3g}" for n, m in chk.margins.items()))

        sections = {"sandwich": sandwich.to_dict()}

    failed = [c for c in checks if not c["passed"]]
    sections["checks"] = checks
    sections["verdict"] = "PASS" if not failed else "FAIL"
    if failed:
        sections["violations"] = [
            {"name": c["name"], "margin": c["margin"], "detail": c["detail"]} for c in failed
        ]
    return sections


def cmd_sweep(base_path, options: dict, out_dir: Path, jobs: int = 1) -> tuple[Path, bool]:
    """Run a parameter sweep; one report per sample plus a CSV aggregate."""
    param = options.get("sweep_param")
    raw_values = options.get("sweep_values")
    values = _number_list(raw_values, "sweep.values") if raw_values not in (None, "") else []

    header = ["param", "value", "lower", "upper", "norm_estimate", "gap_ratio", "verdict"]
    rows = []
    ok = True

    def run_one(val):
        kv = read_keyvalues(base_path)
        kv[param] = val
        tmp = out_dir / f"sweep-config-{val:g}.cfg"
        out_dir.mkdir(parents=True, exist_ok=True)
        tmp.write_text("".join(f"{k} = {v}\n" for k, v in kv.items()))
        cfg, opts = parse_config(tmp)
        opts.update({k: options[k] for k in ("seed", "resolution", "s_grid")})
        section = cmd_verify(cfg, opts)
        report = RunReport(config=_sanitize(kv), sections={"verify": section})
        report.write(out_dir, name=f"report-{param.replace('.', '_')}-{val:g}.json")
        sw = section["sandwich"]
        est = section.get("norm_estimate", {}).get("value", "")
        lower, upper = sw["lower_bound"], sw["upper_bound"]
        gap = upper / lower if (isinstance(lower, float) and lower > 0 and isinstance(upper, float)) else ""
        return [param, f"{val:g}", _csv_num(lower), _csv_num(upper), _csv_num(est),
                _csv_num(gap), section["verdict"]]

    if values:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(run_one, values))
        else:
            rows = [run_one(v) for v in values]
        ok = all(r[-1] == "PASS" for r in rows)

    out_dir.mkdir(parents=True, exist_ok=True)
    agg = out_dir / "sweep.csv"
    with agg.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return agg, ok


def _csv_num(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "+inf"
        return f"{x:.10g}"
    return str(x)


def cmd_oracle_regen(out_path: Path) -> Path:
    """Write dense-grid oracle values for the oracle-checked instances."""
    from .suite import oracle_configs

    golden = {}
    for name, cfg in oracle_configs().items():
        p = cfg.exps.p
        svals = [1.0 + (p - 1.0) * f for f in (0.25, 0.5, 0.75)]
        entries = {}
        for s1 in svals:
            for s2 in svals:
                entries[f"{s1:.6g},{s2:.6g}"] = oracle_mod.oracle_B2(cfg, ScalePoint(s1, s2))
        golden[name] = entries
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(_sanitize(golden), sort_keys=True, indent=2) + "\n")
    return out_path


# --------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hardybox",
        description="Numerical certification of moving-box Hardy and geometric-mean inequalities",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="problem description file")
        sp.add_argument("--out", default="hardybox-out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--s-grid", type=int, default=None, help="scale-grid resolution")
        sp.add_argument("--resolution", type=int, default=None, help="norm-estimate grid cells per axis")
        sp.add_argument("--window", default=None, help="override window as 'eps,X'")
        sp.add_argument("--jobs", type=int, default=1, help="concurrent sweep samples")

    sp = sub.add_parser("characterize", help="functional tables over the scale grid")
    common(sp)
    sp.add_argument("--rect", default=None, help="corner rectangle 'c1,d1,c2,d2'")

    sp = sub.add_parser("sandwich", help="two-sided constant bounds")
    common(sp)
    sp.add_argument("--theorem", default=None, choices=sorted(MULTIPLIERS.keys() - {"hardy_1d"}),
                    help="which sandwich to optimize (default by mode)")
    sp.add_argument("--rect", default=None, help="corner rectangle 'c1,d1,c2,d2'")

    sp = sub.add_parser("verify", help="theorem-consistency battery with PASS/FAIL verdict")
    common(sp)
    sp.add_argument("--corrupt-upper", type=float, default=None,
                    help="test hook: multiply the upper bound before the containment check")

    sp = sub.add_parser("sweep", help="parameter sweep with CSV aggregate")
    common(sp)

    sp = sub.add_parser("oracle-regen", help="regenerate dense-grid golden values")
    common(sp, needs_config=False)
    return ap


def _apply_overrides(cfg: ProblemConfig, options: dict, args) -> ProblemConfig:
    if args.seed is not None:
        options["seed"] = args.seed
    if args.s_grid is not None:
        options["s_grid"] = args.s_grid
    if args.resolution is not None:
        options["resolution"] = args.resolution
    if getattr(args, "corrupt_upper", None) is not None:
        options["corrupt_upper"] = args.corrupt_upper
    if args.window:
        try:
            eps, X = (float(x) for x in args.window.split(","))
        except ValueError as exc:
            raise ConfigError("--window expects 'eps,X'") from exc
        cfg = ProblemConfig(
            exps=cfg.exps, u=cfg.u, boundaries=cfg.boundaries, v1=cfg.v1, v2=cfg.v2,
            v2d=cfg.v2d, window=((eps, X), (eps, X)), tols=cfg.tols, label=cfg.label,
        )
    return cfg


def _parse_rect(raw):
    if raw is None:
        return None
    try:
        c1, d1, c2, d2 = (float(x) for x in raw.split(","))
    except ValueError as exc:
        raise ConfigError("--rect expects 'c1,d1,c2,d2'") from exc
    return ((c1, d1), (c2, d2))


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        if args.command == "oracle-regen":
            path = cmd_oracle_regen(out_dir / "oracle-golden.json")
            print(f"wrote {path}")
            return 0

        cfg, options = parse_config(args.config)
        cfg = _apply_overrides(cfg, options, args)
        report = RunReport(config=_sanitize(options["raw"]),
                           tolerances={"s_grid": options["s_grid"],
                                       "resolution": options["resolution"],
                                       "quadrature": {"1d": cfg.tols.quad_1d, "2d": cfg.tols.quad_2d},
                                       "search_rel_tol": cfg.tols.search_rel_tol})

        t0 = time.perf_counter()
        if args.command == "characterize":
            section = cmd_characterize(cfg, options["s_grid"], rect=_parse_rect(args.rect))
            report.sections["characterize"] = section
            report.timings["characterize_s"] = time.perf_counter() - t0
            path = report.write(out_dir)
            print(f"wrote {path}")
            return 0

        if args.command == "sandwich":
            theorem = args.theorem or ("hardy_thm1" if cfg.mode == "hardy" else "pk_thm2")
            section = cmd_sandwich(cfg, theorem, options["s_grid"], rect=_parse_rect(args.rect))
            report.sections["sandwich"] = section
            report.timings["sandwich_s"] = time.perf_counter() - t0
            path = report.write(out_dir)
            print(f"wrote {path}")
            return 0

        if args.command == "verify":
            section = cmd_verify(cfg, options)
            report.sections["verify"] = section
            report.timings["verify_s"] = time.perf_counter() - t0
            path = report.write(out_dir)
            verdict = section["verdict"]
            print(f"{verdict}: wrote {path}")
            for c in section["checks"]:
                mark = "ok" if c["passed"] else "FAIL"
                print(f"  [{mark}] {c['name']} (margin {_csv_num(c['margin'])})")
            return 0 if verdict == "PASS" else 1

        if args.command == "sweep":
            if not options.get("sweep_param"):
                raise ConfigError("sweep requires 'sweep.param' and 'sweep.values' in the config")
            agg, ok = cmd_sweep(args.config, options, out_dir, jobs=args.jobs)
            print(f"wrote {agg}")
            return 0 if ok else 1

        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, ExtrapolationError) as exc:
        print(f"numerical nonconvergence: {exc}", file=sys.stderr)
        return 3
    except HardyboxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
