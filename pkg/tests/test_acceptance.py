"""Acceptance criteria, one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
The heavyweight pipeline results (sandwich reports, norm estimates) come from
session fixtures shared with the module tests; their construction time is
recorded so the runtime budgets can be checked.
"""

import json
import math
import time

import mpmath
import numpy as np
import pytest

from hardybox.bounds import lower_factor, pk_lower_factor, upper_factor
from hardybox.charf import B1, B2, D2, ScalePoint, pk_transformed_config
from hardybox.cli import main
from hardybox.errors import IntegrabilityError
from hardybox.funcspace import BoundaryFn, BoundaryPair, SearchPoint, Weight1D
from hardybox.ops import GridFn, apply_G2, apply_H2, estimate_norm
from hardybox.oracle import oracle_B2
from hardybox.partition import build_sequence, quadrant_decompose
from hardybox.quad import build_V
from hardybox.suite import oracle_configs, pk_suite_configs, suite_configs
from hardybox.witness import WitnessSpec, witness_bound_check

mpmath.mp.dps = 60


def _criterion(n, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {n:>2} {name}: {status}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, f"criterion {n} ({name}): {detail}"


def test_c01_sandwich_containment(sandwich_reports, norm_estimates, pipeline_timings):
    worst_gap = -math.inf
    for name, rep in sandwich_reports.items():
        est = norm_estimates[name]
        assert rep.lower_bound <= rep.upper_bound, name
        gap = est.value / rep.upper_bound
        worst_gap = max(worst_gap, gap)
        assert est.value <= rep.upper_bound * (1 + 1e-2), (name, est.value, rep.upper_bound)
    runtime = pipeline_timings.get("sandwich_reports", 0.0) + pipeline_timings.get("norm_estimates", 0.0)
    _criterion(
        1, "sandwich containment on 6 configs",
        runtime < 300.0,
        f"max estimate/upper = {worst_gap:.3f}, runtime {runtime:.0f}s < 300s",
    )


def test_c02_witness_chain(hsuite):
    t0 = time.monotonic()
    s = ScalePoint(1.5, 1.5)
    worst = math.inf
    checked = 0
    for name, cfg in hsuite.items():
        anchors = []
        for i in range(4):
            frac = (i + 1) / 5.0
            lo, hi = cfg.window[0]
            t = lo * (hi / lo) ** (0.3 + 0.4 * frac)
            cap = min(cfg.boundaries[0].x_cap(t), hi)
            x = t * (cap / t) ** (0.35 + 0.3 * frac)
            anchors.append(SearchPoint(t1=t, t2=t * 1.3, x1=x, x2=x * 1.3))
        for anchor in anchors:
            assert anchor.is_admissible(cfg.boundaries)
            chk = witness_bound_check(cfg, WitnessSpec("thm1_hardy", s, anchor), tol=1e-3)
            worst = min(worst, min(chk.margins.values()))
            checked += 1
            assert chk.passed, (name, anchor, chk.margins)
    runtime = time.monotonic() - t0
    _criterion(
        2, "witness chain at 4 anchors per config",
        runtime < 60.0 and worst >= -1e-3,
        f"{checked} checks, worst margin {worst:.2e}, runtime {runtime:.0f}s < 60s",
    )


def test_c03_constant_factor_arithmetic():
    s = ScalePoint(1.5, 1.5)
    # independent high-precision evaluations
    lf_ref = mpmath.mpf(8) / 9
    uf_ref = mpmath.mpf(2)
    t = mpmath.e ** mpmath.mpf("1.5") * mpmath.mpf("0.5")
    pk_ref = t / (t + 1)
    err = (
        abs(lower_factor(2.0, s) - float(lf_ref)),
        abs(upper_factor(2.0, s) - float(uf_ref)),
        abs(pk_lower_factor(2.0, s) - float(pk_ref)),
    )
    _criterion(
        3, "constant-factor arithmetic vs high precision",
        max(err) < 1e-10,
        f"errors {err[0]:.1e}/{err[1]:.1e}/{err[2]:.1e} < 1e-10",
    )


def test_c04_oracle_agreement(osuite):
    t0 = time.monotonic()
    worst = 0.0
    for name, cfg in osuite.items():
        p = cfg.exps.p
        svals = [1.0 + (p - 1.0) * f for f in (0.25, 0.5, 0.75)]
        for s1 in svals:
            for s2 in svals:
                s = ScalePoint(s1, s2)
                o = oracle_B2(cfg, s)
                b = B2(cfg, s, divergence_check=False).value
                rel = abs(o - b) / b
                worst = max(worst, rel)
                assert rel < 0.01, (name, s1, s2, o, b)
    runtime = time.monotonic() - t0
    _criterion(
        4, "oracle agreement on 3 configs x 3x3 scale grid",
        runtime < 600.0 and worst < 0.01,
        f"worst rel {worst:.2e} < 1e-2, runtime {runtime:.0f}s < 600s",
    )


def test_c05_separability(hsuite):
    worst = 0.0
    for name in ("h1-unit-r2-pq22", "h5-sqrt-r2-pq22", "h3-unit-r2-pq23"):
        cfg = hsuite[name]
        for s_pair in ((1.5, 1.5), (1.3, 1.7)):
            s = ScalePoint(*s_pair)
            b2 = B2(cfg, s, divergence_check=False).value
            b1a = B1(cfg.axis(0), s.s1, divergence_check=False).value
            b1b = B1(cfg.axis(1), s.s2, divergence_check=False).value
            rel = abs(b2 - b1a * b1b) / b2
            worst = max(worst, rel)
            assert rel <= 1e-6, (name, s_pair, rel)
    _criterion(5, "separability B2 = B1 x B1", worst <= 1e-6, f"worst rel {worst:.2e} <= 1e-6")


def test_c06_pk_reduction(pksuite):
    worst = 0.0
    for name, cfg in pksuite.items():
        for s_pair in ((1.5, 1.5), (1.25, 1.75)):
            s = ScalePoint(*s_pair)
            d2 = D2(cfg, s, divergence_check=False).value
            b2t = B2(pk_transformed_config(cfg), s, divergence_check=False).value
            rel = abs(d2 - b2t) / d2
            worst = max(worst, rel)
            assert rel <= 1e-4, (name, s_pair, rel)
    _criterion(6, "PK reduction D2 = B2(transformed)", worst <= 1e-4,
               f"worst rel {worst:.2e} <= 1e-4 on 2 configs")


def test_c07_jensen_property(hsuite):
    cfg = hsuite["h1-unit-r2-pq22"]
    rng = np.random.default_rng(42)
    grid = np.geomspace(0.05, 50, 41)
    violations = 0
    worst_excess = -math.inf
    for _ in range(20):
        f = GridFn(grid, grid, rng.lognormal(sigma=1.5, size=(40, 40)))
        xs = np.exp(rng.uniform(np.log(0.2), np.log(20.0), size=100))
        ys = np.exp(rng.uniform(np.log(0.2), np.log(20.0), size=100))
        for xi, yi in zip(xs, ys):
            area = (cfg.boundaries[0].b(xi) - cfg.boundaries[0].a(xi)) * (
                cfg.boundaries[1].b(yi) - cfg.boundaries[1].a(yi)
            )
            excess = apply_G2(f, cfg.boundaries, xi, yi) - apply_H2(f, cfg.boundaries, xi, yi) / area
            worst_excess = max(worst_excess, excess)
            if excess > 1e-12:
                violations += 1
    _criterion(7, "Jensen domination G2 <= H2/area", violations == 0,
               f"0 violations in 2000 samples, worst excess {worst_excess:.2e} <= 1e-12")


def test_c08_partition(hsuite):
    pair2 = BoundaryPair(BoundaryFn.linear(0.5), BoundaryFn.linear(1.0))
    pair32 = BoundaryPair(BoundaryFn.linear(2.0 / 3.0), BoundaryFn.linear(1.0))
    worst_gap = 0.0
    for pair in (pair2, pair32):
        seq = build_sequence(pair, 1.0, k_range=(-10, 10), window=(1e-6, 1e6))
        gaps = np.abs(pair.a(seq.m[1:]) - seq.b_k[:-1]) / np.maximum(1.0, seq.b_k[:-1])
        worst_gap = max(worst_gap, float(gaps.max()))
        assert gaps.max() <= 1e-10

    rng = np.random.default_rng(1)
    worst_ratio = 0.0
    for name in ("h1-unit-r2-pq22", "h2-unit-r32-pq22", "h3-unit-r2-pq23"):
        cfg = hsuite[name]
        pair = cfg.boundaries[0]
        g = np.geomspace(0.5, 8.0, 33)
        fns = [
            GridFn.constant(1.0, g, g),
            GridFn.from_callable(lambda a, b: np.exp(-np.log(a / 2) ** 2 - np.log(b / 2) ** 2), g, g),
            GridFn(g, g, rng.lognormal(sigma=0.7, size=(32, 32))),
        ]
        seqs = (build_sequence(pair, 0.4, window=cfg.window[0]),
                build_sequence(pair, 0.4, window=cfg.window[1]))
        for f in fns:
            dec = quadrant_decompose(f, cfg, seqs)
            ratio = dec.total_lhs / dec.sum_II
            worst_ratio = max(worst_ratio, ratio)
            assert dec.total_lhs <= dec.sum_II * (1 + 1e-3), (name, ratio)
    _criterion(8, "partition abutment and splitting inequality",
               worst_gap <= 1e-10 and worst_ratio <= 1 + 1e-3,
               f"worst abutment {worst_gap:.1e}, worst lhs/sum {worst_ratio:.4f}")


def test_c09_v_exactness():
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        for alpha_frac in (-0.6, 0.0, 0.5, 0.9):
            alpha = alpha_frac * (p - 1.0)
            sigma = alpha * (1.0 - p / (p - 1.0))
            V = build_V(Weight1D.power(alpha), p, (1e-6, 1e6), knot_count=512)
            expected = V.knots ** (sigma + 1.0) / (sigma + 1.0)
            rel = float((np.abs(V.cumvals - expected) / expected).max())
            worst = max(worst, rel)
            assert rel < 1e-8, (p, alpha, rel)
    named = False
    try:
        build_V(Weight1D.power(1.0), 2.0, (1e-6, 1e6))
    except IntegrabilityError as exc:
        named = "alpha*(1-p')" in str(exc)
    _criterion(9, "V-transform closed-form exactness + divergence rejection",
               worst < 1e-8 and named,
               f"worst knot rel {worst:.1e} < 1e-8; divergent case rejected with named exponent")


CFG_TEXT = """
mode = hardy
exponents.p = 2.0
exponents.q = 2.0
weights.u.kind = power_pair
weights.u.beta = -2.0
weights.u.gamma = -2.0
weights.v1.kind = power
weights.v1.alpha = 0.0
weights.v2.kind = power
weights.v2.alpha = 0.0
boundaries.axis1.a = linear:0.5
boundaries.axis1.b = linear:1.0
boundaries.axis2.a = linear:0.5
boundaries.axis2.b = linear:1.0
window.eps = 1e-2
window.X = 1e2
search.s_grid = 5
search.resolution = 24
seed = 11
"""


def test_c10_determinism_and_fault_injection(tmp_path):
    cfg = tmp_path / "inst.cfg"
    cfg.write_text(CFG_TEXT)
    out1, out2, out3 = tmp_path / "r1", tmp_path / "r2", tmp_path / "bad"
    assert main(["verify", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["verify", "--config", str(cfg), "--out", str(out2)]) == 0
    identical = (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()

    rc = main(["verify", "--config", str(cfg), "--out", str(out3), "--corrupt-upper", "0.01"])
    doc = json.loads((out3 / "report.json").read_text())
    violations = [v["name"] for v in doc["sections"]["verify"].get("violations", [])]
    named = any("containment" in v for v in violations)
    _criterion(10, "byte-identical reports + fault injection",
               identical and rc == 1 and named,
               f"identical={identical}, corrupted run rc={rc}, names containment={named}")
