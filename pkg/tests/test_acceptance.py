"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in
the terminal summary) or directly with ``python3 tests/test_acceptance.py``.  Reference values come from the
independent oracles in ``oracles.py``.
"""

import json
import math
import subprocess
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from lattice_disperse import bessel, constants, propagator, resolvent, schrodinger  # noqa: E402
from lattice_disperse.core.lattice import Box, norm, random_sequence  # noqa: E402
from lattice_disperse.resolvent import SpectralPoint  # noqa: E402
from lattice_disperse.verdict import PASS  # noqa: E402

T_GRID = [2.0 ** k for k in range(8)]
# collected here; conftest.py prints them in the terminal summary
RESULTS: list[str] = []


def emit(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def shipped(name: str) -> dict:
    return json.loads((resources.files("lattice_disperse") / "data" / name).read_text())


def _pairs(rng, d, count, max_radius):
    out = []
    for _ in range(count):
        u = random_sequence(rng, d, int(rng.integers(0, max_radius + 1)), float(rng.uniform(0.2, 1)))
        v = random_sequence(rng, d, int(rng.integers(0, max_radius + 1)), float(rng.uniform(0.2, 1)))
        out.append((u, v))
    return out


# ---------------------------------------------------------------------------

def test_criterion_01_bessel_accuracy():
    t = np.linspace(0.0, 100.0, 10_000)
    ref = oracles.bessel_miller_table(50, t)
    # the recurrence oracle is itself checked against the high-precision series
    rng = np.random.default_rng(1)
    oracle_gap = max(abs(ref[n, i] - oracles.bessel_series_mp(n, t[i]))
                     for n, i in zip(rng.integers(0, 51, 150), rng.integers(0, t.size, 150)))
    start = time.perf_counter()
    worst = 0.0
    for n in range(-50, 51):
        got = np.array([bessel.eval_j(n, x).value for x in t])
        want = ref[abs(n)] * ((-1) ** n if n < 0 else 1)
        worst = max(worst, float(np.max(np.abs(got - want))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed <= 30 and oracle_gap <= 1e-14
    emit(1, "eval_j vs recurrence/series oracle", ok,
         f"max |err| = {worst:.2e} over 101 x 10^4 points, eval time {elapsed:.1f} s, "
         f"oracle cross-gap {oracle_gap:.1e}")


def _bounds_from_oracle(n_abs, sign_neg, t, absj):
    """Pointwise bounds written out independently; returns the worst ratio."""
    worst = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        checks = []
        if n_abs == 0:
            checks.append((t != 0, np.sqrt(2 / (np.pi * t))))
        else:
            checks.append((np.ones_like(t, bool), np.full_like(t, 0.7 * n_abs ** (-1 / 3))))
        checks.append((t != 0, 0.8 * t ** (-1 / 3)))
        if not sign_neg and n_abs >= 1:
            gap = np.abs(t * t - (n_abs * n_abs - 0.25))
            checks.append((gap != 0, math.sqrt(2 / math.pi) * gap ** -0.25))
        checks.append((t >= 1, 1 / (t ** 0.25 * (n_abs ** (1 / 3) + np.abs(t - n_abs)) ** 0.25)))
        checks.append((t <= 1, np.full_like(t, (n_abs + 1) ** -0.5)))
    for dom, b in checks:
        if dom.any():
            worst = max(worst, float(np.max(absj[dom] / b[dom])))
    return worst


def test_criterion_02_bessel_bound_suite():
    t = np.linspace(0.0, 200.0, 20_001)
    rec = bessel.verify_pointwise_bounds(range(-50, 51), t)
    ref = np.abs(oracles.bessel_miller_table(50, t))
    worst_oracle = max(_bounds_from_oracle(abs(n), n < 0, t, ref[abs(n)]) for n in range(-50, 51))
    ok = rec.status == PASS and not rec.details["violations"] and worst_oracle <= 1 + 1e-10
    emit(2, "Szego/Landau/Krasikov/Fused/SmallT bounds", ok,
         f"{sum(rec.details['checked'].values())} checks, violations "
         f"{len(rec.details['violations'])}, worst ratio {rec.lhs:.6f} "
         f"(oracle recheck {worst_oracle:.6f})")


def test_criterion_03_weighted_lp():
    start = time.perf_counter()
    failures, worst, skipped, tails = [], 0.0, [], []
    for p in (3.0, 4.0, 6.0):
        for gamma in (0.0, 0.5):
            if not p > 2 + 2 * gamma:
                with pytest.raises(ValueError):
                    bessel.verify_weighted_lp(p, gamma, 0)
                skipped.append((p, gamma))
                continue
            for n in range(31):
                rec = bessel.verify_weighted_lp(p, gamma, n)
                tails.append(rec.details["tail_bound"])
                worst = max(worst, rec.details["ratio"])
                if rec.status != PASS:
                    failures.append((p, gamma, n))
    elapsed = time.perf_counter() - start
    certified = all(math.isfinite(x) and x > 0 for x in tails)
    ok = not failures and certified and elapsed <= 120
    emit(3, "weighted L^p integrals of J_n", ok,
         f"{len(tails)} cases, worst lhs/rhs {worst:.3f}, tails certified {certified}, "
         f"{elapsed:.1f} s; skipped (p, gamma) = {skipped} (needs p > 2 + 2 gamma)")


def test_criterion_04_kernel_vs_torus_and_unitarity():
    rng = np.random.default_rng(4)
    worst = 0.0
    cases = [((10,), 20.0), ((10, -10), 20.0), ((10, 10, -10), 20.0), ((0, 0, 0), 0.0)]
    for _ in range(400):
        d = int(rng.integers(1, 4))
        cases.append((tuple(int(x) for x in rng.integers(-10, 11, d)), float(rng.uniform(0, 20))))
    for n, t in cases:
        worst = max(worst, abs(propagator.kernel_value(n, t).value - oracles.torus_propagator(n, t)))
    defects = [propagator.verify_unitarity(d, t).lhs for d in (1, 2, 3)
               for t in (0.5, 1.0, 5.0, 10.0, 20.0)]
    ok = worst <= 1e-10 and max(defects) <= 1e-8
    emit(4, "propagator kernel vs torus quadrature, unitarity", ok,
         f"max |kernel - torus| = {worst:.1e} on {len(cases)} points, "
         f"max |sum |K|^2 - 1| = {max(defects):.1e}")


def test_criterion_05_dispersive_estimates():
    rng = np.random.default_rng(5)
    total, failed, worst = 0, 0, 0.0
    for d in (1, 2, 3):
        for q in (2.0, 3.0, 4.0):
            for u, v in _pairs(rng, d, 100, 3 if d < 3 else 2):
                for t in T_GRID:
                    rec = propagator.verify_dispersive(u, v, q, 0.0, 1.0, t)
                    total += 1
                    failed += rec.status != PASS
                    worst = max(worst, rec.lhs / rec.rhs)
    weighted = 0
    for kappa in (0.0, 0.25, 0.5):
        for u, v in _pairs(rng, 1, 100, 6):
            for t in T_GRID:
                rec = propagator.verify_dispersive(u, v, 4.0, kappa, 1.0, t)
                weighted += 1
                failed += rec.status != PASS
                worst = max(worst, rec.lhs / rec.rhs)
    emit(5, "l^q and weighted dispersive estimates", failed == 0,
         f"{total} unweighted + {weighted} weighted verdicts, {failed} failures, "
         f"worst lhs/rhs {worst:.3f}")


def test_criterion_06_resolvent_bound_d3():
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    lams = np.round(np.arange(-4.0, 4.0 + 1e-9, 0.05), 12)
    assert {-3.0, -1.0, 1.0, 3.0} <= set(lams.tolist()) and len(lams) == 161
    failed, worst, constant_ok, count = 0, 0.0, True, 0
    for u, v in _pairs(rng, 3, 20, 2):
        uv = norm(u, 2) * norm(v, 2)
        for a, b in zip(lams[:-1], lams[1:]):
            recs = resolvent.verify_resolvent_bounds(u, v, 2.0, SpectralPoint.plus_i0(a),
                                                     SpectralPoint.plus_i0(b), 0.4)
            op, holder = recs[0], recs[2]
            constant_ok &= math.isclose(op.rhs / uv, 17.0, rel_tol=1e-12)
            failed += (op.status != PASS) + (holder.status != PASS)
            worst = max(worst, op.lhs / uv)
            count += 1
        for tau in (-3.0, -1.0, 1.0, 3.0):
            for h in (0.2, 0.02, 0.002):
                recs = resolvent.verify_resolvent_bounds(u, v, 2.0, SpectralPoint.plus_i0(tau - h),
                                                         SpectralPoint.plus_i0(tau + h), 0.4)
                failed += recs[2].status != PASS
    elapsed = time.perf_counter() - start
    ok = failed == 0 and constant_ok and elapsed <= 600
    emit(6, "weighted resolvent bound 17 and Hoelder 0.4 in d = 3", ok,
         f"{count} grid steps over 20 pairs, worst ||Y0||/(|u||v|) = {worst:.3f} <= 17, "
         f"{failed} failures, {elapsed:.1f} s")


def test_criterion_07_hilbert_schmidt_d345():
    rng = np.random.default_rng(7)
    failed, count, d_values = 0, 0, []
    for d in (3, 4, 5):
        d_values.append(constants.d_qd(2.0, d))
        gamma = 0.4
        taus = range(-d, d + 1, 2)
        for u, v in _pairs(rng, d, 3, 1):
            for tau in taus:
                recs = resolvent.verify_resolvent_bounds(u, v, 2.0, SpectralPoint.plus_i0(tau - 0.05),
                                                         SpectralPoint.plus_i0(tau + 0.05), gamma)
                failed += (recs[1].status != PASS) + (recs[3].status != PASS)
                count += 2
    ok = failed == 0 and d_values == [1.0, 1.0, 1.0]
    emit(7, "Hilbert-Schmidt variants with D = 1 at q = 2", ok,
         f"D_(2,d) = {d_values} for d = 3, 4, 5; {count} HS verdicts, {failed} failures")


def _point_well_root(g: float) -> float:
    """Root of 1 = g G(lam) in d = 3 below the band.

    G(lam) averages the one-dimensional kernel 1/sqrt((lam - c)^2 - 1) over
    c = cos k2 + cos k3 with a torus trapezoid rule, which converges
    exponentially for lam < -3.
    """
    k = 2 * np.pi * np.arange(256) / 256
    c = np.cos(k)[:, None] + np.cos(k)[None, :]

    def G(lam):
        return float(np.mean(1 / np.sqrt((lam - c) ** 2 - 1)))

    return scipy.optimize.brentq(lambda lam: 1 - g * G(lam), -3 - g - 1, -3 - 1e-3, xtol=1e-14)


def _box_extremes(V: schrodinger.Potential, radius: int):
    side = 2 * radius + 1
    one = scipy.sparse.diags([0.5, 0.5], [-1, 1], shape=(side, side))
    eye = scipy.sparse.identity(side)
    H = None
    for ax in range(V.dim):
        term = None
        for j in range(V.dim):
            m = one if j == ax else eye
            term = m if term is None else scipy.sparse.kron(term, m)
        H = term if H is None else H + term
    diag = np.zeros(side ** V.dim)
    for c, val in zip(V.coords, V.real):
        diag[np.ravel_multi_index(tuple(np.asarray(c) + radius), (side,) * V.dim)] += val
    H = (H + scipy.sparse.diags(diag)).tocsc()
    lo = scipy.sparse.linalg.eigsh(H, k=1, which="SA", tol=1e-12)[0][0]
    hi = scipy.sparse.linalg.eigsh(H, k=1, which="LA", tol=1e-12)[0][0]
    return lo, hi


def test_criterion_08_birman_schwinger():
    recs = schrodinger.verify_rank_one(5.0, 3, Box(20, 3))
    box_rec, root_rec = recs if len(recs) == 2 else (recs[0], recs[0])
    lam = root_rec.details.get("detection", math.nan)
    oracle_root = _point_well_root(5.0)
    rank_ok = (len(recs) == 2 and box_rec.status == PASS and root_rec.status == PASS
               and abs(lam - oracle_root) <= 1e-8)
    demo = shipped("demo_small_coupling_d3.json")
    V = schrodinger.load_potential(demo)
    small = [schrodinger.verify_small_coupling(V, Box(demo["box_radius"], 3))]
    lo, hi = _box_extremes(V, demo["box_radius"])
    rng = np.random.default_rng(8)
    for _ in range(4):
        sites = rng.choice(7 ** 3, 3, replace=False)
        coords = np.stack(np.unravel_index(sites, (7, 7, 7)), axis=1) - 3
        vals = rng.uniform(-1, 1, 3)
        vals *= 0.9 / 17 / np.abs(vals).sum()
        W = schrodinger.load_potential({"dim": 3, "potential": [
            {"coords": c.tolist(), "value": float(x)} for c, x in zip(coords, vals)]})
        small.append(schrodinger.verify_small_coupling(W, Box(8, 3)))
    eps = 1e-6
    small_ok = all(r.status == PASS for r in small) and -3 - eps <= lo and hi <= 3 + eps
    emit(8, "Birman-Schwinger detection and small coupling", rank_ok and small_ok,
         f"V = -5 delta: lam = {lam:.12f}, rel gap to box {box_rec.lhs:.1e}, "
         f"gap to root {root_rec.lhs:.1e}, gap to torus root {abs(lam - oracle_root):.1e}; "
         f"{len(small)} subcritical potentials with no detections, "
         f"box spectrum [{lo:.6f}, {hi:.6f}]")


D3_POINTS = [(-4.0, 0.5), (0.0, 2.0), (1.0, -0.5), (-2.5, 0.5), (3.5, -0.5),
             (-1.0, 1.0), (2.0, -1.0), (0.5, 0.5), (-3.0, 0.75), (4.5, 0.5)]
D5_POINTS = [(-6.0, 2.5), (-4.0, -2.5), (-2.0, 3.0), (0.0, -3.0), (2.0, 2.5),
             (4.0, -2.5), (6.0, 3.0), (-1.0, 2.5), (1.0, -2.5), (3.0, 2.5)]


def test_criterion_09_resolvent_identity():
    worst, bad, count = 0.0, [], 0
    for name in schrodinger_demos():
        data = shipped(name)
        V = schrodinger.load_potential(data)
        points = D3_POINTS if V.dim == 3 else D5_POINTS
        box = Box(data["box_radius"], V.dim)
        for lam, mu in points:
            rec = schrodinger.verify_resolvent_identity(V, SpectralPoint(lam, mu), box)
            count += 1
            worst = max(worst, rec.lhs)
            if rec.status != PASS:
                bad.append((name, lam, mu, rec.status))
    emit(9, "resolvent identity on the shipped potentials", not bad,
         f"{count} (potential, z) pairs, max HS residual {worst:.1e} <= 1e-6, failures {bad}")


def schrodinger_demos():
    return sorted(p.name for p in (resources.files("lattice_disperse") / "data").iterdir()
                  if p.name.endswith(".json"))


def test_criterion_10_determinism(tmp_path):
    digests, start = [], time.perf_counter()
    codes = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        proc = subprocess.run([sys.executable, "-m", "lattice_disperse.cli", "suite", "--seed", "7",
                               "--out", str(out)], capture_output=True, text=True)
        codes.append(proc.returncode)
        digests.append(((out / "suite.json").read_bytes(), (out / "suite.csv").read_bytes()))
    elapsed = time.perf_counter() - start
    same = digests[0] == digests[1]
    ok = same and codes == [0, 0] and elapsed / 2 <= 900
    emit(10, "suite --seed 7 byte-identical", ok,
         f"identical JSON and CSV: {same}, exit codes {codes}, {elapsed / 2:.0f} s per run")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
