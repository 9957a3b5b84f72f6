"""Acceptance criteria 1-9. Each test records one PASS/FAIL line, printed in the
pytest terminal summary (or directly when run as a script)."""
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from spindimer.cli import run_cli
from spindimer.measures import MEASURES, evaluate, f_min, fidelity, hs_min, local_unitary, negativity
from spindimer.model import DimerParams
from spindimer.selftest import (
    closed_form_suites,
    gamma_convention_check,
    gibbs_suite,
    random_params,
    random_temperature,
    spectrum_suite,
)
from spindimer.sweep import PRESETS, ThresholdQuery, find_threshold, read_csv
from spindimer.thermal import gibbs_state_analytic

from conftest import random_density, random_unitary

RESULTS = {}


def record(number, ok, detail):
    RESULTS[number] = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(RESULTS[number])
    assert ok, detail


def test_criterion_1_spectrum():
    t0 = time.perf_counter()
    suite = spectrum_suite(draws=1000)
    elapsed = time.perf_counter() - t0
    record(1, suite.ok and elapsed < 5.0,
           f"spectrum {suite.passed}/{suite.total} within 1e-10 (worst {suite.worst:.1e}), {elapsed:.2f}s < 5s")


def test_criterion_2_gibbs():
    rho, z = gibbs_suite(draws=1000)
    record(2, rho.ok and z.ok,
           f"Gibbs {rho.passed}/{rho.total} entrywise (worst {rho.worst:.1e}), "
           f"Z {z.passed}/{z.total} relative (worst {z.worst:.1e}), tol 1e-10")


def test_criterion_3_closed_forms():
    suites = closed_form_suites(nonzero=200, zero=50, grid=(720, 360))
    gamma = gamma_convention_check(count=100)
    convention_ok = gamma["x_nonzero"].ok and gamma["x_zero_qubit_block"].ok
    parts = [f"{s.passed}/{s.total}" for s in suites]
    record(3, all(s.ok for s in suites) and convention_ok,
           "HS x!=0 {}, F x!=0 {} (1e-10); HS x=0 {}, F x=0 {}, F def x=0 {} vs 720x360 oracle (1e-6); "
           "Gamma convention {}".format(*parts, "holds" if convention_ok else "demoted"))


def test_criterion_4_entanglement_death():
    t0 = time.perf_counter()
    q = ThresholdQuery(DimerParams.cuni(B=0.01), "T", "negativity", (1.0, 300.0), tol=1e-3)
    t_star = find_threshold(q)
    elapsed = time.perf_counter() - t0
    record(4, 127.0 <= t_star <= 155.0 and elapsed < 2.0,
           f"T* = {t_star:.3f} K in [127, 155], {elapsed:.2f}s < 2s")


def test_criterion_5_room_temperature():
    t0 = time.perf_counter()
    rep = evaluate(gibbs_state_analytic(DimerParams.cuni(B=1.0), 300.0).rho, ("f_min", "negativity"))
    elapsed = time.perf_counter() - t0
    record(5, rep.f_min > 1e-4 and rep.negativity < 1e-10 and elapsed < 1.0,
           f"f_min = {rep.f_min:.4g} > 1e-4, negativity = {rep.negativity:.1e} < 1e-10, {elapsed:.3f}s < 1s")


def test_criterion_6_high_field_reemergence():
    p = DimerParams.cuni(B=150.0)
    cold = evaluate(gibbs_state_analytic(p, 0.1).rho, ("hs_min", "f_min"))
    temps = np.linspace(1.0, 300.0, 300)
    reps = [evaluate(gibbs_state_analytic(p, T).rho, ("hs_min", "f_min")) for T in temps]
    hs_max = max(r.hs_min for r in reps)
    f_max = max(r.f_min for r in reps)
    ok = cold.hs_min < 1e-6 and cold.f_min < 1e-6 and hs_max > 1e-4 and f_max > 1e-4
    record(6, ok, f"T=0.1K hs {cold.hs_min:.1e}, f {cold.f_min:.1e} < 1e-6; "
                  f"max over T hs {hs_max:.3g}, f {f_max:.3g} > 1e-4")


def _critical_field(d_over_j, measure):
    base = DimerParams(J=1.0, delta=1.0, D=d_over_j, g1=2.0, g2=2.0)
    return find_threshold(ThresholdQuery(base, "B", measure, (0.0, 3.0), T=0.1, tol=1e-4))


def test_criterion_7_anisotropy_broadening():
    b = {(d, m): _critical_field(d, m) for d in (-0.5, 1.5) for m in ("hs_min", "f_min")}
    ok = b[(1.5, "hs_min")] > b[(-0.5, "hs_min")] and b[(1.5, "f_min")] > b[(-0.5, "f_min")]
    record(7, ok, "B_c hs {:.4f} > {:.4f}, f {:.4f} > {:.4f} (D/J = 1.5 vs -0.5)".format(
        b[(1.5, "hs_min")], b[(-0.5, "hs_min")], b[(1.5, "f_min")], b[(-0.5, "f_min")]))


def test_criterion_8_properties():
    rng = np.random.default_rng(8)
    worst_lu = 0.0
    for k in range(60):
        if k % 3 == 0:
            rho = gibbs_state_analytic(random_params(rng, zero_field=True), random_temperature(rng)).rho
        elif k % 3 == 1:
            rho = gibbs_state_analytic(random_params(rng), random_temperature(rng)).rho
        else:
            rho = random_density(rng, rank=int(rng.integers(1, 7)))
        a = evaluate(rho)
        b = evaluate(local_unitary(rho, random_unitary(rng, 2), random_unitary(rng, 3)))
        worst_lu = max(worst_lu, *(abs(getattr(a, m) - getattr(b, m)) for m in MEASURES))

    worst_delta0 = 0.0
    for _ in range(100):
        p = replace(random_params(rng), delta=0.0, B=rng.uniform(0.05, 3.0))
        rho = gibbs_state_analytic(p, random_temperature(rng)).rho
        worst_delta0 = max(worst_delta0, hs_min(rho), f_min(rho), negativity(rho))

    worst_beta0 = 0.0
    for _ in range(20):
        rho = gibbs_state_analytic(random_params(rng), math.inf).rho
        worst_beta0 = max(worst_beta0, hs_min(rho), f_min(rho), negativity(rho))

    worst_sym, in_range = 0.0, True
    for _ in range(500):
        x, y = random_density(rng, rank=int(rng.integers(1, 7))), random_density(rng, rank=int(rng.integers(1, 7)))
        fxy, fyx = fidelity(x, y), fidelity(y, x)
        worst_sym = max(worst_sym, abs(fxy - fyx))
        in_range &= 0.0 <= fxy <= 1.0
    ok = worst_lu <= 1e-9 and worst_delta0 <= 1e-12 and worst_beta0 <= 1e-12 and worst_sym <= 1e-12 and in_range
    record(8, ok, f"local-unitary {worst_lu:.1e} <= 1e-9, Delta=0 (B>0) max {worst_delta0:.1e}, "
                  f"beta=0 max {worst_beta0:.1e}, fidelity asymmetry {worst_sym:.1e} on 500 pairs, range ok={in_range}")


def _range_violations(rows):
    bad = 0
    for r in rows:
        if r.status != "ok":
            bad += 1
            continue
        bad += not (1 / 6 - 1e-12 <= r.purity <= 1 + 1e-12)
        bad += r.hs_min is not None and r.hs_min < 0
        bad += r.f_min is not None and not 0 <= r.f_min <= 1
        bad += r.negativity is not None and r.negativity < 0
    return bad


def test_criterion_9_figures(tmp_path, capsys):
    first, second = tmp_path / "a", tmp_path / "b"
    t0 = time.perf_counter()
    codes = [run_cli(["figure", "all", "--out", str(first)])]
    elapsed = time.perf_counter() - t0
    codes.append(run_cli(["figure", "all", "--out", str(second)]))
    capsys.readouterr()
    files = sorted(p.name for p in first.iterdir())
    identical = files == sorted(p.name for p in second.iterdir()) and all(
        (first / f).read_bytes() == (second / f).read_bytes() for f in files)
    rows = [r for f in files for r in read_csv(first / f)]
    bad = _range_violations(rows)
    prefixes = {f.split("_")[0].removesuffix(".csv") for f in files}
    ok = codes == [0, 0] and elapsed < 60.0 and identical and bad == 0 and prefixes == set(PRESETS)
    record(9, ok, f"{len(files)} CSVs, {len(rows)} rows in {elapsed:.1f}s < 60s, "
                  f"byte-identical={identical}, range violations {bad}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
