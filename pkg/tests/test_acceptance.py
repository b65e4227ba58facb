"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (shown in the terminal summary and on
stdout) before asserting, so a failing criterion still reports its numbers.
"""

import io
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from vargame.analysis import SweepSpec, k_threshold, sweep, write_sweep_csv
from vargame.fp import BeliefState, fp_step, run_fp
from vargame.game import build_tables, expected_utilities, expected_utility
from vargame.oracle import enumerate_pure_ne, solve_2x2_mixed, verify_epsilon_ne
from vargame.power import Reference
from vargame.scenarios import bundled


def report(criterion, parts):
    """Record every (label, ok, detail) part and assert they all held."""
    ok = all(p for _, p, _ in parts)
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: " + "; ".join(
        f"{label} [{'ok' if p else 'FAILED'}] {detail}" for label, p, detail in parts)
    ACCEPTANCE_LINES.append(line)
    print(line)
    failed = [label for label, p, _ in parts if not p]
    assert ok, f"criterion {criterion} failed parts: {failed}"


def test_criterion_1_reference_points():
    parts = []
    for name, expected in (("two_customer", (-0.0256, 0.0256)),
                           ("three_customer", (-0.1241, 0.1229, 0.0012))):
        t0 = time.perf_counter()
        u0 = build_tables(bundled(name)).u0
        dev = float(np.max(np.abs(u0 - np.array(expected))))
        parts.append((name, dev <= 5e-4,
                      f"u0={np.round(u0, 5).tolist()} dev={dev:.1e} "
                      f"({time.perf_counter() - t0:.3f}s)"))
    report(1, parts)


def test_criterion_2_oracle_fp_agreement():
    s = bundled("two_customer")
    t0 = time.perf_counter()
    t = build_tables(s)
    analytic = solve_2x2_mixed(t, "eut").mixed
    res = run_fp(s, "eut", tables=t)
    elapsed = time.perf_counter() - t0
    dev = max(float(np.max(np.abs(a - f))) for a, f in zip(analytic, res.sigma))
    gap = verify_epsilon_ne(res.sigma, t, "eut", 1e-3)
    report(2, [
        ("analytic", True, f"s1={analytic[0].round(4).tolist()} s2={analytic[1].round(4).tolist()}"),
        ("fp_within_0.02", dev <= 0.02, f"max dev {dev:.4f}"),
        ("gap<=1e-3", gap.ok, f"gap {gap.gap:.2e}"),
        ("runtime<5s", elapsed < 5.0, f"{elapsed:.2f}s"),
    ])


def test_criterion_3_pt_shift_toward_high_pf():
    s = bundled("two_customer")
    c = s.customers[0]
    assert (c.alpha, c.beta, c.k, c.reference.mode) == (0.7, 0.6, 2.0, "standard")
    t = build_tables(s)
    eut = run_fp(s, "eut", tables=t).sigma
    pt = run_fp(s, "pt", tables=t).sigma
    hi = [(float(eut[i][1]), float(pt[i][1])) for i in range(2)]
    rel = hi[0][1] / hi[0][0] - 1.0
    shift = [p - e for e, p in hi]
    report(3, [
        ("customer1_pt>eut", hi[0][1] > hi[0][0], f"eut={hi[0][0]:.4f} pt={hi[0][1]:.4f}"),
        ("customer2_pt>eut", hi[1][1] > hi[1][0], f"eut={hi[1][0]:.4f} pt={hi[1][1]:.4f}"),
        ("customer1_relative_increase_0.29pm0.10", abs(rel - 0.29) <= 0.10, f"{rel:.4f}"),
        ("customer1_gap>customer2_gap", shift[0] > shift[1],
         f"{shift[0]:.4f} vs {shift[1]:.4f}"),
    ])


def test_criterion_4_dominance_regimes():
    t0 = time.perf_counter()
    parts = []
    s = bundled("all_below")
    t = build_tables(s)
    lowest = tuple(0 for _ in s.customers)
    for m in ("eut", "pt"):
        ne = enumerate_pure_ne(t, m)
        res = run_fp(s, m, tables=t)
        mass = min(float(x[0]) for x in res.sigma)
        parts.append((f"all_below_{m}", ne.pure == [lowest] and mass >= 0.99,
                      f"pure_ne={ne.pure} min mass on lowest {mass:.4f}"))
    seven = bundled("seven_customer")
    for tau, idx in ((0.5, 2), (0.9, 0)):
        st = seven.with_customers(tau=tau)
        tt = build_tables(st)
        for m in ("eut", "pt"):
            mass = min(float(x[idx]) for x in run_fp(st, m, tables=tt).sigma)
            pf = st.customers[0].actions[idx]
            parts.append((f"seven_tau{tau}_{m}", mass >= 0.99, f"min mass on {pf} {mass:.4f}"))
    elapsed = time.perf_counter() - t0
    parts.append(("runtime<30s", elapsed < 30.0, f"{elapsed:.2f}s"))
    report(4, parts)


@pytest.mark.slow
def test_criterion_5_beta_sweep():
    base = bundled("two_customer").with_customers(alpha=1.0, k=1.0, reference=Reference("zero"))
    grid = tuple(round(0.1 * j, 1) for j in range(1, 11))
    rows = sweep(SweepSpec("beta", grid, base))
    pt = np.array([r.utilities("pt") for r in rows])
    eut = np.array([r.utilities("eut") for r in rows])
    steps = np.diff(pt, axis=0)
    at_one = float(np.max(np.abs(pt[-1] - eut[-1])))
    d = np.abs(pt[0] - eut[0])
    report(5, [
        ("pt_nondecreasing", bool(np.all(steps >= 0)), f"min step {steps.min():.2e}"),
        ("pt==eut_at_beta1", at_one <= 1e-12, f"{at_one:.1e}"),
        ("customer2_gap>customer1_at_0.1", d[1] > d[0], f"c1={d[0]:.4f} c2={d[1]:.4f}"),
    ])


@pytest.mark.slow
def test_criterion_6_k_threshold():
    s = bundled("three_customer")
    res = k_threshold(s, (0.9, 1.2), 1e-3)
    lo, hi = res.bracket
    # strict decrease in k at fixed mixed profiles that put mass on losses
    t = build_tables(s)
    rng = np.random.default_rng(2024)
    strict = True
    checked = 0
    for _ in range(200):
        sigma = [rng.dirichlet(np.ones(n)) for n in t.sizes]
        k = float(rng.uniform(0.5, 3.0))
        delta = float(rng.uniform(1e-3, 1.0))
        a, b = t.reframed(k=k), t.reframed(k=k + delta)
        for i in range(t.n):
            if not np.any(t.u[i] < t.u0[i]):
                continue
            checked += 1
            if not expected_utility(i, sigma, b, "pt") < expected_utility(i, sigma, a, "pt"):
                strict = False
    report(6, [
        ("bracket_in_[0.9,1.2]", 0.9 <= lo <= hi <= 1.2, f"[{lo:.4f}, {hi:.4f}]"),
        ("k0_1.04pm0.10", abs(res.k0 - 1.04) <= 0.10, f"k0={res.k0:.4f}"),
        ("strict_decrease_in_k", strict, f"{checked} profile/customer pairs"),
    ])


def test_criterion_7_fixed_profile_reference_monotone():
    s = bundled("two_customer")
    t = build_tables(s)
    sigma = run_fp(s, "pt", tables=t).sigma
    values = [expected_utilities(sigma, t.reframed(u0=u0), "pt")
              for u0 in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)]
    steps = np.diff(np.array(values), axis=0)
    report(7, [("nonincreasing_in_u0", bool(np.all(steps <= 0)),
                f"max step {steps.max():.2e}")])


def test_criterion_8_property_suite():
    parts = []
    three = bundled("three_customer")
    t = build_tables(three)
    ex = float(np.max(np.abs(t.exchange().sum(axis=0))))
    parts.append(("zero_sum_exchange", ex <= 1e-9, f"{ex:.1e}"))

    state = BeliefState.initial(three.initial_profile())
    simplex, consistent = True, True
    for _ in range(500):
        state = fp_step(state, t, "pt")
        freqs = state.frequencies()
        simplex &= all(f.min() >= 0 and abs(f.sum() - 1) <= 1e-12 for f in freqs)
        expect = [(p + c) / (1 + state.m) for p, c in zip(state.prior, state.counts)]
        consistent &= all(np.allclose(f, e, atol=1e-12, rtol=0) for f, e in zip(freqs, expect))
    parts.append(("simplex_every_iteration", simplex, "500 PT iterations"))
    parts.append(("frequency_consistency", consistent, "freq == (prior + counts)/(1 + m)"))

    rng = np.random.default_rng(11)
    lin_err, dev_excess = 0.0, -np.inf
    for _ in range(50):
        sigma = [rng.dirichlet(np.ones(n)) for n in t.sizes]
        j = int(rng.integers(t.n))
        x, y = rng.dirichlet(np.ones(t.sizes[j]), size=2)
        lam = float(rng.uniform())
        gaps = verify_epsilon_ne(sigma, t, "pt").gaps
        for i in range(t.n):
            def at(v):
                s2 = list(sigma)
                s2[j] = v
                return expected_utility(i, s2, t, "pt")
            lin_err = max(lin_err, abs(at(lam * x + (1 - lam) * y)
                                       - lam * at(x) - (1 - lam) * at(y)))
            dev = list(sigma)
            dev[i] = rng.dirichlet(np.ones(t.sizes[i]))
            gain = expected_utility(i, dev, t, "pt") - expected_utility(i, sigma, t, "pt")
            dev_excess = max(dev_excess, gain - gaps[i])
    parts.append(("multilinearity", lin_err <= 1e-9, f"max err {lin_err:.1e}"))
    parts.append(("pure_deviation_sufficiency", dev_excess <= 1e-9,
                  f"max mixed gain over pure gap {dev_excess:.1e}"))

    spec = SweepSpec("tau", (0.6, 0.8), bundled("two_customer"), ("pt",))
    a, b = io.StringIO(), io.StringIO()
    write_sweep_csv(spec, sweep(spec), a)
    write_sweep_csv(spec, sweep(spec), b)
    parts.append(("deterministic_reruns", a.getvalue().encode() == b.getvalue().encode(),
                  "sweep CSV byte-identical"))

    seven = bundled("seven_customer").with_customers(tau=6 / 7)
    tt = build_tables(seven)
    for m in ("eut", "pt"):
        res = run_fp(seven, m, tables=tt)
        mixed = [int(np.sum(sig >= 0.25)) >= 2 for sig in res.sigma]
        parts.append((f"seven_tau6/7_{m}_properly_mixed", all(mixed),
                      f"{sum(mixed)}/7 customers mixed; customer 1 sigma "
                      f"{np.round(res.sigma[0], 3).tolist()}"))
    report(8, parts)
