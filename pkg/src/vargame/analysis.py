"""Parameter sweeps, the loss-aversion threshold search and regime classification."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from vargame.formatting import fmt
from vargame.fp import EquilibriumResult, run_fp
from vargame.game import UtilityTables, build_tables
from vargame.power import PF_TOL, Reference, Scenario

SWEEP_PARAMS = ("beta", "reference", "k", "tau", "n_customers")


class NoSignChange(ValueError):
    """PT and EUT utilities do not cross inside the requested k range."""


# -- regimes -----------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    kind: str                     # AllBelow | AllAbove | TwoByTwoStraddle | General
    tau_relation: str = ""        # for AllAbove: '<', '>', '=' or 'mixed' vs (N-1)/N

    def __str__(self):
        return f"{self.kind}({self.tau_relation})" if self.tau_relation else self.kind


def classify_regime(s: Scenario) -> Regime:
    cs = s.customers
    n = len(cs)
    if all(a < c.phi_std - PF_TOL for c in cs for a in c.actions):
        return Regime("AllBelow")
    if all(a > c.phi_std + PF_TOL for c in cs for a in c.actions):
        share = (n - 1) / n
        rel = set()
        for c in cs:
            if abs(c.tau - share) <= 1e-12:
                rel.add("=")
            else:
                rel.add("<" if c.tau < share else ">")
        return Regime("AllAbove", rel.pop() if len(rel) == 1 else "mixed")
    if n == 2 and all(len(c.actions) == 2 for c in cs):
        v = cs[0].actions
        same = cs[1].actions == v and abs(cs[0].phi_std - cs[1].phi_std) <= PF_TOL
        if same and abs((v[0] + v[1]) / 2 - cs[0].phi_std) <= 1e-9:
            return Regime("TwoByTwoStraddle")
    return Regime("General")


def predicted_pure_profile(s: Scenario) -> Optional[tuple[int, ...]]:
    """Dominant-strategy profile implied by the regime, if it pins one down."""
    r = classify_regime(s)
    lowest = tuple(0 for _ in s.customers)
    highest = tuple(len(c.actions) - 1 for c in s.customers)
    if r.kind == "AllBelow":
        return lowest
    if r.kind == "AllAbove" and r.tau_relation == "<":
        return highest
    if r.kind == "AllAbove" and r.tau_relation == ">":
        return lowest
    return None


# -- helpers -----------------------------------------------------------------

def optimum_total(tables: UtilityTables) -> tuple[float, tuple[int, ...]]:
    """Largest total objective utility over pure profiles, and where it occurs."""
    total = tables.u.sum(axis=0)
    idx = np.unravel_index(int(np.argmax(total)), total.shape)
    return float(total[idx]), tuple(int(x) for x in idx)


def _utility(res: EquilibriumResult, scope: Union[str, int]) -> float:
    if scope == "total":
        return float(res.utilities.sum())
    return float(res.utilities[int(scope)])


# -- k threshold -------------------------------------------------------------

@dataclass
class ThresholdResult:
    k0: float
    bracket: tuple[float, float]
    gap_at: tuple[float, float]         # PT minus EUT utility at the bracket ends
    scope: Union[str, int]
    eut_utility: float
    evaluations: list[tuple[float, float]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "k0": self.k0,
            "bracket": list(self.bracket),
            "gap_at_bracket": list(self.gap_at),
            "scope": self.scope,
            "eut_utility": self.eut_utility,
            "evaluations": [list(e) for e in self.evaluations],
        }


def k_threshold(base: Scenario, k_range: tuple[float, float] = (0.5, 2.0), tol: float = 1e-3,
                scope: Union[str, int] = "total") -> ThresholdResult:
    """Bisect for the loss-aversion level where PT and EUT equilibrium utilities meet.

    Every customer gets the same ``k``; each evaluation re-solves the PT game by
    fictitious play. ``scope`` is ``"total"`` or a customer index. Only a sign
    change is required, not monotonicity.

    Raises:
        NoSignChange: If PT minus EUT has the same sign at both ends of ``k_range``.
    """
    eut = _utility(run_fp(base, "eut"), scope)
    evals: list[tuple[float, float]] = []

    def g(k: float) -> float:
        res = run_fp(base.with_customers(k=k), "pt")
        val = _utility(res, scope) - eut
        evals.append((k, val))
        return val

    lo, hi = k_range
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return ThresholdResult(lo, (lo, lo), (0.0, 0.0), scope, eut, evals)
    if g_hi == 0.0:
        return ThresholdResult(hi, (hi, hi), (0.0, 0.0), scope, eut, evals)
    if np.sign(g_lo) == np.sign(g_hi):
        raise NoSignChange(f"PT-EUT is {g_lo:.6g} at k={lo} and {g_hi:.6g} at k={hi}")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            lo = hi = mid
            g_lo = g_hi = 0.0
            break
        if np.sign(g_mid) == np.sign(g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    return ThresholdResult(0.5 * (lo + hi), (lo, hi), (g_lo, g_hi), scope, eut, evals)


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    param: str
    grid: tuple[float, ...]
    base: Scenario
    modes: tuple[str, ...] = ("eut", "pt")

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"param must be one of {SWEEP_PARAMS}")
        if not self.grid:
            raise ValueError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")


@dataclass
class SweepRow:
    value: float
    n: int
    results: dict[str, EquilibriumResult]

    def utilities(self, mode: str) -> np.ndarray:
        return self.results[mode].utilities


def scenario_at(base: Scenario, param: str, value: float) -> Scenario:
    """``base`` with the swept parameter set to ``value`` for every customer."""
    if param == "beta":
        return base.with_customers(beta=value)
    if param == "k":
        return base.with_customers(k=value)
    if param == "tau":
        return base.with_customers(tau=value)
    if param == "reference":
        return base.with_customers(reference=Reference("explicit", value))
    if param == "n_customers":
        n = int(round(value))
        if n < 1:
            raise ValueError("n_customers must be >= 1")
        proto = base.customers[0]
        customers = tuple(proto.with_(id=f"{proto.id}-{j + 1}") for j in range(n))
        return replace(base, customers=customers, initial_strategies=None)
    raise ValueError(f"unknown sweep parameter {param!r}")


def _solve_point(args) -> SweepRow:
    spec, value = args
    s = scenario_at(spec.base, spec.param, value)
    tables = build_tables(s)
    results = {m: run_fp(s, m, tables=tables) for m in spec.modes}
    return SweepRow(value, s.n, results)


def sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Solve a fresh game at every grid point; rows come back in grid order."""
    jobs = [(spec, v) for v in spec.grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_point, jobs))
    return [_solve_point(j) for j in jobs]


def sweep_header(spec: SweepSpec, n_max: int) -> list[str]:
    cols = ["param", "value", "n"]
    for m in spec.modes:
        cols += [f"{m}_u{i}" for i in range(n_max)]
        cols += [f"{m}_total", f"{m}_mean", f"{m}_converged", f"{m}_iterations", f"{m}_ne_gap",
                 f"{m}_sigma"]
    return cols


def write_sweep_csv(spec: SweepSpec, rows: Sequence[SweepRow], fh) -> None:
    """Sweep table; ``*_sigma`` holds ``;``-separated customers of ``|``-separated probabilities."""
    n_max = max(r.n for r in rows)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(sweep_header(spec, n_max))
    for r in rows:
        line = [spec.param, fmt(r.value), r.n]
        for m in spec.modes:
            res = r.results[m]
            u = list(res.utilities) + [float("nan")] * (n_max - r.n)
            line += ["" if np.isnan(x) else fmt(x) for x in u]
            line += [fmt(res.utilities.sum()), fmt(res.utilities.mean()), int(res.converged),
                     res.iterations, fmt(res.ne_gap),
                     ";".join("|".join(fmt(p) for p in s) for s in res.sigma)]
        w.writerow(line)


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive of stop) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + j * step, 12) for j in range(count))
    return tuple(float(x) for x in text.split(",") if x.strip())
