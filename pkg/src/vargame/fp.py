"""Fictitious play over precomputed utility tables.

Beliefs are empirical action frequencies seeded with the initial mixed strategy
as a weighted pseudo-observation::

    freq_i = (w0 * prior_i + counts_i) / (w0 + m)

so the first best response is taken against the initial strategies and each
later play enters with weight 1/(w0 + m).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from vargame.game import UtilityTables, action_values, build_tables, expected_utilities
from vargame.power import FPSettings, Scenario

TIE_TOL = 1e-12


@dataclass(frozen=True)
class BeliefState:
    counts: tuple[np.ndarray, ...]
    prior: tuple[np.ndarray, ...]
    prior_weight: float = 1.0
    m: int = 0
    last_actions: Optional[tuple[int, ...]] = None

    @classmethod
    def initial(cls, prior: Sequence[Sequence[float]], prior_weight: float = 1.0) -> "BeliefState":
        prior = tuple(np.asarray(p, float) for p in prior)
        counts = tuple(np.zeros(p.size, dtype=np.int64) for p in prior)
        return cls(counts, prior, prior_weight)

    def frequencies(self) -> list[np.ndarray]:
        w0, m = self.prior_weight, self.m
        if w0 + m == 0:
            return [p.copy() for p in self.prior]
        return [(w0 * p + c) / (w0 + m) for p, c in zip(self.prior, self.counts)]


@dataclass
class EquilibriumResult:
    mode: str
    sigma: list[np.ndarray]
    utilities: np.ndarray
    iterations: int
    converged: bool
    ne_gap: float
    gaps: np.ndarray
    last_step: float
    wall_time: float = 0.0
    trace: Optional[list[tuple]] = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "sigma": [s.tolist() for s in self.sigma],
            "expected_utility": self.utilities.tolist(),
            "total_utility": float(self.utilities.sum()),
            "iterations": self.iterations,
            "converged": self.converged,
            "ne_gap": self.ne_gap,
            "gaps": self.gaps.tolist(),
            "last_step": self.last_step,
        }


def best_response(i: int, freqs: Sequence[np.ndarray], tables: UtilityTables, mode: str) -> int:
    """Index of customer ``i``'s best pure reply; ties go to the lowest PF action."""
    vals = action_values(i, freqs, tables, mode)
    return int(np.flatnonzero(vals >= vals.max() - TIE_TOL)[0])


def fp_step(state: BeliefState, tables: UtilityTables, mode: str,
            settings: FPSettings = FPSettings()) -> BeliefState:
    counts = [c.copy() for c in state.counts]
    m = state.m + 1
    w0 = state.prior_weight
    freqs = state.frequencies()
    played = []
    sequential = settings.update_order == "round_robin"
    for i in range(tables.n):
        a = best_response(i, freqs, tables, mode)
        counts[i][a] += 1
        played.append(a)
        if sequential:
            freqs[i] = (w0 * state.prior[i] + counts[i]) / (w0 + m)
    return BeliefState(tuple(counts), state.prior, w0, m, tuple(played))


def run_fp(scenario: Scenario, mode: str, tables: Optional[UtilityTables] = None,
           settings: Optional[FPSettings] = None, trace: bool = False) -> EquilibriumResult:
    """Iterate fictitious play until beliefs settle or the iteration limit is hit.

    Beliefs have settled when no frequency moved by ``stop_tol`` in the last
    iteration and, unless ``settings.ne_tol`` is None, no customer can gain more
    than ``ne_tol`` by a pure deviation.

    Non-convergence is reported through ``converged=False`` rather than raised.
    With ``trace=True`` the result carries one row per (iteration, customer):
    ``(m, i, action_index, *frequencies)``.
    """
    from vargame.oracle import verify_epsilon_ne

    if mode not in ("eut", "pt"):
        raise ValueError(f"mode must be 'eut' or 'pt', got {mode!r}")
    settings = settings or scenario.fp
    tables = tables if tables is not None else build_tables(scenario)
    state = BeliefState.initial(scenario.initial_profile(), settings.prior_weight)
    freqs = state.frequencies()
    rows = [] if trace else None
    converged = False
    step = float("inf")
    t0 = time.perf_counter()
    while state.m < settings.max_iters:
        state = fp_step(state, tables, mode, settings)
        new = state.frequencies()
        step = max(float(np.max(np.abs(a - b))) for a, b in zip(new, freqs))
        freqs = new
        if rows is not None:
            for i, a in enumerate(state.last_actions):
                rows.append((state.m, i, a, *freqs[i].tolist()))
        if step < settings.stop_tol and (
                settings.ne_tol is None
                or verify_epsilon_ne(freqs, tables, mode, settings.ne_tol).ok):
            converged = True
            break
    elapsed = time.perf_counter() - t0
    check = verify_epsilon_ne(freqs, tables, mode)
    return EquilibriumResult(
        mode=mode,
        sigma=freqs,
        utilities=expected_utilities(freqs, tables, mode),
        iterations=state.m,
        converged=converged,
        ne_gap=check.gap,
        gaps=check.gaps,
        last_step=step,
        wall_time=elapsed,
        trace=rows,
    )


def modes_of(scenario_mode: str) -> tuple[str, ...]:
    return ("eut", "pt") if scenario_mode == "both" else (scenario_mode,)
