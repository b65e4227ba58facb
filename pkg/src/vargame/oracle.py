"""Brute-force equilibrium checks that do not depend on fictitious play."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from vargame.game import CapacityError, UtilityTables, action_values, profile_cap

GAP_TOL = 1e-12


class DegenerateGame(ValueError):
    """A 2x2 game has no proper (interior) mixed equilibrium."""


@dataclass
class NEReport:
    mode: str
    pure: list[tuple[int, ...]] = field(default_factory=list)
    mixed: Optional[tuple[np.ndarray, np.ndarray]] = None
    mixed_gap: Optional[float] = None
    note: str = ""

    @property
    def unique_pure(self) -> Optional[tuple[int, ...]]:
        return self.pure[0] if len(self.pure) == 1 else None

    def to_json(self, tables: Optional[UtilityTables] = None) -> dict:
        out = {"mode": self.mode, "pure": [list(p) for p in self.pure], "note": self.note}
        if tables is not None:
            out["pure_pf"] = [[tables.customers[i].actions[a] for i, a in enumerate(p)]
                              for p in self.pure]
        if self.mixed is not None:
            out["mixed"] = [m.tolist() for m in self.mixed]
            out["mixed_gap"] = self.mixed_gap
        return out


@dataclass
class EpsilonCheck:
    gaps: np.ndarray
    epsilon: float

    @property
    def gap(self) -> float:
        return float(self.gaps.max())

    @property
    def ok(self) -> bool:
        return bool(self.gap <= self.epsilon)


def enumerate_pure_ne(tables: UtilityTables, mode: str) -> NEReport:
    """All profiles where no customer gains by a unilateral pure deviation."""
    if tables.n_profiles > profile_cap():
        raise CapacityError(f"{tables.n_profiles} profiles exceed the cap")
    vals = tables.values(mode)
    stable = np.ones(tables.sizes, dtype=bool)
    for i in range(tables.n):
        best = vals[i].max(axis=i, keepdims=True)
        stable &= vals[i] >= best - GAP_TOL
    pure = [tuple(int(x) for x in idx) for idx in np.argwhere(stable)]
    note = "" if pure else "no pure equilibrium"
    if len(pure) > 1:
        note = f"{len(pure)} pure equilibria (not unique)"
    return NEReport(mode, pure, note=note)


def solve_2x2_mixed(tables: UtilityTables, mode: str) -> NEReport:
    """Interior mixed equilibrium of a two-customer, two-action game.

    Each customer's mix is pinned by making the *other* customer indifferent
    between its two actions.

    Raises:
        DegenerateGame: If an indifference equation has no solution in (0, 1).
    """
    if tables.n != 2 or tables.sizes != (2, 2):
        raise ValueError("solve_2x2_mixed needs exactly two customers with two actions each")
    v = tables.values(mode)
    a, b = v[0], v[1]
    # customer 2 indifferent: x*b[0,0] + (1-x)*b[1,0] == x*b[0,1] + (1-x)*b[1,1]
    den_x = (b[0, 0] - b[0, 1]) - (b[1, 0] - b[1, 1])
    # customer 1 indifferent: y*a[0,0] + (1-y)*a[0,1] == y*a[1,0] + (1-y)*a[1,1]
    den_y = (a[0, 0] - a[1, 0]) - (a[0, 1] - a[1, 1])
    if abs(den_x) < GAP_TOL or abs(den_y) < GAP_TOL:
        raise DegenerateGame("indifference equations are singular; see pure enumeration")
    x = (b[1, 1] - b[1, 0]) / den_x
    y = (a[1, 1] - a[0, 1]) / den_y
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
        raise DegenerateGame(f"indifference solution ({x:.6g}, {y:.6g}) outside (0,1)")
    mixed = (np.array([x, 1.0 - x]), np.array([y, 1.0 - y]))
    check = verify_epsilon_ne(list(mixed), tables, mode)
    report = enumerate_pure_ne(tables, mode)
    report.mixed = mixed
    report.mixed_gap = check.gap
    if not report.pure:
        report.note = "no pure equilibrium; unique mixed equilibrium"
    return report


def verify_epsilon_ne(sigma: Sequence[np.ndarray], tables: UtilityTables, mode: str,
                      epsilon: float = 1e-3) -> EpsilonCheck:
    """Best pure-deviation improvement for every customer.

    Expected utility is linear in a customer's own mix, so no mixed deviation
    can beat the best pure one.
    """
    gaps = np.empty(tables.n)
    for i in range(tables.n):
        vals = action_values(i, sigma, tables, mode)
        gaps[i] = max(0.0, float(vals.max() - vals @ np.asarray(sigma[i], float)))
    return EpsilonCheck(gaps, epsilon)
