"""Pure and expected utilities of the compensation game.

Utility tables are dense numpy arrays of shape ``(N, |A_1|, ..., |A_N|)``:
``u[i][a_1, ..., a_N]`` is customer ``i``'s utility at that joint action.
Profiles are enumerated in C order, so customer 0 varies slowest.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from vargame.power import PF_TOL, CustomerSpec, Scenario, var_compensation

DEFAULT_PROFILE_CAP = 10**7


class CapacityError(RuntimeError):
    """The joint action space is larger than the configured cap."""


def profile_cap() -> int:
    raw = os.environ.get("VARGAME_PROFILE_CAP")
    return int(raw) if raw else DEFAULT_PROFILE_CAP


def utilities_at(customers: Sequence[CustomerSpec], pfs: Sequence[float]) -> np.ndarray:
    """Objective utility of every customer when customer ``j`` reaches ``pfs[j]``.

    This is the scalar, branch-by-branch form of the utility and is used both for
    the standard-profile reference point and as a check on the vectorised tables.
    """
    n = len(customers)
    q = [var_compensation(c.p, c.phi_init, a) for c, a in zip(customers, pfs)]
    q_std = [var_compensation(c.p, c.phi_init, c.phi_std) for c in customers]
    total = sum(q)
    met = total >= sum(q_std) - PF_TOL
    out = np.empty(n)
    for i, c in enumerate(customers):
        exchange = q[i] - total / n
        if not met:
            out[i] = -q[i]
        elif pfs[i] >= c.phi_std - PF_TOL:
            out[i] = exchange - c.tau * max(0.0, q[i] - q_std[i])
        else:
            out[i] = exchange
    return out


def pt_frame(u, u0, alpha, beta, k):
    """Prospect-theoretic value of ``u`` relative to reference ``u0``.

    Gains are raised to ``alpha``; losses to ``beta`` and scaled by ``-k``.
    Works elementwise on arrays.
    """
    d = np.asarray(u, dtype=float) - u0
    gain = d >= 0
    mag = np.abs(d)
    out = np.where(gain, mag ** alpha, -k * mag ** beta)
    # identical inputs give exact zeros rather than 0**alpha round-off
    out = np.where(d == 0, 0.0, out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class UtilityTables:
    """Every customer's objective and framed utility at every joint action."""

    customers: tuple[CustomerSpec, ...]
    q: tuple[np.ndarray, ...]          # per customer, q_i^c for each own action
    q_std: np.ndarray                  # per customer standard compensation
    requirement: float                 # sum of q_std
    u0: np.ndarray                     # per customer reference utility
    u: np.ndarray                      # shape (N, *sizes)
    u_pt: np.ndarray                   # shape (N, *sizes)

    @property
    def n(self) -> int:
        return len(self.customers)

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.u.shape[1:]

    @property
    def n_profiles(self) -> int:
        return int(np.prod(self.sizes))

    def values(self, mode: str) -> np.ndarray:
        if mode == "eut":
            return self.u
        if mode == "pt":
            return self.u_pt
        raise ValueError(f"mode must be 'eut' or 'pt', got {mode!r}")

    def exchange(self) -> np.ndarray:
        """Exchange terms E_i at every profile, same shape as ``u``."""
        grids = self._q_grids()
        return grids - grids.sum(axis=0) / self.n

    def _q_grids(self) -> np.ndarray:
        n = self.n
        out = np.empty((n,) + self.sizes)
        for i, qi in enumerate(self.q):
            shape = [1] * n
            shape[i] = qi.size
            out[i] = np.broadcast_to(qi.reshape(shape), self.sizes)
        return out

    def profiles(self):
        """Action-index tuples in table order (customer 0 slowest)."""
        return np.ndindex(*self.sizes)

    def reframed(self, *, alpha=None, beta=None, k=None, u0=None) -> "UtilityTables":
        """Copy with the framed table recomputed under new PT parameters.

        Each argument may be a scalar (applied to every customer) or a
        per-customer sequence; omitted ones keep the customers' values.
        """
        def per(values, attr):
            if values is None:
                return [getattr(c, attr) for c in self.customers]
            return list(np.broadcast_to(np.asarray(values, float), (self.n,)))

        alphas, betas, ks = per(alpha, "alpha"), per(beta, "beta"), per(k, "k")
        ref = self.u0 if u0 is None else np.broadcast_to(np.asarray(u0, float), (self.n,)).copy()
        u_pt = np.stack([pt_frame(self.u[i], ref[i], alphas[i], betas[i], ks[i])
                         for i in range(self.n)])
        customers = tuple(c.with_(alpha=a, beta=b, k=kk)
                          for c, a, b, kk in zip(self.customers, alphas, betas, ks))
        return replace(self, customers=customers, u0=ref, u_pt=u_pt)


def reference_point(i: int, customers: Sequence[CustomerSpec]) -> float:
    """Reference utility of customer ``i`` per its reference mode.

    The standard profile places every customer exactly at its standard PF, even
    when that PF is not one of its actions.
    """
    ref = customers[i].reference
    if ref.mode == "zero":
        return 0.0
    if ref.mode == "explicit":
        return float(ref.value)
    return float(utilities_at(customers, [c.phi_std for c in customers])[i])


def build_tables(s: Scenario, cap: int | None = None) -> UtilityTables:
    """Evaluate every customer's utility at every joint action of ``s``.

    Raises:
        CapacityError: If the number of joint actions exceeds ``cap``
            (default: ``VARGAME_PROFILE_CAP`` or 10**7).
    """
    customers = tuple(s.customers)
    n = len(customers)
    sizes = tuple(len(c.actions) for c in customers)
    cap = profile_cap() if cap is None else cap
    count = int(np.prod(sizes, dtype=object))
    if count > cap:
        raise CapacityError(f"{count} joint profiles exceed the cap of {cap}")

    q = tuple(np.array([var_compensation(c.p, c.phi_init, a) for a in c.actions])
              for c in customers)
    q_std = np.array([var_compensation(c.p, c.phi_init, c.phi_std) for c in customers])
    requirement = float(q_std.sum())

    grids = np.empty((n,) + sizes)
    meets_std = np.empty((n,) + sizes, dtype=bool)
    for i, c in enumerate(customers):
        shape = [1] * n
        shape[i] = sizes[i]
        grids[i] = np.broadcast_to(q[i].reshape(shape), sizes)
        own = np.array([a >= c.phi_std - PF_TOL for a in c.actions])
        meets_std[i] = np.broadcast_to(own.reshape(shape), sizes)
    total = grids.sum(axis=0)
    met = total >= requirement - PF_TOL
    exchange = grids - total / n
    tau = np.array([c.tau for c in customers]).reshape((n,) + (1,) * n)
    penalty = tau * np.maximum(0.0, grids - q_std.reshape((n,) + (1,) * n))
    u = np.where(met, np.where(meets_std, exchange - penalty, exchange), -grids)

    u0 = np.array([reference_point(i, customers) for i in range(n)])
    u_pt = np.stack([pt_frame(u[i], u0[i], c.alpha, c.beta, c.k)
                     for i, c in enumerate(customers)])
    return UtilityTables(customers, q, q_std, requirement, u0, u, u_pt)


def exchange_term(i: int, profile: Sequence[int], tables: UtilityTables) -> float:
    qs = [tables.q[j][a] for j, a in enumerate(profile)]
    return float(qs[i] - sum(qs) / len(qs))


def pure_utility(i: int, profile: Sequence[int], tables: UtilityTables, mode: str = "eut") -> float:
    return float(tables.values(mode)[(i,) + tuple(profile)])


def action_values(i: int, sigma: Sequence[np.ndarray], tables: UtilityTables, mode: str) -> np.ndarray:
    """Expected utility of each of customer ``i``'s pure actions against the others' mixes.

    ``sigma[i]`` is ignored.
    """
    t = tables.values(mode)[i]
    # contract trailing axes first so earlier axis numbers stay valid
    for j in range(tables.n - 1, -1, -1):
        if j != i:
            t = np.tensordot(t, np.asarray(sigma[j], float), axes=([j], [0]))
    return t


def expected_utility_of_action(i: int, a_i: int, sigma: Sequence[np.ndarray],
                               tables: UtilityTables, mode: str) -> float:
    return float(action_values(i, sigma, tables, mode)[a_i])


def expected_utility(i: int, sigma: Sequence[np.ndarray], tables: UtilityTables, mode: str) -> float:
    """Expectation of customer ``i``'s (objective or framed) utility under ``sigma``."""
    return float(action_values(i, sigma, tables, mode) @ np.asarray(sigma[i], float))


def expected_utilities(sigma, tables: UtilityTables, mode: str) -> np.ndarray:
    return np.array([expected_utility(i, sigma, tables, mode) for i in range(tables.n)])


def dump_tables_csv(tables: UtilityTables, fh) -> None:
    """Write one row per joint profile: indices, then q, E, u, u_pt per customer."""
    from vargame.formatting import fmt

    n = tables.n
    header = ["profile_id"] + [f"a{i}" for i in range(n)]
    for name in ("q", "E", "u", "u_pt"):
        header += [f"{name}{i}" for i in range(n)]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    exchange = tables.exchange()
    for pid, prof in enumerate(tables.profiles()):
        row = [pid, *prof]
        row += [fmt(tables.q[i][a]) for i, a in enumerate(prof)]
        for arr in (exchange, tables.u, tables.u_pt):
            row += [fmt(arr[(i,) + prof]) for i in range(n)]
        w.writerow(row)
