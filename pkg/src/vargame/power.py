"""Power-factor geometry and the validated parameter types of a game instance.

All reactive quantities are in kVar and active power in kW. Utilities are
expressed directly in kVar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

# Absolute tolerance for power-factor and kVar comparisons. An action equal to
# the standard PF (up to rounding) counts as meeting the standard.
PF_TOL = 1e-12

MODES = ("eut", "pt", "both")
UPDATE_ORDERS = ("simultaneous", "round_robin")
REFERENCE_MODES = ("standard", "explicit", "zero")


class DomainError(ValueError):
    """Raised when a power factor lies outside (0, 1]."""


def _check_pf(name: str, value: float) -> None:
    if not (0.0 < value <= 1.0) or math.isnan(value):
        raise DomainError(f"{name}={value!r} is not a power factor in (0, 1]")


def _tan_angle(pf: float) -> float:
    # q/p for a load at this power factor; exactly 0 at unity PF
    if pf == 1.0:
        return 0.0
    return math.sqrt(1.0 - pf * pf) / pf


def var_compensation(p: float, phi: float, a: float) -> float:
    """Reactive power offset by raising a load of ``p`` kW from PF ``phi`` to ``a``.

    Args:
        p: Active power in kW.
        phi: Initial (uncompensated) power factor.
        a: Power factor reached after compensation. ``a == phi`` gives 0.

    Returns:
        Compensation in kVar; negative when ``a < phi``.

    Raises:
        DomainError: If either power factor is outside (0, 1].
    """
    _check_pf("phi", phi)
    _check_pf("a", a)
    return p * _tan_angle(phi) - p * _tan_angle(a)


@dataclass(frozen=True)
class Reference:
    """How a customer's framing reference utility is obtained.

    ``standard`` evaluates the objective utility at the profile where every
    customer sits exactly at its standard PF; ``explicit`` uses ``value``;
    ``zero`` frames around 0.
    """

    mode: str = "standard"
    value: float = 0.0

    @classmethod
    def parse(cls, raw) -> "Reference":
        if isinstance(raw, Reference):
            return raw
        if raw is None:
            return cls()
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return cls("explicit", float(raw))
        if isinstance(raw, str):
            if raw in ("standard", "zero"):
                return cls(raw)
            return cls("explicit", float(raw))
        if isinstance(raw, dict):
            mode = raw.get("mode", "standard")
            return cls(mode, float(raw.get("value", 0.0)))
        raise TypeError(f"cannot interpret reference {raw!r}")

    def to_json(self):
        if self.mode == "explicit":
            return {"mode": "explicit", "value": self.value}
        return {"mode": self.mode}


@dataclass(frozen=True)
class CustomerSpec:
    """Physical and behavioural parameters of one customer."""

    id: str
    p: float
    phi_init: float
    phi_std: float
    tau: float
    actions: tuple[float, ...]
    alpha: float = 1.0
    beta: float = 1.0
    k: float = 1.0
    reference: Reference = field(default_factory=Reference)
    # names of fields holding placeholder values not taken from a measured source
    unverified: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(float(a) for a in self.actions))
        object.__setattr__(self, "unverified", tuple(self.unverified))
        object.__setattr__(self, "reference", Reference.parse(self.reference))

    def with_(self, **changes) -> "CustomerSpec":
        return replace(self, **changes)


def var_required(customer: CustomerSpec) -> float:
    """Compensation needed to bring ``customer`` exactly to its standard PF."""
    return var_compensation(customer.p, customer.phi_init, customer.phi_std)


@dataclass(frozen=True)
class FPSettings:
    """Fictitious-play controls.

    Attributes:
        stop_tol: Stop once no empirical frequency moves by this much in one
            iteration (infinity norm over all customers).
        max_iters: Hard iteration limit; hitting it marks the run unconverged.
        update_order: ``simultaneous`` (everyone responds to the previous
            beliefs) or ``round_robin`` (customers move in index order and see
            updates made earlier in the same iteration).
        prior_weight: Pseudo-observation weight of the initial mixed strategy.
        ne_tol: Once the step test passes, also require the beliefs to be an
            ``ne_tol``-equilibrium before declaring convergence. ``None``
            disables the check.
    """

    stop_tol: float = 1e-4
    max_iters: int = 1_000_000
    update_order: str = "simultaneous"
    prior_weight: float = 1.0
    ne_tol: Optional[float] = 5e-4


@dataclass(frozen=True)
class Scenario:
    customers: tuple[CustomerSpec, ...]
    mode: str = "both"
    fp: FPSettings = field(default_factory=FPSettings)
    initial_strategies: Optional[tuple[tuple[float, ...], ...]] = None
    name: str = ""
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "customers", tuple(self.customers))
        if self.initial_strategies is not None:
            object.__setattr__(
                self,
                "initial_strategies",
                tuple(tuple(float(x) for x in v) for v in self.initial_strategies),
            )
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def n(self) -> int:
        return len(self.customers)

    def with_customers(self, **changes) -> "Scenario":
        """Copy with the same field overrides applied to every customer."""
        return replace(self, customers=tuple(c.with_(**changes) for c in self.customers))

    def initial_profile(self) -> list[list[float]]:
        """Initial mixed strategies, uniform where none were given."""
        if self.initial_strategies is not None:
            return [list(v) for v in self.initial_strategies]
        return [[1.0 / len(c.actions)] * len(c.actions) for c in self.customers]


@dataclass(frozen=True)
class Violation:
    customer: str
    field: str
    message: str

    def __str__(self):
        return f"{self.customer}.{self.field}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, customer: str, fld: str, message: str) -> None:
        self.violations.append(Violation(customer, fld, message))

    def __str__(self):
        if self.ok:
            return "scenario valid"
        return "\n".join(str(v) for v in self.violations)


def _validate_customer(c: CustomerSpec, report: ValidationReport) -> None:
    cid = c.id
    if not c.p > 0:
        report.add(cid, "p", "active power must be > 0")
    for name in ("phi_init", "phi_std"):
        v = getattr(c, name)
        if not (0.0 < v <= 1.0):
            report.add(cid, name, f"{v} is not a power factor in (0, 1]")
    if c.phi_init >= 1.0:
        report.add(cid, "phi_init", "phi_init = 1 leaves an empty strategy space")
    if not (0.0 <= c.tau <= 1.0):
        report.add(cid, "tau", f"tau out of [0,1]: {c.tau}")
    if not 0.0 < c.alpha <= 1.0:
        report.add(cid, "alpha", f"alpha out of (0,1]: {c.alpha}")
    if not 0.0 < c.beta <= 1.0:
        report.add(cid, "beta", f"beta out of (0,1]: {c.beta}")
    if not c.k > 0:
        report.add(cid, "k", f"k must be > 0: {c.k}")
    if c.reference.mode not in REFERENCE_MODES:
        report.add(cid, "reference", f"unknown reference mode {c.reference.mode!r}")
    if not c.actions:
        report.add(cid, "actions", "action set is empty")
    for a in c.actions:
        if a <= c.phi_init:
            report.add(cid, "actions", f"action {a} <= phi_init {c.phi_init}")
        elif a > 1.0:
            report.add(cid, "actions", f"action {a} > 1")
    if any(b <= a for a, b in zip(c.actions, c.actions[1:])):
        report.add(cid, "actions", "actions must be strictly increasing")


def validate_scenario(s: Scenario) -> ValidationReport:
    """Collect every invariant violation in ``s``; never raises."""
    report = ValidationReport()
    if not s.customers:
        report.add("scenario", "customers", "at least one customer is required")
    ids = [c.id for c in s.customers]
    if len(set(ids)) != len(ids):
        report.add("scenario", "customers", "customer ids must be unique")
    for c in s.customers:
        _validate_customer(c, report)
    if s.mode not in MODES:
        report.add("scenario", "mode", f"mode must be one of {MODES}")
    fp = s.fp
    if not fp.stop_tol > 0:
        report.add("scenario", "fp.stop_tol", "must be > 0")
    if not (isinstance(fp.max_iters, int) and fp.max_iters >= 1):
        report.add("scenario", "fp.max_iters", "must be an integer >= 1")
    if fp.update_order not in UPDATE_ORDERS:
        report.add("scenario", "fp.update_order", f"must be one of {UPDATE_ORDERS}")
    if not fp.prior_weight >= 0:
        report.add("scenario", "fp.prior_weight", "must be >= 0")
    if fp.ne_tol is not None and not fp.ne_tol > 0:
        report.add("scenario", "fp.ne_tol", "must be > 0 or null")
    if s.initial_strategies is not None:
        if len(s.initial_strategies) != len(s.customers):
            report.add("scenario", "initial_strategies", "one vector per customer required")
        else:
            for c, vec in zip(s.customers, s.initial_strategies):
                _check_distribution(c.id, "initial_strategies", vec, len(c.actions), report)
    return report


def _check_distribution(cid: str, fld: str, vec: Sequence[float], size: int,
                        report: ValidationReport) -> None:
    if len(vec) != size:
        report.add(cid, fld, f"expected {size} entries, got {len(vec)}")
        return
    if any(x < 0 for x in vec):
        report.add(cid, fld, "negative probability")
    if abs(sum(vec) - 1.0) > 1e-9:
        report.add(cid, fld, f"probabilities sum to {sum(vec)}, not 1")
