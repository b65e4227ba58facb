"""Scenario files: JSON (de)serialisation and the bundled example games.

Schema (keys mirror the dataclass fields)::

    {
      "name": "two_customer",
      "notes": ["..."],
      "mode": "eut" | "pt" | "both",
      "customers": [
        {"id": "c1", "p": 2.0, "phi_init": 0.77, "phi_std": 0.85, "tau": 0.7,
         "actions": [0.8, 0.9], "alpha": 0.7, "beta": 0.6, "k": 2.0,
         "reference": {"mode": "standard"} | {"mode": "explicit", "value": 0.1}
                      | {"mode": "zero"},
         "unverified": ["phi_init"]}
      ],
      "fp": {"stop_tol": 1e-4, "max_iters": 1000000,
             "update_order": "simultaneous" | "round_robin", "prior_weight": 1.0,
             "ne_tol": 0.0005},
      "initial_strategies": [[0.67, 0.33], [0.2, 0.8]]
    }

``fp``, ``initial_strategies``, ``mode`` and the PT parameters may be omitted.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Union

from vargame.power import (
    CustomerSpec,
    FPSettings,
    Reference,
    Scenario,
    ValidationReport,
    validate_scenario,
)

BUNDLED = ("two_customer", "three_customer", "seven_customer", "n_customer_base", "all_below")

_CUSTOMER_KEYS = {"id", "p", "phi_init", "phi_std", "tau", "actions", "alpha", "beta", "k",
                  "reference", "unverified"}
_FP_KEYS = {"stop_tol", "max_iters", "update_order", "prior_weight", "ne_tol"}


class ScenarioError(ValueError):
    """A scenario file could not be parsed."""


class ScenarioInvalid(ValueError):
    """A scenario parsed but violates its invariants."""

    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


def _customer(raw: dict, where: str) -> CustomerSpec:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected an object")
    unknown = set(raw) - _CUSTOMER_KEYS
    if unknown:
        raise ScenarioError(f"{where}: unknown field(s) {sorted(unknown)}")
    for key in ("id", "p", "phi_init", "phi_std", "tau", "actions"):
        if key not in raw:
            raise ScenarioError(f"{where}.{key}: missing")
    try:
        return CustomerSpec(
            id=str(raw["id"]),
            p=float(raw["p"]),
            phi_init=float(raw["phi_init"]),
            phi_std=float(raw["phi_std"]),
            tau=float(raw["tau"]),
            actions=tuple(float(a) for a in raw["actions"]),
            alpha=float(raw.get("alpha", 1.0)),
            beta=float(raw.get("beta", 1.0)),
            k=float(raw.get("k", 1.0)),
            reference=Reference.parse(raw.get("reference")),
            unverified=tuple(raw.get("unverified", ())),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def scenario_from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("top level: expected an object")
    if "customers" not in raw or not isinstance(raw["customers"], list):
        raise ScenarioError("customers: missing or not a list")
    customers = [_customer(c, f"customers[{j}]") for j, c in enumerate(raw["customers"])]
    fp_raw = raw.get("fp") or {}
    unknown = set(fp_raw) - _FP_KEYS
    if unknown:
        raise ScenarioError(f"fp: unknown field(s) {sorted(unknown)}")
    fp = FPSettings(**fp_raw)
    init = raw.get("initial_strategies")
    return Scenario(
        customers=tuple(customers),
        mode=raw.get("mode", "both"),
        fp=fp,
        initial_strategies=None if init is None else tuple(tuple(v) for v in init),
        name=raw.get("name", ""),
        notes=tuple(raw.get("notes", ())),
    )


def scenario_to_dict(s: Scenario) -> dict:
    customers = []
    for c in s.customers:
        d = {
            "id": c.id, "p": c.p, "phi_init": c.phi_init, "phi_std": c.phi_std, "tau": c.tau,
            "actions": list(c.actions), "alpha": c.alpha, "beta": c.beta, "k": c.k,
            "reference": c.reference.to_json(),
        }
        if c.unverified:
            d["unverified"] = list(c.unverified)
        customers.append(d)
    out = {"name": s.name, "notes": list(s.notes), "mode": s.mode, "customers": customers,
           "fp": asdict(s.fp)}
    if s.initial_strategies is not None:
        out["initial_strategies"] = [list(v) for v in s.initial_strategies]
    return out


def parse_scenario(text: str, validate: bool = True) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    s = scenario_from_dict(raw)
    if validate:
        report = validate_scenario(s)
        if not report.ok:
            raise ScenarioInvalid(report)
    return s


def resolve_path(name: Union[str, Path]) -> Path:
    """A filesystem path, or the bundled scenario of that name."""
    path = Path(name)
    if path.exists():
        return path
    stem = path.name[:-5] if path.name.endswith(".json") else path.name
    if stem in BUNDLED:
        return Path(str(resources.files("vargame") / "data" / f"{stem}.json"))
    raise FileNotFoundError(f"no scenario file {name!r} and no bundled scenario {stem!r}")


def load_scenario(path: Union[str, Path], validate: bool = True) -> Scenario:
    p = resolve_path(path)
    return parse_scenario(p.read_text(), validate=validate)


def save_scenario(s: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(s))


def dumps(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def bundled(name: str) -> Scenario:
    return load_scenario(name)
