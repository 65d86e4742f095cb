"""Check results and deterministic on-disk formats.

All writers emit byte-identical output for equal inputs: floats go
through repr (shortest round-trip form), JSON keys are sorted, CSV rows
use a fixed "\n" terminator, and every collection is sorted by an
explicit key before writing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

PASS = "PASS"
FAIL = "FAIL"
EQUALITY = "EQUALITY"
NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class CheckReport:
    """One verified statement about one model."""

    suite: str
    check: str
    model: str
    params: dict = field(default_factory=dict)
    status: str = PASS
    max_violation: float = 0.0
    tolerance: float = 0.0
    samples: int = 0
    detail: dict | None = None

    def sort_key(self) -> tuple:
        return (self.suite, self.check, self.model, _stable_params(self.params))


def _stable_params(params: dict) -> str:
    return json.dumps(_plain(params), sort_keys=True)


def make_report(
    suite: str,
    check: str,
    model: str,
    params: dict,
    max_violation: float,
    tolerance: float,
    samples: int,
    *,
    equality: bool = False,
    not_applicable: bool = False,
    detail: dict | None = None,
) -> CheckReport:
    """Build a report with the status derived from the violation.

    The FAIL status is exactly "max_violation > tolerance"; EQUALITY is
    only granted to passing checks that claim the rigidity case.
    """
    if not_applicable:
        status = NOT_APPLICABLE
    elif max_violation > tolerance:
        status = FAIL
    elif equality:
        status = EQUALITY
    else:
        status = PASS
    return CheckReport(
        suite=suite,
        check=check,
        model=model,
        params=params,
        status=status,
        max_violation=float(max_violation),
        tolerance=float(tolerance),
        samples=int(samples),
        detail=detail,
    )


def _plain(value):
    """Convert numpy scalars and containers to plain Python types."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return value
    if isinstance(value, int):
        return value
    return str(value)


def _fmt(value) -> str:
    """Shortest round-trip text for a CSV cell."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_checks_json(path: Path | str, reports: Sequence[CheckReport]) -> None:
    ordered = sorted(reports, key=CheckReport.sort_key)
    payload = [
        {
            "suite": r.suite,
            "check": r.check,
            "model": r.model,
            "params": _plain(r.params),
            "status": r.status,
            "max_violation": _plain(r.max_violation),
            "tolerance": _plain(r.tolerance),
            "samples": r.samples,
            **({"detail": _plain(r.detail)} if r.detail else {}),
        }
        for r in ordered
    ]
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")


MONOTONE_COLUMNS = [
    "model",
    "n",
    "beta",
    "kind",
    "level",
    "r_level",
    "value",
    "d_surface",
    "d_bulk",
    "d_fd",
    "H",
    "grad_conf",
]

MCF_COLUMNS = ["model", "t", "rho", "area", "volume", "D"]


def write_csv(path: Path | str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary(path: Path | str, reports: Sequence[CheckReport]) -> None:
    ordered = sorted(reports, key=CheckReport.sort_key)
    counts: dict[str, int] = {}
    for r in ordered:
        counts[r.status] = counts.get(r.status, 0) + 1
    lines = [
        "capmono check summary",
        "",
        "totals: "
        + ", ".join(f"{k}={counts.get(k, 0)}" for k in (PASS, EQUALITY, FAIL, NOT_APPLICABLE)),
        "",
    ]
    width = max((len(f"{r.suite}.{r.check}") for r in ordered), default=20)
    for r in ordered:
        name = f"{r.suite}.{r.check}"
        lines.append(
            f"{name:<{width}}  {r.model:<22} {r.status:<14} "
            f"violation={_fmt(r.max_violation)} tol={_fmt(r.tolerance)} "
            f"samples={r.samples}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
