"""Verification reports and their deterministic rendering."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from mpmath import mp, mpf

from .precision import tolerance as _tol

#: Decimal digits printed for residuals and tolerances.
RESIDUAL_DIGITS = 6


@dataclass
class VerificationReport:
    """Outcome of one numerical identity check."""

    identity: str
    params: dict
    K: int
    prec: int
    residual: mpf
    tolerance: mpf
    seconds: float | None = None
    detail: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.residual <= self.tolerance)

    def as_dict(self, timings: bool = False) -> dict:
        return {
            "identity": self.identity,
            "params": self.params,
            "K": self.K,
            "prec": self.prec,
            "residual": _num(self.residual),
            "tolerance": _num(self.tolerance),
            "pass": self.passed,
            "seconds": round(self.seconds, 3) if timings and self.seconds is not None else None,
            "detail": self.detail,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag}  {self.identity:<40s} residual={_num(self.residual)} "
                f"tol={_num(self.tolerance)}  {self.detail}").rstrip()


def make_report(identity, params, K, prec, residual, tol_bits=None, tol=None,
                seconds=None, detail="") -> VerificationReport:
    if tol is None:
        tol = _tol(tol_bits)
    pdict = params.as_dict() if hasattr(params, "as_dict") else dict(params)
    return VerificationReport(identity, pdict, K, prec, mpf(residual), mpf(tol),
                              seconds, detail)


def _num(x) -> str:
    with mp.workprec(64):
        return mp.nstr(mpf(x), RESIDUAL_DIGITS, min_fixed=0, max_fixed=0)


def overall_status(reports: Sequence[VerificationReport]) -> str:
    return "pass" if all(r.passed for r in reports) else "fail"


def render_report(reports: Iterable[VerificationReport], fmt: str = "json",
                  timings: bool = False) -> str:
    """Render reports as ``json`` (array), ``csv`` or ``text``.

    Output is byte-identical for identical inputs unless ``timings`` is set.
    """
    reports = list(reports)
    if fmt == "json":
        return json.dumps([r.as_dict(timings) for r in reports], sort_keys=True,
                          indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        cols = ["identity", "a", "b", "eta", "K", "prec", "residual", "tolerance",
                "pass", "seconds", "detail"]
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for r in reports:
            d = r.as_dict(timings)
            p = d.pop("params")
            wr.writerow([d["identity"], ";".join(p["a"]), ";".join(p["b"]), p["eta"],
                         d["K"], d["prec"], d["residual"], d["tolerance"],
                         str(d["pass"]).lower(), "" if d["seconds"] is None else d["seconds"],
                         d["detail"]])
        return buf.getvalue()
    if fmt == "text":
        lines = [r.line() for r in reports]
        lines.append(f"overall: {overall_status(reports)} ({len(reports)} checks)")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
