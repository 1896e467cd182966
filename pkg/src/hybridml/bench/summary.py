"""Per-estimator summary statistics of replication rows.

Errors are ``truth - estimate``. ``SD`` is the sample standard deviation
(``n - 1``) of the errors, which keeps it meaningful when the data, and so
the truth, change between replications. Rows that did not converge are left
out of every statistic and counted under ``Fail``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

SUMMARY_COLUMNS = ("estimator", "n", "Fail", "Mean", "SD", "AE", "RMSE", "MedianErr", "MAE")


@dataclass(frozen=True)
class SummaryRow:
    estimator: str
    n: int
    failures: int
    mean: float | None = None
    sd: float | None = None
    ae: float | None = None
    rmse: float | None = None
    median_error: float | None = None
    mae: float | None = None

    @property
    def available(self) -> bool:
        return self.n > 0


def summarize(rows) -> list[SummaryRow]:
    """One :class:`SummaryRow` per estimator, in order of first appearance."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to summarize")
    groups: dict[str, list] = {}
    for r in rows:
        groups.setdefault(r.estimator, []).append(r)
    out = []
    for name, group in groups.items():
        ok = [r for r in group if r.converged and r.estimate is not None]
        fails = len(group) - len(ok)
        if not ok:
            out.append(SummaryRow(name, 0, fails))
            continue
        est = np.array([r.estimate for r in ok])
        err = np.array([r.truth - r.estimate for r in ok])
        sd = float(np.std(err, ddof=1)) if err.size > 1 else 0.0
        out.append(SummaryRow(
            name, err.size, fails,
            mean=float(est.mean()), sd=sd, ae=float(err.mean()),
            rmse=float(math.sqrt(np.mean(err ** 2))),
            median_error=float(np.median(err)), mae=float(np.mean(np.abs(err))),
        ))
    return out


def _cells(s: SummaryRow) -> list[str]:
    vals = (s.mean, s.sd, s.ae, s.rmse, s.median_error, s.mae)
    nums = ["n/a" if v is None else f"{v:.4f}" for v in vals]
    return [s.estimator, str(s.n), str(s.failures), *nums]


def format_table(summary) -> str:
    table = [list(SUMMARY_COLUMNS)] + [_cells(s) for s in summary]
    widths = [max(len(row[k]) for row in table) for k in range(len(SUMMARY_COLUMNS))]
    lines = []
    for row in table:
        first = row[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join([first, *rest]).rstrip())
    return "\n".join(lines) + "\n"


def summary_csv(summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summary:
        w.writerow(_cells(s))
    return buf.getvalue()
