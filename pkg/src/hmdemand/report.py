"""Tabular and plain-text output for fitted demand systems.

CSV files round-trip through the readers here; the text summary follows the
layout of published Rotterdam tables (estimate with significance star and
containment mark, then the standard error).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .demand import Z95, ci_containment, save_fit
from .errors import LoadError
from .panel import fmt

KINDS = ("hicksian", "marshallian", "expenditure")
STAT_ORDER = ("LogL", "Parameters Estimated", "N", "AIC", "BIC")


def statistics(fit):
    s = fit.system
    return {"LogL": s.loglik, "Parameters Estimated": s.k, "N": s.nobs, "AIC": s.aic, "BIC": s.bic}


def _matrix(report, kind):
    est = getattr(report, kind)
    se = getattr(report, f"{kind}_se")
    if kind == "expenditure":
        est = est[None, :]
        se = None if se is None else se[None, :]
    return est, se


def write_elasticity_csv(report, kind, path):
    """Rows are responding goods; each price column has an estimate and an SE."""
    est, se = _matrix(report, kind)
    labels = ["estimate"] if kind == "expenditure" else list(report.types)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["row"]
        for t in report.types:
            header += [t, f"{t}_se"]
        w.writerow(header)
        for r, label in enumerate(labels):
            row = [label]
            for j in range(len(report.types)):
                row += [fmt(est[r, j]), "" if se is None else fmt(se[r, j])]
            w.writerow(row)
    return path


def read_elasticity_csv(path):
    """(types, row labels, estimates, SEs or None) from :func:`write_elasticity_csv`."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "row":
        raise LoadError(f"{path}: not an elasticity table")
    types = tuple(rows[0][1::2])
    labels = [r[0] for r in rows[1:]]
    try:
        est = np.array([[float(x) for x in r[1::2]] for r in rows[1:]])
        se_cells = [r[2::2] for r in rows[1:]]
        se = None if all(x == "" for r in se_cells for x in r) else np.array(
            [[float(x) for x in r] for r in se_cells])
    except ValueError:
        raise LoadError(f"{path}: unparseable elasticity entry") from None
    return types, labels, est, se


def write_coefficients_csv(fit, path):
    """Free parameters with SEs, then fit statistics in table order."""
    s = fit.system
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter", "estimate", "std_error"])
        for name, est, se in zip(s.free_names, s.phi, s.se):
            w.writerow([name, fmt(est), fmt(se)])
        for name, value in statistics(fit).items():
            w.writerow([name, value if isinstance(value, int) else fmt(value), ""])
    return path


def read_coefficients_csv(path):
    """(estimates, SEs, statistics) dicts."""
    est, se, stats = {}, {}, {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            name = row["parameter"]
            if name in STAT_ORDER:
                stats[name] = float(row["estimate"])
            else:
                est[name] = float(row["estimate"])
                se[name] = float(row["std_error"])
    return est, se, stats


def write_diagnostics_csv(fit, report, path):
    """Per-equation Durbin-Watson and Hicksian row sums, plus the Engel sum."""
    dw = fit.system.durbin_watson
    rows = report.hicksian_row_sums()
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["type", "durbin_watson", "hicksian_row_sum"])
        for t, d, r in zip(fit.types, dw, rows):
            w.writerow([t, fmt(d), fmt(r)])
        w.writerow(["engel_sum", "", fmt(report.engel_sum())])
    return path


def _cell(est, se, mark=None):
    star = "*" if se is not None and se > 0 and abs(est / se) > Z95 else ""
    tick = "" if mark is None else (" ✓" if mark else " X")
    return f"{est:.4f}{tick}{star}"


def _table(title, types, labels, est, se, marks=None):
    width = 16
    lines = [title, "".join([" " * 10] + [f"{t:>{width}}{'S.E.':>8}" for t in types])]
    for r, label in enumerate(labels):
        parts = [f"{label:<10}"]
        for j in range(len(types)):
            s = None if se is None else se[r, j]
            m = None if marks is None else bool(marks[r, j])
            parts.append(f"{_cell(est[r, j], s, m):>{width}}")
            parts.append(f"{'' if s is None else f'{s:.4f}':>8}")
        lines.append("".join(parts))
    return lines


def summary_text(fit, report, title=None, containment=None):
    """Plain-text summary: parameters, statistics, then elasticity blocks.

    With ``containment`` (from :func:`~hmdemand.demand.ci_containment`) each
    Marshallian and expenditure cell carries a check mark or an X.
    """
    s = fit.system
    title = title or f"Rotterdam model ({fit.spec.variant}), N={s.nobs}"
    lines = [title, "", "Parameter estimates"]
    for name, est, se in zip(s.free_names, s.phi, s.se):
        lines.append(f"  {name:<28}{_cell(est, se):>12}{se:>12.4f}")
    lines += ["", "Statistics"]
    for name, value in statistics(fit).items():
        shown = f"{value:d}" if isinstance(value, int) else f"{value:.3f}"
        lines.append(f"  {name:<28}{shown:>12}")
    types = list(fit.types)
    mm = me = None
    if containment is not None:
        mm, me = containment.marshallian, containment.expenditure[None, :]
    lines.append("")
    lines += _table("Hicksian (compensated) elasticities", types, types,
                    report.hicksian, report.hicksian_se)
    lines.append("")
    lines += _table("Marshallian (uncompensated) elasticities", types, types,
                    report.marshallian, report.marshallian_se, mm)
    lines.append("")
    lines += _table("Expenditure elasticities", types, ["Estimate"],
                    report.expenditure[None, :], report.expenditure_se[None, :], me)
    lines += ["", "* significant at the 5% level"]
    if containment is not None:
        lines.append("✓ inside the baseline 95% interval, X outside")
    return "\n".join(lines) + "\n"


def comparison_text(fit_a, fit_b, label_a="candidate", label_b="baseline"):
    """Containment matrix of ``fit_a`` against ``fit_b`` and side-by-side statistics."""
    rep_a, rep_b = fit_a.report(), fit_b.report()
    result = ci_containment(rep_a, rep_b)
    types = list(fit_a.types)
    lines = [f"{label_a} ({fit_a.spec.variant}) against the 95% interval of "
             f"{label_b} ({fit_b.spec.variant})", ""]
    lines.append(f"  {'':<22}{label_a:>14}{label_b:>14}")
    sa, sb = statistics(fit_a), statistics(fit_b)
    for name in STAT_ORDER:
        a, b = sa[name], sb[name]
        f = (lambda v: f"{v:d}") if isinstance(a, int) else (lambda v: f"{v:.3f}")
        lines.append(f"  {name:<22}{f(a):>14}{f(b):>14}")
    lines.append("")
    lines += _table("Marshallian (uncompensated) elasticities", types, types,
                    rep_a.marshallian, rep_a.marshallian_se, result.marshallian)
    lines.append("")
    lines += _table("Expenditure elasticities", types, ["Estimate"],
                    rep_a.expenditure[None, :], rep_a.expenditure_se[None, :],
                    result.expenditure[None, :])
    lines += ["", f"cells outside: {result.n_outside}"]
    return "\n".join(lines) + "\n", result


def write_containment_csv(result, types, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", *types])
        for t, row in zip(types, result.marshallian):
            w.writerow([t, *(int(x) for x in row)])
        w.writerow(["expenditure", *(int(x) for x in result.expenditure)])
    return path


def write_report(fit, out_dir, stem, report=None, containment=None, title=None):
    """Every per-fit artifact under ``out_dir``; returns the written paths."""
    out_dir = Path(out_dir)
    report = fit.report() if report is None else report
    paths = [save_fit(fit, out_dir / f"{stem}_fit.json"),
             write_coefficients_csv(fit, out_dir / f"{stem}_coefficients.csv"),
             write_diagnostics_csv(fit, report, out_dir / f"{stem}_diagnostics.csv")]
    for kind in KINDS:
        paths.append(write_elasticity_csv(report, kind, out_dir / f"{stem}_{kind}.csv"))
    text = summary_text(fit, report, title, containment)
    summary = out_dir / f"{stem}_summary.txt"
    summary.write_text(text, encoding="utf-8")
    paths.append(summary)
    return paths

