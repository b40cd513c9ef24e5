"""Report output: delimited tables, a JSON document, and aligned text."""

import json
import math

RUN_COLUMNS = ("order", "k", "run", "seed", "accuracy", "n_correct", "n_lists",
               "total_entropy", "per_item_entropy", "mixture_entropy",
               "fixed_point", "rounds", "improved", "worsened", "mcnemar_p")
MEAN_COLUMNS = ("order", "k", "runs", "mean_accuracy", "mean_per_item_entropy",
                "entropy_reduction_pct", "mean_mixture_entropy", "n_significant")


def fmt(value):
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "NA"
        return f"{value:.10g}"
    return str(value)


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def header_lines(report):
    config = json.dumps(report.config, sort_keys=True)
    return [f"# clusterlm {report.version}", f"# config {config}"]


def write_tsv(rows, columns, f, header=()):
    for line in header:
        f.write(line + "\n")
    f.write("\t".join(columns) + "\n")
    for row in rows:
        f.write("\t".join(fmt(row[c]) for c in columns) + "\n")


def run_rows(report):
    return [{c: getattr(r, c) for c in RUN_COLUMNS} for r in report.runs]


def write_runs_tsv(report, f):
    write_tsv(run_rows(report), RUN_COLUMNS, f, header_lines(report))


def write_summary_tsv(report, f):
    head = header_lines(report)
    head += [f"# baseline order={o} {fmt(b)}" for o, b in sorted(report.baselines.items())]
    write_tsv(report.means, MEAN_COLUMNS, f, head)


def report_dict(report):
    return _clean({
        "version": report.version,
        "config": report.config,
        "baselines": {str(o): b for o, b in sorted(report.baselines.items())},
        "n_lists": {str(o): n for o, n in sorted(report.n_lists.items())},
        "n_dropped": {str(o): n for o, n in sorted(report.n_dropped.items())},
        "runs": [dict(row, chosen=r.chosen) for row, r in zip(run_rows(report), report.runs)],
        "means": report.means,
        "wmw": report.wmw,
        "split_correlations": report.correlations,
    })


def write_json(report, f):
    json.dump(report_dict(report), f, sort_keys=True, indent=1)
    f.write("\n")


def format_text(report):
    """Aligned tables: mean accuracy by K and order, then entropy."""
    orders = sorted(report.baselines)
    means = {(m["order"], m["k"]): m for m in report.means}
    ks = sorted({m["k"] for m in report.means})
    lines = [f"clusterlm {report.version}  mode={report.config['mode']}", ""]
    width = 10
    head = "Clusters".ljust(width) + "".join(f"N={o}".rjust(width) for o in orders)
    lines += ["Mean selection accuracy (%)", head, "-" * len(head)]
    for k in ks:
        cells = [f"{means[(o, k)]['mean_accuracy']:.1f}" if (o, k) in means else ""
                 for o in orders]
        lines.append(str(k).ljust(width) + "".join(c.rjust(width) for c in cells))
    lines.append("baseline".ljust(width) + "".join(
        f"{report.baselines[o]:.1f}".rjust(width) for o in orders))
    ewidth = 18
    head = "Clusters".ljust(width) + "".join(f"N={o}".rjust(ewidth) for o in orders)
    lines += ["", "Per-item training entropy, bits (reduction vs K=1)", head, "-" * len(head)]
    for k in ks:
        cells = []
        for o in orders:
            m = means.get((o, k))
            cells.append("" if m is None else
                         f"{m['mean_per_item_entropy']:.3f} ({m['entropy_reduction_pct']:.0f}%)")
        lines.append(str(k).ljust(width) + "".join(c.rjust(ewidth) for c in cells))
    sig = [m for m in report.means if m["k"] != 1]
    if sig:
        lines += ["", "McNemar vs K=1: runs significant at p < 0.05"]
        for m in sig:
            lines.append(f"  N={m['order']} K={m['k']}: {m['n_significant']}/{m['runs']}")
    if report.wmw:
        lines += ["", "Wilcoxon-Mann-Whitney on run accuracies"]
        for w in report.wmw:
            lines.append(f"  N={w['order']} K={w['k1']} vs K={w['k2']}: "
                         f"U={w['u']:g} p={w['p']:.4g}{'' if w['exact'] else ' (normal)'}")
    lists = ", ".join(f"N={o}: {report.n_lists[o]} lists ({report.n_dropped[o]} dropped)"
                      for o in orders)
    lines += ["", lists]
    return "\n".join(lines) + "\n"
