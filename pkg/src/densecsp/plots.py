"""Figure rendering for experiment reports.

Each experiment gets one matplotlib figure saved next to its delimited
output.  The CSV stays the data contract; the figure is a reading aid,
rendered headlessly (Agg) so the CLI works without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import InputError


def _col(header: list[str], rows: list[list], name: str) -> list:
    idx = header.index(name)
    return [row[idx] for row in rows]


def _plot_birthday_decay(header, rows, ax):
    ks = sorted({row[header.index("k")] for row in rows})
    for k in ks:
        pts = [(r[header.index("l")], r[header.index("value_float")])
               for r in rows if r[header.index("k")] == k]
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"k={k}")
    base = rows[0][header.index("base_value")]
    ax.axhline(base, color="gray", linestyle=":", label="base game")
    ax.set_xlabel("l")
    ax.set_ylabel("birthday repetition value")
    ax.set_title("Exact birthday repetition decay")
    ax.legend()


def _plot_edge_tail(header, rows, ax):
    names = _col(header, rows, "config")
    emp = _col(header, rows, "empirical_tail")
    bnd = _col(header, rows, "bound")
    xs = range(len(names))
    floor = 1e-7  # log axis cannot show exact zeros
    ax.bar([x - 0.2 for x in xs], [max(e, floor) for e in emp], width=0.4,
           label="empirical tail")
    ax.bar([x + 0.2 for x in xs], [max(b, floor) for b in bnd], width=0.4,
           label="bound")
    ax.axhline(1.0, color="gray", linestyle=":")
    ax.set_yscale("log")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("probability")
    ax.set_title("Edge-count concentration")
    ax.legend()


def _plot_funcbound(header, rows, ax):
    ax.scatter(_col(header, rows, "kappa"), _col(header, rows, "slack"), s=3, alpha=0.4)
    ax.axhline(0.0, color="red", linestyle=":")
    ax.set_xlabel("divergence")
    ax.set_ylabel("slack above the floor")
    ax.set_title("Divergence floor slack on random triples")


def _plot_corr_sum(header, rows, ax):
    labels = [f"{r[header.index('fixture')]}/{r[header.index('solution')]}" for r in rows]
    xs = range(len(rows))
    ax.bar([x - 0.2 for x in xs], _col(header, rows, "corr_sum"), width=0.4,
           label="summed conditioned correlation")
    ax.bar([x + 0.2 for x in xs], _col(header, rows, "bound"), width=0.4,
           label="k^2 log q / density")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
    ax.set_title("Conditioned correlation budget")
    ax.legend()


def _plot_dksh(header, rows, ax):
    got = _col(header, rows, "density")
    want = _col(header, rows, "oracle_density")
    ax.scatter(want, got)
    lim = max(want + got + [1.0])
    ax.plot([0, lim], [0, lim], color="gray", linestyle=":")
    ax.set_xlabel("exact densest-subhypergraph density")
    ax.set_ylabel("pipeline density")
    ax.set_title("Hypergraph pipeline vs oracle")


_PLOTTERS = {
    "birthday-decay": _plot_birthday_decay,
    "edge-tail": _plot_edge_tail,
    "funcbound-sweep": _plot_funcbound,
    "corr-sum": _plot_corr_sum,
    "dksh-bench": _plot_dksh,
}


def render_figure(name: str, header: list[str], rows: list[list], path: str) -> None:
    if name not in _PLOTTERS:
        raise InputError(f"no figure defined for experiment {name!r}")
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=130)
    try:
        _PLOTTERS[name](header, rows, ax)
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
