# This file is part of bduf: backdoor-based unlearning for dual encoders.
#
#    Copyright (c) 2026 and later, the bduf developers.
#    Distributed under the 3-clause BSD license, see LICENSE.txt.
###############################################################################
"""
Line charts of aggregated sweep results.
"""
import numpy as np
from matplotlib.figure import Figure
from matplotlib.backends.backend_agg import FigureCanvasAgg

__all__ = ['plot_metric_vs_count', 'save_metric_chart']


def _series(summary, metric):
    """Groups the summary rows into one curve per (defense, beta, term)."""
    curves = {}
    for row in summary.rows:
        mean = row.get(metric + '_mean')
        if mean is None:
            continue
        key = (row['defense'], row['beta'], row['target_term'])
        curves.setdefault(key, []).append(
            (row['identity_count'], mean, row.get(metric + '_std') or 0.0))
    for key in curves:
        curves[key].sort()
    return curves


def plot_metric_vs_count(summary, metric, title=None, show_legend=True,
                         fig=None, axes=None, figsize=(6, 4)):
    """
    Plots the mean of a metric against the number of unlearned
    identities, with one error-bar curve per defense, beta and target
    term.

    Parameters
    ----------
    summary : :class:`bduf.results.SummaryTable`
        Output of :func:`bduf.experiment.aggregate_reports`.
    metric : str
        Aggregated key, e.g. 'unlearned_tpr'.
    title : str
        The title of the figure.
    show_legend : bool
        Whether or not to show the legend.
    fig : a matplotlib Figure instance
        The Figure canvas in which the plot will be drawn.
    axes : a matplotlib axes instance
        The axes context in which the plot will be drawn.
    figsize : (width, height)
        The size of the figure if it is to be created.

    Returns
    -------
    fig, ax : tuple
        The matplotlib figure and axes instances used to produce the
        figure.
    """
    if metric not in summary.keys:
        raise ValueError("plot_metric_vs_count: '%s' is not aggregated"
                         % metric)
    if not fig or not axes:
        fig = Figure(figsize=figsize)
        FigureCanvasAgg(fig)
        axes = fig.add_subplot(1, 1, 1)

    for (defense, beta, term), pts in sorted(_series(summary, metric).items(),
                                            key=lambda kv: str(kv[0])):
        pts = np.array(pts, dtype=float)
        label = defense
        if beta is not None:
            label += ", beta=%g" % beta
        if term:
            label += ", %s" % term
        axes.errorbar(pts[:, 0], pts[:, 1], yerr=pts[:, 2], marker='o',
                      capsize=3, label=label)

    if all(c > 0 for c in summary.column('identity_count')):
        axes.set_xscale('log', base=2)
    axes.set_xlabel("unlearned identities", fontsize=12)
    axes.set_ylabel(metric, fontsize=12)
    if title:
        axes.set_title(title)
    if show_legend:
        axes.legend(fontsize=8)
    return fig, axes


def save_metric_chart(summary, metric, path, **kwargs):
    """Writes :func:`plot_metric_vs_count` to `path` as SVG."""
    fig, _ = plot_metric_vs_count(summary, metric, **kwargs)
    fig.savefig(path, format='svg')
    return path
