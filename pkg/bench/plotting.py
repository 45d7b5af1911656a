"""
Convergence plots: e_k and f_k against wall-clock time on a log scale.
"""
from pathlib import Path

from matplotlib.figure import Figure


def _series(rows, column, x_column):
    points = [(row[x_column], row[column]) for row in rows if row[column] is not None and row[column] > 0]
    return [p[0] for p in points], [p[1] for p in points]


def plot_traces(traces: dict, path, title='', x_column='time_s') -> Path:
    """
    ``traces`` maps a label (usually the method) to its CSV rows. Writes one
    SVG with an e_k panel and an f_k panel. Nonpositive values are dropped
    from the log axes.
    """
    figure = Figure(figsize=(10, 4), layout='constrained')
    axes = figure.subplots(1, 2)
    for ax, column, ylabel in zip(axes, ('e_k', 'f_k'), ('relative error $e^k$', 'relative gap $f^k$')):
        for label, rows in traces.items():
            xs, ys = _series(rows, column, x_column)
            if xs:
                ax.semilogy(xs, ys, label=label)
        ax.set_xlabel('time (s)' if x_column == 'time_s' else x_column)
        ax.set_ylabel(ylabel)
        ax.grid(True, which='both', alpha=0.3)
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
    if title:
        figure.suptitle(title)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(path, format='svg')
    return path
