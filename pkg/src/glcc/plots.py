"""Figure rendering for the CLI report paths.

Figures are written next to the delimited outputs; everything uses the Agg
backend so the commands stay headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_latency_figure(summaries, path):
    """Per-config virtual round latency distributions from a campaign."""
    fig, (ax_box, ax_bar) = plt.subplots(1, 2, figsize=(9, 4))
    names = [s["name"] for s in summaries]
    series = [[row["latency"] for row in s["rows"]] for s in summaries]
    ax_box.boxplot(series, tick_labels=names)
    ax_box.set_ylabel("virtual round latency (s)")
    ax_box.set_title("latency per round")
    ax_bar.bar(names, [s["mean_latency"] for s in summaries])
    ax_bar.set_ylabel("mean latency (s)")
    ax_bar.set_title("mean over rounds")
    for ax in (ax_box, ax_bar):
        ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_training_curves(history, path):
    """Loss and accuracy against iteration for a training run."""
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 4))
    its = [h["iteration"] for h in history]
    ax_loss.plot(its, [h["loss"] for h in history])
    ax_loss.set_xlabel("iteration")
    ax_loss.set_ylabel("MSE loss")
    ax_acc.plot(its, [h["accuracy"] for h in history])
    ax_acc.set_xlabel("iteration")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
