"""Headless matplotlib rendering for run outputs.

Figures are written next to the delimited outputs: one convergence
figure per solver trace and one objective-versus-violation scatter per
report.  Rendering is file-only (Agg backend), so runs work on machines
without a display.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_trace_figure(trace, path, title=None):
    """Two panels: batch objective estimate and total violation-set size."""
    fig, (ax_obj, ax_mu) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.6))
    ax_obj.plot(trace.t, trace.objective, lw=0.9, color="tab:blue")
    ax_obj.set_ylabel("objective estimate")
    if title:
        ax_obj.set_title(title)
    ax_mu.plot(trace.t, trace.mu_sizes.sum(axis=1), lw=0.9, color="tab:red")
    ax_mu.set_ylabel("violation thresholds")
    ax_mu.set_xlabel("iteration")
    for ax in (ax_obj, ax_mu):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_report_figure(report, path):
    """Scatter of per-seed objective against mean CVI@2, solver and baselines."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    groups = {}
    for entry in report.get("per_seed", []):
        ev = entry.get("evaluation")
        if ev:
            groups.setdefault("solver", []).append((ev["cvi2_mean"], ev["objective"]))
        for name, base in (entry.get("baselines") or {}).items():
            ev = base.get("evaluation")
            if ev:
                groups.setdefault(name, []).append((ev["cvi2_mean"], ev["objective"]))
    markers = {"solver": "o", "sdlp": "s", "greedy": "^"}
    for name, pts in groups.items():
        pts = np.asarray(pts)
        ax.scatter(pts[:, 0], pts[:, 1], label=name, marker=markers.get(name, "x"),
                   alpha=0.8)
    ax.set_xlabel("CVI@2 (mean over constraints)")
    ax.set_ylabel("objective on held-out data")
    ax.grid(True, alpha=0.3)
    if groups:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
