"""SVG figures for a finished experiment."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .criterion import critical_points, tangential_derivative  # noqa: E402
from .experiment import profile_anchors  # noqa: E402

SVG_META = {"Date": None}


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "convex-monge", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=SVG_META)
    plt.close(fig)
    return path


def _closed(a):
    return np.vstack([a, a[:1]])


def plot_chords(inst, ax):
    m, n = _closed(inst.surf_m.points), _closed(inst.surf_n.points)
    ax.plot(m[:, 0], m[:, 1], color="tab:blue", lw=1, label="M")
    ax.plot(n[:, 0], n[:, 1], color="tab:orange", lw=1, label="N")
    x = inst.surf_m.points[inst.plan.rows]
    y = inst.surf_n.points[inst.plan.cols]
    w = inst.plan.mass / inst.plan.mass.max()
    for a, b, s in zip(x, y, w):
        if np.allclose(a, b):
            ax.plot(a[0], a[1], ".", color="k", ms=2 + 2 * s)
        else:
            ax.plot([a[0], b[0]], [a[1], b[1]], color="k", lw=0.3 + s, alpha=0.5)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize="small")
    ax.set_title("support of the optimal plan")


def plot_profiles(inst, ax, anchors=None):
    K = len(inst.surf_n)
    anchors = profile_anchors(K) if anchors is None else anchors
    t = inst.surf_m.params
    for j in anchors:
        theta = inst.cost[:, j] - inst.potentials.phi
        (line,) = ax.plot(t, theta, lw=1, label=f"y = {j}")
        for e in critical_points(theta, anchor=j).extrema:
            ax.plot(t[e.index], e.value, "v" if e.kind == "min" else "^", color=line.get_color(), ms=5)
    ax.set_xlabel("t on M")
    ax.set_title("profiles Theta_y with extrema")
    ax.legend(fontsize="small")


def plot_box(inst, ax, box):
    t = inst.surf_n.params
    ax.plot(t, box, lw=1, label="phi^box")
    ax.plot(t, tangential_derivative(box, inst.surf_n), lw=1, label="tangential derivative")
    ax.set_xlabel("t on N")
    ax.set_title("phi^box")
    ax.legend(fontsize="small")


def plot_gamma(inst, ax, mask):
    t = inst.surf_m.params
    ax.step(t, mask.astype(float), where="mid", lw=1)
    ax.set_ylim(-0.1, 1.1)
    ax.set_yticks([0, 1])
    ax.set_xlabel("t on M")
    ax.set_title(f"Gamma mask (coverage {mask.mean():.3f})")


def emit_plots(report, path):
    """Write chords.svg, profiles.svg, box.svg and gamma.svg into ``path``."""
    inst = report.artifacts["coarse"]
    crit = report.artifacts.get("criterion")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    out = []
    fig, ax = plt.subplots(figsize=(5, 5))
    plot_chords(inst, ax)
    out.append(_save(fig, path / "chords.svg"))
    fig, ax = plt.subplots(figsize=(7, 4))
    plot_profiles(inst, ax)
    out.append(_save(fig, path / "profiles.svg"))
    if crit is not None:
        fig, ax = plt.subplots(figsize=(7, 4))
        plot_box(inst, ax, crit.extra["phi_box"])
        out.append(_save(fig, path / "box.svg"))
        fig, ax = plt.subplots(figsize=(7, 2.5))
        plot_gamma(inst, ax, crit.extra["gamma"].mask)
        out.append(_save(fig, path / "gamma.svg"))
    return out
