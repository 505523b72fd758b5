"""Render a finished run into a plain-text report plus SVG figures.

The report path is derived from the manifest: everything lands in the same
directory, so ``mgtlab report out/manifest.json`` can run long after (and on
a different machine than) the experiment itself.  Missing artifact files are
listed rather than fatal — a partial report is still a report.

Figures are written as SVG with a fixed hash salt and no embedded date so
that reruns produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .manifest import load_manifest

__all__ = ["report", "render_figures", "format_report"]

plt.rcParams["svg.hashsalt"] = "mgtlab"
_SAVEKW = {"metadata": {"Date": None}, "bbox_inches": "tight"}


def _read_csv(path: Path):
    """(header, columns-as-float-arrays); non-numeric cells become nan."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    body = rows[1:]

    def cell(x):
        try:
            return float(x)
        except ValueError:
            return float("nan")

    cols = [np.array([cell(r[i]) for r in body]) for i in range(len(header))]
    return header, cols


def _fig(name, out_dir, figures):
    fig = plt.figure(figsize=(6.0, 4.0))
    figures.append((name, fig, out_dir / name))
    return fig


def _finish(figures):
    written = []
    for name, fig, path in figures:
        fig.savefig(path, **_SAVEKW)
        plt.close(fig)
        written.append(name)
    return written


def _plot_norm_csv(path, title, out_dir, figures, rates=None, prefix=""):
    header, cols = _read_csv(path)
    t = cols[0]
    fig = _fig(path.stem + ".svg", out_dir, figures)
    ax = fig.gca()
    for name, col in zip(header[1:], cols[1:]):
        ax.loglog(1.0 + t, col, label=name)
        key = prefix + name
        info = (rates or {}).get(key)
        if isinstance(info, dict) and info.get("model") == "power":
            lo, hi = info["window"]
            w = np.geomspace(1.0 + lo, 1.0 + hi, 32)
            ax.loglog(w, info["amplitude"] * w ** info["value"],
                      "k--", lw=0.8)
    ax.set_xlabel("1 + t")
    ax.set_ylabel("norm")
    ax.set_title(title)
    ax.legend(fontsize=7)


def render_figures(manifest: dict, out_dir: Path) -> list:
    """Write the per-kind figures; returns the list of SVG names."""
    kind = manifest["kind"]
    arts = {k: out_dir / v for k, v in manifest.get("artifacts", {}).items()
            if (out_dir / v).is_file()}
    rates = manifest.get("rates", {})
    figures = []

    if kind == "roots" and "roots" in arts:
        header, cols = _read_csv(arts["roots"])
        xi = cols[0]
        fig = _fig("roots.svg", out_dir, figures)
        ax = fig.gca()
        for j, style in ((1, "-"), (3, "--"), (5, ":")):
            ax.plot(xi, cols[j], style, label=header[j])
        ax.set_xscale("log")
        ax.set_yscale("symlog", linthresh=1e-6)
        ax.set_xlabel("|xi|")
        ax.set_ylabel("Re lambda")
        ax.set_title("spectral branches")
        ax.legend(fontsize=7)
        if "asymptotic-error" in arts:
            h2, c2 = _read_csv(arts["asymptotic-error"])
            fig = _fig("asymptotic-error.svg", out_dir, figures)
            ax = fig.gca()
            ax.loglog(c2[0], c2[1], "o-", ms=3)
            order = rates.get("asym-order")
            if order is not None:
                ax.set_title(f"expansion error, fitted order {order:.3f}")
            ax.set_xlabel("|xi|")
            ax.set_ylabel("max abs error")

    elif kind in ("linear-run", "jmgt-run") and "norms" in arts:
        _plot_norm_csv(arts["norms"], f"{kind}: norm history", out_dir,
                       figures, rates)
        if "eps2" in arts:
            h2, c2 = _read_csv(arts["eps2"])
            fig = _fig("eps2.svg", out_dir, figures)
            ax = fig.gca()
            ax.loglog(c2[0], c2[1], "o-")
            order = rates.get("eps2-order")
            if order is not None:
                ax.set_title(f"nonlinear correction, order {order:.3f}")
            ax.set_xlabel("amplitude")
            ax.set_ylabel("sup L2 difference")
        if kind == "linear-run" and "oracle" in arts:
            h2, c2 = _read_csv(arts["oracle"])
            fig = _fig("oracle.svg", out_dir, figures)
            ax = fig.gca()
            ax.loglog(c2[0], c2[1], ".")
            ax.set_xlabel("|xi|")
            ax.set_ylabel("max abs two-path error")
            ax.set_title("kernel vs Runge-Kutta")

    elif kind == "decay-fit":
        for key, rel in manifest.get("artifacts", {}).items():
            if key.startswith("norms-"):
                p = out_dir / rel
                if p.is_file():
                    d = key.split("-n")[-1]
                    _plot_norm_csv(p, f"decay, dim {d}", out_dir, figures,
                                   rates, prefix=f"n{d}:")

    elif kind == "limit-sweep":
        for key, rel in manifest.get("artifacts", {}).items():
            if not key.startswith("sup-diff"):
                continue
            p = out_dir / rel
            if not p.is_file():
                continue
            header, cols = _read_csv(p)
            fig = _fig(p.stem + ".svg", out_dir, figures)
            ax = fig.gca()
            taus = cols[0]
            for name, col in zip(header[1:], cols[1:]):
                if name.startswith("sup_"):
                    ax.loglog(taus, col, "o-", label=name[4:])
            ref = cols[1][0] * taus / taus[0]
            ax.loglog(taus, ref, "k--", lw=0.8, label="slope 1")
            ax.set_xlabel("tau")
            ax.set_ylabel("sup over time of difference")
            ax.set_title(p.stem)
            ax.legend(fontsize=7)

    elif kind == "energy-check":
        fig = _fig("margins.svg", out_dir, figures)
        ax = fig.gca()
        for key, rel in manifest.get("artifacts", {}).items():
            if key.startswith("margins-") and (out_dir / rel).is_file():
                header, cols = _read_csv(out_dir / rel)
                ax.plot(cols[0], cols[1], label=key[len("margins-"):])
        ax.axhline(0.0, color="k", lw=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel("min margin over modes")
        ax.set_title("energy inequality slack")
        ax.legend(fontsize=7)

    elif kind in ("layer-probe", "expansion"):
        for key, rel in manifest.get("artifacts", {}).items():
            if not key.startswith("layer"):
                continue
            p = out_dir / rel
            if not p.is_file() or p.suffix != ".csv":
                continue
            header, cols = _read_csv(p)
            fig = _fig(p.stem + ".svg", out_dir, figures)
            ax = fig.gca()
            t = cols[0]
            for name, col in zip(header[1:], cols[1:]):
                pos = col > 0
                ax.semilogy(t[pos], col[pos], "o", ms=2.5, label=name)
            info = rates.get(key)
            last = cols[-1]
            if isinstance(info, dict) and info.get("rate") and np.any(
                    last > 0):
                i0 = int(np.argmax(last > 0))
                amp = last[i0] * np.exp(info["rate"] * t[i0])
                w = np.linspace(t[i0], t[-1], 64)
                ax.semilogy(w, amp * np.exp(-info["rate"] * w), "k--",
                            lw=0.8, label=f"fitted rate {info['rate']:.2f}")
            ax.set_xlabel("t")
            ax.set_ylabel("projection")
            ax.set_title(key)
            ax.legend(fontsize=7)
        if "residual-sweep" in arts:
            header, cols = _read_csv(arts["residual-sweep"])
            fig = _fig("residual-sweep.svg", out_dir, figures)
            ax = fig.gca()
            for name, col in zip(header[1:], cols[1:]):
                ax.loglog(cols[0], col, "o-", label=name)
            ax.set_xlabel("tau")
            ax.set_ylabel("sup residual on late window")
            ax.set_title("hierarchy residuals")
            ax.legend(fontsize=7)

    elif kind == "gn-check" and "feasibility" in arts:
        header, cols = _read_csv(arts["feasibility"])
        ns, s_float = cols[0], cols[2]
        p1, p2 = cols[3], cols[4]
        fig = _fig("feasibility.svg", out_dir, figures)
        ax = fig.gca()
        for n in sorted(set(ns)):
            m = ns == n
            both = p1[m].astype(bool) & p2[m].astype(bool)
            ax.plot(s_float[m][both], np.full(both.sum(), n), "o",
                    color="tab:green", ms=5)
            ax.plot(s_float[m][~both], np.full((~both).sum(), n), "x",
                    color="tab:red", ms=5)
            ax.axvline(n / 2.0 - 1.0, color="0.8", lw=0.8, zorder=0)
        ax.set_xlabel("regularity s")
        ax.set_ylabel("dimension n")
        ax.set_title("interpolation-exponent feasibility "
                     "(o both parts, x infeasible)")

    return _finish(figures)


def format_report(manifest: dict, figures=()) -> str:
    lines = [
        f"kind:    {manifest['kind']}",
        f"config:  {manifest.get('config_path', '?')} "
        f"(seed {manifest.get('seed')})",
        f"status:  {'PASS' if manifest.get('passed') else 'FAIL'}",
        "",
        "checks:",
    ]
    checks = manifest.get("checks", {})
    if not checks:
        lines.append("  (none)")
    for name, c in checks.items():
        mark = "ok" if c.get("passed") else "XX"
        bits = []
        if "value" in c:
            bits.append(f"value={c['value']:.6g}")
        if "target" in c:
            bits.append(f"target={c['target']}")
        if c.get("detail"):
            bits.append(c["detail"])
        lines.append(f"  [{mark}] {name}: " + (" ".join(bits) or "passed"))
    rates = manifest.get("rates", {})
    if rates:
        lines += ["", "fitted rates:"]
        for name, info in rates.items():
            lines.append(f"  {name}: {json.dumps(info, default=str)}")
    summary = manifest.get("summary", {})
    if summary:
        lines += ["", "summary:"]
        for k, v in summary.items():
            lines.append(f"  {k}: {json.dumps(v, default=str)}")
    arts = manifest.get("artifacts", {})
    lines += ["", "artifacts: " + (", ".join(sorted(arts.values()))
                                   if arts else "(none)")]
    if figures:
        lines.append("figures:   " + ", ".join(sorted(figures)))
    t = manifest.get("timings", {}).get("total_s")
    if t is not None:
        lines.append(f"runtime:   {t:.2f} s")
    return "\n".join(lines) + "\n"


def report(manifest_path) -> Path:
    """Render figures + report.txt next to the manifest; returns the path
    of the text report."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    manifest = load_manifest(manifest_path)
    out_dir = manifest_path.parent
    missing = [rel for rel in manifest.get("artifacts", {}).values()
               if not (out_dir / rel).is_file()]
    figures = render_figures(manifest, out_dir)
    text = format_report(manifest, figures)
    if missing:
        text += "missing artifacts: " + ", ".join(sorted(missing)) + "\n"
    out = out_dir / "report.txt"
    out.write_text(text)
    return out
