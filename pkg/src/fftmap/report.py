"""Result persistence: TIFF stacks, plots, HTML page and JSON report.

Loadings and factors are stored losslessly as multi-page 32-bit float
little-endian uncompressed TIFF (one page per component). Factor spectra
are *displayed* with log1p scaling for visibility but stored linearly.
The JSON sidecar is stable-ordered; the only fields allowed to differ
between identical runs are listed in VOLATILE_REPORT_FIELDS.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from PIL import Image, ImageSequence

from . import __version__
from .errors import ParameterError

# fields of report.json excluded from byte-identity comparisons
VOLATILE_REPORT_FIELDS = ("timings_s",)

SCHEMA_PATH = Path(__file__).with_name("report_schema.json")


@dataclass
class RunReport:
    """Everything one pipeline run produced, ready for serialization."""

    input_path: str
    image_width: int
    image_height: int
    pixel_size_nm: float | None
    parameters: dict
    grid: dict
    scree: dict
    nmf: dict
    components: list  # per-component PeakInfo dicts
    timings_s: dict
    version: str = __version__

    def to_dict(self):
        return {
            "version": self.version,
            "input_path": self.input_path,
            "image_width": self.image_width,
            "image_height": self.image_height,
            "pixel_size_nm": self.pixel_size_nm,
            "parameters": self.parameters,
            "grid": self.grid,
            "scree": self.scree,
            "nmf": self.nmf,
            "components": self.components,
            "timings_s": self.timings_s,
        }


def write_tiff_stack(images, path):
    """Write a k-page 32-bit float grayscale TIFF, uncompressed."""
    images = np.asarray(images, dtype=np.float32)
    if images.ndim != 3 or images.shape[0] < 1:
        raise ParameterError(f"expected a k x rows x cols stack, got shape {images.shape}")
    if not np.all(np.isfinite(images)):
        raise ParameterError("TIFF stack values must be finite")
    pages = [Image.fromarray(p, mode="F") for p in images]
    pages[0].save(str(path), save_all=True, append_images=pages[1:])


def read_tiff_stack(path):
    """Read back a multi-page float TIFF as a k x rows x cols array."""
    with Image.open(str(path)) as im:
        return np.stack([np.asarray(p, dtype=np.float32)
                         for p in ImageSequence.Iterator(im)])


def render_scree_plot(scree, path):
    """Log-scale scree scatter with elbow candidates marked."""
    ratios = np.asarray(scree.variance_ratio, dtype=np.float64)
    idx = np.arange(1, len(ratios) + 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(idx, ratios, "o", color="tab:blue", ms=5)
    for c in scree.candidates:
        ax.semilogy([c], [ratios[c - 1]], "o", mfc="none", mec="red", ms=12, mew=2)
    if not scree.candidates:
        ax.text(0.5, 0.9, "no elbow candidates found", transform=ax.transAxes,
                ha="center", color="red")
    ax.set_xlabel("component")
    ax.set_ylabel("explained variance ratio")
    ax.set_title("PCA scree plot")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(str(path), dpi=100)
    plt.close(fig)


def render_component_panels(maps, factors, peaks, path_prefix):
    """One PNG per component: loading map beside its factor spectrum.

    `peaks` entries are the per-component report dicts (single source of
    truth for the annotation) or None for degenerate factors.
    """
    paths = []
    for j, (m, f) in enumerate(zip(maps, factors)):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4.2))
        ax0.imshow(m, cmap="gray", interpolation="nearest")
        ax0.set_title(f"loading {j + 1}")
        ax0.set_xlabel("window x")
        ax0.set_ylabel("window y")
        ax1.imshow(np.log1p(np.maximum(f, 0.0)), cmap="gray", interpolation="nearest")
        ax1.set_title(f"factor {j + 1} (log1p display)")
        fig.suptitle(_annotation(peaks[j] if peaks else None), fontsize=9)
        fig.tight_layout()
        out = Path(f"{path_prefix}{j + 1:02d}.png")
        fig.savefig(str(out), dpi=100)
        plt.close(fig)
        paths.append(out)
    return paths


def _annotation(peak):
    if not peak or peak.get("error"):
        return "no off-center peak"
    txt = (f"radius {peak['radius_bins']:.2f} bins | "
           f"angle {peak['angle_deg']:.1f} deg | "
           f"spacing {peak['spacing_window_px']:.2f} px")
    if peak.get("spacing_nm") is not None:
        txt += f" | {peak['spacing_nm']:.2f} nm"
    if peak.get("isotropy_flag"):
        txt += " | ring-like"
    return txt


def write_report(report: RunReport, outdir):
    """Emit report.json and a self-contained report.html into outdir."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    json_path = outdir / "report.json"
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, allow_nan=False)
        f.write("\n")
    html_path = outdir / "report.html"
    html_path.write_text(_render_html(report, outdir), encoding="utf-8")
    return json_path, html_path


def write_batch_index(results, outdir):
    """Index page for a batch run: one row per input with status."""
    rows = []
    for r in results:
        name = html.escape(str(r["input"]))
        if r["ok"]:
            link = f'<a href="{html.escape(r["report_dir"])}/report.html">{name}</a>'
            rows.append(f"<tr><td>{link}</td><td>ok</td><td>{r['seconds']:.1f}s</td></tr>")
        else:
            rows.append(f"<tr><td>{name}</td><td>FAILED: "
                        f"{html.escape(r['error'])}</td><td></td></tr>")
    page = ("<!DOCTYPE html><html><head><meta charset='utf-8'>"
            "<title>fftmap batch</title></head><body>"
            f"<h1>fftmap batch summary</h1><table border='1'>"
            "<tr><th>input</th><th>status</th><th>time</th></tr>"
            + "".join(rows) + "</table></body></html>\n")
    path = Path(outdir) / "index.html"
    path.write_text(page, encoding="utf-8")
    return path


def _render_html(report, outdir):
    def fmt(v, unit=""):
        return "n/a" if v is None else f"{v:.4g}{unit}"

    comp_rows = []
    for j, c in enumerate(report.components):
        if c.get("error"):
            comp_rows.append(f"<tr><td>{j + 1}</td><td colspan='5'>"
                             f"{html.escape(c['error'])}</td></tr>")
            continue
        comp_rows.append(
            f"<tr><td>{j + 1}</td><td>{fmt(c['radius_bins'])}</td>"
            f"<td>{fmt(c['angle_deg'])}</td><td>{fmt(c['spacing_window_px'])}</td>"
            f"<td>{fmt(c.get('spacing_nm'))}</td>"
            f"<td>{'ring' if c['isotropy_flag'] else 'directional'}</td></tr>"
        )
    panels = "".join(
        f'<img src="component_{j + 1:02d}.png" alt="component {j + 1}"><br>\n'
        for j in range(len(report.components))
    )
    params = "".join(
        f"<tr><td>{html.escape(str(k))}</td><td>{html.escape(str(v))}</td></tr>"
        for k, v in report.parameters.items()
    )
    return f"""<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>fftmap report</title></head>
<body>
<h1>fftmap analysis report</h1>
<p>input: {html.escape(report.input_path)}
({report.image_width}x{report.image_height} px,
pixel size {fmt(report.pixel_size_nm, ' nm')})</p>
<h2>Parameters</h2>
<table border="1">{params}</table>
<h2>Scree plot</h2>
<p>candidates: {report.scree['candidates'] or 'none (warning: fell back to k=1)'} |
selected k = {report.nmf['k']}</p>
<img src="scree.png" alt="scree plot">
<h2>Components</h2>
<table border="1">
<tr><th>#</th><th>radius (bins)</th><th>angle (deg, cw from horizontal)</th>
<th>spacing (px)</th><th>spacing (nm)</th><th>pattern</th></tr>
{''.join(comp_rows)}
</table>
{panels}
<p>tool version {html.escape(report.version)}</p>
</body></html>
"""
