"""End-to-end orchestration: single-image runs and batch processing.

Stage order: load -> (optional rescale to width 2048) -> plan grid ->
build dataset -> PCA scree -> pick k (auto elbow or explicit override) ->
NMF -> order components -> characterize -> write outputs. Every run is
deterministic: identical input and parameters give byte-identical
loadings.tif, factors.tif and report.json (timings aside).
"""

from __future__ import annotations

import csv
import os
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import characterize, image_io, nmf, pca, report, window_fft
from .errors import DegenerateFactorError, FFTMapError

CANONICAL_WIDTH = 2048


@dataclass
class RunConfig:
    """Effective parameters of one analysis run."""

    elemsize: int = 128
    xstep: int = 64
    ystep: int = 64
    rescale_to_2048: bool = False
    components: int | None = None  # explicit k overrides the scree estimate
    n_scree: int = 30
    max_iter: int = 200
    tol: float = 1e-4
    pixel_size_nm: float | None = None
    dc_exclusion: int = 3
    out: str = "fftmap_out"
    sweep: list | None = None
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def parameters_dict(self):
        return {
            "elemsize": self.elemsize,
            "xstep": self.xstep,
            "ystep": self.ystep,
            "rescale_to_2048": self.rescale_to_2048,
            "n_scree": self.n_scree,
            "components": self.components,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "dc_exclusion": self.dc_exclusion,
        }


class StageError(FFTMapError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def run_single(cfg: RunConfig, path) -> report.RunReport:
    """Analyze one image and write its output directory."""
    timings = {}
    path = Path(path)
    outdir = Path(cfg.out) / path.stem
    outdir.mkdir(parents=True, exist_ok=True)

    img = _stage(timings, "load", image_io.load_image, path,
                 pixel_size_nm=cfg.pixel_size_nm)
    if cfg.rescale_to_2048:
        img = _stage(timings, "rescale", image_io.rescale_width, img, CANONICAL_WIDTH)

    grid = _stage(timings, "plan_grid", window_fft.plan_grid,
                  img.width, img.height, cfg.elemsize, cfg.xstep, cfg.ystep)
    stack = _stage(timings, "build_dataset", window_fft.build_dataset, img, grid)
    scree = _stage(timings, "pca", pca.fit_pca, stack, n_keep=cfg.n_scree)
    k = cfg.components if cfg.components is not None else scree.auto_k

    dec = _stage(timings, "nmf", nmf.nmf_fit, stack.X, k,
                 max_iter=cfg.max_iter, tol=cfg.tol)
    dec = nmf.order_components(dec)
    maps, factors = nmf.reshape_outputs(dec, grid)

    components = _stage(timings, "characterize", _characterize_all,
                        factors, cfg.dc_exclusion, img.pixel_size_nm)

    rep = report.RunReport(
        input_path=str(path),
        image_width=img.width,
        image_height=img.height,
        pixel_size_nm=img.pixel_size_nm,
        parameters=cfg.parameters_dict(),
        grid={"nx": grid.nx, "ny": grid.ny, "n_windows": grid.n_windows},
        scree={
            "variance_ratio": [float(v) for v in scree.variance_ratio],
            "candidates": [int(c) for c in scree.candidates],
            "auto_k": int(scree.auto_k),
            "no_candidates_warning": bool(scree.no_candidates_warning),
        },
        nmf={
            "k": int(dec.k),
            "iterations_run": int(dec.iterations_run),
            "converged": bool(dec.converged),
            "objective_initial": float(dec.objective_trace[0]),
            "objective_final": float(dec.objective_trace[-1]),
        },
        components=components,
        timings_s=timings,
    )

    def _write():
        report.write_tiff_stack(maps, outdir / "loadings.tif")
        report.write_tiff_stack(factors, outdir / "factors.tif")
        report.render_scree_plot(scree, outdir / "scree.png")
        report.render_component_panels(maps, factors, components,
                                       outdir / "component_")
        if cfg.sweep:
            rows = characterize.sweep_elemsize(img, cfg.sweep, cfg.xstep, cfg.ystep,
                                               n_scree=cfg.n_scree)
            write_sweep_csv(rows, outdir / "sweep.csv")
            render_sweep_plot(rows, outdir / "sweep.png")
        report.write_report(rep, outdir)

    # report.json is written inside this stage, so its timings_s carries
    # every stage except write_outputs itself
    _stage(timings, "write_outputs", _write)
    return rep


def _characterize_all(factors, dc_exclusion, pixel_size_nm):
    out = []
    for f in factors:
        try:
            p = characterize.find_peak(f, dc_exclusion_radius=dc_exclusion,
                                       pixel_size_nm=pixel_size_nm)
            entry = {
                "radius_bins": p.radius_bins,
                "angle_deg": p.angle_deg,
                "spacing_window_px": p.spacing_window_px,
                "peak_value": p.peak_value,
                "isotropy_flag": p.isotropy_flag,
            }
            if p.spacing_nm is not None:
                entry["spacing_nm"] = p.spacing_nm
        except DegenerateFactorError as e:
            entry = {"error": str(e)}
        out.append(entry)
    return out


def run_batch(cfg: RunConfig, paths):
    """Process several inputs independently; failures are isolated.

    Returns a list of per-input result dicts; overall success means every
    input succeeded.
    """
    paths = [Path(p) for p in paths]

    def one(p):
        t0 = time.perf_counter()
        try:
            rep = run_single(cfg, p)
            return {"input": str(p), "ok": True, "report_dir": p.stem,
                    "seconds": time.perf_counter() - t0, "report": rep}
        except Exception as e:
            return {"input": str(p), "ok": False, "error": str(e),
                    "traceback": traceback.format_exc(),
                    "seconds": time.perf_counter() - t0}

    if cfg.threads > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(one, paths))
    else:
        results = [one(p) for p in paths]
    report.write_batch_index(results, cfg.out)
    return results


def write_sweep_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["elemsize", "auto_k", "candidates", "error"])
        for r in rows:
            w.writerow([r.elemsize, r.auto_k,
                        " ".join(str(c) for c in r.candidates), r.error or ""])


def render_sweep_plot(rows, path):
    import matplotlib.pyplot as plt

    ok = [r for r in rows if r.error is None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r.elemsize for r in ok], [r.auto_k for r in ok], "o-")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("window size (px)")
    ax.set_ylabel("estimated number of components")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(str(path), dpi=100)
    plt.close(fig)


def _stage(timings, name, fn, *args, **kwargs):
    t0 = time.perf_counter()
    try:
        out = fn(*args, **kwargs)
    except Exception as e:
        raise StageError(name, e) from e
    timings[name] = time.perf_counter() - t0
    return out
