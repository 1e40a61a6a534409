"""Batch command-line entry points.

Subcommands: segment, evaluate, resample, phantom, post, sphere-seed, serve.
Exit codes: 0 success, 2 validation problem, 3 I/O problem, 4 the engine did
not converge and --strict was given.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from pathlib import Path

import click
import numpy as np

from . import engine, metrics, morphology, phantom, strokes, volume
from .errors import GrowCutError, InputValidationError

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 4


@contextmanager
def _stage(name: str):
    """Abort with a stage-tagged message and the right exit code."""
    try:
        yield
    except InputValidationError as exc:
        click.echo(f"error [{name}]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error [{name}]: {exc}", err=True)
        sys.exit(EXIT_IO)
    except GrowCutError as exc:
        click.echo(f"error [{name}]: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _load_image(path: str) -> volume.ScalarVolume:
    if not Path(path).is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return volume.load_nrrd(path)


def _load_labels(path: str) -> volume.LabelVolume:
    if not Path(path).is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return volume.load_nrrd(path, labels=True)


def _load_seeds(path: str, image: volume.ScalarVolume) -> volume.LabelVolume:
    if path.endswith(".json"):
        doc = strokes.load_stroke_file(path)
        return strokes.rasterize_strokes(doc, image)
    return _load_labels(path)


@click.group()
@click.version_option()
def main():
    """3-D GrowCut segmentation toolkit."""


@main.command()
@click.argument("image_path", metavar="IMAGE")
@click.argument("seeds_path", metavar="SEEDS")
@click.option("-o", "--output", required=True, help="Output mask NRRD path.")
@click.option("--stats", "stats_path", default=None, help="Write run statistics JSON here.")
@click.option("--margin", default=0.05, show_default=True, help="ROI margin fraction.")
@click.option("--connectivity", type=click.Choice(["6", "26"]), default="26", show_default=True)
@click.option("--max-iters", default=2000, show_default=True)
@click.option("--workers", default=None, type=int, help="Parallel workers (default: auto).")
@click.option("--resample", "resample_target", default=None, type=float,
              help="Resample the image to this isotropic spacing (mm) first.")
@click.option("--post", "post_ops", default=None,
              help='Post-edit pipeline, e.g. "islands,dilate:1,erode:1"; '
                   '"default" applies that chain.')
@click.option("--strict", is_flag=True, help="Exit 4 when the engine does not converge.")
def segment(image_path, seeds_path, output, stats_path, margin, connectivity,
            max_iters, workers, resample_target, post_ops, strict):
    """Segment IMAGE from SEEDS (stroke JSON or label NRRD) and write the mask.

    Pipeline: load, optional resample, rasterize strokes if needed, grow,
    optional post-edit, save. Fixed inputs and flags yield bit-identical
    output for any worker count.
    """
    with _stage("load image"):
        image = _load_image(image_path)
    if resample_target is not None:
        with _stage("resample"):
            image = volume.resample_isotropic(image, resample_target)
    with _stage("load seeds"):
        seeds = _load_seeds(seeds_path, image)
    with _stage("segment"):
        cfg = engine.GrowCutConfig(
            margin_fraction=margin,
            connectivity=int(connectivity),
            max_iterations=max_iters,
            parallel_workers=workers,
        )
        result = engine.run(image, seeds, cfg)
    mask = result.mask
    if post_ops:
        with _stage("post-edit"):
            pipeline = morphology.DEFAULT_PIPELINE if post_ops == "default" else post_ops
            mask = morphology.apply_pipeline(mask, pipeline)
    with _stage("save mask"):
        volume.save_nrrd(mask, output)
    if stats_path:
        with _stage("save stats"):
            stats = {
                "iterations_run": result.iterations_run,
                "converged": result.converged,
                "wall_time_ms": result.wall_time_ms,
                "changed_per_iteration": result.changed_per_iteration,
                "roi_min": list(result.roi.min),
                "roi_max": list(result.roi.max),
            }
            Path(stats_path).write_text(json.dumps(stats, indent=2))
    click.echo(
        f"segmented in {result.iterations_run} iterations "
        f"({result.wall_time_ms:.0f} ms), converged={result.converged}"
    )
    if strict and not result.converged:
        click.echo(f"error [segment]: no fixpoint within {max_iters} iterations", err=True)
        sys.exit(EXIT_NOT_CONVERGED)


@main.command()
@click.argument("mask_a", required=False)
@click.argument("mask_r", required=False)
@click.option("--manifest", default=None,
              help="JSON list of {case_id, algorithm, manual[, time_min]} for batch mode.")
@click.option("--case-id", default=None, help="Case label for the report row.")
@click.option("-o", "--output", default=None, help="Write the JSON report here.")
@click.option("--csv", "csv_path", default=None, help="Write CSV row(s) + summary here.")
def evaluate(mask_a, mask_r, manifest, case_id, output, csv_path):
    """Compare mask A (algorithm) against mask R (reference).

    With --manifest, evaluates every listed pair and appends min/max/mean/std
    summary rows mirroring a results table.
    """
    if manifest:
        with _stage("load manifest"):
            entries = json.loads(Path(manifest).read_text())
            if not isinstance(entries, list) or not entries:
                raise InputValidationError("manifest must be a non-empty JSON list")
        reports = []
        for entry in entries:
            cid = entry.get("case_id", entry.get("algorithm"))
            with _stage(f"evaluate {cid}"):
                a = _load_labels(entry["algorithm"])
                r = _load_labels(entry["manual"])
                wall_ms = (
                    float(entry["time_min"]) * 60000.0 if "time_min" in entry else None
                )
                reports.append(metrics.evaluate(a, r, wall_time_ms=wall_ms, case_id=cid))
        summary = metrics.summarize(reports)
        if csv_path:
            with _stage("write csv"):
                metrics.write_batch_csv(reports, csv_path)
        payload = {"cases": [rep.to_dict() for rep in reports], "summary": summary}
        if output:
            with _stage("write report"):
                Path(output).write_text(json.dumps(payload, indent=2))
        dsc_stats = summary.get("dsc_pct", {})
        click.echo(
            f"{len(reports)} cases, DSC {dsc_stats.get('mean', float('nan')):.2f} "
            f"± {dsc_stats.get('std', float('nan')):.2f} %"
        )
        return

    if not mask_a or not mask_r:
        click.echo("error [evaluate]: provide MASK_A MASK_R or --manifest", err=True)
        sys.exit(EXIT_VALIDATION)
    with _stage("load masks"):
        a = _load_labels(mask_a)
        r = _load_labels(mask_r)
    with _stage("evaluate"):
        try:
            rep = metrics.evaluate(a, r, case_id=case_id)
        except GrowCutError as exc:
            raise InputValidationError(f"{mask_a} vs {mask_r}: {exc}") from exc
    if output:
        with _stage("write report"):
            Path(output).write_text(rep.to_json(indent=2))
    if csv_path:
        with _stage("write csv"):
            metrics.write_batch_csv([rep], csv_path)
    click.echo(f"DSC {rep.dsc * 100:.2f} %, HD {rep.hausdorff_voxel:.2f} voxel")


@main.command()
@click.argument("input_path", metavar="INPUT")
@click.argument("output_path", metavar="OUTPUT")
@click.option("--target", required=True, type=float, help="Isotropic spacing in mm.")
@click.option("--labels", is_flag=True, help="Treat INPUT as a label volume (nearest).")
@click.option("--interp", type=click.Choice(["trilinear", "nearest"]), default="trilinear",
              show_default=True)
def resample(input_path, output_path, target, labels, interp):
    """Reformat a volume to isotropic spacing."""
    with _stage("load"):
        if labels:
            vol = _load_labels(input_path)
        else:
            vol = _load_image(input_path)
    with _stage("resample"):
        if labels:
            out = volume.resample_labels(vol, target)
        else:
            out = volume.resample_isotropic(vol, target, interp)
    with _stage("save"):
        volume.save_nrrd(out, output_path)
    click.echo(f"{vol.dims} @ {vol.spacing} -> {out.dims} @ {out.spacing}")


@main.command("phantom")
@click.option("-o", "--output", required=True, help="Output image NRRD path.")
@click.option("--truth", "truth_path", default=None, help="Write the analytic mask here.")
@click.option("--dims", nargs=3, type=int, default=(128, 128, 128), show_default=True)
@click.option("--semi-axes", nargs=3, type=float, default=(30.0, 20.0, 20.0), show_default=True)
@click.option("--inside", default=100.0, show_default=True)
@click.option("--outside", default=50.0, show_default=True)
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--seed", default=0, show_default=True, help="RNG seed; same seed, same bytes.")
@click.option("--spacing", default=1.0, show_default=True, help="Isotropic spacing in mm.")
def phantom_cmd(output, truth_path, dims, semi_axes, inside, outside, noise_sigma, seed, spacing):
    """Generate an ellipsoid phantom image (and optionally its truth mask)."""
    with _stage("generate"):
        image, truth = phantom.ellipsoid_phantom(
            tuple(dims), tuple(semi_axes), inside, outside, noise_sigma, seed,
            spacing=(spacing,) * 3,
        )
    with _stage("save"):
        volume.save_nrrd(image, output)
        if truth_path:
            volume.save_nrrd(truth, truth_path)
    click.echo(f"phantom {image.dims} written to {output}")


@main.command()
@click.argument("input_path", metavar="INPUT")
@click.argument("output_path", metavar="OUTPUT")
@click.option("--ops", default=morphology.DEFAULT_PIPELINE, show_default=True,
              help="Comma-separated chain of islands/dilate:N/erode:N.")
def post(input_path, output_path, ops):
    """Apply a morphological post-edit pipeline to a mask."""
    with _stage("load"):
        mask = _load_labels(input_path)
    with _stage("post-edit"):
        out = morphology.apply_pipeline(mask, ops)
    with _stage("save"):
        volume.save_nrrd(out, output_path)
    click.echo(f"post-edited mask written to {output_path}")


@main.command("sphere-seed")
@click.option("-o", "--output", required=True, help="Output seed NRRD path.")
@click.option("--like", "like_path", default=None,
              help="Copy geometry from this volume.")
@click.option("--dims", nargs=3, type=int, default=None, help="Geometry if --like is absent.")
@click.option("--spacing", default=1.0, show_default=True)
@click.option("--center", nargs=3, type=float, required=True)
@click.option("--r-fg", required=True, type=float)
@click.option("--r-bg-inner", required=True, type=float)
@click.option("--r-bg-outer", required=True, type=float)
def sphere_seed_cmd(output, like_path, dims, spacing, center, r_fg, r_bg_inner, r_bg_outer):
    """Write a foreground ball + background shell seed volume."""
    with _stage("geometry"):
        if like_path:
            like = _load_image(like_path)
            geo = {"dims": like.dims, "spacing": like.spacing, "origin": like.origin}
        elif dims:
            geo = {"dims": tuple(dims), "spacing": (spacing,) * 3, "origin": (0.0, 0.0, 0.0)}
        else:
            raise InputValidationError("provide --like or --dims")
    with _stage("generate"):
        seeds = engine.sphere_seed(tuple(center), r_fg, r_bg_inner, r_bg_outer, **geo)
    with _stage("save"):
        volume.save_nrrd(seeds, output)
    counts = np.bincount(seeds.data.ravel(), minlength=3)
    click.echo(f"seeds written: fg={counts[1]} bg={counts[2]}")


@main.command()
@click.option("--volume", "volume_path", required=True, help="Image NRRD to serve.")
@click.option("--truth", "truth_path", default=None, help="Ground-truth mask NRRD.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--ui-dir", default=None, help="Serve a built UI from this directory.")
def serve(volume_path, truth_path, host, port, ui_dir):
    """Start the interactive HTTP service on a loaded volume."""
    import uvicorn

    from .service.app import create_app

    with _stage("load volume"):
        image = _load_image(volume_path)
        truth = _load_labels(truth_path) if truth_path else None
    app = create_app(image=image, truth=truth, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
