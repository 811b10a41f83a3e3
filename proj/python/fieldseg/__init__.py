"""Python bindings for the fieldseg C++ core.

Arrays are numpy: masks are uint8 (H, W), instance maps uint32 (H, W),
rasters float32 (H, W) or (H, W, bands), tiles float32 (N, N, bands, timesteps).
"""

import json

from ._fieldseg import (
    FieldsegError,
    accuracy,
    border_of,
    canny,
    degrade,
    delineate,
    extract_instances,
    f1,
    generate_scene,
    interior_of,
    mask_to_instances,
    match_instances,
    miou,
    pixel_confusion,
    polygonize,
    rasterize,
    read_tile,
    split_counts,
    split_manifest,
    threshold,
    watershed,
    write_instances,
    write_mask,
    write_nolabel,
    write_raster,
    write_tile,
)
from ._fieldseg import evaluate as _evaluate


def evaluate(manifest, predictions, **kwargs):
    """Scores predictions for one manifest split; returns the report as a dict."""
    return json.loads(_evaluate(str(manifest), str(predictions), **kwargs))


__all__ = [name for name in dir() if not name.startswith("_")]
