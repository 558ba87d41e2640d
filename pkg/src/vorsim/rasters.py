"""Grayscale rasters of runs: space-time sheets and snapshot scatters.

Rasters are binary-occupancy portable graymaps (P5, maximum value 255):
a pixel is black where at least one point occupies the bin and white
elsewhere.  The space-time sheet has one row per recorded step, time
increasing downward, and one column per position bin, so a stationary
point draws a vertical dark line.
"""

import numpy as np

from .errors import ConfigError


def write_pgm(path, image):
    """Write a 2D uint8 array as a binary portable graymap (P5)."""
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    if arr.ndim != 2:
        raise ConfigError("a raster image must be two-dimensional")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def _bin_indices(xs, L, bins):
    idx = (np.asarray(xs, dtype=float) / L * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def spacetime_raster(initial, removed, inserted, L, bins):
    """Occupancy sheet of a one-dimensional run, one row per event.

    Parameters
    ----------
    initial : sequence of float
        Configuration before the first event.
    removed : array_like, shape (T,)
        Removed position per event.
    inserted : array_like of shape (T,), or None
        Inserted position per event; None for thinning runs.
    L : float
        Space size (bins cover [0, L]).
    bins : int
        Number of position bins (columns).

    Returns
    -------
    ndarray of uint8, shape (T, bins)
    """
    bins = int(bins)
    if bins < 1:
        raise ConfigError("the raster needs at least one bin")

    def flat_1d(arr, name):
        a = np.asarray(arr, dtype=float)
        if a.ndim > 2 or (a.ndim == 2 and a.shape[1] != 1):
            raise ConfigError(
                f"space-time rasters need a one-dimensional run, but "
                f"{name} has {a.shape[-1]} coordinates per point")
        return a.reshape(-1)

    init = flat_1d(initial, "the initial configuration")
    rem = flat_1d(removed, "the removal record")
    counts = np.bincount(_bin_indices(init, L, bins), minlength=bins)
    rem_idx = _bin_indices(rem, L, bins)
    if inserted is None:
        ins_idx = None
    else:
        ins_idx = _bin_indices(flat_1d(inserted, "the insertion record"),
                               L, bins)
    rows = np.empty((rem.size, bins), dtype=np.uint8)
    for t in range(rem.size):
        counts[rem_idx[t]] -= 1
        if ins_idx is not None:
            counts[ins_idx[t]] += 1
        rows[t] = np.where(counts > 0, 0, 255)
    return rows


def snapshot_raster(points, space, bins):
    """Scatter of one configuration as an occupancy raster.

    Two-dimensional spaces give a ``bins x bins`` sheet with the y axis
    increasing downward; one-dimensional spaces a single row.
    """
    bins = int(bins)
    if bins < 1:
        raise ConfigError("the raster needs at least one bin")
    L = space.size
    if space.dim == 1:
        img = np.full((1, bins), 255, dtype=np.uint8)
        xs = np.asarray(points, dtype=float).reshape(-1)
        img[0, _bin_indices(xs, L, bins)] = 0
        return img
    img = np.full((bins, bins), 255, dtype=np.uint8)
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    cx = _bin_indices(arr[:, 0], L, bins)
    cy = _bin_indices(arr[:, 1], L, bins)
    img[cy, cx] = 0
    return img
