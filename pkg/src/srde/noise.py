"""Discrete space-time white noise with reproducible parallel streams.

One slab holds the Gaussian increment of the driving noise over every
space-time cell of a grid: entry ``(k, j)`` is distributed ``N(0, dt*dx)``
and plays the role of the noise mass attached to node ``y_j`` during step
``k``.  Generation is counter-based: the increments are a pure function of
``(seed, stream, grid shape)``, realized with numpy's Philox-4x64-10 bit
generator keyed by the pair ``(seed, stream)`` and drawn in row-major
``(k, j)`` order via the ziggurat normal sampler.  Distinct streams are
independent by construction of the Philox keyed family, and any slab can be
regenerated at random-access granularity of one slab without touching any
other stream.  A golden-value test pins the generator's output so ports can
reproduce identical noise.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .grid import GridSpec

_MAGIC = b"SRDNOIS1"


def split_stream(seed: int, replica: int) -> tuple[int, int]:
    """Map ``(seed, replica)`` to a ``(seed, stream)`` generator key.

    The map is injective in the replica index, so distinct replicas never
    share a stream.
    """
    if replica < 0:
        raise InvalidArgumentError(f"replica index must be >= 0, got {replica}")
    return int(seed), int(replica)


def _generator(seed: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class NoiseSlab:
    """Increments of the driving noise on one grid, one per space-time cell.

    ``derived_from`` marks slabs produced by aggregation rather than directly
    by :func:`sample_noise`; only directly sampled slabs are reproducible
    from their ``(seed, stream)`` key.
    """

    grid: GridSpec
    increments: np.ndarray
    seed: int
    stream: int
    derived_from: str | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.increments, dtype=np.float64, copy=True)
        if arr.shape != (self.grid.nt, self.grid.nx):
            raise InvalidArgumentError(
                f"increments must have shape ({self.grid.nt}, {self.grid.nx}), got {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "increments", arr)

    @property
    def cell_variance(self) -> float:
        return self.grid.dt * self.grid.dx


def sample_noise(grid: GridSpec, seed: int, stream: int = 0) -> NoiseSlab:
    """Draw the noise slab for ``(grid, seed, stream)``; bit-reproducible."""
    gen = _generator(seed, stream)
    scale = math.sqrt(grid.dt * grid.dx)
    increments = gen.standard_normal((grid.nt, grid.nx)) * scale
    return NoiseSlab(grid=grid, increments=increments, seed=int(seed), stream=int(stream))


def coarsen_time(slab: NoiseSlab, factor: int = 2) -> NoiseSlab:
    """Aggregate increments pairwise (or ``factor``-wise) in time.

    Summing the increments of a ``dt/f`` slab over each coarse step yields a
    slab whose cells have exactly the coarse variance ``(f*dt)*dx``; this is
    the nesting used by refinement and strong-convergence tests.
    """
    if factor < 2 or slab.grid.nt % factor != 0:
        raise InvalidArgumentError(f"factor must be >= 2 and divide nt, got {factor}")
    g = slab.grid
    coarse_grid = GridSpec(g.half_width, g.nx, g.dt * factor, g.nt // factor)
    agg = slab.increments.reshape(g.nt // factor, factor, g.nx).sum(axis=1)
    return NoiseSlab(
        grid=coarse_grid,
        increments=agg,
        seed=slab.seed,
        stream=slab.stream,
        derived_from=f"coarsen_time(factor={factor})",
    )


# Binary dump: magic(8) | nt(u32) | nx(u32) | seed(u64) | stream(u64) |
# half_width(f64) | dt(f64) | increments (nt*nx little-endian f64, row-major).

def write_slab(slab: NoiseSlab, path: str | Path) -> None:
    g = slab.grid
    header = _MAGIC + struct.pack(
        "<IIQQdd", g.nt, g.nx, slab.seed & 0xFFFFFFFFFFFFFFFF, slab.stream, g.half_width, g.dt
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(slab.increments.astype("<f8").tobytes(order="C"))


def read_slab(path: str | Path) -> NoiseSlab:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise InvalidArgumentError(f"not a noise slab file (magic {magic!r})")
        nt, nx, seed, stream, half_width, dt = struct.unpack("<IIQQdd", fh.read(40))
        data = np.frombuffer(fh.read(nt * nx * 8), dtype="<f8").reshape(nt, nx)
    grid = GridSpec(half_width, int(nx), dt, int(nt))
    return NoiseSlab(grid=grid, increments=data.astype(np.float64), seed=seed, stream=stream)
