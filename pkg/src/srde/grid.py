"""Uniform space-time grids on the truncated line and the field containers.

The spatial domain is ``[-L, L]`` sampled at ``nx`` equispaced nodes (``nx``
odd, so 0 is always a node); time is ``[0, nt*dt]``.  Nodes are built as
``(i - (nx-1)/2) * dx``, a single fused multiply per node, which makes the
mirror symmetry ``x[nx-1-i] == -x[i]`` exact in floating point (no running
sums, no accumulated drift).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import GridMismatchError, InvalidArgumentError, NonFiniteSampleError


@dataclass(frozen=True)
class GridSpec:
    """Uniform discretization of ``[-L, L] x [0, T]``.

    Attributes:
        half_width: truncation radius L > 0.
        nx: number of spatial nodes, odd and >= 3.
        dt: time step > 0.
        nt: number of time steps >= 1.
    """

    half_width: float
    nx: int
    dt: float
    nt: int

    def __post_init__(self) -> None:
        if not (isinstance(self.nx, int) and self.nx >= 3 and self.nx % 2 == 1):
            raise InvalidArgumentError(f"nx must be an odd integer >= 3, got {self.nx}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise InvalidArgumentError(f"half_width must be finite and > 0, got {self.half_width}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgumentError(f"dt must be finite and > 0, got {self.dt}")
        if not (isinstance(self.nt, int) and self.nt >= 1):
            raise InvalidArgumentError(f"nt must be an integer >= 1, got {self.nt}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.nx - 1)

    @property
    def horizon(self) -> float:
        return self.nt * self.dt

    def nodes(self) -> np.ndarray:
        """Spatial nodes, exactly mirror-symmetric about 0."""
        half = (self.nx - 1) // 2
        xs = (np.arange(self.nx, dtype=np.float64) - half) * self.dx
        xs.setflags(write=False)
        return xs

    def times(self) -> np.ndarray:
        """Frame times t_k = k*dt for k = 0..nt."""
        ts = np.arange(self.nt + 1, dtype=np.float64) * self.dt
        ts.setflags(write=False)
        return ts

    def time_of(self, k: int) -> float:
        return k * self.dt


def make_grid(half_width: float, nx: int, dt: float, nt: int) -> GridSpec:
    """Validate and build a :class:`GridSpec`."""
    return GridSpec(half_width=float(half_width), nx=int(nx), dt=float(dt), nt=int(nt))


def _as_readonly(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Field:
    """Real values on the spatial nodes of one grid at a fixed time.

    Immutable after construction; non-finite values are rejected up front so
    NaN/inf can never propagate silently.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_readonly(self.values))
        if self.values.shape != (self.grid.nx,):
            raise InvalidArgumentError(
                f"values must have shape ({self.grid.nx},), got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteSampleError("field contains non-finite values")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.grid, self.values - other.values)

    def _check_same_grid(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise GridMismatchError("fields live on different grids")


def sample_function(grid: GridSpec, f: Callable[[float], float]) -> Field:
    """Sample ``f`` at the grid nodes.

    Raises:
        NonFiniteSampleError: if any sample is NaN or infinite.
    """
    xs = grid.nodes()
    try:
        values = np.asarray(f(xs), dtype=np.float64)
        if values.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        values = np.array([float(f(x)) for x in xs], dtype=np.float64)
    if not np.all(np.isfinite(values)):
        bad = xs[~np.isfinite(values)][0]
        raise NonFiniteSampleError(f"f({bad!r}) is not finite")
    return Field(grid, values)


@dataclass(frozen=True)
class TrajectoryStatus:
    """Completion status of a solve: ``completed`` or ``stopped(index, reason)``."""

    kind: str
    stop_index: int | None = None
    reason: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("completed", "stopped"):
            raise InvalidArgumentError(f"unknown status kind {self.kind!r}")
        if self.kind == "stopped" and (self.stop_index is None or self.reason is None):
            raise InvalidArgumentError("stopped status needs stop_index and reason")

    @classmethod
    def completed(cls) -> "TrajectoryStatus":
        return cls("completed")

    @classmethod
    def stopped(cls, stop_index: int, reason: str) -> "TrajectoryStatus":
        return cls("stopped", stop_index=stop_index, reason=reason)

    @property
    def is_completed(self) -> bool:
        return self.kind == "completed"


@dataclass(frozen=True)
class Trajectory:
    """A time-indexed sequence of fields on one grid.

    A completed trajectory has ``nt + 1`` frames (indices 0..nt); a stopped
    one has frames only up to and including the stop index.
    """

    grid: GridSpec
    frames: tuple[Field, ...]
    status: TrajectoryStatus = field(default_factory=TrajectoryStatus.completed)

    def __post_init__(self) -> None:
        for fr in self.frames:
            if fr.grid != self.grid:
                raise GridMismatchError("frame grid does not match trajectory grid")
        if self.status.is_completed:
            if len(self.frames) != self.grid.nt + 1:
                raise InvalidArgumentError(
                    f"completed trajectory needs {self.grid.nt + 1} frames, "
                    f"got {len(self.frames)}"
                )
        else:
            if len(self.frames) != self.status.stop_index + 1:
                raise InvalidArgumentError(
                    "stopped trajectory must end exactly at the stop index"
                )

    def __len__(self) -> int:
        return len(self.frames)

    def frame_times(self) -> np.ndarray:
        return np.arange(len(self.frames), dtype=np.float64) * self.grid.dt

    def stacked(self) -> np.ndarray:
        """All frame values as one (n_frames, nx) array."""
        return np.stack([fr.values for fr in self.frames])

    @classmethod
    def from_array(
        cls,
        grid: GridSpec,
        values: np.ndarray,
        status: TrajectoryStatus | None = None,
    ) -> "Trajectory":
        frames = tuple(Field(grid, row) for row in np.asarray(values, dtype=np.float64))
        return cls(grid, frames, status or TrajectoryStatus.completed())


# Trajectory CSV format: header "t,x_0,...,x_{nx-1}", one row per frame,
# every number printed with 17 significant digits so doubles round-trip
# bit-exactly.

def _fmt(x: float) -> str:
    return "%.17g" % x


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        _write_trajectory(traj, fh)


def trajectory_csv_text(traj: Trajectory) -> str:
    buf = io.StringIO()
    _write_trajectory(traj, buf)
    return buf.getvalue()


def _write_trajectory(traj: Trajectory, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t"] + [f"x_{i}" for i in range(traj.grid.nx)])
    for k, frame in enumerate(traj.frames):
        writer.writerow([_fmt(k * traj.grid.dt)] + [_fmt(v) for v in frame.values])


def read_trajectory_csv(
    path: str | Path,
    grid: GridSpec,
    status: TrajectoryStatus | None = None,
) -> Trajectory:
    """Read a trajectory written by :func:`write_trajectory_csv`.

    The grid is not stored in the CSV and must be supplied; ``status``
    likewise (it lives in the run manifest).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != grid.nx + 1 or header[0] != "t":
            raise InvalidArgumentError("CSV header does not match the supplied grid")
        rows = [np.array([float(v) for v in row[1:]], dtype=np.float64) for row in reader]
    values = np.stack(rows)
    if status is None and len(rows) != grid.nt + 1:
        status = TrajectoryStatus.stopped(len(rows) - 1, "unknown")
    return Trajectory.from_array(grid, values, status)
