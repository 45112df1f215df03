"""Deterministic parameter grids over (theta, phi) or (theta, gamma).

Each cell runs an independent walk; results land in preassigned array
slots so the output is bit-identical for any thread count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DegenerateStateError, SweepError
from .observables import summarize
from .walk import WalkParams, evolve

__all__ = [
    "SweepGrid",
    "SweepResult",
    "default_theta_axis",
    "default_phi_axis",
    "run_sweep",
    "threshold_intervals",
    "threshold_regions",
    "export_csv",
    "read_sweep_csv",
    "CSV_HEADER",
]

AXIS_KINDS = ("phi", "gamma")
QUANTITIES = ("s_e", "ipr", "survival")
CSV_HEADER = ("theta_deg", "second_axis_name", "second_axis_value", "steps", "s_e", "ipr", "survival")


def default_theta_axis(pitch: float = 0.2) -> np.ndarray:
    """Open interval (0, 90) degrees sampled at cell centres: 0.1, 0.3, ..., 89.9."""
    n = int(round(90.0 / pitch))
    return np.round((np.arange(n) + 0.5) * pitch, 10)


def default_phi_axis(divisions: int = 400) -> np.ndarray:
    """``[0, pi]`` at a pitch of ``pi / divisions``."""
    return np.arange(divisions + 1) * (math.pi / divisions)


def _as_axis(values: Iterable[float], name: str) -> tuple[float, ...]:
    axis = tuple(float(v) for v in values)
    if not axis:
        raise ConfigError(f"{name} must be non-empty")
    if any(not math.isfinite(v) for v in axis):
        raise ConfigError(f"{name} contains a non-finite value")
    if any(b <= a for a, b in zip(axis, axis[1:])):
        raise ConfigError(f"{name} must be strictly increasing")
    return axis


@dataclass(frozen=True)
class SweepGrid:
    """Grid definition.

    ``fixed`` supplies whichever of ``phi``/``gamma`` is not swept; a
    missing entry defaults to 0.
    """

    theta_axis: tuple[float, ...]
    second_axis_kind: str
    second_axis: tuple[float, ...]
    steps: int = 16
    fixed: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.second_axis_kind not in AXIS_KINDS:
            raise ConfigError(
                f"second_axis_kind must be one of {AXIS_KINDS}, got {self.second_axis_kind!r}"
            )
        object.__setattr__(self, "theta_axis", _as_axis(self.theta_axis, "theta_axis"))
        object.__setattr__(self, "second_axis", _as_axis(self.second_axis, "second_axis"))
        unknown = set(self.fixed) - set(AXIS_KINDS)
        if unknown:
            raise ConfigError(f"unknown key(s) in fixed: {sorted(unknown)}")
        if self.second_axis_kind in self.fixed:
            raise ConfigError(f"fixed must not set the swept parameter {self.second_axis_kind!r}")
        object.__setattr__(self, "fixed", {k: float(v) for k, v in self.fixed.items()})
        # axes are sorted, so the corners bound every cell
        try:
            for theta in (self.theta_axis[0], self.theta_axis[-1]):
                for v in (self.second_axis[0], self.second_axis[-1]):
                    self._params(theta, v)
        except ValueError as exc:
            raise ConfigError(f"grid contains invalid parameters: {exc}") from exc

    def _params(self, theta: float, value: float) -> WalkParams:
        kw = {"phi": self.fixed.get("phi", 0.0), "gamma": self.fixed.get("gamma", 0.0)}
        kw[self.second_axis_kind] = value
        return WalkParams(theta=theta, steps=self.steps, **kw)

    def params_at(self, row: int, col: int) -> WalkParams:
        """Parameters of the cell at second-axis index ``row`` and theta index ``col``."""
        return self._params(self.theta_axis[col], self.second_axis[row])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.second_axis), len(self.theta_axis)

    def to_dict(self) -> dict:
        return {
            "theta_axis": list(self.theta_axis),
            "second_axis_kind": self.second_axis_kind,
            "second_axis": list(self.second_axis),
            "steps": self.steps,
            "fixed": dict(self.fixed),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> SweepGrid:
        required = ("theta_axis", "second_axis_kind", "second_axis")
        for key in required:
            if key not in doc:
                raise ConfigError(f"missing key {key!r}")
        try:
            return cls(
                theta_axis=_expand_axis(doc["theta_axis"], "theta_axis"),
                second_axis_kind=doc["second_axis_kind"],
                second_axis=_expand_axis(doc["second_axis"], "second_axis"),
                steps=int(doc.get("steps", 16)),
                fixed=dict(doc.get("fixed") or {}),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def _expand_axis(spec, name: str) -> list[float]:
    """Accept an explicit list or ``{"start", "stop", "num"}`` (inclusive, linspace)."""
    if isinstance(spec, dict):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except KeyError as exc:
            raise ConfigError(f"{name}: range form needs key {exc.args[0]!r}") from None
        scale = math.pi if spec.get("unit") == "pi" else 1.0
        return list(np.linspace(start, stop, num) * scale)
    if not isinstance(spec, (list, tuple)):
        raise ConfigError(f"{name} must be a list or a range object")
    return [float(v) for v in spec]


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Arrays are shaped ``(len(second_axis), len(theta_axis))``."""

    grid: SweepGrid
    s_e: np.ndarray
    ipr: np.ndarray
    survival: np.ndarray

    def quantity(self, name: str) -> np.ndarray:
        if name not in QUANTITIES:
            raise ValueError(f"quantity must be one of {QUANTITIES}, got {name!r}")
        return getattr(self, name)


def _fill_row(grid: SweepGrid, row: int, s_e: np.ndarray, ipr: np.ndarray, surv: np.ndarray) -> None:
    for col in range(len(grid.theta_axis)):
        params = grid.params_at(row, col)
        try:
            summary = summarize(evolve(params))
        except DegenerateStateError as exc:
            raise SweepError(
                f"degenerate state at theta={params.theta}, "
                f"{grid.second_axis_kind}={grid.second_axis[row]}: {exc}",
                params.theta,
                grid.second_axis_kind,
                grid.second_axis[row],
            ) from exc
        s_e[row, col] = summary.s_e
        ipr[row, col] = summary.ipr
        surv[row, col] = summary.survival


def run_sweep(grid: SweepGrid, threads: int = 1) -> SweepResult:
    """Evaluate entropy, IPR and survival on every grid cell.

    Parameters
    ----------
    grid:
        The grid to evaluate.
    threads:
        Worker count; rows are distributed over a thread pool.  The
        result does not depend on this value.

    Raises
    ------
    SweepError
        If any cell is fully attenuated.
    """
    shape = grid.shape
    s_e = np.empty(shape)
    ipr = np.empty(shape)
    surv = np.empty(shape)
    rows = range(shape[0])
    if threads <= 1 or shape[0] == 1:
        for row in rows:
            _fill_row(grid, row, s_e, ipr, surv)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_fill_row, grid, row, s_e, ipr, surv) for row in rows]
            for fut in futures:
                fut.result()
    return SweepResult(grid, s_e, ipr, surv)


def threshold_intervals(
    axis: Sequence[float], values: Sequence[float], threshold: float, direction: str
) -> list[tuple[float, float]]:
    """Maximal runs of ``axis`` where ``values`` clear ``threshold``.

    ``direction="above"`` tests ``value > threshold``, ``"below"`` tests
    ``value < threshold``.  Interior endpoints sit halfway between the last
    failing and first passing sample; a run touching the end of the axis
    is bounded by that sample itself.
    """
    if direction not in ("above", "below"):
        raise ValueError(f"direction must be 'above' or 'below', got {direction!r}")
    x = np.asarray(axis, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = v > threshold if direction == "above" else v < threshold
    out: list[tuple[float, float]] = []
    n = len(ok)
    i = 0
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and ok[j + 1]:
            j += 1
        lo = x[i] if i == 0 else 0.5 * (x[i - 1] + x[i])
        hi = x[j] if j == n - 1 else 0.5 * (x[j] + x[j + 1])
        out.append((float(lo), float(hi)))
        i = j + 1
    return out


def threshold_regions(
    result: SweepResult, quantity: str, threshold: float, direction: str
) -> dict[float, list[tuple[float, float]]]:
    """Theta intervals clearing the threshold, keyed by second-axis value."""
    data = result.quantity(quantity)
    theta = result.grid.theta_axis
    return {
        value: threshold_intervals(theta, data[row], threshold, direction)
        for row, value in enumerate(result.grid.second_axis)
    }


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def export_csv(result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    grid = result.grid
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row, value in enumerate(grid.second_axis):
                for col, theta in enumerate(grid.theta_axis):
                    writer.writerow(
                        [
                            _fmt(theta),
                            grid.second_axis_kind,
                            _fmt(value),
                            grid.steps,
                            _fmt(result.s_e[row, col]),
                            _fmt(result.ipr[row, col]),
                            _fmt(result.survival[row, col]),
                        ]
                    )
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV {path}: {exc}") from exc
    return path


def read_sweep_csv(path: str | Path) -> SweepResult:
    """Load a CSV written by :func:`export_csv` back into a :class:`SweepResult`.

    Values are the 12-digit rendered ones, not the original floats.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    kinds = {r["second_axis_name"] for r in rows}
    if len(kinds) != 1:
        raise ConfigError(f"{path}: mixed second_axis_name values {sorted(kinds)}")
    try:
        thetas = sorted({float(r["theta_deg"]) for r in rows})
        seconds = sorted({float(r["second_axis_value"]) for r in rows})
        steps = int(rows[0]["steps"])
        ti = {t: i for i, t in enumerate(thetas)}
        si = {s: i for i, s in enumerate(seconds)}
        shape = (len(seconds), len(thetas))
        arrays = {q: np.full(shape, np.nan) for q in QUANTITIES}
        for r in rows:
            cell = si[float(r["second_axis_value"])], ti[float(r["theta_deg"])]
            for q in QUANTITIES:
                arrays[q][cell] = float(r[q])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    kind = kinds.pop()
    if kind not in AXIS_KINDS:
        raise ConfigError(f"{path}: unknown second_axis_name {kind!r}")
    # fixed values are not recorded in the CSV; the grid is used for axes only
    grid = SweepGrid(tuple(thetas), kind, tuple(seconds), steps)
    return SweepResult(grid, arrays["s_e"], arrays["ipr"], arrays["survival"])
