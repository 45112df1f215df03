"""Monte Carlo emulation of a time-multiplexed fiber-loop measurement.

Positions are encoded as arrival times after ``t`` round trips through a
long (H) and a short (V) fiber loop.  Each round trip keeps a fraction of
the photons per polarization, the polarization-dependent loss removes a
further ``exp(-2 gamma)`` of the V intensity, and a fixed fraction is
out-coupled to the detectors.  Counts per (time bin, outcome) are Poisson
draws; the coin density matrix, entropy and IPR are reconstructed from
HV- and DA-basis tables with errors from independent repeats.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError, StatisticsError
from .observables import (
    PositionDistribution,
    ReducedDensityMatrix,
    entanglement_entropy,
    ipr,
    reduced_density_matrix,
)
from .walk import WalkParams, apply_coin, apply_shift, evolve, initial_state, WalkerState

__all__ = [
    "LoopConfig",
    "CountsTable",
    "TomographyResult",
    "BASES",
    "time_bin_of",
    "detection_state",
    "expected_counts",
    "simulate_counts",
    "simulate_repeats",
    "reconstruct",
    "distribution_from_counts",
    "project_physical",
    "n0_for_error",
    "write_counts_csv",
    "read_counts_csv",
    "COUNTS_HEADER",
]

log = logging.getLogger(__name__)

BASES = {"HV": ("H", "V"), "DA": ("D", "A")}
COMPLETIONS = ("oracle-im", "zero-im")
COUNTS_HEADER = ("step", "basis", "position", "outcome", "count", "seed")
MIN_COUNTS = 100
NEGLIGIBLE_RATE = 1e-12


@dataclass(frozen=True)
class LoopConfig:
    """Loop hardware constants.

    ``survival_h`` and ``survival_v_base`` are per-round-trip intensity
    survival probabilities; the walk's ``gamma`` multiplies the V value by
    ``exp(-2 gamma)`` on top.  ``n0`` is the photon number injected per run.
    """

    survival_h: float = 0.58
    survival_v_base: float = 0.58
    outcoupling: float = 0.10
    n0: float = 1e6
    long_delay_ns: float = 155.0
    short_delay_ns: float = 150.0
    rep_rate_khz: float = 125.0

    def __post_init__(self) -> None:
        for name in ("survival_h", "survival_v_base", "outcoupling"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {v!r}")
        if not (self.n0 >= 1) or not math.isfinite(self.n0):
            raise DomainError(f"n0 must be >= 1, got {self.n0!r}")
        if not (self.long_delay_ns > self.short_delay_ns > 0):
            raise DomainError("need long_delay_ns > short_delay_ns > 0")
        if not self.rep_rate_khz > 0:
            raise DomainError("rep_rate_khz must be positive")

    @property
    def pulse_period_ns(self) -> float:
        return 1e6 / self.rep_rate_khz

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, doc: dict) -> LoopConfig:
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown key(s) in loop: {sorted(unknown)}")
        try:
            return cls(**{k: float(v) for k, v in doc.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"loop: {exc}") from exc


@dataclass(frozen=True, eq=False)
class CountsTable:
    """Detector counts for one run in one measurement basis.

    ``counts`` maps ``(position, outcome)`` to a count and holds an entry
    for every parity-allowed position.  ``params`` is kept when known so
    reconstruction can look up the exact state if needed.
    """

    step: int
    basis: str
    counts: dict
    seed: int
    params: WalkParams | None = field(default=None, compare=False)

    @property
    def total(self) -> int:
        return int(sum(self.counts.values()))

    def outcome_total(self, outcome: str) -> int:
        return int(sum(c for (_, o), c in self.counts.items() if o == outcome))

    def rows(self) -> list[tuple]:
        order = BASES[self.basis]
        keys = sorted(self.counts, key=lambda k: (k[0], order.index(k[1])))
        return [(self.step, self.basis, x, o, int(self.counts[(x, o)]), self.seed) for x, o in keys]


@dataclass(frozen=True)
class TomographyResult:
    rho_est: ReducedDensityMatrix
    s_e_est: float
    s_e_err: float
    ipr_est: float
    ipr_err: float
    n_repeats: int


def time_bin_of(position: int, step: int, cfg: LoopConfig | None = None) -> float:
    """Arrival time (ns) of the bin for lattice site ``position`` after ``step`` round trips.

    A photon at ``x`` after ``t`` trips took ``(t + x) / 2`` long-loop and
    ``(t - x) / 2`` short-loop passes.
    """
    cfg = cfg or LoopConfig()
    if step < 0 or abs(position) > step or (step + position) % 2:
        raise DomainError(f"position {position} not reachable after {step} steps")
    n_long = (step + position) // 2
    return step * cfg.short_delay_ns + n_long * (cfg.long_delay_ns - cfg.short_delay_ns)


@lru_cache(maxsize=256)
def detection_state(params: WalkParams, cfg: LoopConfig) -> WalkerState:
    """Amplitudes reaching the detector after ``params.steps`` round trips.

    Per trip: coin, then amplitude damping by ``sqrt(survival)`` per
    polarization (V also by ``exp(-gamma)``), then the loop shift.  The
    final out-coupling fraction is folded in at the end, so
    ``n0 * |amp|**2`` is the expected photon number per bin.
    """
    damp_h = math.sqrt(cfg.survival_h)
    damp_v = math.sqrt(cfg.survival_v_base) * math.exp(-params.gamma)
    state = initial_state(params.phi, params.steps)
    for _ in range(params.steps):
        state = apply_coin(state, params.theta)
        state = WalkerState(state.t, state.t_max, state.a * damp_h, state.b * damp_v)
        state = apply_shift(state)
    return state.scaled(math.sqrt(cfg.outcoupling))


def expected_counts(params: WalkParams, cfg: LoopConfig, basis: str) -> dict:
    """Mean photon number per ``(position, outcome)`` at parity-allowed sites."""
    if basis not in BASES:
        raise DomainError(f"basis must be one of {sorted(BASES)}, got {basis!r}")
    state = detection_state(params, cfg)
    t = params.steps
    out = {}
    for x in range(-t, t + 1, 2):
        a, b = state.amplitude(x)
        if basis == "HV":
            p = (abs(a) ** 2, abs(b) ** 2)
        else:
            p = (abs(a + b) ** 2 / 2.0, abs(a - b) ** 2 / 2.0)
        for outcome, prob in zip(BASES[basis], p):
            lam = cfg.n0 * prob
            out[(x, outcome)] = lam if lam >= NEGLIGIBLE_RATE else 0.0
    return out


def simulate_counts(params: WalkParams, cfg: LoopConfig, basis: str, seed: int) -> CountsTable:
    """Draw Poisson counts for one run.

    The generator is seeded from ``(seed, basis)`` so HV and DA tables of
    the same run use independent streams and each is reproducible.
    """
    lam = expected_counts(params, cfg, basis)
    rng = np.random.default_rng([int(seed), list(BASES).index(basis)])
    keys = list(lam)
    draws = rng.poisson(np.array([lam[k] for k in keys]))
    return CountsTable(params.steps, basis, dict(zip(keys, (int(d) for d in draws))), int(seed), params)


def simulate_repeats(
    params: WalkParams, cfg: LoopConfig, n_repeats: int = 10, seed: int = 0
) -> list[CountsTable]:
    """HV and DA tables for ``n_repeats`` runs using seeds ``seed, seed+1, ...``."""
    if n_repeats < 1:
        raise DomainError("n_repeats must be >= 1")
    tables = []
    for i in range(n_repeats):
        for basis in BASES:
            tables.append(simulate_counts(params, cfg, basis, seed + i))
    return tables


def project_physical(rho: ReducedDensityMatrix) -> ReducedDensityMatrix:
    """Nearest unit-trace PSD matrix: clip negative eigenvalues, renormalize."""
    vals, vecs = np.linalg.eigh(rho.matrix())
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise StatisticsError("density matrix estimate has no positive weight")
    m = (vecs * (vals / total)) @ vecs.conj().T
    return ReducedDensityMatrix(float(m[0, 0].real), float(m[1, 1].real), complex(m[0, 1]))


def distribution_from_counts(table: CountsTable) -> PositionDistribution:
    if table.basis != "HV":
        raise DomainError("position distribution needs an HV-basis table")
    total = table.total
    if total < 1:
        raise StatisticsError("empty counts table")
    xs = sorted({x for x, _ in table.counts})
    x = np.array(xs, dtype=int)
    p_h = np.array([table.counts.get((k, "H"), 0) for k in xs], dtype=float) / total
    p_v = np.array([table.counts.get((k, "V"), 0) for k in xs], dtype=float) / total
    return PositionDistribution(table.step, x, p_h, p_v)


def _merge(tables: Iterable[CountsTable]) -> CountsTable:
    tables = list(tables)
    merged: dict = {}
    for tab in tables:
        for k, c in tab.counts.items():
            merged[k] = merged.get(k, 0) + c
    first = tables[0]
    return CountsTable(first.step, first.basis, merged, first.seed, first.params)


def _estimate(hv: CountsTable, da: CountsTable, imag_chi: float, min_counts: int = MIN_COUNTS):
    n_hv, n_da = hv.total, da.total
    if n_hv < min_counts or n_da < min_counts:
        raise StatisticsError(
            f"insufficient counts (HV={n_hv}, DA={n_da}; need >= {min_counts} each)"
        )
    alpha = hv.outcome_total("H") / n_hv
    re_chi = (da.outcome_total("D") - da.outcome_total("A")) / (2.0 * n_da)
    rho = project_physical(ReducedDensityMatrix(alpha, 1.0 - alpha, complex(re_chi, imag_chi)))
    return rho, entanglement_entropy(rho).s_e, ipr(distribution_from_counts(hv))


def reconstruct(
    tables: Sequence[CountsTable],
    completion: str = "oracle-im",
    params: WalkParams | None = None,
) -> TomographyResult:
    """Reconstruct the coin state, entropy and IPR from counts tables.

    Tables are grouped into runs by seed; each run needs one HV and one DA
    table.  The estimate uses counts pooled over all runs; the reported
    errors are the standard error of the per-run estimates.

    The two bases fix ``alpha``, ``beta`` and ``Re(chi)`` only.  With
    ``completion="oracle-im"`` the imaginary part is taken from the exact
    walk (``params``, or the parameters attached to the tables);
    ``"zero-im"`` sets it to zero, which is exact when ``phi = 0``.

    Raises
    ------
    StatisticsError
        If a basis has fewer than 100 counts in total, or a run is incomplete.
    """
    if completion not in COMPLETIONS:
        raise DomainError(f"completion must be one of {COMPLETIONS}, got {completion!r}")
    if not tables:
        raise StatisticsError("no counts tables given")
    steps = {t.step for t in tables}
    if len(steps) != 1:
        raise StatisticsError(f"tables mix steps {sorted(steps)}")

    runs: dict[int, dict[str, CountsTable]] = {}
    for tab in tables:
        slot = runs.setdefault(tab.seed, {})
        if tab.basis in slot:
            raise StatisticsError(f"duplicate {tab.basis} table for seed {tab.seed}")
        slot[tab.basis] = tab
    for seed, slot in runs.items():
        if set(slot) != set(BASES):
            raise StatisticsError(f"seed {seed} lacks a {set(BASES) - set(slot)} table")

    imag_chi = 0.0
    if completion == "oracle-im":
        params = params or next((t.params for t in tables if t.params is not None), None)
        if params is None:
            raise DomainError("oracle-im completion needs the walk parameters")
        imag_chi = reduced_density_matrix(evolve(params)).chi.imag

    ordered = [runs[s] for s in sorted(runs)]
    hv_all = _merge(r["HV"] for r in ordered)
    da_all = _merge(r["DA"] for r in ordered)
    rho, s_e, ipr_est = _estimate(hv_all, da_all, imag_chi)

    n = len(ordered)
    if n == 1:
        log.warning("single run: error bars cannot be estimated and are reported as 0")
        s_err = ipr_err = 0.0
    else:
        # single runs may sit below MIN_COUNTS; only the pooled estimate is gated
        per_run = [_estimate(r["HV"], r["DA"], imag_chi, min_counts=1)[1:] for r in ordered]
        arr = np.array(per_run)
        s_err, ipr_err = (arr.std(axis=0, ddof=1) / math.sqrt(n)).tolist()
    return TomographyResult(rho, s_e, float(s_err), ipr_est, float(ipr_err), n)


_N0_CEILING = 1e18


def n0_for_error(
    params: WalkParams,
    cfg: LoopConfig,
    target_err: float,
    n_repeats: int = 10,
    seed: int = 0,
    completion: str = "oracle-im",
    iterations: int = 3,
    pilots: int = 8,
) -> float:
    """Injected photon number giving an entropy error bar near ``target_err``.

    Starts from ``cfg.n0``, raised tenfold while the pilot runs are too
    sparse to reconstruct. Each iteration averages the reported error over
    ``pilots`` independent repeat sets (a single set scatters by tens of
    percent) and rescales with the shot-noise law ``err ∝ n0**-0.5``.
    """
    if target_err <= 0:
        raise DomainError("target_err must be positive")
    if iterations < 1 or pilots < 1:
        raise DomainError("iterations and pilots must be >= 1")
    n0 = cfg.n0
    done = 0
    while done < iterations:
        trial = LoopConfig(**{**cfg.to_dict(), "n0": n0})
        try:
            errs = [
                reconstruct(simulate_repeats(params, trial, n_repeats, seed + j * n_repeats), completion, params).s_e_err
                for j in range(pilots)
            ]
        except StatisticsError:
            # too few detections to reconstruct at all; grow until there are
            if n0 >= _N0_CEILING:
                raise
            n0 = min(n0 * 10, _N0_CEILING)
            continue
        done += 1
        err = math.sqrt(float(np.mean(np.square(errs))))
        if err <= 0:
            raise StatisticsError(f"error bar vanished at n0={n0:g}; the state is noiseless")
        n0 = max(n0 * (err / target_err) ** 2, 1.0)
    return n0


def write_counts_csv(tables: Sequence[CountsTable], path: str | Path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COUNTS_HEADER)
            for tab in tables:
                writer.writerows(tab.rows())
    except OSError as exc:
        raise OSError(f"cannot write counts CSV {path}: {exc}") from exc
    return path


def read_counts_csv(path: str | Path, params: WalkParams | None = None) -> list[CountsTable]:
    """Parse a counts CSV into one table per ``(seed, basis)``, in file order."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in COUNTS_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"{path}: missing column(s) {', '.join(missing)}")
        groups: dict[tuple[int, str, int], dict] = {}
        for r in reader:
            try:
                key = (int(r["seed"]), r["basis"], int(r["step"]))
                groups.setdefault(key, {})[(int(r["position"]), r["outcome"])] = int(r["count"])
            except ValueError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
    for (_, basis, _), counts in groups.items():
        if basis not in BASES or any(o not in BASES[basis] for _, o in counts):
            raise ConfigError(f"{path}: bad basis/outcome combination in basis {basis!r}")
    return [CountsTable(step, basis, counts, seed, params) for (seed, basis, step), counts in groups.items()]
