"""Phase-diagram sweeps, boundary traces, and structured record output.

Everything here is a thin, deterministic driver over the closed-form
classification: grids are evaluated in row-major order (g1 outer, g2
inner) whatever the worker count, boundary curves are cross-checked
against the fluctuation zero mode, and records serialize to a fixed
CSV column order that round-trips through :func:`read_records_csv`.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import exactdiag
from .errors import DomainError
from .fluctuations import (
    critical_coupling_by_zero_mode,
    left_branch_form,
    normal_phase_forms,
    right_branch_form,
)
from .meanfield import MeanFieldSolution, classify
from .model import (
    ModelParams,
    PhaseLabel,
    critical_g1,
    critical_g2,
    renormalized_critical_g1,
    renormalized_critical_g2,
)

__all__ = [
    "GridSpec",
    "SweepRecord",
    "BOUNDARY_KINDS",
    "phase_diagram",
    "trace_boundary",
    "overlap_area",
    "line_cut",
    "ed_sweep",
    "write_records_csv",
    "read_records_csv",
    "records_to_csv_text",
]

# Agreement demanded between closed-form boundaries and the zero mode.
_BOUNDARY_XCHECK_TOL = 1e-8

CSV_COLUMNS = ("g1", "g2", "phase", "psi2", "psi3", "phi_a", "phi_b", "energy", "bistable")
ED_COLUMNS = ("photon_a", "photon_b", "n_atoms", "cutoff_a", "cutoff_b")

BOUNDARY_KINDS = ("gtilde_c1", "gtilde_c2", "normal_left", "normal_right")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular coupling grid over a fixed set of frequencies."""

    base: ModelParams
    g1_min: float
    g1_max: float
    g2_min: float
    g2_max: float
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if not (0.0 <= self.g1_min < self.g1_max) or not (0.0 <= self.g2_min < self.g2_max):
            raise ValueError("grid bounds must satisfy 0 <= min < max on both axes")

    def g1_values(self) -> np.ndarray:
        return np.linspace(self.g1_min, self.g1_max, self.n1)

    def g2_values(self) -> np.ndarray:
        return np.linspace(self.g2_min, self.g2_max, self.n2)


@dataclass(frozen=True)
class SweepRecord:
    """One classified grid or sweep point, optionally with finite-N data."""

    g1: float
    g2: float
    phase: PhaseLabel
    psi2: float
    psi3: float
    phi_a: float
    phi_b: float
    energy: float
    bistable: bool
    photon_a: float | None = None
    photon_b: float | None = None
    n_atoms: int | None = None
    cutoff_a: int | None = None
    cutoff_b: int | None = None

    @property
    def has_finite_n(self) -> bool:
        return self.n_atoms is not None


def _record_from_solution(params: ModelParams, solution: MeanFieldSolution) -> SweepRecord:
    return SweepRecord(
        g1=params.g1,
        g2=params.g2,
        phase=solution.phase,
        psi2=solution.psi2,
        psi3=solution.psi3,
        phi_a=solution.phi_a,
        phi_b=solution.phi_b,
        energy=solution.energy,
        bistable=solution.bistable,
    )


def _classify_point(params: ModelParams) -> SweepRecord:
    return _record_from_solution(params, classify(params))


def phase_diagram(grid: GridSpec, jobs: int = 1) -> list[SweepRecord]:
    """Classify every grid point, row-major (g1 outer, g2 inner)."""
    points = [
        replace(grid.base, g1=float(g1), g2=float(g2))
        for g1 in grid.g1_values()
        for g2 in grid.g2_values()
    ]
    if jobs > 1:
        chunk = max(1, len(points) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_point, points, chunksize=chunk))
    return [_classify_point(p) for p in points]


def trace_boundary(which: str, base: ModelParams, lo: float, hi: float,
                   steps: int) -> list[tuple[float, float]]:
    """Sample one phase boundary as (abscissa, critical coupling) pairs.

    The closed form is emitted; at every sample it is cross-checked
    against the fluctuation zero mode located by bisection, and a
    disagreement beyond 1e-8 raises RuntimeError.  For ``gtilde_c2``
    the abscissa is g1 (>= critical_g1 required); for ``gtilde_c1`` it
    is g2; the two normal-state boundaries are constants sampled
    against the opposite coupling.
    """
    if which not in BOUNDARY_KINDS:
        raise ValueError(f"unknown boundary kind {which!r}; expected one of {BOUNDARY_KINDS}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not lo < hi:
        raise ValueError("boundary range must satisfy lo < hi")
    abscissas = np.linspace(lo, hi, steps)
    out = []
    for x in abscissas:
        x = float(x)
        if which == "gtilde_c2":
            params = replace(base, g1=x)
            value = renormalized_critical_g2(params)
            family = lambda g, p=params: right_branch_form(replace(p, g2=g))
        elif which == "gtilde_c1":
            params = replace(base, g2=x)
            value = renormalized_critical_g1(params)
            family = lambda g, p=params: left_branch_form(replace(p, g1=g))
        elif which == "normal_left":
            params = replace(base, g2=x)
            value = critical_g1(params)
            family = lambda g, p=params: normal_phase_forms(replace(p, g1=g))[0]
        else:  # normal_right
            params = replace(base, g1=x)
            value = critical_g2(params)
            family = lambda g, p=params: normal_phase_forms(replace(p, g2=g))[1]
        located = critical_coupling_by_zero_mode(family, (0.2 * value, 3.0 * value))
        if abs(located - value) > _BOUNDARY_XCHECK_TOL:
            raise RuntimeError(
                f"boundary {which} at abscissa {x}: closed form {value} vs zero mode {located}"
            )
        out.append((x, value))
    return out


def overlap_area(base: ModelParams, ratio: float, resolution: int = 100) -> float:
    """Fraction of the window [g_c1, 2g_c1] x [g_c2, 2g_c2] that is bistable.

    ``ratio`` scales omega31 = ratio * omega21 on top of the base
    frequencies; it must be >= 1.  The window is sampled on a
    resolution x resolution grid whose corners sit exactly on the
    thresholds, so the degenerate diagonal is hit exactly at ratio 1.
    """
    if ratio < 1.0:
        raise DomainError(f"ratio must be >= 1, got {ratio}")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    params0 = replace(base, omega31=ratio * base.omega21)
    gc1 = critical_g1(params0)
    gc2 = critical_g2(params0)
    g1s = np.linspace(gc1, 2.0 * gc1, resolution)
    g2s = np.linspace(gc2, 2.0 * gc2, resolution)
    flagged = 0
    for g1 in g1s:
        for g2 in g2s:
            record = classify(replace(params0, g1=float(g1), g2=float(g2)))
            if record.bistable:
                flagged += 1
    return flagged / float(resolution * resolution)


def ed_sweep(sweep: list[ModelParams], n_atoms: int, cutoff_tol: float = 1e-4,
             eig_tol: float = 1e-8, seed: int = 0,
             dim_limit: int = exactdiag.DEFAULT_DIM_LIMIT) -> list[SweepRecord]:
    """Classify each point and attach finite-N observables.

    Cutoffs are converged once at the most demanding sweep point
    (largest default cutoffs) and that single truncation is reused
    across the sweep, keeping the truncation error uniform along it.
    """
    records = [_classify_point(p) for p in sweep]
    defaults = [exactdiag.default_cutoffs(p, n_atoms) for p in sweep]
    widest = max(range(len(sweep)), key=lambda i: defaults[i][0] * defaults[i][1])
    space, _ = exactdiag.converge_cutoffs(
        sweep[widest], n_atoms, start=defaults[widest], tol=cutoff_tol,
        dim_limit=dim_limit, eig_tol=eig_tol, seed=seed,
    )
    out = []
    for params, record in zip(sweep, records):
        result = exactdiag.solve_point(params, n_atoms, space=space, tol=eig_tol, seed=seed)
        out.append(replace(
            record,
            photon_a=result.photon_a,
            photon_b=result.photon_b,
            n_atoms=n_atoms,
            cutoff_a=space.cutoff_a,
            cutoff_b=space.cutoff_b,
        ))
    return out


def line_cut(base: ModelParams, g2: float, g1_min: float, g1_max: float, steps: int,
             n_atoms: int | None = None, cutoff_tol: float = 1e-4,
             eig_tol: float = 1e-8, seed: int = 0,
             dim_limit: int = exactdiag.DEFAULT_DIM_LIMIT) -> list[SweepRecord]:
    """Sweep g1 at fixed g2; optionally attach finite-N observables."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if not g1_min < g1_max:
        raise ValueError("g1 range must satisfy min < max")
    sweep = [replace(base, g1=float(g1), g2=float(g2))
             for g1 in np.linspace(g1_min, g1_max, steps)]
    if n_atoms is None:
        return [_classify_point(p) for p in sweep]
    return ed_sweep(sweep, n_atoms, cutoff_tol=cutoff_tol, eig_tol=eig_tol,
                    seed=seed, dim_limit=dim_limit)


# ---------------------------------------------------------------------------
# Record serialization


def _format_float(value: float) -> str:
    return f"{value:.12g}"


def write_records_csv(records: list[SweepRecord], stream) -> None:
    """Write records with the fixed column order (12 significant digits)."""
    with_ed = bool(records) and records[0].has_finite_n
    columns = CSV_COLUMNS + ED_COLUMNS if with_ed else CSV_COLUMNS
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        row = [
            _format_float(r.g1),
            _format_float(r.g2),
            r.phase.value,
            _format_float(r.psi2),
            _format_float(r.psi3),
            _format_float(r.phi_a),
            _format_float(r.phi_b),
            _format_float(r.energy),
            "true" if r.bistable else "false",
        ]
        if with_ed:
            row.extend([
                _format_float(r.photon_a),
                _format_float(r.photon_b),
                str(r.n_atoms),
                str(r.cutoff_a),
                str(r.cutoff_b),
            ])
        writer.writerow(row)


def records_to_csv_text(records: list[SweepRecord]) -> str:
    buffer = io.StringIO()
    write_records_csv(records, buffer)
    return buffer.getvalue()


def read_records_csv(stream) -> list[SweepRecord]:
    """Parse records written by :func:`write_records_csv`."""
    reader = csv.DictReader(stream)
    out = []
    for row in reader:
        kwargs = dict(
            g1=float(row["g1"]),
            g2=float(row["g2"]),
            phase=PhaseLabel(row["phase"]),
            psi2=float(row["psi2"]),
            psi3=float(row["psi3"]),
            phi_a=float(row["phi_a"]),
            phi_b=float(row["phi_b"]),
            energy=float(row["energy"]),
            bistable=row["bistable"] == "true",
        )
        if "photon_a" in row and row.get("photon_a") not in (None, ""):
            kwargs.update(
                photon_a=float(row["photon_a"]),
                photon_b=float(row["photon_b"]),
                n_atoms=int(row["n_atoms"]),
                cutoff_a=int(row["cutoff_a"]),
                cutoff_b=int(row["cutoff_b"]),
            )
        out.append(SweepRecord(**kwargs))
    return out
