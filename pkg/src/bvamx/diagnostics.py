"""Attractor extraction, chaos indicators and file export.

Phase-space views follow two conventions: the local attractor tracks the
two species at the domain center x = 0, the energy attractor tracks
(E, dE/dt) with the rate taken from the analytic energy law (smoother than
differencing E numerically). Both carry a normalized-time scalar in [0, 1]
instead of a color map.

All data files are CSV with a mandatory header row and 17-significant-digit
floats (lossless roundtrip); each file gets a JSON sidecar with the
resolved configuration, grid description and versions. Exports never embed
timestamps in the data itself, so repeated runs are bitwise identical.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from .model import FieldPair, ModelParameters, energy, energy_dissipation_rhs
from .spectral import SpectralGrid, amplitude_spectrum

__all__ = [
    "AttractorSample",
    "ChaosReport",
    "local_attractor",
    "energy_attractor",
    "chaos_indicator",
    "export_trajectory",
    "export_branch",
    "export_attractor",
    "export_state",
    "read_state",
]

FLOAT_FMT = "%.17g"


@dataclass
class AttractorSample:
    t: float
    u1_center: float
    u2_center: float
    E: float
    dEdt: float
    t_norm: float


@dataclass
class ChaosReport:
    broadband: bool
    dominant_power_fraction: float
    bounded: bool


def _tail(traj, tau: float):
    if tau >= traj.times[-1]:
        raise ValueError(
            f"transient tau = {tau:g} reaches past the final time "
            f"{traj.times[-1]:g}"
        )
    start = int(np.searchsorted(traj.times, tau))
    return start


def local_attractor(traj, grid: SpectralGrid, tau: float) -> list[AttractorSample]:
    """Samples of (u1, u2) at x = 0 for t >= tau, with normalized time."""
    start = _tail(traj, tau)
    j = grid.center_index
    if abs(grid.x[j]) > 1e-12:
        raise ValueError("grid does not contain x = 0 as a collocation point")
    t_end = traj.times[-1]
    samples = []
    for idx in range(start, len(traj)):
        t = float(traj.times[idx])
        state = traj.states[idx]
        samples.append(AttractorSample(
            t=t,
            u1_center=float(state.u1[j]),
            u2_center=float(state.u2[j]),
            E=float(traj.energies[idx]),
            dEdt=np.nan,
            t_norm=(t - tau) / (t_end - tau),
        ))
    return samples


def energy_attractor(p: ModelParameters, grid: SpectralGrid, traj,
                     tau: float) -> list[AttractorSample]:
    """Samples of (E, dE/dt) for t >= tau; the rate comes from the energy law."""
    start = _tail(traj, tau)
    j = grid.center_index
    t_end = traj.times[-1]
    samples = []
    for idx in range(start, len(traj)):
        t = float(traj.times[idx])
        state = traj.states[idx]
        samples.append(AttractorSample(
            t=t,
            u1_center=float(state.u1[j]),
            u2_center=float(state.u2[j]),
            E=float(traj.energies[idx]),
            dEdt=energy_dissipation_rhs(p, grid, state),
            t_norm=(t - tau) / (t_end - tau),
        ))
    return samples


def chaos_indicator(signal: np.ndarray, sample_dt: float,
                    bound: float = 1e3,
                    broadband_threshold: float = 0.5) -> ChaosReport:
    """Spectral chaos indicator for a scalar time signal.

    A periodic signal concentrates its power in separated lines, so the
    largest single-bin share of total power is close to 1; a chaotic signal
    has a continuous spectrum and the share drops. ``broadband`` flags a
    share below ``broadband_threshold``.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.size < 1024:
        raise ValueError(f"signal too short ({signal.size} < 1024 samples)")
    _, amps = amplitude_spectrum(signal, spacing=sample_dt)
    power = amps ** 2
    total = float(power.sum())
    fraction = float(power.max() / total) if total > 0 else 0.0
    return ChaosReport(
        broadband=bool(fraction < broadband_threshold),
        dominant_power_fraction=fraction,
        bounded=bool(np.max(np.abs(signal)) < bound),
    )


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    if value is None:
        return ""
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_metadata(path, config: dict | None, grid: SpectralGrid | None,
                    extra: dict | None = None):
    from . import __version__

    meta = {
        "config": config or {},
        "grid": None if grid is None else {
            "N": grid.N, "Lx": grid.Lx, "dx": grid.dx,
        },
        "versions": {
            "bvamx": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "command_line": list(sys.argv),
    }
    if extra:
        meta.update(extra)
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, default=str)
        fh.write("\n")


def export_trajectory(traj, grid: SpectralGrid, path,
                      config: dict | None = None):
    """Trajectory CSV: t, E, then one column per collocation value."""
    header = (["t", "E"]
              + [f"u1_{j}" for j in range(grid.N)]
              + [f"u2_{j}" for j in range(grid.N)])
    rows = (
        [traj.times[i], traj.energies[i], *traj.states[i].u1, *traj.states[i].u2]
        for i in range(len(traj))
    )
    _write_csv(path, header, rows)
    _write_metadata(path, config, grid)


def export_attractor(samples: list[AttractorSample], path,
                     grid: SpectralGrid | None = None,
                     config: dict | None = None):
    """Attractor CSV: t, u1_center, u2_center, E, dEdt, t_norm."""
    header = ["t", "u1_center", "u2_center", "E", "dEdt", "t_norm"]
    rows = ([s.t, s.u1_center, s.u2_center, s.E, s.dEdt, s.t_norm]
            for s in samples)
    _write_csv(path, header, rows)
    _write_metadata(path, config, grid)


def export_branch(branch, path, grid: SpectralGrid | None = None,
                  config: dict | None = None):
    """Branch CSV: one row per continuation point.

    Columns cover both branch kinds: equilibrium rows fill max_real_part,
    orbit rows fill T and the leading nontrivial multiplier.
    """
    header = ["C", "E", "T", "max_real_part", "multiplier_re",
              "multiplier_im", "event"]
    rows = []
    for pt in branch.points:
        t_val = pt.period
        max_real = None
        mult_re = mult_im = None
        stab = pt.stability
        if hasattr(stab, "max_real_part"):
            max_real = stab.max_real_part
        if hasattr(stab, "multipliers"):
            rest = np.delete(stab.multipliers, stab.trivial_index)
            if rest.size:
                lead = rest[int(np.argmax(np.abs(rest)))]
                mult_re, mult_im = float(lead.real), float(lead.imag)
        rows.append([pt.C, pt.energy, t_val, max_real, mult_re, mult_im,
                     pt.event or ""])
    _write_csv(path, header, rows)
    _write_metadata(path, config, grid,
                    extra={"regime": branch.regime, "kind": branch.kind,
                           "diagnostic": branch.diagnostic})


def export_state(grid: SpectralGrid, state: FieldPair, path,
                 config: dict | None = None, period: float | None = None):
    """State CSV: x, u1, u2 (used for equilibria and orbit anchors)."""
    header = ["x", "u1", "u2"]
    rows = ([grid.x[j], state.u1[j], state.u2[j]] for j in range(grid.N))
    _write_csv(path, header, rows)
    extra = {} if period is None else {"period": period}
    _write_metadata(path, config, grid, extra=extra)


def read_state(path) -> tuple[np.ndarray, FieldPair, float | None]:
    """Read back a state CSV; returns (x, fields, period-if-recorded)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["x", "u1", "u2"]:
            raise ValueError(f"{path} is not a state CSV (header {header})")
        data = np.array([[float(v) for v in row] for row in reader])
    period = None
    try:
        with open(str(path) + ".meta.json") as fh:
            meta = json.load(fh)
        period = meta.get("period")
    except FileNotFoundError:
        pass
    return data[:, 0], FieldPair(data[:, 1], data[:, 2]), period
