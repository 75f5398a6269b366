"""Integrating-factor RK4 time stepping for the DNLS equation and its gauge form."""

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from scipy import fft as sp_fft

from .exceptions import BlowUpError, ConfigurationError, OutputError
from .functionals import functional_record, gauge_G, invariants_u, invariants_v
from .logging_config import get_logger
from .models import Equation, EvolveConfig, InvariantRecord
from .spectral import (
    Field,
    SpectralGrid,
    check_edge_decay,
    dealias_spectral,
    edge_ratio,
    write_field,
)

logger = get_logger(__name__)

DEFAULT_DT_CAP = 1e-3
# Guards inside run() only record leakage
_NO_EDGE_GUARD = math.inf


def default_dt(grid: SpectralGrid, safety: float = 0.2) -> float:
    return min(grid.max_stable_dt(safety), DEFAULT_DT_CAP)


def step_count(t_final: float, dt: float) -> int:
    """Number of steps so that an integer count of equal steps lands on t_final."""
    return max(1, math.ceil(t_final / dt - 1e-9))


class Integrator:
    """Lawson (integrating-factor) RK4 on one grid with a fixed step.

    The dispersion e^{-ik^2 t} is applied exactly; the nonlinearity is
    evaluated on a 3N grid and truncated, so products up to degree five are
    free of aliasing.
    """

    def __init__(self, grid: SpectralGrid, config: EvolveConfig, dt: Optional[float] = None):
        self.grid = grid
        self.config = config
        self.dt = config.dt if dt is None else dt

        ceiling = grid.max_stable_dt(config.safety)
        if self.dt > ceiling * (1.0 + 1e-12):
            raise ConfigurationError(
                f"dt={self.dt:.3e} exceeds the stability ceiling "
                f"{config.safety}*dx^2 = {ceiling:.3e}; use dt <= {ceiling:.3e}"
            )

        k = grid.k
        self._ik = 1j * k.copy()
        self._ik[grid.nyquist_index] = 0.0
        self._full = np.exp(-1j * k**2 * self.dt)
        self._half = np.exp(-0.5j * k**2 * self.dt)

        scale = config.nonlinearity_scale
        gamma = config.params.gamma
        if config.equation == Equation.DNLS:
            quintic = 1j * config.b * scale

            def nonlinearity(u: np.ndarray, ux: np.ndarray) -> np.ndarray:
                density = u.real**2 + u.imag**2
                return -scale * density * ux + quintic * density**2 * u

        else:
            quintic = 1j * (3.0 / 16.0) * gamma * scale

            def nonlinearity(u: np.ndarray, ux: np.ndarray) -> np.ndarray:
                density = u.real**2 + u.imag**2
                transport = -0.5 * density * ux + 0.5 * u * u * np.conj(ux)
                return scale * transport + quintic * density**2 * u

        self._nonlinearity = nonlinearity
        self._linear_only = scale == 0
        logger.debug(
            f"Integrator: {config.equation.value}, N={grid.n_points}, "
            f"dx={grid.dx:.4e}, dt={self.dt:.4e}"
        )

    def _rhs(self, spectrum: np.ndarray) -> np.ndarray:
        if self._linear_only:
            return np.zeros_like(spectrum)
        return dealias_spectral(self._nonlinearity, spectrum, self._ik * spectrum)

    def advance_spectrum(self, spectrum: np.ndarray) -> np.ndarray:
        dt, full, half = self.dt, self._full, self._half
        k1 = self._rhs(spectrum)
        k2 = self._rhs(half * (spectrum + 0.5 * dt * k1))
        k3 = self._rhs(half * spectrum + 0.5 * dt * k2)
        k4 = self._rhs(full * spectrum + dt * half * k3)
        return full * spectrum + (dt / 6.0) * (
            full * k1 + 2.0 * half * (k2 + k3) + k4
        )

    def advance(self, state: Field, n_steps: int = 1, t0: float = 0.0) -> Field:
        """Take n_steps steps without the edge guard, starting at time t0.

        Raises:
            BlowUpError: On non-finite samples or sup norm above the threshold
        """
        spectrum = state.spectrum
        values = state.values
        for index in range(n_steps):
            previous = values
            spectrum = self.advance_spectrum(spectrum)
            values = sp_fft.ifft(spectrum)
            time = t0 + (index + 1) * self.dt
            if not np.all(np.isfinite(values)):
                raise BlowUpError(
                    "Non-finite samples in the evolved field",
                    time=time,
                    last_state=Field(self.grid, previous),
                )
            peak = float(np.max(np.abs(values)))
            if peak > self.config.blowup_threshold:
                raise BlowUpError(
                    f"Sup norm {peak:.3e} exceeds {self.config.blowup_threshold:.1e}",
                    time=time,
                    last_state=Field(self.grid, previous),
                )
        return Field(self.grid, values)


def step(state: Field, config: EvolveConfig) -> Field:
    """One integrating-factor RK4 step of size config.dt.

    Raises:
        EdgeDecayError: If the state has not decayed at the window edges
        ConfigurationError: If dt is above the stability ceiling
        BlowUpError: If the step produces non-finite or huge values
    """
    check_edge_decay(state, config.edge_tolerance)
    return Integrator(state.grid, config).advance(state)


def record_invariants(state: Field, config: EvolveConfig) -> InvariantRecord:
    """Invariants of the evolved quantity, plus well functionals when a reference is set."""
    params = config.params
    if config.equation == Equation.DNLS:
        record = invariants_u(state, params, _NO_EDGE_GUARD)
    else:
        record = invariants_v(state, params, _NO_EDGE_GUARD)
    if config.reference is None:
        return record

    gauge_field = state
    if config.equation == Equation.DNLS:
        gauge_field = gauge_G(state, _NO_EDGE_GUARD)
    wells = functional_record(
        gauge_field,
        config.reference.omega,
        config.reference.c,
        params,
        _NO_EDGE_GUARD,
    )
    return record.model_copy(
        update={"action": wells.action, "nehari": wells.nehari, "jc": wells.jc}
    )


@dataclass
class Snapshot:
    time: float
    field: Optional[Field]
    invariants: InvariantRecord
    edge_ratio: float


@dataclass
class Trajectory:
    """Time-ordered snapshots of one run."""

    config: EvolveConfig
    dt: float
    snapshots: List[Snapshot] = field(default_factory=list)
    blew_up: bool = False
    blowup_time: Optional[float] = None

    @property
    def times(self) -> List[float]:
        return [s.time for s in self.snapshots]

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def edge_ratio_max(self) -> float:
        return max((s.edge_ratio for s in self.snapshots), default=0.0)

    @property
    def drift(self) -> Dict[str, float]:
        """max_t |Q(t) - Q(0)| / max(1, |Q(0)|) for energy, mass and momentum."""
        if not self.snapshots:
            return {}
        first = self.snapshots[0].invariants
        result = {}
        for name in ("energy", "mass", "momentum"):
            start = getattr(first, name)
            worst = max(abs(getattr(s.invariants, name) - start) for s in self.snapshots)
            result[name] = worst / max(1.0, abs(start))
        return result

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["t", "energy", "mass", "momentum", "nehari_sign", "jc"])
        for snap in self.snapshots:
            inv = snap.invariants
            writer.writerow(
                [
                    format(snap.time, ".17g"),
                    format(inv.energy, ".17g"),
                    format(inv.mass, ".17g"),
                    format(inv.momentum, ".17g"),
                    "" if inv.nehari_sign is None else inv.nehari_sign,
                    "" if inv.jc is None else format(inv.jc, ".17g"),
                ]
            )
        return buffer.getvalue()

    def write(self, directory: Path, dump_fields: bool = False, binary: bool = True) -> Path:
        """Write trajectory.csv and, optionally, one field dump per snapshot."""
        path = directory / "trajectory.csv"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_csv(), encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write trajectory to {path}: {e}", original_error=e)
        if dump_fields:
            suffix = "bin" if binary else "csv"
            for index, snap in enumerate(self.snapshots):
                if snap.field is None:
                    continue
                write_field(snap.field, directory / "fields" / f"snap_{index:05d}.{suffix}", binary)
        return path


def take_snapshot(
    state: Field, time: float, config: EvolveConfig, keep_field: bool = True
) -> Snapshot:
    ratio = edge_ratio(state)
    return Snapshot(
        time=time,
        field=state if keep_field else None,
        invariants=record_invariants(state, config),
        edge_ratio=ratio,
    )


def run(u0: Field, config: EvolveConfig) -> Trajectory:
    """Evolve u0 to config.t_final, snapshotting every snapshot_stride steps.

    The step is shrunk so that an integer number of equal steps reaches
    t_final. Blow-up stops the run and is flagged on the trajectory, which
    keeps the last finite snapshot.

    Raises:
        EdgeDecayError: If u0 has not decayed at the window edges
        ConfigurationError: If dt is above the stability ceiling
    """
    check_edge_decay(u0, config.edge_tolerance)
    n_steps = step_count(config.t_final, config.dt)
    dt = config.t_final / n_steps
    integrator = Integrator(u0.grid, config, dt)
    trajectory = Trajectory(config=config, dt=dt)
    trajectory.snapshots.append(take_snapshot(u0, 0.0, config))

    logger.info(
        f"Evolving {config.equation.value} to T={config.t_final} in {n_steps} steps (dt={dt:.4e})"
    )
    state = u0
    done = 0
    warned = False
    while done < n_steps:
        chunk = min(config.snapshot_stride, n_steps - done)
        try:
            state = integrator.advance(state, chunk, t0=done * dt)
        except BlowUpError as e:
            trajectory.blew_up = True
            trajectory.blowup_time = e.time
            logger.warning(f"Blow-up at t={e.time:.6g}: {e}")
            break
        done += chunk
        snap = take_snapshot(state, done * dt, config)
        trajectory.snapshots.append(snap)
        if snap.edge_ratio >= config.edge_tolerance and not warned:
            logger.warning(
                f"Edge leakage at t={snap.time:.6g}: edge/peak = {snap.edge_ratio:.3e}"
            )
            warned = True

    logger.debug(f"Drift: {trajectory.drift}")
    return trajectory
