"""Periodic spectral grid, Fourier calculus and field serialization."""

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy import fft as sp_fft

from .exceptions import EdgeDecayError, OutputError, ParameterError
from .logging_config import get_logger

logger = get_logger(__name__)

EXPONENTIAL_EDGE_TOLERANCE = 1e-8
# Amplitude ratio; equals 1e-4 on the density |f|^2
ALGEBRAIC_EDGE_TOLERANCE = 1e-2

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid on [-L, L) with N (a power of two) nodes."""

    half_length: float
    n_points: int

    def __post_init__(self):
        if not math.isfinite(self.half_length) or self.half_length <= 0:
            raise ParameterError(
                f"half_length must be positive, got {self.half_length}"
            )
        n = self.n_points
        if n < 4 or n & (n - 1):
            raise ParameterError(f"n_points must be a power of two >= 4, got {n}")

    @cached_property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        nodes = -self.half_length + self.dx * np.arange(self.n_points)
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers pi*m/L in FFT order, Nyquist mode negative."""
        wavenumbers = 2.0 * np.pi * sp_fft.fftfreq(self.n_points, d=self.dx)
        wavenumbers.flags.writeable = False
        return wavenumbers

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    def max_stable_dt(self, safety: float = 0.2) -> float:
        return safety * self.dx**2


def default_grid(algebraic: bool = False) -> SpectralGrid:
    """Standard window: L=40, N=2048, or L=400, N=16384 for 1/|x| tails."""
    if algebraic:
        return SpectralGrid(400.0, 16384)
    return SpectralGrid(40.0, 2048)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a SpectralGrid."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.complex128, copy=True)
        if arr.shape != (self.grid.n_points,):
            raise ParameterError(
                f"Field needs {self.grid.n_points} samples, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ParameterError("Field samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_function(
        cls, grid: SpectralGrid, func: Callable[[np.ndarray], np.ndarray]
    ) -> "Field":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "Field":
        return cls(grid, np.zeros(grid.n_points))

    @cached_property
    def spectrum(self) -> np.ndarray:
        return sp_fft.fft(self.values)

    @property
    def abs2(self) -> np.ndarray:
        return self.values.real**2 + self.values.imag**2

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values))

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ParameterError("Fields live on different grids")
            return other.values
        return other

    def __add__(self, other) -> "Field":
        return Field(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Field":
        return Field(self.grid, self.values - self._coerce(other))

    def __mul__(self, other) -> "Field":
        return Field(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


def _from_spectrum(grid: SpectralGrid, spectrum: np.ndarray) -> Field:
    return Field(grid, sp_fft.ifft(spectrum))


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative via the multiplier (ik)^order.

    The Nyquist mode is dropped for odd orders so real fields stay real.
    """
    if order < 1:
        raise ParameterError(f"derivative order must be >= 1, got {order}")
    multiplier = (1j * f.grid.k) ** order
    if order % 2:
        multiplier = multiplier.copy()
        multiplier[f.grid.nyquist_index] = 0.0
    return _from_spectrum(f.grid, multiplier * f.spectrum)


def lp_norm(f: Field, p: int) -> float:
    """L^p norm by periodic trapezoid quadrature, p in {2, 4, 6}."""
    if p not in (2, 4, 6):
        raise ParameterError(f"p must be 2, 4 or 6, got {p}")
    integral = f.grid.dx * float(np.sum(f.abs2 ** (p // 2)))
    return integral ** (1.0 / p)


def l2_norm(f: Field) -> float:
    return lp_norm(f, 2)


def hm_norm(f: Field, m: int) -> float:
    """Sobolev H^m norm from the Fourier weights (1 + k^2)^m."""
    if m not in (0, 1, 2, 3):
        raise ParameterError(f"m must be in 0..3, got {m}")
    if m == 0:
        return l2_norm(f)
    weights = (1.0 + f.grid.k**2) ** m
    coefficient_energy = float(np.sum(weights * np.abs(f.spectrum) ** 2))
    return math.sqrt(f.grid.dx / f.grid.n_points * coefficient_energy)


def sobolev_pairing(f: Field, g: Field, m: int = 1) -> complex:
    """Complex H^m pairing sum (1+k^2)^m f_hat conj(g_hat), scaled to an integral.

    The Nyquist mode is dropped, as in the spectral derivative.
    """
    weights = (1.0 + f.grid.k**2) ** m
    weights[f.grid.nyquist_index] = 0.0
    total = np.sum(weights * f.spectrum * np.conj(g.spectrum))
    return complex(f.grid.dx / f.grid.n_points * total)


def inner(f: Field, g: Field) -> float:
    """Real inner product Re int f conj(g) dx."""
    return f.grid.dx * float(np.sum((f.values * np.conj(g.values)).real))


def translate(f: Field, y: float) -> Field:
    """Return f(. - y) by a Fourier phase shift."""
    if y == 0:
        return f
    return _from_spectrum(f.grid, f.spectrum * np.exp(-1j * f.grid.k * y))


def antiderivative_from_left(f: Field) -> Field:
    """Antiderivative F(x) = int_{-L}^x f, spectrally accurate, F(-L) = 0.

    The mean of f is integrated as a ramp; the zero-mean remainder by the
    multiplier 1/(ik).
    """
    grid = f.grid
    mean = complex(np.mean(f.values))
    remainder = f.spectrum.copy()
    remainder[0] = 0.0
    remainder[grid.nyquist_index] = 0.0
    k = grid.k.copy()
    k[0] = 1.0
    periodic = sp_fft.ifft(remainder / (1j * k))
    result = mean * (grid.x + grid.half_length) + periodic - periodic[0]
    if not np.any(f.values.imag):
        result = result.real
    return Field(grid, result)


def _pad_spectrum(spectrum: np.ndarray, n_fine: int) -> np.ndarray:
    n = spectrum.shape[-1]
    half = n // 2
    padded = np.zeros(n_fine, dtype=np.complex128)
    padded[:half] = spectrum[:half]
    padded[n_fine - half:] = spectrum[half:]
    return padded * (n_fine / n)


def _truncate_spectrum(spectrum: np.ndarray, n: int) -> np.ndarray:
    n_fine = spectrum.shape[-1]
    half = n // 2
    out = np.empty(n, dtype=np.complex128)
    out[:half] = spectrum[:half]
    out[half:] = spectrum[n_fine - half:]
    return out * (n / n_fine)


def dealias_spectral(
    nonlinearity: Callable[..., np.ndarray], *spectra: np.ndarray
) -> np.ndarray:
    """Evaluate a pointwise nonlinearity of band-limited inputs without aliasing.

    Inputs are zero-padded to 3N modes, which is exact for products of
    degree up to five; the product spectrum is truncated back to N modes.
    """
    n = spectra[0].shape[-1]
    n_fine = 3 * n
    fine = [sp_fft.ifft(_pad_spectrum(s, n_fine)) for s in spectra]
    return _truncate_spectrum(sp_fft.fft(nonlinearity(*fine)), n)


def dealias_pad(
    nonlinearity: Callable[..., np.ndarray], *fields: Field
) -> Field:
    """Field-level wrapper around dealias_spectral."""
    grid = fields[0].grid
    spectrum = dealias_spectral(nonlinearity, *(f.spectrum for f in fields))
    return _from_spectrum(grid, spectrum)


def edge_ratio(f: Field) -> float:
    """Largest edge amplitude relative to the field maximum (0 for the zero field)."""
    peak = f.max_abs
    if peak == 0:
        return 0.0
    edge = max(abs(f.values[0]), abs(f.values[-1]))
    return float(edge / peak)


def check_edge_decay(
    f: Field, tolerance: float = EXPONENTIAL_EDGE_TOLERANCE
) -> None:
    """Raise EdgeDecayError when the field has not decayed at the window edges."""
    ratio = edge_ratio(f)
    if ratio >= tolerance:
        raise EdgeDecayError(
            f"Field does not decay at the window edges: edge/peak = {ratio:.3e} "
            f"(tolerance {tolerance:.1e}); enlarge the half length",
            ratio=ratio,
            tolerance=tolerance,
        )


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step from 1 at t <= 0 to 0 at t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        rise = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        fall = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return fall / (fall + rise)


def edge_taper(grid: SpectralGrid, fraction: float = 0.1) -> np.ndarray:
    """Smooth window equal to 1 for |x| <= (1 - fraction) L, vanishing at x = -L."""
    if not 0 < fraction < 1:
        raise ParameterError(f"taper fraction must lie in (0, 1), got {fraction}")
    start = (1.0 - fraction) * grid.half_length
    t = (np.abs(grid.x) - start) / (grid.half_length - start)
    return _smooth_step(t)


def field_to_csv(f: Field) -> str:
    """CSV text with rows (x, Re, Im)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", "re", "im"])
    for x, value in zip(f.grid.x, f.values):
        writer.writerow(
            [format(x, ".17g"), format(value.real, ".17g"), format(value.imag, ".17g")]
        )
    return buffer.getvalue()


def field_to_bytes(f: Field) -> bytes:
    """Binary dump: int64 N, float64 L, then interleaved (re, im) doubles, little-endian."""
    header = np.array([f.grid.n_points], dtype="<i8").tobytes()
    header += np.array([f.grid.half_length], dtype="<f8").tobytes()
    return header + f.values.astype("<c16").tobytes()


def field_from_bytes(data: bytes) -> Field:
    """Inverse of field_to_bytes."""
    if len(data) < 16:
        raise ParameterError("Binary field dump is truncated")
    n = int(np.frombuffer(data[:8], dtype="<i8")[0])
    half_length = float(np.frombuffer(data[8:16], dtype="<f8")[0])
    values = np.frombuffer(data[16:], dtype="<c16")
    if values.shape != (n,):
        raise ParameterError(f"Binary field dump holds {values.size} samples, expected {n}")
    return Field(SpectralGrid(half_length, n), values)


def write_field(f: Field, path: Path, binary: bool = False) -> None:
    """Write a field as CSV or binary dump."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if binary:
            path.write_bytes(field_to_bytes(f))
        else:
            path.write_text(field_to_csv(f), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write field to {path}: {e}", original_error=e)
    logger.debug(f"Wrote field ({f.grid.n_points} samples) to {path}")
