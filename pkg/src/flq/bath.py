"""Reservoir spectral densities, detailed-balance diagnostics and Lamb-shift coefficients."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from flq.errors import InvalidArgumentError, ModelRejectionError, NumericFailure, OutOfRangeError

PSD_TOL = 1e-10


class SpectralDensity:
    """Base class; ``gamma`` maps frequencies to rates (or Hermitian blocks)."""

    channels = 1
    kind = "abstract"

    def gamma(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.gamma(x)

    def params(self) -> dict:
        return {}

    def support(self):
        return (-np.inf, np.inf)


@dataclass(frozen=True)
class OhmicCubedThermal(SpectralDensity):
    """``A x^3 / (1 - exp(-beta x))``, with the limit 0 at ``x = 0``."""

    amplitude: float
    beta: float
    kind = "ohmic-cubed-thermal"

    def __post_init__(self):
        if not self.amplitude > 0:
            raise InvalidArgumentError(f"amplitude must be positive, got {self.amplitude}")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise InvalidArgumentError(f"beta must be positive and finite, got {self.beta}")

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            val = self.amplitude * x**3 / (-np.expm1(-self.beta * x))
        val = np.where(x == 0, 0.0, val)
        val = np.where(np.isnan(val), 0.0, val)  # far negative tail underflows to 0/inf
        return val if val.ndim else float(val)

    def params(self):
        return {"A": self.amplitude, "beta": self.beta}


@dataclass(frozen=True)
class VacuumCutoff(SpectralDensity):
    """``A x^3`` for ``x >= 0`` and zero for negative frequencies."""

    amplitude: float
    kind = "vacuum-cutoff"

    def __post_init__(self):
        if not self.amplitude > 0:
            raise InvalidArgumentError(f"amplitude must be positive, got {self.amplitude}")

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        val = np.where(x >= 0, self.amplitude * x**3, 0.0)
        return val if val.ndim else float(val)

    def params(self):
        return {"A": self.amplitude}


@dataclass(frozen=True)
class Flat(SpectralDensity):
    gamma0: float
    kind = "flat"

    def __post_init__(self):
        if not self.gamma0 >= 0:
            raise InvalidArgumentError(f"gamma0 must be non-negative, got {self.gamma0}")

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        val = np.full(x.shape, float(self.gamma0))
        return val if val.ndim else float(val)

    def params(self):
        return {"gamma0": self.gamma0}


@dataclass(frozen=True, eq=False)
class Tabulated(SpectralDensity):
    """Linear interpolation of sorted samples; scalar or Hermitian PSD blocks."""

    x: np.ndarray
    values: np.ndarray
    kind = "tabulated"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values)
        if x.ndim != 1 or x.size < 2:
            raise InvalidArgumentError("tabulated model needs at least two sample points")
        if np.any(np.diff(x) <= 0):
            raise InvalidArgumentError("tabulated frequencies must be strictly increasing")
        if v.shape[0] != x.size or v.ndim not in (1, 3):
            raise InvalidArgumentError(f"values shape {v.shape} does not match {x.size} sample points")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("tabulated values must be finite")
        if v.ndim == 1:
            v = v.astype(float)
            if np.any(v < 0):
                i = int(np.argmin(v))
                raise ModelRejectionError(f"tabulated rate is negative at x = {x[i]}", x[i])
        else:
            v = v.astype(complex)
            if v.shape[1] != v.shape[2]:
                raise InvalidArgumentError("tabulated blocks must be square")
            herm = np.abs(v - np.conj(np.swapaxes(v, 1, 2))).max()
            if herm > PSD_TOL:
                raise ModelRejectionError(f"tabulated block is not Hermitian (residual {herm:.3e})")
            lam = np.linalg.eigvalsh(0.5 * (v + np.conj(np.swapaxes(v, 1, 2)))).min(axis=1)
            if lam.min() < -PSD_TOL:
                i = int(np.argmin(lam))
                raise ModelRejectionError(f"tabulated block is not PSD at x = {x[i]} (min eigenvalue {lam[i]:.3e})", x[i])
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def channels(self):
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def support(self):
        return (float(self.x[0]), float(self.x[-1]))

    def gamma(self, x):
        xs = np.asarray(x, dtype=float)
        flat = np.atleast_1d(xs)
        outside = flat[(flat < self.x[0]) | (flat > self.x[-1])]
        if outside.size:
            raise OutOfRangeError(
                f"tabulated model queried outside [{self.x[0]}, {self.x[-1]}] at {sorted(set(outside.tolist()))}",
                sorted(set(outside.tolist())),
            )
        if self.values.ndim == 1:
            val = np.interp(flat, self.x, self.values)
            return val.reshape(xs.shape) if xs.ndim else float(val[0])
        idx = np.clip(np.searchsorted(self.x, flat, side="right") - 1, 0, self.x.size - 2)
        w = (flat - self.x[idx]) / (self.x[idx + 1] - self.x[idx])
        val = (1 - w)[:, None, None] * self.values[idx] + w[:, None, None] * self.values[idx + 1]
        return val.reshape(xs.shape + val.shape[1:]) if xs.ndim else val[0]

    def params(self):
        return {"n_points": int(self.x.size), "support": list(self.support())}


def read_table(path) -> Tabulated:
    """Two-column CSV ``x, gamma`` with optional ``#`` comment lines and header."""
    xs, gs = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if line.strip() and not line.lstrip().startswith("#"))
        for row in rows:
            try:
                x, g = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not xs:
                    continue  # header row
                raise InvalidArgumentError(f"{path}: malformed row {row}")
            xs.append(x)
            gs.append(g)
    return Tabulated(np.array(xs), np.array(gs))


def kms_residual(model: SpectralDensity, beta: float, x_grid) -> float:
    """``max_x |gamma(-x) - exp(-beta x) gamma(x)| / max(gamma(x), 1e-300)``."""
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    x = np.asarray(x_grid, dtype=float)
    gp = np.asarray(model.gamma(x), dtype=float)
    gm = np.asarray(model.gamma(-x), dtype=float)
    return float(np.max(np.abs(gm - np.exp(-beta * x) * gp) / np.maximum(gp, 1e-300)))


# -- binding baths to couplings ---------------------------------------------


@dataclass(frozen=True, eq=False)
class BathSet:
    """Spectral densities bound to coupling labels.

    Each entry is ``(labels, model)``; scalar models bind one label, block
    models bind as many labels as they have channels. Distinct entries are
    uncorrelated.
    """

    entries: tuple = ()

    def __post_init__(self):
        seen = set()
        norm = []
        for labels, model in self.entries:
            labels = (labels,) if isinstance(labels, str) else tuple(str(lab) for lab in labels)
            if len(labels) != model.channels:
                raise InvalidArgumentError(f"model with {model.channels} channels bound to labels {labels}")
            if seen & set(labels):
                raise InvalidArgumentError(f"coupling labels {sorted(seen & set(labels))} bound twice")
            seen |= set(labels)
            norm.append((labels, model))
        object.__setattr__(self, "entries", tuple(norm))

    @classmethod
    def single(cls, label, model):
        return cls((((label,), model),))

    def labels(self):
        return [lab for labels, _ in self.entries for lab in labels]

    def gamma_matrix(self, labels, x) -> np.ndarray:
        """``[gamma_ab(x)]`` over ``labels`` (unbound labels get zero rows)."""
        pos = {lab: i for i, lab in enumerate(labels)}
        g = np.zeros((len(labels), len(labels)), dtype=complex)
        for bound, model in self.entries:
            idx = [pos.get(lab) for lab in bound]
            if all(i is None for i in idx):
                continue
            val = model.gamma(x)
            block = np.array([[val]]) if np.ndim(val) == 0 else np.asarray(val)
            for a, ia in enumerate(idx):
                for b, ib in enumerate(idx):
                    if ia is not None and ib is not None:
                        g[ia, ib] = block[a, b]
        return g


# -- Lamb shift -----------------------------------------------------------------

LAMB_METHODS = ("zero", "principal-value", "user-table")


@dataclass(frozen=True, eq=False)
class LambShiftTable:
    """``sigma_ab(x)`` at a set of frequencies, Hermitian in ``(a, b)``."""

    labels: tuple
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0)))
    zero: bool = False
    match_tol: float = 1e-9

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size:
            herm = np.abs(v - np.conj(np.swapaxes(v, 1, 2))).max()
            if herm > 1e-10:
                raise InvalidArgumentError(f"Lamb-shift table is not Hermitian (residual {herm:.3e})")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))

    def sigma(self, x) -> np.ndarray:
        n = len(self.labels)
        if self.zero:
            return np.zeros((n, n), dtype=complex)
        if self.x.size:
            i = int(np.argmin(np.abs(self.x - x)))
            if abs(self.x[i] - x) <= self.match_tol * max(1.0, abs(x)):
                return self.values[i]
        raise OutOfRangeError(f"Lamb-shift coefficient not tabulated at x = {x}", [x])


def principal_value(func, x, lo, hi, pv_tol=1e-9, breakpoints=(), n0=16, max_levels=14):
    """``PV int_lo^hi func(y) / (y - x) dy`` by singularity subtraction.

    The remainder ``(func(y) - func(x)) / (y - x)`` is smooth between
    ``breakpoints`` (and ``x``); it is integrated with the composite midpoint
    rule on successively doubled grids and Richardson extrapolated. The log
    term carries the singular part exactly.
    """
    if not lo < hi:
        raise InvalidArgumentError("empty integration range")
    if min(abs(x - lo), abs(x - hi)) == 0:
        raise InvalidArgumentError(f"principal value undefined at the support edge x = {x}")
    fx = np.asarray(func(x))
    edges = np.unique(np.clip(np.concatenate([[lo, hi, x], np.asarray(breakpoints, dtype=float)]), lo, hi))
    widths = np.diff(edges)

    def midpoint(n):
        frac = (np.arange(n) + 0.5) / n
        y = (edges[:-1, None] + widths[:, None] * frac).ravel()
        w = np.repeat(widths / n, n)
        fy = np.asarray(func(y))
        shape = (y.size,) + (1,) * (fy.ndim - 1)
        reg = (fy - fx) / (y - x).reshape(shape)
        return np.tensordot(w, reg, axes=1)

    log_term = fx * np.log(abs(hi - x) / abs(x - lo))
    prev = midpoint(n0)
    prev_rich = None
    n = n0
    change = np.inf
    for _ in range(max_levels):
        n *= 2
        cur = midpoint(n)
        rich = (4 * cur - prev) / 3
        if prev_rich is not None:
            change = float(np.max(np.abs(rich - prev_rich)))
            if change <= pv_tol * max(1.0, float(np.max(np.abs(rich)))):
                return rich + log_term
        prev, prev_rich = cur, rich
    raise NumericFailure(
        f"principal-value quadrature at x = {x} did not converge to {pv_tol:.1e}",
        {"x": x, "last_change": change},
    )


def lamb_shift(baths: BathSet, labels, x_grid, method="zero", cutoff=None, pv_tol=1e-9, table=None) -> LambShiftTable:
    """Lamb-shift coefficients at the frequencies ``x_grid``.

    ``principal-value`` uses ``sigma(x) = (1/2 pi) PV int gamma(y) / (y - x) dy``
    over the model support, truncated at ``[-cutoff, cutoff]`` for unbounded
    models.
    """
    labels = tuple(labels)
    if method not in LAMB_METHODS:
        raise InvalidArgumentError(f"unknown Lamb-shift method {method!r}; choose from {LAMB_METHODS}")
    if method == "zero":
        return LambShiftTable(labels, zero=True)
    if method == "user-table":
        if table is None:
            raise InvalidArgumentError("user-table Lamb shift needs a table")
        xs, vals = table
        return LambShiftTable(labels, np.asarray(xs, dtype=float), np.asarray(vals, dtype=complex))
    xs = np.asarray(sorted(set(np.round(np.asarray(x_grid, dtype=float), 12))), dtype=float)
    pos = {lab: i for i, lab in enumerate(labels)}
    vals = np.zeros((xs.size, len(labels), len(labels)), dtype=complex)
    for bound, model in baths.entries:
        lo, hi = model.support()
        if not np.isfinite(lo) or not np.isfinite(hi):
            if cutoff is None or not cutoff > 0:
                raise InvalidArgumentError("principal-value Lamb shift on an unbounded model needs a positive cutoff")
            lo, hi = max(lo, -cutoff), min(hi, cutoff)
        for k, x in enumerate(xs):
            kinks = model.x if isinstance(model, Tabulated) else (0.0,)
            pv = principal_value(model.gamma, x, lo, hi, pv_tol, kinks) / (2 * np.pi)
            block = np.array([[pv]]) if np.ndim(pv) == 0 else np.asarray(pv)
            for a, la in enumerate(bound):
                for b, lb in enumerate(bound):
                    if la in pos and lb in pos:
                        vals[k, pos[la], pos[lb]] = block[a, b]
    vals = 0.5 * (vals + np.conj(np.swapaxes(vals, 1, 2)))
    return LambShiftTable(labels, xs, vals)
