"""Constructive coupling of a cumulative process with a Wiener process.

The pipeline builds, from one replication's randomness:

* drivers ``B`` (d-dim) and ``B_tilde`` (scalar) — unit-grid Gaussian paths
  coupled to the cycle increments and durations (per the chosen mode);
* an embedded Poisson counting process ``N`` derived measurably from
  ``B_tilde`` by per-unit-interval quantile mapping;
* Wiener surrogates ``W_tilde`` (time-rescaled from ``B_tilde``) and
  ``W_star`` (time-rescaled from ``B``), plus an independent ``W_circ``;
* the assembled d-dimensional Wiener path ``W`` combining the surrogates
  through the pseudo-inverse of the asymptotic covariance root;
* the eight-term error decomposition ``phi[1..8]`` whose sum telescopes to
  ``S(u) - kappa*u - sigma*W_u`` exactly — the pipeline's central algebraic
  identity, verified on every run.

The drivers are *surrogates*: explicitly computable stand-ins for couplings
whose existence classical strong-approximation theory guarantees without an
algorithm.  Their error rates are measured by the experiment harness, never
assumed.

Time axes: cycle index (``B``, ``B_tilde``, ``N`` and its first-passage
inverse live here) versus physical time (the path ``S``, ``W_tilde``,
``W_circ`` and the assembled ``W``).  ``W_star`` is indexed by counting level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .greeks import Greeks
from .models import (INDEPENDENT, QUANTILE_1D, SHARED_INNOVATIONS,
                     GammaGaussianModel, Model, single_event_path)
from .paths import CountingPath, HorizonExceededError, RegenerativePath
from .rng import RngStream, bytes_generator

_MAX_TABLE_RATE = 500.0


class ModeUnsupportedError(ValueError):
    """The model family cannot be driven in the requested coupling mode."""


class GridMismatchError(ValueError):
    """Input paths do not cover compatible grids."""


class IdentityViolationError(AssertionError):
    """The eight-term decomposition failed to telescope — an implementation
    bug, not a statistical event."""


# -- piecewise-linear paths on a unit grid ----------------------------------


class UnitGridPath:
    """Values on the integer grid 0..K, linearly interpolated in between."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        self._matrix = values[:, None] if values.ndim == 1 else values
        self._flat = values.ndim == 1
        if self._matrix.shape[0] < 2:
            raise ValueError("a unit-grid path needs at least two grid values")
        self._grid = np.arange(self._matrix.shape[0], dtype=float)

    @classmethod
    def from_increments(cls, increments: np.ndarray) -> "UnitGridPath":
        increments = np.asarray(increments, dtype=float)
        matrix = increments[:, None] if increments.ndim == 1 else increments
        values = np.zeros((matrix.shape[0] + 1, matrix.shape[1]))
        np.cumsum(matrix, axis=0, out=values[1:])
        return cls(values if increments.ndim == 2 else values[:, 0])

    @property
    def horizon(self) -> int:
        return self._matrix.shape[0] - 1

    @property
    def d(self) -> int:
        return self._matrix.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self._matrix[:, 0] if self._flat else self._matrix

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)

    def at(self, x) -> np.ndarray:
        """Interpolated value(s); scalar in -> (d,) out, (m,) in -> (m, d)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if x.size:
            lo, hi = x.min(), x.max()
            if lo < -1e-9 or hi > self.horizon + 1e-9:
                raise HorizonExceededError(
                    f"path covers [0, {self.horizon}], asked for "
                    f"[{lo:g}, {hi:g}]")
        out = np.empty((x.size, self.d))
        for j in range(self.d):
            out[:, j] = np.interp(x, self._grid, self._matrix[:, j])
        if self._flat:
            return out[0, 0] if scalar else out[:, 0]
        return out[0] if scalar else out


@dataclass(frozen=True)
class ScaledPath:
    """value_scale * base((t / time_scale)) — a rescaled unit-grid path."""

    base: UnitGridPath
    value_scale: float
    time_scale: float

    def at(self, t) -> np.ndarray:
        return self.value_scale * self.base.at(np.asarray(t, dtype=float)
                                               / self.time_scale)

    @property
    def horizon(self) -> float:
        return self.base.horizon * self.time_scale


# -- drivers ----------------------------------------------------------------


@dataclass(frozen=True)
class GaussianDriver:
    """Per-cycle standard normal increments behind the coupled drivers.

    ``unit_increments_b`` has shape (K, d) and drives the increment side;
    ``unit_increments_btilde`` has shape (K,) and drives the duration side.
    Under mode "independent" both are independent of the cycles; the other
    modes couple them per the contracts in :func:`drive_gaussians`.
    """

    unit_increments_b: np.ndarray
    unit_increments_btilde: np.ndarray
    mode: str

    def b_path(self) -> UnitGridPath:
        return UnitGridPath.from_increments(self.unit_increments_b)

    def btilde_path(self) -> UnitGridPath:
        return UnitGridPath.from_increments(self.unit_increments_btilde)


def drive_gaussians(model: Model, horizon_cycles: int, mode: str,
                    rng: RngStream) -> tuple[RegenerativePath, GaussianDriver]:
    """Sample a cycle sequence together with its Gaussian drivers.

    Modes:

    * ``shared-innovations`` — the model's own noise innovations become the
      increments of ``B`` (zero per-cycle tracking error on the increment
      side by construction) and the durations are generated from
      ``B_tilde``'s increments through the duration inverse CDF.
    * ``quantile-1d``       — d = 1 only; durations couple to ``B_tilde``
      through inverse CDFs of a common uniform; the increment residual is
      either Gaussian (then exact, as above) or degenerate.
    * ``independent``       — null baseline: drivers drawn independently of
      the cycles; no tracking guarantee.

    The stream layout is fixed: child(0) native cycle sampling, child(1) the
    increment-side driver, child(2) the duration-side driver.  Callers
    reserve child(3) for the independent Wiener path of the assembled W.
    """
    if mode not in model.coupling_modes:
        raise ModeUnsupportedError(
            f"model {model.family} supports modes {model.coupling_modes}, "
            f"not {mode!r}")
    k = int(horizon_cycles)
    if k < 2:
        raise ValueError(f"need at least 2 cycles, got {k}")
    if mode == SHARED_INNOVATIONS:
        assert isinstance(model, GammaGaussianModel)
        batch, g, g_dur = model.sample_cycles_coupled(
            k, noise_rng=rng.child(1), duration_rng=rng.child(2))
        path = single_event_path(batch.tau, batch.xi, model.interpolation)
        return path, GaussianDriver(g, g_dur, mode)
    if mode == QUANTILE_1D:
        if model.d != 1:
            raise ModeUnsupportedError(
                f"quantile-1d requires d=1, model has d={model.d}")
        g_dur = rng.child(2).generator().standard_normal(k)
        g = rng.child(1).generator().standard_normal((k, 1))
        tau = model.tau_from_gaussian(g_dur)
        xi = model.increments_from(tau, g)
        path = single_event_path(tau, xi, model.interpolation)
        return path, GaussianDriver(g, g_dur, mode)
    path = model.sample_path(k, rng.child(0))
    g = rng.child(1).generator().standard_normal((k, model.d))
    g_dur = rng.child(2).generator().standard_normal(k)
    return path, GaussianDriver(g, g_dur, INDEPENDENT)


# -- Poisson embedding ------------------------------------------------------


class PoissonQuantile:
    """Quantile function of Poisson(rate) via a cached CDF table."""

    def __init__(self, rate: float):
        rate = float(rate)
        if not 0 < rate <= _MAX_TABLE_RATE:
            raise ValueError(
                f"rate must lie in (0, {_MAX_TABLE_RATE:g}], got {rate}")
        self.rate = rate
        terms = [math.exp(-rate)]
        k, cdf = 0, terms[0]
        while cdf < 1.0 - 1e-16 and k < 40 + int(10 * rate):
            k += 1
            terms.append(terms[-1] * rate / k)
            cdf += terms[-1]
        self._cdf = np.cumsum(terms)

    def ppf(self, u) -> np.ndarray:
        """Smallest k with P(X <= k) >= u, vectorized."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u > 1)):
            raise ValueError("quantile argument must lie in [0, 1]")
        return np.searchsorted(self._cdf, u, side="left")


def build_poisson_from_brownian(btilde: UnitGridPath, greeks: Greeks,
                                horizon: float,
                                rng: RngStream | None = None) -> CountingPath:
    """Counting process on [0, horizon] derived measurably from the driver.

    Per unit interval [k, k+1) the jump count is the Poisson(lambda) quantile
    of the standard normal CDF of the driver increment — so counts are
    exactly Poisson marginally and are a deterministic function of the
    driver.  Jump positions inside each interval are uniform draws from a
    generator seeded by hashing the increment values, which keeps the whole
    construction measurable with respect to the driver path.

    The ``rng`` argument is accepted for interface uniformity but unused:
    injecting outside randomness would break measurability.
    """
    del rng
    n_units = int(horizon)
    if n_units < 1:
        raise ValueError(f"horizon must be at least 1 unit, got {horizon}")
    if n_units > btilde.horizon:
        raise GridMismatchError(
            f"driver covers {btilde.horizon} units, horizon asks {n_units}")
    increments = np.diff(btilde.values[:n_units + 1])
    counts = PoissonQuantile(greeks.lam).ppf(ndtr(increments))
    total = int(counts.sum())
    gen = bytes_generator(increments.tobytes())
    offsets = gen.random(total)
    times = np.repeat(np.arange(n_units, dtype=float), counts) + offsets
    times.sort()
    return CountingPath(jump_times=times)


# -- Wiener surrogates and the assembled process ----------------------------


def build_inverse_wiener(btilde: UnitGridPath, greeks: Greeks) -> ScaledPath:
    """Scalar Wiener surrogate for the renewal-count fluctuation.

    ``-sqrt(mu) * btilde(u / mu)``: Brownian scaling gives variance u; the
    sign reflects that longer cycles mean fewer renewals by time u.
    """
    if greeks.mu <= 0:
        raise ValueError("needs mu > 0")
    return ScaledPath(base=btilde, value_scale=-math.sqrt(greeks.mu),
                      time_scale=greeks.mu)


def build_timechange_wiener(b: UnitGridPath, greeks: Greeks) -> ScaledPath:
    """d-dim Wiener surrogate on the counting-level axis.

    ``sqrt(lambda) * b(s / lambda)``: at integer levels this is the exact
    Brownian time change of the increment driver.
    """
    if greeks.lam <= 0:
        raise ValueError("needs lambda > 0")
    return ScaledPath(base=b, value_scale=math.sqrt(greeks.lam),
                      time_scale=greeks.lam)


@dataclass(frozen=True)
class AssembledW:
    """The assembled d-dimensional Wiener path.

        W(t) = pinv(sigma) @ (v W*(t/gamma) / sqrt(lambda)
                              - mu alpha Wt(t) / (lambda sqrt(gamma)))
               + (I - pinv(sigma) sigma) @ Wc(t)

    with W* the level-axis surrogate, Wt the scalar surrogate and Wc an
    independent Wiener path carrying the null-space component.
    """

    wstar: ScaledPath
    wtilde: ScaledPath
    wcirc: ScaledPath
    greeks: Greeks
    _null_proj: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        g = self.greeks
        proj = np.eye(g.d) - g.sigma_pinv @ g.sigma
        object.__setattr__(self, "_null_proj", 0.5 * (proj + proj.T))

    def at(self, t) -> np.ndarray:
        """W(t) for scalar or array t; rows are time points."""
        g = self.greeks
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        star = np.atleast_2d(self.wstar.at(t / g.gamma))
        tilde = np.atleast_1d(self.wtilde.at(t))
        circ = np.atleast_2d(self.wcirc.at(t))
        core = (star @ g.v) / math.sqrt(g.lam) \
            - np.outer(tilde, g.alpha) * (g.mu / (g.lam * math.sqrt(g.gamma)))
        out = core @ g.sigma_pinv + circ @ self._null_proj
        return out[0] if scalar else out


def assemble_W(wstar: ScaledPath, wtilde: ScaledPath, wcirc: ScaledPath,
               greeks: Greeks) -> AssembledW:
    """Combine the surrogates into the assembled Wiener path.

    Requires the independent path to be d-dimensional and all horizons to
    cover a common positive physical-time span.
    """
    if wcirc.base.d != greeks.d:
        raise GridMismatchError(
            f"independent path has d={wcirc.base.d}, parameters say {greeks.d}")
    if wstar.base.d != greeks.d:
        raise GridMismatchError(
            f"level-axis surrogate has d={wstar.base.d}, parameters say {greeks.d}")
    if min(wstar.horizon * greeks.gamma, wtilde.horizon, wcirc.horizon) <= 0:
        raise GridMismatchError("assembled path would cover an empty time span")
    return AssembledW(wstar=wstar, wtilde=wtilde, wcirc=wcirc, greeks=greeks)


# -- bundles ----------------------------------------------------------------


@dataclass(frozen=True)
class CouplingBundle:
    """Everything one replication of the pipeline produces."""

    driver: GaussianDriver
    b: UnitGridPath
    btilde: UnitGridPath
    n_path: CountingPath
    wtilde: ScaledPath
    wstar: ScaledPath
    wcirc: ScaledPath
    w: AssembledW
    greeks: Greeks
    horizon_cycles: int

    def first_passage(self, u: float) -> float:
        """First-passage inverse of the scaled counting process at time u.

        Ceiling semantics at integer levels, matching
        :func:`regenlab.paths.invert_counting`.
        """
        from .paths import invert_counting
        return invert_counting(self.n_path, float(u) / self.greeks.gamma)


def horizon_cycles_for(t: float, mu: float) -> int:
    """Cycle count that covers physical horizon t with a generous margin."""
    units = t / mu
    return int(math.ceil(1.15 * units + 12.0 * math.sqrt(units + 1.0) + 50.0))


def build_bundle(model: Model, greeks: Greeks, t: float, mode: str,
                 rng: RngStream) -> tuple[RegenerativePath, CouplingBundle]:
    """Run the full pipeline for one replication over horizon t.

    Draws cycles and drivers, embeds the Poisson process, builds the three
    Wiener surrogates and the assembled W, and verifies that every component
    actually covers the requested horizon (raising HorizonExceededError with
    a diagnostic when the generous default margin is ever insufficient).
    """
    if t <= 0:
        raise ValueError(f"horizon must be positive, got {t}")
    k = horizon_cycles_for(t, greeks.mu)
    path, driver = drive_gaussians(model, k, mode, rng)
    if path.horizon < t:
        raise HorizonExceededError(
            f"{k} cycles reach only {path.horizon:g} < t={t:g}")
    b = driver.b_path()
    btilde = driver.btilde_path()
    n_path = build_poisson_from_brownian(btilde, greeks, horizon=k)
    needed_jumps = int(math.floor(t / greeks.gamma)) + 1
    if n_path.n_jumps < needed_jumps:
        raise HorizonExceededError(
            f"counting process has {n_path.n_jumps} jumps, "
            f"needs {needed_jumps} to cover t={t:g}")
    if needed_jumps / greeks.lam > k:
        raise HorizonExceededError(
            f"level {needed_jumps} lies beyond the driver grid of {k} units")
    wtilde = build_inverse_wiener(btilde, greeks)
    wstar = build_timechange_wiener(b, greeks)
    circ_incs = rng.child(3).generator().standard_normal(
        (int(math.ceil(t)) + 2, greeks.d))
    wcirc = ScaledPath(base=UnitGridPath.from_increments(circ_incs),
                       value_scale=1.0, time_scale=1.0)
    w = assemble_W(wstar, wtilde, wcirc, greeks)
    bundle = CouplingBundle(driver=driver, b=b, btilde=btilde, n_path=n_path,
                            wtilde=wtilde, wstar=wstar, wcirc=wcirc, w=w,
                            greeks=greeks, horizon_cycles=k)
    return path, bundle


# -- evaluation grids and the decomposition ---------------------------------


def evaluation_grid(path: RegenerativePath, t: float, grid_step: float,
                    lattices: Sequence[float] = ()) -> np.ndarray:
    """Sorted grid: path events, a uniform grid, lattice multiples, 0 and t.

    Extra lattice spacings (the mean duration for the assembled-W kinks, the
    duration-variance ratio for the first-passage steps) make the grid hit
    every point where some pipeline component changes slope or value.
    """
    if grid_step <= 0:
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    pieces = [np.array([0.0, t]),
              np.arange(0.0, t, grid_step),
              path.event_times[path.event_times <= t]]
    for spacing in lattices:
        if spacing > 0:
            pieces.append(spacing * np.arange(0.0, math.floor(t / spacing) + 1.0))
    grid = np.unique(np.concatenate(pieces))
    return grid[(grid >= 0.0) & (grid <= t)]


@dataclass(frozen=True)
class PhiDecomposition:
    """The eight error terms on an evaluation grid, plus the identity audit.

    ``phi[q-1][i]`` is the d-vector value of term q at grid point i.  The sum
    of the eight terms minus ``S(u) - kappa*u - sigma*W(u)`` is the residual;
    its max-norm over the grid must vanish to floating precision.
    """

    grid: np.ndarray
    s_values: np.ndarray
    w_values: np.ndarray
    phi: tuple[np.ndarray, ...]
    deviation: np.ndarray
    residual: float
    tolerance: float

    def sup_per_term(self) -> np.ndarray:
        """Max-norm supremum of each term over the grid, shape (8,)."""
        return np.array([float(np.max(np.abs(p))) for p in self.phi])

    def sup_deviation(self) -> float:
        return float(np.max(self.deviation))


def phi_decomposition(path: RegenerativePath, bundle: CouplingBundle,
                      t: float, grid_step: float = 0.25) -> PhiDecomposition:
    """Compute the eight-term decomposition and verify it telescopes.

    Raises IdentityViolationError when the residual exceeds
    ``1e-8 * (1 + max |S|)`` — that can only mean an implementation bug.

    The first-passage level used throughout is ``floor(u/gamma) + 1`` — the
    right-continuous inverse.  It agrees with ceiling semantics except when
    ``u`` is an exact lattice multiple, where right continuity is the choice
    that keeps the telescoping identity exact (the count at the passage time
    then always equals the level).
    """
    g = bundle.greeks
    if path.d != g.d:
        raise GridMismatchError(f"path d={path.d} vs parameters d={g.d}")
    if t > path.horizon:
        raise HorizonExceededError(
            f"t={t:g} beyond simulated horizon {path.horizon:g}")
    grid = evaluation_grid(path, t, grid_step, lattices=(g.mu, g.gamma))

    jump_times = bundle.n_path.jump_times
    floor_levels = np.floor(grid / g.gamma).astype(np.int64)
    levels = floor_levels + 1
    if levels[-1] > jump_times.size:
        raise HorizonExceededError(
            f"grid needs counting level {levels[-1]}, "
            f"only {jump_times.size} jumps recorded")
    y = jump_times[levels - 1]
    iy = np.floor(y).astype(np.int64)
    if iy[-1] > path.n_cycles:
        raise HorizonExceededError(
            f"first passage reaches cycle {iy[-1]}, "
            f"only {path.n_cycles} simulated")

    s_u = path.evaluate(grid)
    m_u = path.renewal_counts(grid)
    s_at_m = path.prefix_xi[m_u]
    s_at_iy = path.prefix_xi[iy]
    t_iy = path.renewal_times[iy]
    b_y = np.atleast_2d(bundle.b.at(y))
    wtilde_u = np.atleast_1d(bundle.wtilde.at(grid))
    wstar_level = np.atleast_2d(bundle.wstar.at(levels.astype(float)))
    wstar_scaled = np.atleast_2d(bundle.wstar.at(grid / g.gamma))

    sqrt_lam = math.sqrt(g.lam)
    level_times = g.gamma * levels          # shared by phi4/phi8: exact cancel
    phi1 = s_u - s_at_m
    phi2 = s_at_m - s_at_iy
    phi3 = s_at_iy - np.outer(t_iy, g.beta) + g.mu * np.outer(y, g.alpha) \
        - b_y @ g.v
    phi4 = np.outer(t_iy - level_times, g.beta)
    phi5 = -g.mu * np.outer(
        y - grid / (g.lam * g.gamma)
        - wtilde_u / (g.lam * math.sqrt(g.gamma)), g.alpha)
    phi6 = (b_y - wstar_level / sqrt_lam) @ g.v
    phi7 = ((wstar_level - wstar_scaled) @ g.v) / sqrt_lam
    phi8 = np.outer(level_times - grid, g.beta)

    w_u = np.atleast_2d(bundle.w.at(grid))
    target = s_u - np.outer(grid, g.kappa) - w_u @ g.sigma
    total = phi1 + phi2 + phi3 + phi4 + phi5 + phi6 + phi7 + phi8
    residual = float(np.max(np.abs(total - target)))
    tolerance = 1e-8 * (1.0 + float(np.max(np.abs(s_u))))
    if residual > tolerance:
        raise IdentityViolationError(
            f"decomposition residual {residual:.3e} exceeds tolerance "
            f"{tolerance:.3e} — the eight terms failed to telescope")
    deviation = np.max(np.abs(target), axis=1)
    return PhiDecomposition(grid=grid, s_values=s_u, w_values=w_u,
                            phi=(phi1, phi2, phi3, phi4, phi5, phi6, phi7,
                                 phi8),
                            deviation=deviation, residual=residual,
                            tolerance=tolerance)


def sup_deviation(path: RegenerativePath, w: AssembledW, greeks: Greeks,
                  t: float, grid_step: float = 0.25) -> float:
    """Max over the evaluation grid of |S(u) - kappa*u - sigma*W(u)|.

    The grid contains every kink of the pipeline components for the
    piecewise-constant families, and is grid_step-tight for linear accrual.
    """
    if t > path.horizon:
        raise HorizonExceededError(
            f"t={t:g} beyond simulated horizon {path.horizon:g}")
    grid = evaluation_grid(path, t, grid_step, lattices=(greeks.mu,))
    s_u = path.evaluate(grid)
    w_u = np.atleast_2d(w.at(grid))
    dev = s_u - np.outer(grid, greeks.kappa) - w_u @ greeks.sigma
    return float(np.max(np.abs(dev)))
