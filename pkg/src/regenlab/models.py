"""Catalog of regenerative process models.

Five families, each producing i.i.d. cycles ``(tau, xi, trajectory)``:

* ``iid-sums``          -- constant cycle duration, Gaussian increments; the
                           degenerate ``Var(tau) = 0`` case that the rest of
                           the pipeline must reject.
* ``gamma-gaussian``    -- Gamma durations, increments linear in the duration
                           plus Gaussian noise; the family whose own
                           innovations can drive the coupling exactly.
* ``pareto-cycle``      -- heavy-tailed durations with tunable moment order;
                           the increment equals the duration.
* ``mm1-busy-cycle``    -- idle period plus M/M/1 busy period; the increment
                           counts departures, giving a genuine intra-cycle
                           trajectory.  No closed-form second moments; a
                           fixed-seed simulation oracle stands in.
* ``compound-jump``     -- exponential durations with Gaussian jumps at
                           Poisson times, dimension up to 3.

Every family declares ``p_max``, the supremum of finite moment orders of the
cycle duration and the cycle maximum; configurations requesting ``p >= p_max``
are rejected by the config layer.

All samplers are pure functions of an :class:`~regenlab.rng.RngStream`
position, so parallel replications on disjoint stream indices are exactly
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.integrate import quad
from scipy.special import gammainccinv, gammaincinv, ndtr

from .greeks import (DegenerateTauError, Greeks, GreeksUnavailableError,
                     matrix_sqrt_psd)
from .paths import (PIECEWISE_CONSTANT, PIECEWISE_LINEAR, CyclePath,
                    RegenerativePath)
from .rng import RngStream

SHARED_INNOVATIONS = "shared-innovations"
QUANTILE_1D = "quantile-1d"
INDEPENDENT = "independent"
COUPLING_MODES = (SHARED_INNOVATIONS, QUANTILE_1D, INDEPENDENT)

FAMILIES = ("iid-sums", "gamma-gaussian", "pareto-cycle", "mm1-busy-cycle",
            "compound-jump")


class InvalidParameterError(ValueError):
    """Nonsensical family parameters (nonpositive rate, bad dimension, ...)."""


class ModeUnsupportedHookError(NotImplementedError):
    """A coupling hook was called on a family that does not provide it."""


@dataclass(frozen=True)
class CycleBatch:
    """Vectorized cycle statistics: durations, increments, trajectory maxima."""

    tau: np.ndarray   # (n,)
    xi: np.ndarray    # (n, d)
    eta: np.ndarray   # (n,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float))
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim == 1:
            xi = xi[:, None]
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))

    @property
    def n(self) -> int:
        return self.tau.size

    @property
    def d(self) -> int:
        return self.xi.shape[1]


def single_event_path(tau: np.ndarray, xi: np.ndarray,
                       interpolation: str) -> RegenerativePath:
    """Path for families whose cycles carry a single event at the endpoint."""
    xi = xi if xi.ndim == 2 else xi[:, None]
    n, d = xi.shape
    renewal = np.concatenate([[0.0], np.cumsum(tau)])
    prefix = np.zeros((n + 1, d))
    np.cumsum(xi, axis=0, out=prefix[1:])
    return RegenerativePath(
        tau=tau, xi=xi, renewal_times=renewal, event_times=renewal[1:],
        event_values=prefix[1:], cycle_event_ptr=np.arange(n + 1),
        interpolation=interpolation, _prefix_xi=prefix)


class Model:
    """Common interface of the model families.

    Subclasses set ``family``, ``interpolation`` and ``coupling_modes`` and
    implement the sampling and moment methods.  ``sample_cycles`` returns only
    the per-cycle statistics (fast, vectorized); ``sample_path`` materializes
    the full trajectory for path-level experiments.
    """

    family: ClassVar[str]
    interpolation: ClassVar[str]
    coupling_modes: ClassVar[tuple[str, ...]] = (INDEPENDENT,)

    @property
    def d(self) -> int:
        raise NotImplementedError

    @property
    def p_max(self) -> float:
        raise NotImplementedError

    def sample_cycles(self, n: int, rng: RngStream) -> CycleBatch:
        raise NotImplementedError

    def sample_path(self, n: int, rng: RngStream) -> RegenerativePath:
        raise NotImplementedError

    def true_greeks(self, p: float) -> Greeks:
        """Exact parameters from closed-form cycle moments.

        Raises GreeksUnavailableError when the family has no closed forms and
        DegenerateTauError when the durations carry no variance.
        """
        raise GreeksUnavailableError(
            f"{self.family} has no closed-form cycle moments")

    def laplace_tau(self, b: float) -> float:
        """E exp(-b tau) for one cycle duration."""
        raise NotImplementedError

    def eta_moment(self, p: float) -> float | None:
        """Closed-form E eta^p when available, else None (use the MC estimate)."""
        return None

    def tau_from_gaussian(self, g: np.ndarray) -> np.ndarray:
        """Duration from a standard normal variate via the inverse CDF.

        Only the families supporting a quantile coupling mode implement it.
        """
        raise ModeUnsupportedHookError(
            f"{self.family} has no duration quantile coupling")

    def increments_from(self, tau: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Cycle increments given durations and standard normal innovations.

        Only the families supporting a quantile coupling mode implement it.
        """
        raise ModeUnsupportedHookError(
            f"{self.family} has no increment coupling hook")

    def _check_p(self, p: float) -> None:
        if not p > 2:
            raise InvalidParameterError(f"moment order p must exceed 2, got {p}")
        if p >= self.p_max:
            raise InvalidParameterError(
                f"p={p:g} >= p_max={self.p_max:g} for {self.family}")


@dataclass(frozen=True, eq=False)
class IidSumModel(Model):
    """Constant cycle duration, i.i.d. Gaussian increments (a random walk).

    The degenerate case: Var(tau) = 0, so the coupling pipeline's parameters
    (which divide by Var(tau)) do not exist and true_greeks raises.
    """

    family: ClassVar[str] = "iid-sums"
    interpolation: ClassVar[str] = PIECEWISE_CONSTANT
    coupling_modes: ClassVar[tuple[str, ...]] = ()

    xi_mean: np.ndarray = 0.0
    xi_cov: np.ndarray | None = None
    tau_const: float = 1.0
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {self.dim}")
        if not self.tau_const > 0:
            raise InvalidParameterError(
                f"cycle duration must be positive, got {self.tau_const}")
        mean = np.broadcast_to(np.asarray(self.xi_mean, dtype=float),
                               (self.dim,)).copy()
        cov = np.eye(self.dim) if self.xi_cov is None \
            else np.asarray(self.xi_cov, dtype=float)
        object.__setattr__(self, "xi_mean", mean)
        object.__setattr__(self, "xi_cov", cov)
        object.__setattr__(self, "_xi_root", matrix_sqrt_psd(cov))

    @property
    def d(self) -> int:
        return self.dim

    @property
    def p_max(self) -> float:
        return math.inf

    def sample_cycles(self, n: int, rng: RngStream) -> CycleBatch:
        g = rng.generator().standard_normal((n, self.dim))
        xi = self.xi_mean + g @ self._xi_root
        tau = np.full(n, float(self.tau_const))
        return CycleBatch(tau=tau, xi=xi, eta=np.max(np.abs(xi), axis=1))

    def sample_path(self, n: int, rng: RngStream) -> RegenerativePath:
        batch = self.sample_cycles(n, rng)
        return single_event_path(batch.tau, batch.xi, self.interpolation)

    def true_greeks(self, p: float) -> Greeks:
        self._check_p(p)
        raise DegenerateTauError(
            "iid-sums has Var(tau) = 0; the pipeline requires Var(tau) > 0")

    def laplace_tau(self, b: float) -> float:
        return math.exp(-b * self.tau_const)

    def eta_moment(self, p: float) -> float | None:
        if self.dim != 1:
            return None
        # eta = |xi| with xi ~ Normal(m, s^2); E|xi|^p by quadrature.
        m = float(self.xi_mean[0])
        s = math.sqrt(float(self.xi_cov[0, 0]))
        if s == 0.0:
            return abs(m) ** p

        def integrand(z: float) -> float:
            return abs(m + s * z) ** p \
                * math.exp(-z * z / 2) / math.sqrt(2 * math.pi)

        kink = -m / s
        left, _ = quad(integrand, -np.inf, kink)
        right, _ = quad(integrand, kink, np.inf)
        return float(left + right)


@dataclass(frozen=True, eq=False)
class GammaGaussianModel(Model):
    """Gamma durations; increments linear in the duration plus Gaussian noise.

    tau ~ Gamma(tau_shape, tau_scale) and

        xi = beta * tau + (kappa - beta) * mu + noise,   noise ~ N(0, noise_cov)

    so the long-run drift is exactly ``kappa`` and the regression coefficient
    of xi on tau is exactly ``beta``.  The noise is generated as
    ``matrix_sqrt_psd(noise_cov) @ g`` with ``g`` standard normal, which is
    what lets the coupling reuse ``g`` as the Wiener driver increment with
    zero per-cycle tracking error.  The increment accrues linearly across the
    cycle.
    """

    family: ClassVar[str] = "gamma-gaussian"
    interpolation: ClassVar[str] = PIECEWISE_LINEAR

    tau_shape: float = 2.0
    tau_scale: float = 1.0
    beta: np.ndarray = 0.0
    kappa: np.ndarray = 0.0
    noise_cov: np.ndarray | None = None
    dim: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {self.dim}")
        if not (self.tau_shape > 0 and self.tau_scale > 0):
            raise InvalidParameterError(
                f"Gamma duration needs positive shape and scale, got "
                f"shape={self.tau_shape}, scale={self.tau_scale}")
        beta = np.broadcast_to(np.asarray(self.beta, dtype=float),
                               (self.dim,)).copy()
        kappa = np.broadcast_to(np.asarray(self.kappa, dtype=float),
                                (self.dim,)).copy()
        cov = np.eye(self.dim) if self.noise_cov is None \
            else np.asarray(self.noise_cov, dtype=float)
        if cov.shape != (self.dim, self.dim):
            raise InvalidParameterError(
                f"noise_cov shape {cov.shape} does not match dimension {self.dim}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "noise_cov", cov)
        object.__setattr__(self, "_noise_root", matrix_sqrt_psd(cov))

    @property
    def coupling_modes(self) -> tuple[str, ...]:
        if self.dim == 1:
            return (SHARED_INNOVATIONS, QUANTILE_1D, INDEPENDENT)
        return (SHARED_INNOVATIONS, INDEPENDENT)

    @property
    def d(self) -> int:
        return self.dim

    @property
    def p_max(self) -> float:
        return math.inf

    @property
    def mu(self) -> float:
        return self.tau_shape * self.tau_scale

    @property
    def var_tau(self) -> float:
        return self.tau_shape * self.tau_scale ** 2

    def _xi_from(self, tau: np.ndarray, g: np.ndarray) -> np.ndarray:
        shift = (self.kappa - self.beta) * self.mu
        return np.outer(tau, self.beta) + shift + g @ self._noise_root

    def tau_from_gaussian(self, g: np.ndarray) -> np.ndarray:
        """Duration as an increasing function of a standard normal variate.

        Inverse-CDF transform tau = F^{-1}(Phi(g)), branch-split so both
        tails keep full relative precision.
        """
        g = np.asarray(g, dtype=float)
        out = np.empty_like(g)
        lower = g <= 0
        out[lower] = gammaincinv(self.tau_shape, ndtr(g[lower]))
        out[~lower] = gammainccinv(self.tau_shape, ndtr(-g[~lower]))
        return self.tau_scale * out

    def increments_from(self, tau: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Increments from durations and noise innovations (Gaussian residual,
        so the increment-side coupling is exact)."""
        return self._xi_from(np.asarray(tau, dtype=float),
                             np.asarray(g, dtype=float))

    def sample_cycles(self, n: int, rng: RngStream) -> CycleBatch:
        gen = rng.generator()
        tau = gen.gamma(self.tau_shape, self.tau_scale, size=n)
        xi = self._xi_from(tau, gen.standard_normal((n, self.dim)))
        return CycleBatch(tau=tau, xi=xi, eta=np.max(np.abs(xi), axis=1))

    def sample_cycles_coupled(self, n: int, noise_rng: RngStream,
                              duration_rng: RngStream
                              ) -> tuple[CycleBatch, np.ndarray, np.ndarray]:
        """Cycles together with the standard normal innovations behind them.

        Returns (batch, g, g_dur): ``g`` (n, d) generates the noise (so the
        increment-side driver is exact by construction) and ``g_dur`` (n,)
        generates the duration through the inverse CDF (the duration-side
        driver couples through a common quantile).
        """
        g_dur = duration_rng.generator().standard_normal(n)
        tau = self.tau_from_gaussian(g_dur)
        g = noise_rng.generator().standard_normal((n, self.dim))
        xi = self._xi_from(tau, g)
        batch = CycleBatch(tau=tau, xi=xi, eta=np.max(np.abs(xi), axis=1))
        return batch, g, g_dur

    def sample_path(self, n: int, rng: RngStream) -> RegenerativePath:
        batch = self.sample_cycles(n, rng)
        return single_event_path(batch.tau, batch.xi, self.interpolation)

    def true_greeks(self, p: float) -> Greeks:
        self._check_p(p)
        var_tau = self.var_tau
        var_xi = self.noise_cov + np.outer(self.beta, self.beta) * var_tau
        return Greeks.from_moments(
            mu=self.mu, mean_xi=self.kappa * self.mu, var_tau=var_tau,
            var_xi=var_xi, cov_xi_tau=self.beta * var_tau, p=p)

    def laplace_tau(self, b: float) -> float:
        return (1.0 + self.tau_scale * b) ** (-self.tau_shape)


@dataclass(frozen=True, eq=False)
class ParetoCycleModel(Model):
    """Heavy-tailed cycles: tau = 1 + X with X Pareto(tail_index), xi = tau.

    P(tau > 1 + x) = x^(-tail_index) for x >= 1, so tau >= 2 and moments of
    order p exist exactly for p < tail_index.  Because the increment equals
    the duration, the residual and asymptotic covariances vanish exactly.
    """

    family: ClassVar[str] = "pareto-cycle"
    interpolation: ClassVar[str] = PIECEWISE_CONSTANT
    coupling_modes: ClassVar[tuple[str, ...]] = (QUANTILE_1D, INDEPENDENT)

    tail_index: float = 3.5

    def __post_init__(self) -> None:
        if not self.tail_index > 2:
            raise InvalidParameterError(
                f"tail_index must exceed 2 for finite duration variance, "
                f"got {self.tail_index}")

    @property
    def d(self) -> int:
        return 1

    @property
    def p_max(self) -> float:
        return float(self.tail_index)

    def tau_from_gaussian(self, g: np.ndarray) -> np.ndarray:
        """tau = 1 + Phi(-g)^(-1/tail_index), increasing in g."""
        g = np.asarray(g, dtype=float)
        return 1.0 + ndtr(-g) ** (-1.0 / self.tail_index)

    def increments_from(self, tau: np.ndarray, g: np.ndarray) -> np.ndarray:
        """The increment equals the duration; the noise innovation is unused
        (the residual is degenerate for this family)."""
        del g
        return np.asarray(tau, dtype=float).copy()

    def sample_cycles(self, n: int, rng: RngStream) -> CycleBatch:
        tau = 2.0 + rng.generator().pareto(self.tail_index, size=n)
        return CycleBatch(tau=tau, xi=tau, eta=tau)

    def sample_path(self, n: int, rng: RngStream) -> RegenerativePath:
        batch = self.sample_cycles(n, rng)
        return single_event_path(batch.tau, batch.xi, self.interpolation)

    def true_greeks(self, p: float) -> Greeks:
        self._check_p(p)
        th = self.tail_index
        mean_x = th / (th - 1.0)
        var_tau = th / (th - 2.0) - mean_x * mean_x
        var = np.array([[var_tau]])
        return Greeks.from_moments(mu=1.0 + mean_x, mean_xi=1.0 + mean_x,
                                   var_tau=var_tau, var_xi=var,
                                   cov_xi_tau=np.array([var_tau]), p=p)

    def laplace_tau(self, b: float) -> float:
        b = float(b)
        if b == 0.0:
            return 1.0
        th = self.tail_index
        val, _ = quad(lambda x: math.exp(-b * (1.0 + x)) * th * x ** (-th - 1.0),
                      1.0, np.inf)
        return float(val)

    def eta_moment(self, p: float) -> float | None:
        if p >= self.tail_index:
            return None
        th = self.tail_index
        val, _ = quad(lambda x: (1.0 + x) ** p * th * x ** (-th - 1.0),
                      1.0, np.inf)
        return float(val)


# Fixed stream index for the mm1 moment oracle; deliberately far from the
# experiment stream ranges so the oracle never shares draws with them.
_MM1_ORACLE_STREAM = 2 ** 62 + 11
_MM1_ORACLE_CYCLES = 10 ** 7
_mm1_oracle_cache: dict[tuple, Greeks] = {}


@dataclass(frozen=True, eq=False)
class MM1BusyCycleModel(Model):
    """Idle period plus M/M/1 busy period; the increment counts departures.

    A cycle starts with the system empty: an Exp(arrival_rate) idle period,
    then a busy period during which events occur at rate
    ``arrival_rate + service_rate`` and each event is an arrival with
    probability ``arrival_rate / (arrival_rate + service_rate)``.  The path
    steps up by one at every departure, so cycles have a genuine intra-cycle
    trajectory and the cycle maximum equals the departure count.  Second
    moments have no convenient closed form; ``reference_greeks`` runs a
    fixed-seed simulation oracle instead.
    """

    family: ClassVar[str] = "mm1-busy-cycle"
    interpolation: ClassVar[str] = PIECEWISE_CONSTANT

    arrival_rate: float = 0.5
    service_rate: float = 1.0

    def __post_init__(self) -> None:
        if not (0 < self.arrival_rate < self.service_rate):
            raise InvalidParameterError(
                f"need 0 < arrival_rate < service_rate for stability, got "
                f"arrival={self.arrival_rate}, service={self.service_rate}")

    @property
    def d(self) -> int:
        return 1

    @property
    def p_max(self) -> float:
        # The busy period has a finite exponential moment, hence all
        # polynomial moments; so does the departure count.
        return math.inf

    @property
    def mu(self) -> float:
        return 1.0 / self.arrival_rate + 1.0 / (self.service_rate - self.arrival_rate)

    def sample_cycles(self, n: int, rng: RngStream) -> CycleBatch:
        """Vectorized batch: walk all busy periods forward in lockstep rounds.

        Each round advances every still-busy cycle by one event; the queue
        length does a +/-1 random walk from 1 down to 0.  Total event counts
        then determine the busy duration as an Erlang sum.
        """
        gen = rng.generator()
        total_rate = self.arrival_rate + self.service_rate
        p_up = self.arrival_rate / total_rate
        height = np.ones(n, dtype=np.int64)
        steps = np.zeros(n, dtype=np.int64)
        departures = np.zeros(n, dtype=np.int64)
        active = np.arange(n)
        while active.size:
            up = gen.random(active.size) < p_up
            height[active] += np.where(up, 1, -1)
            steps[active] += 1
            departures[active] += ~up
            active = active[height[active] > 0]
        busy = gen.gamma(shape=steps.astype(float)) / total_rate
        idle = gen.exponential(1.0 / self.arrival_rate, size=n)
        tau = idle + busy
        xi = departures.astype(float)
        return CycleBatch(tau=tau, xi=xi, eta=xi)

    def sample_path(self, n: int, rng: RngStream) -> RegenerativePath:
        """Full trajectories: one event per departure, cycle by cycle."""
        gen = rng.generator()
        total_rate = self.arrival_rate + self.service_rate
        p_up = self.arrival_rate / total_rate
        cycles = []
        for _ in range(n):
            t = gen.exponential(1.0 / self.arrival_rate)
            height = 1
            offsets, values = [], []
            count = 0
            while height > 0:
                t += gen.exponential(1.0 / total_rate)
                if gen.random() < p_up:
                    height += 1
                else:
                    height -= 1
                    count += 1
                    offsets.append(t)
                    values.append(float(count))
            cycles.append(CyclePath(
                tau=offsets[-1], xi=np.array([values[-1]]),
                offsets=np.array(offsets), values=np.array(values)[:, None],
                interpolation=self.interpolation))
        return RegenerativePath.from_cycles(cycles)

    def laplace_tau(self, b: float) -> float:
        """Closed form: Exp idle transform times the busy-period transform."""
        b = float(b)
        la, mu_s = self.arrival_rate, self.service_rate
        s = mu_s + la + b
        busy = (s - math.sqrt(s * s - 4.0 * la * mu_s)) / (2.0 * la)
        return la / (la + b) * busy


def _mm1_reference_greeks(model: MM1BusyCycleModel, p: float) -> Greeks:
    """Moment oracle: 10^7 cycles on a fixed, dedicated stream, chunked."""
    key = (model.arrival_rate, model.service_rate, float(p))
    if key in _mm1_oracle_cache:
        return _mm1_oracle_cache[key]
    chunk, total = 10 ** 6, _MM1_ORACLE_CYCLES
    s_tau = s_tau2 = 0.0
    s_xi = s_xi2 = s_xitau = 0.0
    for i in range(total // chunk):
        stream = RngStream(0, _MM1_ORACLE_STREAM + i)
        batch = model.sample_cycles(chunk, stream)
        tau, xi = batch.tau, batch.xi[:, 0]
        s_tau += tau.sum()
        s_tau2 += (tau * tau).sum()
        s_xi += xi.sum()
        s_xi2 += (xi * xi).sum()
        s_xitau += (xi * tau).sum()
    n = float(total)
    mu = s_tau / n
    mean_xi = s_xi / n
    greeks = Greeks.from_moments(
        mu=mu, mean_xi=np.array([mean_xi]),
        var_tau=s_tau2 / n - mu * mu,
        var_xi=np.array([[s_xi2 / n - mean_xi * mean_xi]]),
        cov_xi_tau=np.array([s_xitau / n - mean_xi * mu]), p=p)
    _mm1_oracle_cache[key] = greeks
    return greeks


@dataclass(frozen=True, eq=False)
class CompoundJumpModel(Model):
    """Exponential cycles carrying Gaussian jumps at Poisson times, d <= 3.

    tau ~ Exp(cycle_rate); given tau, jumps arrive at rate jump_rate and each
    jump is Normal(jump_mean, jump_cov).  The increment is the jump sum, so
    the drift and regression coefficients coincide and the centered pair is
    uncorrelated beyond the duration itself.
    """

    family: ClassVar[str] = "compound-jump"
    interpolation: ClassVar[str] = PIECEWISE_CONSTANT

    cycle_rate: float = 1.0
    jump_rate: float = 1.0
    jump_mean: np.ndarray = 0.0
    jump_cov: np.ndarray | None = None
    dim: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= 3:
            raise InvalidParameterError(
                f"compound-jump supports dimensions 1..3, got {self.dim}")
        if not (self.cycle_rate > 0 and self.jump_rate > 0):
            raise InvalidParameterError(
                f"rates must be positive, got cycle_rate={self.cycle_rate}, "
                f"jump_rate={self.jump_rate}")
        mean = np.broadcast_to(np.asarray(self.jump_mean, dtype=float),
                               (self.dim,)).copy()
        cov = np.eye(self.dim) if self.jump_cov is None \
            else np.asarray(self.jump_cov, dtype=float)
        object.__setattr__(self, "jump_mean", mean)
        object.__setattr__(self, "jump_cov", cov)
        object.__setattr__(self, "_jump_root", matrix_sqrt_psd(cov))

    @property
    def d(self) -> int:
        return self.dim

    @property
    def p_max(self) -> float:
        return math.inf

    def _draw(self, n: int, gen: np.random.Generator):
        tau = gen.exponential(1.0 / self.cycle_rate, size=n)
        counts = gen.poisson(self.jump_rate * tau)
        total = int(counts.sum())
        jumps = self.jump_mean + \
            gen.standard_normal((total, self.dim)) @ self._jump_root
        return tau, counts, jumps

    def sample_cycles(self, n: int, rng: RngStream) -> CycleBatch:
        tau, counts, jumps = self._draw(n, rng.generator())
        starts = np.concatenate([[0], np.cumsum(counts)])
        running = np.cumsum(jumps, axis=0)
        base = np.concatenate([np.zeros((1, self.dim)), running])
        xi = base[starts[1:]] - base[starts[:-1]]
        eta = np.zeros(n)
        nonempty = counts > 0
        if np.any(nonempty):
            rel = np.max(np.abs(running - np.repeat(
                base[starts[:-1]], counts, axis=0)), axis=1)
            eta[nonempty] = np.maximum.reduceat(
                rel, starts[:-1][nonempty])
        return CycleBatch(tau=tau, xi=xi, eta=eta)

    def sample_path(self, n: int, rng: RngStream) -> RegenerativePath:
        """Jump events plus a flat terminal event closing each cycle."""
        gen = rng.generator()
        tau, counts, jumps = self._draw(n, gen)
        starts = np.concatenate([[0], np.cumsum(counts)])
        offsets = [np.sort(gen.random(int(c))) * t for c, t in zip(counts, tau)]
        cycles = []
        for k in range(n):
            lo, hi = starts[k], starts[k + 1]
            vals = np.cumsum(jumps[lo:hi], axis=0)
            xi = vals[-1] if hi > lo else np.zeros(self.dim)
            offs = np.concatenate([offsets[k], [tau[k]]])
            vals = np.concatenate([vals, [xi]]) if hi > lo else xi[None, :]
            cycles.append(CyclePath(tau=float(tau[k]), xi=xi, offsets=offs,
                                    values=vals,
                                    interpolation=self.interpolation))
        return RegenerativePath.from_cycles(cycles)

    def true_greeks(self, p: float) -> Greeks:
        self._check_p(p)
        mu = 1.0 / self.cycle_rate
        var_tau = mu * mu
        m, nu = self.jump_mean, self.jump_rate
        mm = np.outer(m, m)
        var_xi = nu * mu * (self.jump_cov + mm) + nu * nu * mm * var_tau
        return Greeks.from_moments(
            mu=mu, mean_xi=nu * mu * m, var_tau=var_tau, var_xi=var_xi,
            cov_xi_tau=nu * m * var_tau, p=p)

    def laplace_tau(self, b: float) -> float:
        return self.cycle_rate / (self.cycle_rate + float(b))


# -- module-level operations ------------------------------------------------


def sample_cycle(model: Model, rng: RngStream) -> CyclePath:
    """Draw one cycle with its trajectory."""
    return model.sample_path(1, rng).cycle(0)


def true_greeks(model: Model, p: float) -> Greeks:
    """Closed-form parameters; raises where the family has none."""
    return model.true_greeks(p)


def reference_greeks(model: Model, p: float) -> Greeks:
    """Best available ground truth: closed form, or the simulation oracle."""
    if isinstance(model, MM1BusyCycleModel):
        return _mm1_reference_greeks(model, p)
    return model.true_greeks(p)


def eta_moment(model: Model, p: float, n: int = 200_000,
               rng: RngStream | None = None) -> float:
    """E eta^p: closed form when the family has one, else a plug-in estimate."""
    closed = model.eta_moment(p)
    if closed is not None:
        return closed
    if rng is None:
        rng = RngStream(0, 2 ** 62 + 211)
    batch = model.sample_cycles(n, rng)
    return float(np.mean(batch.eta ** p))
