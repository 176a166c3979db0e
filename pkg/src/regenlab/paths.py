"""Cycle, path and counting-process primitives.

A cumulative process is represented as a concatenation of i.i.d. regeneration
cycles.  Each cycle records its duration ``tau``, its total increment ``xi``
(a length-``d`` vector) and the trajectory inside the cycle as an ordered
event list.  Two accrual schemes are supported:

* ``piecewise-constant`` -- the path jumps to each event value and holds;
* ``piecewise-linear``   -- the path interpolates linearly between events.

Both schemes attain their within-cycle supremum at event points, so cycle
maxima are exact.  The last event of every cycle sits at offset ``tau`` with
value ``xi``, which makes path evaluation at renewal times reproduce the
prefix sums of the ``xi`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIECEWISE_CONSTANT = "piecewise-constant"
PIECEWISE_LINEAR = "piecewise-linear"
_INTERPOLATIONS = (PIECEWISE_CONSTANT, PIECEWISE_LINEAR)


class HorizonExceededError(ValueError):
    """Evaluation requested beyond the simulated horizon."""


def _as_matrix(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values


@dataclass(frozen=True)
class CyclePath:
    """One regeneration cycle.

    Attributes:
        tau: cycle duration, > 0.
        xi: total increment over the cycle, shape (d,).
        offsets: event times relative to the cycle start, strictly increasing
            in (0, tau]; the final offset equals tau.
        values: cumulative increment at each event relative to the cycle
            start, shape (n_events, d); the final value equals xi.
        interpolation: accrual scheme between events.
    """

    tau: float
    xi: np.ndarray
    offsets: np.ndarray
    values: np.ndarray
    interpolation: str = PIECEWISE_CONSTANT

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", np.atleast_1d(np.asarray(self.xi, dtype=float)))
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=float))
        object.__setattr__(self, "values", _as_matrix(self.values))
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise ValueError(f"cycle duration must be positive and finite, got {self.tau}")
        if self.interpolation not in _INTERPOLATIONS:
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.offsets.ndim != 1 or self.offsets.size == 0:
            raise ValueError("a cycle needs at least one event (its endpoint)")
        if self.values.shape != (self.offsets.size, self.xi.size):
            raise ValueError(
                f"event values shape {self.values.shape} does not match "
                f"{self.offsets.size} events in dimension {self.xi.size}")
        if np.any(np.diff(self.offsets) <= 0) or self.offsets[0] <= 0:
            raise ValueError("event offsets must be strictly increasing within (0, tau]")
        scale = max(1.0, abs(self.tau))
        if abs(self.offsets[-1] - self.tau) > 1e-9 * scale:
            raise ValueError(
                f"last event offset {self.offsets[-1]} must equal tau {self.tau}")
        vscale = 1.0 + float(np.max(np.abs(self.xi), initial=0.0))
        if np.max(np.abs(self.values[-1] - self.xi)) > 1e-9 * vscale:
            raise ValueError("last event value must equal the cycle increment xi")

    @property
    def d(self) -> int:
        return self.xi.size

    @property
    def n_events(self) -> int:
        return self.offsets.size


def cycle_max(cycle: CyclePath) -> float:
    """Supremum of the max-norm of the trajectory over the cycle.

    For both accrual schemes the supremum over a segment is attained at a
    segment endpoint, so the maximum over event values is exact.
    """
    return float(np.max(np.abs(cycle.values)))


@dataclass
class RegenerativePath:
    """A finite concatenation of cycles with fast vectorized evaluation.

    The event list is stored flattened: ``event_times`` are absolute times,
    ``event_values`` are absolute cumulative values, and
    ``cycle_event_ptr[k]:cycle_event_ptr[k+1]`` slices cycle ``k``'s events.
    """

    tau: np.ndarray
    xi: np.ndarray
    renewal_times: np.ndarray
    event_times: np.ndarray
    event_values: np.ndarray
    cycle_event_ptr: np.ndarray
    interpolation: str = PIECEWISE_CONSTANT
    _prefix_xi: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.tau = np.asarray(self.tau, dtype=float)
        self.xi = _as_matrix(self.xi)
        self.renewal_times = np.asarray(self.renewal_times, dtype=float)
        self.event_times = np.asarray(self.event_times, dtype=float)
        self.event_values = _as_matrix(self.event_values)
        self.cycle_event_ptr = np.asarray(self.cycle_event_ptr, dtype=np.int64)
        if self._prefix_xi is None:
            prefix = np.zeros((self.n_cycles + 1, self.d))
            np.cumsum(self.xi, axis=0, out=prefix[1:])
            self._prefix_xi = prefix
        if self.interpolation not in _INTERPOLATIONS:
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.renewal_times.size != self.n_cycles + 1:
            raise ValueError("renewal_times must have n_cycles + 1 entries")

    # -- structure ---------------------------------------------------------

    @property
    def d(self) -> int:
        return self.xi.shape[1]

    @property
    def n_cycles(self) -> int:
        return self.tau.size

    @property
    def horizon(self) -> float:
        return float(self.renewal_times[-1])

    @property
    def prefix_xi(self) -> np.ndarray:
        """Cumulative increments at renewal times, shape (n_cycles + 1, d)."""
        return self._prefix_xi

    @classmethod
    def from_cycles(cls, cycles: "list[CyclePath]") -> "RegenerativePath":
        if not cycles:
            raise ValueError("need at least one cycle")
        d = cycles[0].d
        interp = cycles[0].interpolation
        for c in cycles:
            if c.d != d:
                raise ValueError("all cycles must share one dimension")
            if c.interpolation != interp:
                raise ValueError("all cycles must share one interpolation scheme")
        tau = np.array([c.tau for c in cycles])
        xi = np.stack([c.xi for c in cycles])
        renewal = np.concatenate([[0.0], np.cumsum(tau)])
        prefix = np.concatenate([np.zeros((1, d)), np.cumsum(xi, axis=0)])
        counts = np.array([c.n_events for c in cycles], dtype=np.int64)
        ptr = np.concatenate([[0], np.cumsum(counts)])
        times = np.concatenate([renewal[k] + c.offsets for k, c in enumerate(cycles)])
        values = np.concatenate([prefix[k] + c.values for k, c in enumerate(cycles)])
        return cls(tau=tau, xi=xi, renewal_times=renewal, event_times=times,
                   event_values=values, cycle_event_ptr=ptr, interpolation=interp,
                   _prefix_xi=prefix)

    def cycle(self, k: int) -> CyclePath:
        """Reconstruct cycle ``k`` with offsets relative to its start."""
        lo, hi = self.cycle_event_ptr[k], self.cycle_event_ptr[k + 1]
        return CyclePath(
            tau=float(self.tau[k]),
            xi=self.xi[k],
            offsets=self.event_times[lo:hi] - self.renewal_times[k],
            values=self.event_values[lo:hi] - self._prefix_xi[k],
            interpolation=self.interpolation,
        )

    # -- evaluation --------------------------------------------------------

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        """Path value S(u) for an array of times, shape (len(u), d).

        Exact (bitwise) at event times; between events the value follows the
        accrual scheme.  Raises HorizonExceededError past the last renewal.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.size and (u.min() < 0 or u.max() > self.horizon):
            raise HorizonExceededError(
                f"evaluation times must lie in [0, {self.horizon}]")
        if self.interpolation == PIECEWISE_CONSTANT:
            idx = np.searchsorted(self.event_times, u, side="right")
            padded = np.concatenate([np.zeros((1, self.d)), self.event_values])
            return padded[idx]
        out = np.empty((u.size, self.d))
        xs = np.concatenate([[0.0], self.event_times])
        for j in range(self.d):
            ys = np.concatenate([[0.0], self.event_values[:, j]])
            out[:, j] = np.interp(u, xs, ys)
        return out

    def renewal_counts(self, t: np.ndarray) -> np.ndarray:
        """m(t) = number of completed cycles by each time in ``t``."""
        t = np.asarray(t, dtype=float)
        return np.searchsorted(self.renewal_times[1:], t, side="right")

    def eta(self) -> np.ndarray:
        """Per-cycle trajectory maxima (max-norm), shape (n_cycles,)."""
        rel = np.abs(self.event_values - np.repeat(
            self._prefix_xi[:-1], np.diff(self.cycle_event_ptr), axis=0))
        per_event = rel.max(axis=1)
        return np.maximum.reduceat(per_event, self.cycle_event_ptr[:-1])


def evaluate_path(path: RegenerativePath, u: float) -> np.ndarray:
    """S(u) as a length-d vector; see RegenerativePath.evaluate."""
    return path.evaluate(np.array([float(u)]))[0]


def renewal_count(path: RegenerativePath, t: float) -> int:
    """m(t) = max{k : T_k <= t}, the number of renewals by time t."""
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t > path.horizon:
        raise HorizonExceededError(f"t={t} exceeds simulated horizon {path.horizon}")
    return int(path.renewal_counts(np.array([t]))[0])


@dataclass(frozen=True)
class CountingPath:
    """A unit-jump counting process given by its sorted jump times."""

    jump_times: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "jump_times",
                           np.asarray(self.jump_times, dtype=float))
        if self.jump_times.ndim != 1:
            raise ValueError("jump_times must be one-dimensional")
        if self.jump_times.size:
            if self.jump_times[0] < 0 or np.any(np.diff(self.jump_times) < 0):
                raise ValueError("jump_times must be sorted and nonnegative")

    @property
    def n_jumps(self) -> int:
        return self.jump_times.size

    def count(self, u) -> np.ndarray:
        """N(u): number of jumps at or before u (right-continuous)."""
        return np.searchsorted(self.jump_times, np.asarray(u, dtype=float),
                               side="right")


def invert_counting(counting: CountingPath, level: float) -> float:
    """First passage time of the counting process to ``level``.

    Returns the time of the ceil(level)-th jump for level > 0, and 0.0 for
    level == 0.  Raises HorizonExceededError when the process never reaches
    the level within its recorded jumps.
    """
    level = float(level)
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    if level == 0:
        return 0.0
    k = int(np.ceil(level))
    if k > counting.n_jumps:
        raise HorizonExceededError(
            f"level {level} needs jump #{k} but only {counting.n_jumps} recorded")
    return float(counting.jump_times[k - 1])


# -- CSV interchange -------------------------------------------------------


def write_cycle_csv(path_or_file, tau: np.ndarray, xi: np.ndarray,
                    eta: np.ndarray) -> None:
    """Write one row per cycle: cycle_index,tau,xi_1..xi_d,eta."""
    xi = _as_matrix(xi)
    d = xi.shape[1]
    header = "cycle_index,tau," + ",".join(f"xi_{j + 1}" for j in range(d)) + ",eta"
    lines = [header]
    for k in range(len(tau)):
        cells = [str(k), repr(float(tau[k]))]
        cells += [repr(float(x)) for x in xi[k]]
        cells.append(repr(float(eta[k])))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def read_cycle_csv(path_or_file) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a cycle CSV; returns (tau, xi, eta) with xi of shape (n, d)."""
    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().splitlines()
    else:
        with open(path_or_file) as fh:
            lines = fh.read().splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError("empty cycle CSV")
    header = lines[0].split(",")
    if header[:2] != ["cycle_index", "tau"] or header[-1] != "eta":
        raise ValueError(f"unexpected cycle CSV header: {lines[0]!r}")
    d = len(header) - 3
    if d < 1 or header[2:-1] != [f"xi_{j + 1}" for j in range(d)]:
        raise ValueError(f"unexpected cycle CSV header: {lines[0]!r}")
    body = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    if body.ndim != 2 or body.shape[1] != len(header):
        raise ValueError("ragged cycle CSV body")
    return body[:, 1], body[:, 2:2 + d], body[:, -1]


def write_events_csv(path_or_file, path: RegenerativePath) -> None:
    """Write one row per intra-cycle event: cycle_index,offset,value_1..value_d."""
    d = path.d
    header = "cycle_index,offset," + ",".join(f"value_{j + 1}" for j in range(d))
    lines = [header]
    for k in range(path.n_cycles):
        lo, hi = path.cycle_event_ptr[k], path.cycle_event_ptr[k + 1]
        offs = path.event_times[lo:hi] - path.renewal_times[k]
        vals = path.event_values[lo:hi] - path.prefix_xi[k]
        for o, v in zip(offs, vals):
            cells = [str(k), repr(float(o))] + [repr(float(x)) for x in v]
            lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)
