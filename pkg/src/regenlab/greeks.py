"""Process parameters ("greeks") of a regenerative cumulative process.

From the first and second moments of one cycle (duration tau, increment xi)
the library derives every constant the coupling pipeline needs:

    mu      = E tau
    kappa   = E xi / mu                       (long-run drift per unit time)
    beta    = cov(xi, tau) / Var tau          (regression of xi on tau)
    v2      = Var(xi - beta tau)              (residual covariance)
    alpha   = beta - kappa
    gamma   = Var tau / mu,   lam = mu^2 / Var tau   (so gamma * lam = mu)
    sigma2  = Var(xi - kappa tau) / mu        (asymptotic covariance rate)
    sigma   = psd square root of sigma2,  sigma_pinv = its pseudo-inverse

All derived fields come from a single moment routine, which keeps the exact
identity  mu * sigma2 = v2 + Var(tau) * alpha alpha^T  at floating precision
for estimated moments as well as for closed-form ones.

Eigenwork is done by a cyclic Jacobi sweep: the dimensions here are tiny
(d <= 8), the iteration is deterministic, and it converges to machine
precision in a handful of sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import CyclePath

_SQRT_CLAMP_REL = 1e-12   # eigenvalues below this (relative) are treated as 0
_PINV_ZERO_REL = 1e-10    # pseudo-inverse zeroing threshold (relative)
_SYMMETRY_REL = 1e-10


class NotSymmetricError(ValueError):
    """Matrix argument is not symmetric within tolerance."""


class IndefiniteError(ValueError):
    """Matrix argument has a meaningfully negative eigenvalue."""


class DegenerateTauError(ValueError):
    """Cycle durations carry no variance; the pipeline requires Var(tau) > 0."""


class InsufficientDataError(ValueError):
    """Too few cycles to estimate second moments."""


class GreeksUnavailableError(ValueError):
    """No closed-form moments for this model family."""


def jacobi_eigh(matrix: np.ndarray, max_sweeps: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with matrix == V @ diag(w) @ V.T to machine precision and
    eigenvalues sorted ascending.  Deterministic; intended for d <= 8.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    v = np.eye(n)
    if n == 1:
        return a[0].copy(), v
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= 1e-15 * norm:
            break
        for i in range(n - 1):
            for j in range(i + 1, n):
                if abs(a[i, j]) <= 1e-18 * norm:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * a[i, j])
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_i, rot_j = a[:, i].copy(), a[:, j].copy()
                a[:, i] = c * rot_i - s * rot_j
                a[:, j] = s * rot_i + c * rot_j
                row_i, row_j = a[i, :].copy(), a[j, :].copy()
                a[i, :] = c * row_i - s * row_j
                a[j, :] = s * row_i + c * row_j
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _require_symmetric(matrix: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetricError(f"{what} must be a square matrix, got shape {m.shape}")
    scale = float(np.max(np.abs(m), initial=0.0))
    if scale and float(np.max(np.abs(m - m.T))) > _SYMMETRY_REL * scale:
        raise NotSymmetricError(f"{what} is not symmetric within {_SYMMETRY_REL:g} relative")
    return 0.5 * (m + m.T)


def matrix_sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root R with R @ R == matrix.

    Eigenvalues within 1e-12 (relative) of zero are clamped to exactly zero,
    so exact rank deficiency survives the round trip; a genuinely negative
    eigenvalue raises IndefiniteError.
    """
    m = _require_symmetric(matrix, "matrix_sqrt_psd argument")
    w, vecs = jacobi_eigh(m)
    top = float(w[-1]) if w.size else 0.0
    if top <= 0.0:
        if w.size and w[0] < -_SQRT_CLAMP_REL * max(1.0, abs(top)):
            raise IndefiniteError(f"eigenvalue {w[0]:g} is negative")
        return np.zeros_like(m)
    if w[0] < -_SQRT_CLAMP_REL * top:
        raise IndefiniteError(f"eigenvalue {w[0]:g} below -{_SQRT_CLAMP_REL:g} * max")
    w = np.where(w < _SQRT_CLAMP_REL * top, 0.0, w)
    root = (vecs * np.sqrt(w)) @ vecs.T
    return 0.5 * (root + root.T)


def pseudo_inverse(matrix: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric PSD matrix.

    Eigenvalues below 1e-10 * (max eigenvalue) are treated as exactly zero;
    the zero matrix maps to the zero matrix.
    """
    m = _require_symmetric(matrix, "pseudo_inverse argument")
    w, vecs = jacobi_eigh(m)
    top = float(w[-1]) if w.size else 0.0
    if top <= 0.0:
        return np.zeros_like(m)
    if w[0] < -_PINV_ZERO_REL * top:
        raise IndefiniteError(f"eigenvalue {w[0]:g} is negative")
    inv = np.where(w > _PINV_ZERO_REL * top, 1.0 / np.where(w > 0, w, 1.0), 0.0)
    out = (vecs * inv) @ vecs.T
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class Greeks:
    """Derived parameters of one cycle distribution; see the module docstring."""

    mu: float
    kappa: np.ndarray
    var_tau: float
    var_xi: np.ndarray
    cov_xi_tau: np.ndarray
    beta: np.ndarray
    v2: np.ndarray
    v: np.ndarray
    gamma: float
    lam: float
    alpha: np.ndarray
    sigma2: np.ndarray
    sigma: np.ndarray
    sigma_pinv: np.ndarray
    p: float

    @property
    def d(self) -> int:
        return self.kappa.size

    @classmethod
    def from_moments(cls, mu: float, mean_xi: np.ndarray, var_tau: float,
                     var_xi: np.ndarray, cov_xi_tau: np.ndarray,
                     p: float) -> "Greeks":
        """Derive every field from raw cycle moments.

        Both closed-form parameterizations and plug-in sample moments go
        through here, so the algebraic identities linking the fields hold to
        floating precision in either case.
        """
        mu = float(mu)
        var_tau = float(var_tau)
        mean_xi = np.atleast_1d(np.asarray(mean_xi, dtype=float))
        cov_xi_tau = np.atleast_1d(np.asarray(cov_xi_tau, dtype=float))
        var_xi = np.asarray(var_xi, dtype=float)
        if var_xi.ndim == 0:
            var_xi = var_xi.reshape(1, 1)
        if mu <= 0 or not np.isfinite(mu):
            raise ValueError(f"mean cycle duration must be positive, got {mu}")
        if p <= 2:
            raise ValueError(f"moment order p must exceed 2, got {p}")
        if not np.isfinite(var_tau) or var_tau <= 0:
            raise DegenerateTauError(
                f"Var(tau) = {var_tau} but the pipeline requires Var(tau) > 0")
        kappa = mean_xi / mu
        beta = cov_xi_tau / var_tau
        outer_bc = np.outer(beta, cov_xi_tau)
        v2 = var_xi - outer_bc - outer_bc.T + np.outer(beta, beta) * var_tau
        v2 = 0.5 * (v2 + v2.T)
        outer_kc = np.outer(kappa, cov_xi_tau)
        sigma2 = (var_xi - outer_kc - outer_kc.T
                  + np.outer(kappa, kappa) * var_tau) / mu
        sigma2 = 0.5 * (sigma2 + sigma2.T)
        sigma = matrix_sqrt_psd(sigma2)
        return cls(
            mu=mu, kappa=kappa, var_tau=var_tau, var_xi=0.5 * (var_xi + var_xi.T),
            cov_xi_tau=cov_xi_tau, beta=beta, v2=v2, v=matrix_sqrt_psd(v2),
            gamma=var_tau / mu, lam=mu * mu / var_tau, alpha=beta - kappa,
            sigma2=sigma2, sigma=sigma, sigma_pinv=pseudo_inverse(sigma), p=float(p),
        )


def _cycles_to_arrays(cycles) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(cycles, tuple) and len(cycles) == 2:
        tau, xi = cycles
    elif hasattr(cycles, "tau") and hasattr(cycles, "xi"):
        tau, xi = cycles.tau, cycles.xi
    else:
        seq = list(cycles)
        if seq and isinstance(seq[0], CyclePath):
            tau = np.array([c.tau for c in seq])
            xi = np.stack([c.xi for c in seq])
        else:
            raise TypeError(f"cannot interpret cycle container {type(cycles)!r}")
    tau = np.asarray(tau, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1:
        xi = xi[:, None]
    return tau, xi


def estimate_greeks(cycles, p: float) -> Greeks:
    """Plug-in (1/n) moment estimates from observed cycles.

    Accepts a CycleBatch, a list of CyclePath, or a (tau, xi) array pair.
    Raises DegenerateTauError when the sample durations carry no variance
    and InsufficientDataError for fewer than 2 cycles.
    """
    tau, xi = _cycles_to_arrays(cycles)
    n = tau.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 cycles, got {n}")
    mu = float(np.mean(tau))
    mean_xi = xi.mean(axis=0)
    dtau = tau - mu
    var_tau = float(np.mean(dtau * dtau))
    if var_tau <= 0:
        raise DegenerateTauError(
            "sample Var(tau) is zero; durations are degenerate")
    dxi = xi - mean_xi
    var_xi = (dxi.T @ dxi) / n
    cov_xi_tau = dxi.T @ dtau / n
    return Greeks.from_moments(mu, mean_xi, var_tau, var_xi, cov_xi_tau, p)


def check_greek_identities(greeks: Greeks) -> dict[str, float]:
    """Max-norm residuals of the exact identities between derived fields.

    Keys:
        decomposition : mu sigma2 - v2 - var_tau alpha alpha^T
        gamma_lambda  : gamma * lam - mu
        sqrt_sigma    : sigma sigma - sigma2
        sqrt_v        : v v - v2
        pinv          : sigma sigma+ sigma - sigma
        range_v       : sigma sigma+ v - v
        range_alpha   : sigma sigma+ alpha - alpha
    """
    g = greeks
    proj = g.sigma @ g.sigma_pinv
    return {
        "decomposition": float(np.max(np.abs(
            g.mu * g.sigma2 - g.v2 - g.var_tau * np.outer(g.alpha, g.alpha)))),
        "gamma_lambda": abs(g.gamma * g.lam - g.mu),
        "sqrt_sigma": float(np.max(np.abs(g.sigma @ g.sigma - g.sigma2))),
        "sqrt_v": float(np.max(np.abs(g.v @ g.v - g.v2))),
        "pinv": float(np.max(np.abs(proj @ g.sigma - g.sigma))),
        "range_v": float(np.max(np.abs(proj @ g.v - g.v))),
        "range_alpha": float(np.max(np.abs(proj @ g.alpha - g.alpha))),
    }
