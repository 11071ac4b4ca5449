"""Fading, pointing error and SNR statistics for the direct and O-RIS links."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from importlib import resources
from typing import Sequence, Union

import numpy as np
from scipy import special as sc

from .specfun import G, meijer_g, meijer_g_eval

WATER_TYPES = {"pure_sea": 0.056, "clear_ocean": 0.151, "coastal_ocean": 0.305}
XI_SQ_CAP = 1e6


# ---------------------------------------------------------------- models


@dataclass(frozen=True)
class DirectGamma:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class CascadedGG:
    A: float
    B: float
    N_elements: int = 1

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise ValueError("A and B must be positive")
        if self.N_elements < 1:
            raise ValueError("N_elements must be >= 1")

    @classmethod
    def from_hops(cls, alpha: float, beta: float, N: int) -> "CascadedGG":
        return cls(N * alpha, N * beta, N)


@dataclass(frozen=True)
class MEGG:
    omega: float
    lam: float
    a: float
    b: float
    c: float
    N_elements: int = 1

    def __post_init__(self):
        if not 0 <= self.omega <= 1:
            raise ValueError("omega must lie in [0, 1]")
        if not (self.lam > 0 and self.a > 0 and self.b > 0 and self.c > 0):
            raise ValueError("lambda, a, b, c must be positive")
        if self.N_elements < 1:
            raise ValueError("N_elements must be >= 1")

    def moment(self, k: float) -> float:
        """E[X^k] of the exponential / generalized-Gamma mixture."""
        expo = self.lam**k * math.gamma(1 + k)
        gg = self.b**k * math.exp(sc.gammaln(self.a + k / self.c) - sc.gammaln(self.a))
        return self.omega * expo + (1 - self.omega) * gg

    @property
    def scintillation(self) -> float:
        m1 = self.moment(1)
        return self.moment(2) / m1**2 - 1


FadingModel = Union[DirectGamma, CascadedGG, MEGG]


@dataclass(frozen=True)
class PointingError:
    xi_sq: float
    A0: float

    def __post_init__(self):
        if not self.xi_sq > 0:
            raise ValueError("xi_sq must be positive")
        if not 0 < self.A0 <= 1:
            raise ValueError("A0 must lie in (0, 1]")

    def moment(self, k: float) -> float:
        """E[h_p^k] for the density xi^2 h^(xi^2-1) / A0^xi^2 on (0, A0]."""
        return self.xi_sq * self.A0**k / (self.xi_sq + k)


@dataclass(frozen=True)
class LinkGeometry:
    L_sr: float = 95.0  # m
    L_rd: float = 40.0  # m
    L_D: float = 120.0  # m
    c_att: float = 0.15  # 1/m

    def __post_init__(self):
        if min(self.L_sr, self.L_rd, self.L_D) <= 0:
            raise ValueError("path lengths must be positive")
        if not self.c_att >= 0:
            raise ValueError("attenuation must be non-negative")

    @classmethod
    def for_water(cls, water_type: str, **kw) -> "LinkGeometry":
        return cls(c_att=WATER_TYPES[water_type], **kw)


def db_to_lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(x)


def path_loss(geom: LinkGeometry, path: str = "direct") -> float:
    if path == "direct":
        return math.exp(-geom.c_att * geom.L_D)
    if path == "cascaded":
        return math.exp(-geom.c_att * (geom.L_sr + geom.L_rd))
    raise ValueError(f"unknown path {path!r}")


@dataclass(frozen=True)
class SnrContext:
    P_t_db: float  # dBW
    sigma_n2_dbm: float
    h_l: float

    @property
    def gamma_bar(self) -> float:
        g = 10 ** ((self.P_t_db + 30.0 - self.sigma_n2_dbm) / 10) * self.h_l**2
        if not g > 0:
            raise ValueError("mean SNR must be positive")
        return g


# ---------------------------------------------------------------- aggregation


def aggregate_gg(alpha: float, beta: float, N: int, correlation: Sequence[Sequence[float]] | None = None):
    """Moment-matched shapes for a sum of N Gamma-Gamma variates.

    Returns (A, B, Omega) with Omega = N the mean of the sum (unit-mean elements).
    """
    if not (alpha > 0 and beta > 0) or N < 1:
        raise ValueError("need alpha, beta > 0 and N >= 1")
    if correlation is None:
        c = float(N)
    else:
        rho = np.asarray(correlation, dtype=float)
        if rho.shape != (N, N) or np.any(rho < 0) or np.any(rho > 1) or not np.allclose(rho, rho.T):
            raise ValueError("correlation must be a symmetric N x N matrix with entries in [0, 1]")
        off = float(np.sum(np.triu(rho, 1)))
        c = N / (1 + (2.0 / N) * off)
    return c * alpha, c * beta, float(N)


# ---------------------------------------------------------------- densities


def pdf_fading_gg(h, A: float, B: float, Omega: float = 1.0):
    """Gamma-Gamma density with mean Omega, evaluated in log space."""
    h = np.asarray(h, dtype=float)
    ab = A * B / Omega
    x = 2 * np.sqrt(ab * h)
    with np.errstate(divide="ignore"):
        logf = (math.log(2) + 0.5 * (A + B) * math.log(ab) - sc.gammaln(A) - sc.gammaln(B)
                + (0.5 * (A + B) - 1) * np.log(h) + np.log(sc.kve(A - B, x)) - x)
    out = np.where(h > 0, np.exp(logf), 0.0)
    return out if out.ndim else float(out)


def pdf_pointing(hp, pe: PointingError):
    hp = np.asarray(hp, dtype=float)
    inside = (hp > 0) & (hp <= pe.A0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = pe.xi_sq / pe.A0**pe.xi_sq * hp ** (pe.xi_sq - 1)
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def pdf_snr_direct(gamma: float, alpha: float, xi_sq: float, A0: float, gamma_bar: float) -> float:
    if not gamma > 0:
        return 0.0
    s = alpha / (A0 * math.sqrt(gamma_bar))
    g = meijer_g_eval(G(2, 0, [1.0], [0.0, alpha - xi_sq]), s * math.sqrt(gamma))
    if g.sign == 0:
        return 0.0
    log_pref = xi_sq * math.log(s) + math.log(xi_sq / 2) - sc.gammaln(alpha) + (xi_sq / 2 - 1) * math.log(gamma)
    return g.sign * math.exp(log_pref + g.log_abs)


def pdf_snr_oris(gamma: float, A: float, B: float, xi_sq: float, A0: float, N: int, gamma_bar: float) -> float:
    if not gamma > 0:
        return 0.0
    arg = A * B / (N * A0) * math.sqrt(gamma / gamma_bar)
    g = meijer_g_eval(G(3, 0, [xi_sq], [xi_sq - 1, A - 1, B - 1]), arg)
    if g.sign == 0:
        return 0.0
    log_pref = (math.log(A * B * xi_sq / (2 * N * A0)) - sc.gammaln(A) - sc.gammaln(B)
                - 0.5 * math.log(gamma_bar * gamma))
    return g.sign * math.exp(log_pref + g.log_abs)


# ---------------------------------------------------------------- pointing model


def pointing_from_jitter(D_R: float, w0: float, wavelength: float, L: float,
                         sigma_s: float | None = None,
                         sigma_theta: float | None = None, sigma_phi: float | None = None,
                         L_sr: float | None = None, L_rd: float | None = None) -> PointingError:
    """Zero-boresight misalignment model.

    The displacement jitter is either ``sigma_s`` (direct) or the angular jitters
    projected over the two O-RIS hops.  ``L`` is the propagation distance used
    for the Gaussian beam footprint at the receiver.
    """
    if sigma_s is None:
        if None in (sigma_theta, sigma_phi, L_sr, L_rd):
            raise ValueError("give sigma_s or (sigma_theta, sigma_phi, L_sr, L_rd)")
        sigma = math.hypot(sigma_theta * L_sr, sigma_phi * L_rd)
    else:
        sigma = sigma_s
    if min(D_R, w0, wavelength, L) <= 0 or sigma < 0:
        raise ValueError("pointing inputs must be positive")
    w_z = w0 * math.sqrt(1 + (wavelength * L / (math.pi * w0**2)) ** 2)
    v = math.sqrt(math.pi / 2) * (D_R / 2) / w_z
    A0 = math.erf(v) ** 2
    # w_eq^2 = w_z^2 sqrt(pi) erf(v) / (2 v exp(-v^2)); exp(v^2) kept in log form
    log_weq2 = (2 * math.log(w_z) + 0.5 * math.log(math.pi) + math.log(math.erf(v))
                - math.log(2 * v) + v * v)
    if sigma == 0:
        warnings.warn("zero jitter: xi^2 capped", RuntimeWarning, stacklevel=2)
        return PointingError(XI_SQ_CAP, A0)
    log_xi_sq = log_weq2 - 2 * math.log(2 * sigma)
    if log_xi_sq > math.log(XI_SQ_CAP):
        warnings.warn("xi^2 above cap; clipped", RuntimeWarning, stacklevel=2)
        return PointingError(XI_SQ_CAP, A0)
    return PointingError(math.exp(log_xi_sq), A0)


# ---------------------------------------------------------------- mEGG


def load_megg_table() -> list[dict]:
    """Rows of the packaged EGG parameter table."""
    text = resources.files("uwoc").joinpath("data/megg_table.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        bl, grad, s_meas, s_fit, w, lam, a, b, c = (float(x) for x in line.split())
        rows.append(dict(bubble_level=bl, gradient=grad, sigma2_meas=s_meas, sigma2_fit=s_fit,
                         model=MEGG(w, lam, a, b, c)))
    return rows


def megg_lookup(bubble_level: float, gradient: float, N: int = 1) -> MEGG:
    for row in load_megg_table():
        if math.isclose(row["bubble_level"], bubble_level) and math.isclose(row["gradient"], gradient):
            m = row["model"]
            return MEGG(m.omega, m.lam, m.a, m.b, m.c, N)
    raise KeyError(f"no EGG row for BL={bubble_level}, gradient={gradient}")


def _megg_gamma_params(model: MEGG, pointing: PointingError | None):
    """(E[Y], m_u, w_u) of the Gamma law approximating the N-element sum."""
    k1 = model.moment(1)
    k2 = model.moment(2)
    if pointing is not None:
        k1 *= pointing.moment(1)
        k2 *= pointing.moment(2)
    var = k2 - k1**2
    EZ = model.N_elements * k1
    VZ = model.N_elements * var
    return k1, EZ**2 / VZ, VZ / EZ


def megg_pdf(gamma: float, model: MEGG, r: int, mu_r: float, pointing: PointingError | None = None) -> float:
    if r not in (1, 2):
        raise ValueError("r must be 1 (HD) or 2 (IM/DD)")
    if not gamma > 0:
        return 0.0
    E, m, w = _megg_gamma_params(model, pointing)
    log_xi1 = m * math.log(E) - math.log(r) - sc.gammaln(m) - m * math.log(w) - (m / r) * math.log(mu_r)
    xi2 = E / (w * mu_r ** (1 / r))
    return math.exp(log_xi1 + (m / r - 1) * math.log(gamma) - xi2 * gamma ** (1 / r))


def megg_cdf(gamma: float, model: MEGG, r: int, mu_r: float, pointing: PointingError | None = None) -> float:
    if r not in (1, 2):
        raise ValueError("r must be 1 (HD) or 2 (IM/DD)")
    if not gamma > 0:
        return 0.0
    E, m, w = _megg_gamma_params(model, pointing)
    log_xi3 = (m * math.log(E) - 0.5 * math.log(r) - 0.5 * (r - 1) * math.log(2 * math.pi)
               - sc.gammaln(m) - m * math.log(w) - (m / r) * math.log(mu_r))
    xi4 = E**r / (w**r * mu_r * r**r)
    b = [j / r for j in range(r)] + [-m / r]
    g = meijer_g_eval(G(r, 1, [1 - m / r], b), xi4 * gamma)
    return g.sign * math.exp(log_xi3 + (m / r) * math.log(gamma) + g.log_abs)
