"""Turbulence pipelines mapping ocean and beam parameters to Gamma-Gamma shapes.

Two routes are provided:

* plane-wave moderate-to-strong model: refractive-index spectrum with inner
  scale term, structure constant from a double integral, Rytov variance and
  the (alpha, beta) mapping;
* OTOPS Gaussian-beam model: Quan-Fry refractive index derivatives,
  temperature/salinity/co-spectrum composition and the log-amplitude variance
  mapping.

Lengths are meters, wavelengths are meters except inside :func:`quan_fry_index`
which consumes nanometers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .specfun import NoConvergence


class DegenerateTurbulence(ValueError):
    """Zero scintillation: the Gamma-Gamma shapes would be infinite."""


@dataclass(frozen=True)
class OceanSpectrumParams:
    epsilon: float = 0.03  # m^2 s^-3
    chi_T: float = 1e-5  # K^2 s^-1
    omega: float = -2.5
    nu: float = 7.5e-5  # m^2 s^-1
    A_T: float = 1.863e-2
    A_S: float = 1.9e-4
    A_TS: float = 9.41e-3

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.chi_T > 0:
            raise ValueError("chi_T must be positive")
        if not -5.0 <= self.omega < 0.0:
            raise ValueError("omega must lie in [-5, 0)")
        if not self.nu > 0:
            raise ValueError("nu must be positive")


@dataclass(frozen=True)
class OTOPSEnv:
    T_mean: float = 20.0  # deg C
    S_A: float = 30.0  # g/kg
    pressure: float = 0.0  # dbar
    H: float = -0.2  # deg C per g/kg
    alpha_T: float = 2.5e-4  # 1/deg C, typical at 20 C, 30 g/kg
    beta_S: float = 7.4e-4  # 1/(g/kg)
    Pr: float = 7.0
    Sc: float = 700.0
    beta0: float = 0.72
    epsilon: float = 0.03
    chi_T: float = 1e-5
    nu: float = 1.0e-6  # m^2 s^-1

    def __post_init__(self):
        if not (self.alpha_T > 0 and self.beta_S > 0):
            raise ValueError("alpha_T and beta_S must be positive")
        if not (self.epsilon > 0 and self.chi_T >= 0 and self.nu > 0):
            raise ValueError("epsilon, nu must be positive and chi_T non-negative")
        if not (self.Pr > 0 and self.Sc > 0):
            raise ValueError("Pr and Sc must be positive")

    @property
    def eta(self) -> float:
        """Kolmogorov microscale (nu^3/epsilon)^(1/4) in meters."""
        return (self.nu**3 / self.epsilon) ** 0.25


@dataclass(frozen=True)
class BeamGeometry:
    wavelength: float = 532e-9  # m
    W0: float = 0.01  # m
    L: float = 40.0  # m
    F0: float = math.inf  # m, collimated by default

    def __post_init__(self):
        if not (self.wavelength > 0 and self.W0 > 0 and self.L > 0):
            raise ValueError("wavelength, W0 and L must be positive")

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def Theta0(self) -> float:
        return 1.0 - self.L / self.F0

    @property
    def Lambda0(self) -> float:
        return 2 * self.L / (self.k * self.W0**2)

    @property
    def Theta1(self) -> float:
        return self.Theta0 / (self.Theta0**2 + self.Lambda0**2)

    @property
    def Lambda1(self) -> float:
        return self.Lambda0 / (self.Theta0**2 + self.Lambda0**2)


@dataclass(frozen=True)
class GGShape:
    alpha: float
    beta: float

    def __post_init__(self):
        ok = all(math.isfinite(v) and v > 0 for v in (self.alpha, self.beta))
        if not ok:
            raise ValueError(f"invalid Gamma-Gamma shapes ({self.alpha}, {self.beta})")


# ---------------------------------------------------------------- plane wave, strong


def spectrum_phi_n_strong(kappa, p: OceanSpectrumParams):
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise ValueError("kappa must be positive")
    eps, nu = p.epsilon, p.nu
    delta = 8.28 * kappa ** (4 / 3) * nu * eps ** (-1 / 3) + 12.978 * kappa**2 * nu**1.5 * eps ** (-0.5)
    w = p.omega
    out = (
        0.388e-8 * eps ** (-1 / 3) * kappa ** (-11 / 3)
        * (1 + 2.35 * kappa ** (2 / 3) * nu**0.5 * eps ** (-1 / 6))
        * p.chi_T / w**2
        * (w**2 * np.exp(-p.A_T * delta) + np.exp(-p.A_S * delta) - 2 * w * np.exp(-p.A_TS * delta))
    )
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- shared quadrature

_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)


_Q_SWITCH = 64.0


def _inner_x_panels(q: np.ndarray, damp: float, curv: float) -> np.ndarray:
    """h(q) by Gauss-Legendre panels sized to the local cosine period."""
    out = np.empty_like(q)
    slope = 1.0 + abs(curv)
    npan = np.maximum(1, np.ceil(q * slope / math.pi)).astype(int)
    npan = 2 ** np.ceil(np.log2(npan)).astype(int)
    xg, wg = _GL8
    for n in np.unique(npan):
        sel = npan == n
        e = np.linspace(0.0, 1.0, n + 1)
        x = (0.5 * (e[1:] + e[:-1])[:, None] + 0.5 / n * xg[None, :]).ravel()
        w = np.tile(0.5 / n * wg, n)
        qq = q[sel][:, None]
        phase = qq * x * (1.0 - curv * x)
        # 1 - cos written as 2 sin^2 to keep small phases accurate
        f = np.exp(-damp * qq * x * x) * 2.0 * np.sin(0.5 * phase) ** 2
        out[sel] = f @ w
    return out


def _gauss_segment_parts(P: np.ndarray, R: np.ndarray):
    """Pieces of int_0^1 exp(-P x^2 + R x) dx, Re P >= 0, via the Faddeeva function.

    Returns (end0, end1, stationary) with the integral equal to their sum.  The
    endpoint terms are exp(exponent at the endpoint) * w(.), the stationary term
    collects the erfc reflection 2 - erfc(-z) used where Re z < 0, so nothing
    overflows however large |P| gets.
    """
    sp = np.sqrt(P)
    x0 = R / (2 * P)
    pref = math.sqrt(math.pi) / (2 * sp)
    shift = np.exp(R * R / (4 * P))

    def endpoint(x):
        z = sp * (x - x0)
        ex = np.exp(-P * x * x + R * x)
        pos = z.real >= 0
        with np.errstate(over="ignore", invalid="ignore"):
            term = np.where(pos, ex * special.wofz(1j * z), -ex * special.wofz(-1j * z))
        return term, np.where(pos, 0.0, 2.0)

    t0, r0 = endpoint(0.0)
    t1, r1 = endpoint(1.0)
    return pref * t0, -pref * t1, pref * (r0 - r1) * shift


def _inner_x_closed(q: np.ndarray, damp: float, curv: float, smooth_only: bool = False) -> np.ndarray:
    """Closed form of h(q) (damp or curv nonzero).

    ``smooth_only`` drops the oscillating pieces: the stationary-phase term and,
    unless its frequency 1 - curv vanishes, the x = 1 endpoint term.
    """
    qc = q.astype(complex)
    if damp > 0:
        gauss = sum(_gauss_segment_parts(damp * qc, np.zeros_like(qc))).real
    else:
        gauss = np.ones_like(q)
    e0, e1, st = _gauss_segment_parts((damp + 1j * curv) * qc, 1j * qc)
    if not smooth_only:
        return gauss - (e0 + e1 + st).real
    if abs(1.0 - curv) < 1e-12:
        return gauss - (e0 + e1).real
    return gauss - e0.real


def _inner_x(q: np.ndarray, damp: float, curv: float, smooth_only: bool = False) -> np.ndarray:
    """h(q) = int_0^1 exp(-damp*q*x^2) (1 - cos(q x (1 - curv x))) dx for each q."""
    if damp == 0 and curv == 0:
        return np.ones_like(q) if smooth_only else 1.0 - np.sinc(q / math.pi)
    out = np.empty_like(q)
    small = q <= _Q_SWITCH
    out[small] = _inner_x_panels(q[small], damp, curv)
    out[~small] = _inner_x_closed(q[~small], damp, curv, smooth_only)
    return out


def _oscillation(damp: float, curv: float) -> tuple[float, float]:
    """(angular frequency in q, exponential damping rate in q) of the dropped terms."""
    den = damp**2 + curv**2
    freq = max(abs(1.0 - curv), curv / (4 * den) if den > 0 else 0.0)
    rate = min(damp, damp / (4 * den) if den > 0 else damp)
    return max(freq, 1e-300), rate


def _q_range(phi_q: Callable) -> tuple[float, float]:
    """Support of the integrand q*Phi(q)*min(1, q^2) on a log grid."""
    grid = np.logspace(-12, 16, 1121)
    vals = grid * phi_q(grid) * np.minimum(1.0, grid**2)
    peak = float(np.max(vals))
    if not peak > 0:
        return 1.0, 2.0
    keep = np.nonzero(vals > 1e-17 * peak)[0]
    return grid[max(keep[0] - 1, 0)], grid[min(keep[-1] + 1, len(grid) - 1)]


def _spectral_double_integral(kphi: Callable, qscale: float, damp: float, curv: float,
                              rtol: float = 1e-5) -> tuple[float, float]:
    """I = int_0^inf kappa*Phi(kappa) h(qscale*kappa^2) dkappa.

    Works in q = qscale*kappa^2, where kappa dkappa = dq/(2 qscale).  Panels are
    log-spaced, additionally capped at half an oscillation period of h between
    q = 64 and a cutoff beyond which the oscillating part of h is dropped; the
    cutoff is set from the integration-by-parts bound 2|f(Q)|/omega.  Nodes are
    doubled until two passes agree.  Returns (value, error estimate).
    """
    phi_q = lambda q: kphi(np.sqrt(q / qscale)) / np.sqrt(q / qscale) / (2 * qscale)
    qlo, qhi = _q_range(phi_q)
    omega, rate = _oscillation(damp, curv)
    xg, wg = _GL16

    def integrate(edges, smooth_only):
        half = 0.5 * np.diff(edges)[:, None]
        q = (0.5 * (edges[1:] + edges[:-1])[:, None] + half * xg[None, :]).ravel()
        w = (half * wg[None, :]).ravel()
        return float(np.sum(w * phi_q(q) * _inner_x(q, damp, curv, smooth_only)))

    def log_edges(a, b, per_decade):
        if b <= a:
            return np.array([a])
        n = max(1, int(math.ceil(per_decade * math.log10(b / a))))
        return np.geomspace(a, b, n + 1)

    # cutoff for the oscillating terms
    rough = integrate(log_edges(qlo, qhi, 8), True)
    qcut = max(_Q_SWITCH, qlo)
    while qcut < qhi:
        amp = abs(float(phi_q(np.array([qcut]))[0])) * (qcut ** -0.5 + 1.0 / qcut) * math.exp(-rate * qcut)
        if 2 * amp / omega <= 1e-3 * rtol * abs(rough):
            break
        qcut *= 2.0
    qcut = min(qcut, qhi)

    def rule(level):
        per_decade = 4 * 2**level
        a = log_edges(qlo, min(max(_Q_SWITCH, qlo), qhi), per_decade)
        mid_lo = a[-1]
        m = log_edges(mid_lo, qcut, per_decade)
        step = math.pi / omega / 2**level
        if qcut > mid_lo:
            m = np.union1d(m, np.arange(mid_lo, qcut, step))
            m = np.append(m[m < qcut], qcut)
        t = log_edges(qcut, qhi, per_decade)
        total = integrate(a, False) if a.size > 1 else 0.0
        total += integrate(m, False) if m.size > 1 else 0.0
        total += integrate(t, True) if t.size > 1 else 0.0
        return total

    prev = rule(0)
    for level in range(1, 6):
        cur = rule(level)
        err = abs(cur - prev)
        if err <= rtol * abs(cur):
            return cur, max(err, 1e-15 * abs(cur))
        prev = cur
    raise NoConvergence("spectral double integral", cur, err / abs(cur) if cur else math.inf)


def cn2_strong(p: OceanSpectrumParams, wavelength: float, L: float,
               phi: Callable | None = None, rtol: float = 1e-5) -> float:
    """Structure constant from the E(zeta,kappa,L) kernel double integral.

    With E = ik exp(-0.5 i theta), E(kappa)E(-kappa) + |E|^2 = k^2 (1 - exp(-i theta))
    whose real part is k^2 (1 - cos theta), theta = zeta (L - zeta) kappa^2 / (k L).
    """
    k = 2 * math.pi / wavelength
    spec = phi or (lambda kap: spectrum_phi_n_strong(kap, p))
    kphi = lambda kap: kap * spec(kap)
    # zeta = L x  ->  theta = (L/k) kappa^2 x (1 - x)
    val, _ = _spectral_double_integral(kphi, L / k, 0.0, 1.0, rtol)
    return 16 * math.pi**2 * k ** (-7 / 6) * L ** (-11 / 6) * k**2 * L * val


def rytov_plane(cn2: float, k: float, L: float) -> float:
    if cn2 < 0 or k <= 0 or L <= 0:
        raise ValueError("rytov_plane needs cn2 >= 0 and positive k, L")
    return 1.23 * cn2 * k ** (7 / 6) * L ** (11 / 6)


def gg_from_rytov(sigma_l1_sq: float, sigma_l2_sq: float | None = None) -> GGShape:
    s1 = sigma_l1_sq
    s2 = s1 if sigma_l2_sq is None else sigma_l2_sq
    if s1 < 0 or s2 < 0:
        raise ValueError("Rytov variances must be non-negative")
    if s1 == 0 or s2 == 0:
        raise DegenerateTurbulence("degenerate-no-turbulence")
    x = 0.17 * s1 / (1 + 0.167 * s1 ** (6 / 5)) ** (7 / 6)
    y = 0.225 * s2 / (1 + 0.259 * s2 ** (6 / 5)) ** (5 / 6)
    return GGShape(1.0 / math.expm1(x), 1.0 / math.expm1(y))


def strong_pipeline(p: OceanSpectrumParams, wavelength: float, L: float) -> tuple[GGShape, float]:
    """Shapes for one hop and the Rytov variance that produced them."""
    cn2 = cn2_strong(p, wavelength, L)
    s2 = rytov_plane(cn2, 2 * math.pi / wavelength, L)
    return gg_from_rytov(s2), s2


# ---------------------------------------------------------------- OTOPS

QUAN_FRY = (1.31405, 1.779e-4, -1.05e-6, 1.6e-8, -2.02e-6, 15.868, 0.01155, -0.00423, -4382.0, 1.1455e6)


def _nm(wavelength_m: float) -> float:
    return wavelength_m * 1e9


def quan_fry_index(T: float, S: float, lambda_nm: float) -> float:
    if not (0 <= T <= 30 and 0 <= S <= 40):
        warnings.warn("Quan-Fry fit used outside T in [0,30], S in [0,40]", RuntimeWarning, stacklevel=2)
    a = QUAN_FRY
    il = 1.0 / lambda_nm
    return (a[0] + (a[1] + a[2] * T + a[3] * T**2) * S + a[4] * T**2
            + (a[5] + a[6] * S + a[7] * T) * il + a[8] * il**2 + a[9] * il**3)


def thermal_salinity_coeffs(env: OTOPSEnv, wavelength: float) -> tuple[float, float]:
    a = QUAN_FRY
    il = 1.0 / _nm(wavelength)
    T, S = env.T_mean, env.S_A
    A = a[2] * S + 2 * a[3] * T * S + 2 * a[4] * T + a[7] * il
    B = a[1] + a[2] * T + a[3] * T**2 + a[6] * il
    return A, B


def eddy_diffusivity_ratio(R_p: float) -> float:
    if not R_p > 0:
        raise ValueError("density ratio must be positive")
    if R_p >= 1:
        return R_p + math.sqrt(R_p) * math.sqrt(R_p - 1)
    if R_p >= 0.5:
        return 1.85 * R_p - 0.85
    return 0.15 * R_p


def density_ratio(env: OTOPSEnv) -> float:
    return abs(env.H) * env.alpha_T / env.beta_S


def _c_coeffs(env: OTOPSEnv) -> dict[str, float]:
    base = 0.072 ** (4 / 3) * env.beta0
    return {
        "T": base / env.Pr,
        "S": base / env.Sc,
        "TS": base * (env.Pr + env.Sc) / (2 * env.Pr * env.Sc),
    }


def _chi(env: OTOPSEnv) -> dict[str, float]:
    if env.H == 0:
        raise ValueError("H = 0 leaves chi_S and chi_TS undefined")
    dr = eddy_diffusivity_ratio(density_ratio(env))
    return {"T": env.chi_T, "S": dr * env.chi_T / env.H**2, "TS": 0.5 * (1 + dr) * env.chi_T / env.H}


def otops_component(kappa, chi_i: float, c_i: float, env: OTOPSEnv):
    kappa = np.asarray(kappa, dtype=float)
    ke = kappa * env.eta
    return (env.beta0 * env.epsilon ** (-1 / 3) * kappa ** (-11 / 3) * chi_i / (4 * math.pi)
            * np.exp(-174.9 * ke**2 * c_i**0.96)
            * (1 + 21.61 * ke**0.61 * c_i**0.02 - 18.18 * ke**0.55 * c_i**0.04))


def otops_spectrum(kappa, env: OTOPSEnv, wavelength: float = 532e-9):
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise ValueError("kappa must be positive")
    A, B = thermal_salinity_coeffs(env, wavelength)
    chi, c = _chi(env), _c_coeffs(env)
    out = (A**2 * otops_component(kappa, chi["T"], c["T"], env)
           + B**2 * otops_component(kappa, chi["S"], c["S"], env)
           + 2 * A * B * otops_component(kappa, chi["TS"], c["TS"], env))
    return out if out.ndim else float(out)


def rytov_gaussian(env: OTOPSEnv, beam: BeamGeometry, phi: Callable | None = None,
                   rtol: float = 1e-5) -> float:
    k, L = beam.k, beam.L
    spec = phi or (lambda kap: otops_spectrum(kap, env, beam.wavelength))
    kphi = lambda kap: kap * spec(kap)
    # exp(-Lambda1 L kappa^2 x^2 / k) (1 - cos[(L kappa^2 / k) x (1 - Theta1bar x)])
    val, _ = _spectral_double_integral(kphi, L / k, beam.Lambda1, 1.0 - beam.Theta1, rtol)
    return 8 * math.pi**2 * k**2 * L * val


def log_amplitude_variances(sigma_B2: float, Theta1: float) -> tuple[float, float]:
    sb = sigma_B2 ** (6 / 5)  # sigma_B^{12/5}
    x = 0.49 * sigma_B2 / (1 + 0.56 * (1 + Theta1) * sb) ** (7 / 6)
    y = 0.51 * sigma_B2 / (1 + 0.69 * sb) ** (5 / 6)
    return x, y


def gg_from_otops(sigma_B2: float, Theta1: float) -> GGShape:
    if sigma_B2 < 0:
        raise ValueError("sigma_B2 must be non-negative")
    if sigma_B2 == 0:
        raise DegenerateTurbulence("degenerate-no-turbulence")
    return shapes_from_log_variances(*log_amplitude_variances(sigma_B2, Theta1))


def shapes_from_log_variances(var_ln_x: float, var_ln_y: float) -> GGShape:
    """alpha = 1/(exp(var_lnX) - 1), beta = 1/(exp(var_lnY) - 1)."""
    if not (var_ln_x > 0 and var_ln_y > 0):
        raise DegenerateTurbulence("degenerate-no-turbulence")
    return GGShape(1.0 / math.expm1(var_ln_x), 1.0 / math.expm1(var_ln_y))


def otops_pipeline(env: OTOPSEnv, beam: BeamGeometry) -> tuple[GGShape, float]:
    s2 = rytov_gaussian(env, beam)
    return gg_from_otops(s2, beam.Theta1), s2
