"""Closed-form performance metrics for the direct and O-RIS links."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import channel
from .specfun import G, NoConvergence, meijer_g_eval

CLAMP_SLACK = 1e-9
MAX_LINKS = 5


class MetricError(ArithmeticError):
    pass


class ConstraintError(ValueError):
    pass


# ---------------------------------------------------------------- link params


@dataclass(frozen=True)
class DirectParams:
    alpha: float
    xi_sq: float
    A0: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.xi_sq > 0 and 0 < self.A0 <= 1):
            raise ValueError("invalid direct-link parameters")


@dataclass(frozen=True)
class OrisParams:
    A: float
    B: float
    xi_sq: float
    A0: float
    N: int

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and self.xi_sq > 0 and 0 < self.A0 <= 1 and self.N >= 1):
            raise ValueError("invalid O-RIS parameters")

    @classmethod
    def from_hops(cls, alpha: float, beta: float, N: int, xi_sq: float, A0: float) -> "OrisParams":
        return cls(N * alpha, N * beta, xi_sq, A0, N)


@dataclass(frozen=True)
class _CdfTerm:
    """F(gamma) = exp(log_pref) * gamma**s * G^{m,n}_{p,q}(c*gamma | a; b)."""

    log_pref: float
    s: float
    c: float
    m: int
    n: int
    a: tuple
    b: tuple


def _cdf_term(params, gamma_bar: float) -> _CdfTerm:
    if not gamma_bar > 0:
        raise ValueError("gamma_bar must be positive")
    if isinstance(params, DirectParams):
        al, x2, A0 = params.alpha, params.xi_sq, params.A0
        log_pref = (x2 * math.log(al / (A0 * math.sqrt(gamma_bar))) + math.log(x2)
                    + (al - x2 - 2) * math.log(2) - gammaln(al) - 0.5 * math.log(math.pi))
        return _CdfTerm(log_pref, x2 / 2, al**2 / (4 * A0**2 * gamma_bar), 4, 1,
                        (1 - x2 / 2, 0.5, 1.0),
                        ((al - x2) / 2, (al - x2 + 1) / 2, 0.0, 0.5, -x2 / 2))
    if isinstance(params, OrisParams):
        A, B, x2, A0, N = params.A, params.B, params.xi_sq, params.A0, params.N
        log_pref = ((A + B - 5) * math.log(2) + math.log(A * B * x2 / (math.pi * N * A0))
                    - gammaln(A) - gammaln(B) - 0.5 * math.log(gamma_bar))
        return _CdfTerm(log_pref, 0.5, A**2 * B**2 / (16 * N**2 * A0**2 * gamma_bar), 6, 1,
                        (0.5, x2 / 2, (x2 + 1) / 2),
                        ((x2 - 1) / 2, x2 / 2, (A - 1) / 2, (B - 1) / 2, A / 2, B / 2, -0.5))
    raise TypeError(f"unsupported link parameters {type(params).__name__}")


def _clamp(p: float, what: str) -> float:
    if not math.isfinite(p):
        raise MetricError(f"{what} is not finite")
    if -CLAMP_SLACK <= p < 0 or 1 < p <= 1 + CLAMP_SLACK:
        warnings.warn(f"{what}={p!r} clamped into [0, 1]", RuntimeWarning, stacklevel=3)
        return min(max(p, 0.0), 1.0)
    if p < 0 or p > 1:
        raise MetricError(f"{what}={p!r} outside [0, 1]")
    return p


def _eval(order, z):
    try:
        return meijer_g_eval(order, z)
    except NoConvergence as exc:
        raise MetricError(str(exc)) from exc


# ---------------------------------------------------------------- outage


def cdf(params, gamma_bar: float, gamma_th: float) -> float:
    """Closed-form SNR CDF (raw, unclamped)."""
    if gamma_th <= 0:
        return 0.0
    t = _cdf_term(params, gamma_bar)
    g = _eval(G(t.m, t.n, t.a, t.b), t.c * gamma_th)
    return g.sign * math.exp(t.log_pref + t.s * math.log(gamma_th) + g.log_abs)


def op_direct(gamma_bar: float, gamma_th: float, alpha: float, xi_sq: float, A0: float) -> float:
    return _clamp(cdf(DirectParams(alpha, xi_sq, A0), gamma_bar, gamma_th), "OP")


def op_oris(gamma_bar: float, gamma_th: float, A: float, B: float, xi_sq: float, A0: float, N: int) -> float:
    return _clamp(cdf(OrisParams(A, B, xi_sq, A0, N), gamma_bar, gamma_th), "OP")


def op_sc(op_direct_val: float, op_oris_val: float) -> float:
    for v in (op_direct_val, op_oris_val):
        if not 0 <= v <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
    return op_direct_val * op_oris_val


def op_mrc(gamma_bar: float, gamma_th: float, direct: DirectParams, oris: OrisParams,
           rel_tol: float = 1e-6) -> float:
    """Pr(gamma_D + gamma_R <= gamma_th) by quadrature over gamma_D = gamma_th * t^2."""
    if gamma_th <= 0:
        return 0.0
    al, x2, A0 = direct.alpha, direct.xi_sq, direct.A0
    s = al / (A0 * math.sqrt(gamma_bar))
    log_k = x2 * math.log(s) + math.log(x2 / 2) - gammaln(al)
    ordr = G(2, 0, [1.0], [0.0, al - x2])

    def integrand(t):
        if t <= 0.0 or t >= 1.0:
            return 0.0
        gd = gamma_th * t * t
        gpdf = _eval(ordr, s * math.sqrt(gd))
        # f_D(gd) * d(gd)/dt = k gd^(x2/2-1) G * 2 gamma_th t
        log_f = log_k + (x2 / 2 - 1) * math.log(gd) + math.log(2 * gamma_th * t) + gpdf.log_abs
        return gpdf.sign * math.exp(log_f) * cdf(oris, gamma_bar, gamma_th - gd)

    val, err = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol, limit=200)
    if val != 0 and err > 10 * rel_tol * abs(val):
        raise MetricError(f"MRC quadrature did not converge: estimate {val!r}, error {err!r}")
    return _clamp(val, "OP_MRC")


# ---------------------------------------------------------------- BER


@dataclass(frozen=True)
class ModulationSpec:
    name: str
    p: float
    delta: float
    q_k: tuple

    @property
    def K(self) -> int:
        return len(self.q_k)

    def __post_init__(self):
        if not self.q_k or any(q <= 0 for q in self.q_k):
            raise ValueError("q_k must be a non-empty list of positive values")

    @classmethod
    def bfsk(cls):
        return cls("BFSK", 1.0, 1.0, (0.5,))

    @classmethod
    def bpsk(cls):
        return cls("BPSK", 0.5, 1.0, (1.0,))

    @classmethod
    def mqam(cls, M: int):
        K = max(int(math.isqrt(M) // 2), 1)
        delta = 4 / math.log2(M) * (1 - 1 / math.sqrt(M))
        return cls(f"{M}-QAM", 0.5, delta, tuple(3 * (2 * k - 1) ** 2 / (2 * (M - 1)) for k in range(1, K + 1)))

    @classmethod
    def mpsk(cls, M: int):
        K = max(M // 4, 1)
        delta = 2 / max(math.log2(M), 2)
        return cls(f"{M}-PSK", 0.5, delta, tuple(math.sin((2 * k - 1) * math.pi / M) ** 2 for k in range(1, K + 1)))

    @classmethod
    def by_name(cls, name: str):
        key = name.upper().replace("_", "-")
        if key == "BFSK":
            return cls.bfsk()
        if key == "BPSK":
            return cls.bpsk()
        if key == "QPSK":
            return cls.mpsk(4)
        if key.endswith("-QAM") or key.endswith("QAM"):
            return cls.mqam(int(key.rstrip("-QAM").rstrip("-")))
        if key.endswith("-PSK"):
            return cls.mpsk(int(key[:-4]))
        raise ValueError(f"unknown modulation {name!r}")


def ber(mod: ModulationSpec, params, gamma_bar: float) -> float:
    """Average BER via the Laplace-type Meijer-G integral of the SNR CDF."""
    t = _cdf_term(params, gamma_bar)
    a = (1 - mod.p - t.s,) + t.a
    total = 0.0
    for q in mod.q_k:
        g = _eval(G(t.m, t.n + 1, a, t.b), t.c / q)
        total += g.sign * math.exp(t.log_pref - t.s * math.log(q) + g.log_abs)
    val = mod.delta / (2 * math.gamma(mod.p)) * total
    return _clamp(val, "BER")


# ---------------------------------------------------------------- capacity


class DetectionMode(enum.Enum):
    HD = "HD"
    IMDD = "IMDD"

    @property
    def tau(self) -> float:
        return 1.0 if self is DetectionMode.HD else math.e / (2 * math.pi)


def capacity(params, gamma_bar: float, det: DetectionMode = DetectionMode.HD) -> float:
    """Ergodic capacity in bit/s/Hz."""
    det = DetectionMode(det)
    tau = det.tau
    ln2 = math.log(2)
    if isinstance(params, DirectParams):
        al, x2, A0 = params.alpha, params.xi_sq, params.A0
        log_pref = (x2 * math.log(al / (A0 * math.sqrt(tau * gamma_bar))) + math.log(x2)
                    + (al - x2 - 2) * math.log(2) - 0.5 * math.log(math.pi) - gammaln(al) - math.log(ln2))
        order = G(6, 1, (-x2 / 2, 1 - x2 / 2, 0.5, 1.0),
                  ((al - x2) / 2, (al - x2 + 1) / 2, 0.0, 0.5, -x2 / 2, -x2 / 2))
        z = al**2 / (4 * A0**2 * tau * gamma_bar)
    elif isinstance(params, OrisParams):
        A, B, x2, A0, N = params.A, params.B, params.xi_sq, params.A0, params.N
        log_pref = ((A + B - 5) * math.log(2) + math.log(A * B * x2 / (math.pi * N * A0))
                    - math.log(ln2) - gammaln(A) - gammaln(B) - 0.5 * math.log(tau * gamma_bar))
        order = G(8, 1, (-0.5, 0.5, x2 / 2, (x2 + 1) / 2),
                  ((x2 - 1) / 2, x2 / 2, (A - 1) / 2, (B - 1) / 2, A / 2, B / 2, -0.5, -0.5))
        z = A**2 * B**2 / (16 * N**2 * A0**2 * tau * gamma_bar)
    else:
        raise TypeError(f"unsupported link parameters {type(params).__name__}")
    g = _eval(order, z)
    val = g.sign * math.exp(log_pref + g.log_abs)
    if val < 0:
        raise MetricError(f"negative capacity {val!r}")
    return val


# ---------------------------------------------------------------- DO / SOC


def ado(A: float, B: float, xi_sq: float) -> float:
    return 0.5 * min(A, xi_sq, B)


def _do_parts(params, gamma_bar: float, gamma_th: float):
    t = _cdf_term(params, gamma_bar)
    z = t.c * gamma_th
    g0 = _eval(G(t.m, t.n, t.a, t.b), z)
    g1 = _eval(G(t.m, t.n + 1, (0.0,) + t.a, t.b + (1.0,)), z)
    g2 = _eval(G(t.m, t.n + 2, (0.0, 0.0) + t.a, t.b + (1.0, 1.0)), z)
    if g0.sign == 0:
        raise MetricError("vanishing outage denominator")
    # exponent of gamma_bar in the prefactor
    s_bar = params.xi_sq / 2 if isinstance(params, DirectParams) else 0.5
    return s_bar, g0, g1, g2


def diversity_order(gamma_bar: float, params, gamma_th: float = 1.0) -> float:
    """-d ln OP / d ln gamma_bar."""
    s_bar, g0, g1, _ = _do_parts(params, gamma_bar, gamma_th)
    return s_bar + g1.sign * g0.sign * math.exp(g1.log_abs - g0.log_abs)


def soc(gamma_bar: float, params: OrisParams, gamma_th: float = 1.0) -> float:
    """(1/ADO) d DO / d ln gamma_bar."""
    _, g0, g1, g2 = _do_parts(params, gamma_bar, gamma_th)
    h = g1.sign * g0.sign * math.exp(g1.log_abs - g0.log_abs)
    k = g2.sign * g0.sign * math.exp(g2.log_abs - g0.log_abs)
    return (h * h - k) / ado(params.A, params.B, params.xi_sq)


# ---------------------------------------------------------------- system level


def capacity_uoap(direct_caps: Sequence[float], oris_caps: Sequence[float]) -> float:
    if len(direct_caps) + len(oris_caps) > MAX_LINKS:
        raise ConstraintError(f"u + v = {len(direct_caps) + len(oris_caps)} exceeds {MAX_LINKS}")
    return float(sum(direct_caps) + sum(oris_caps))


def capacity_total(T: int, c_uoap: float, pon, bandwidth_hz: float = 100e6) -> float:
    """min(T * C_UOAP, eta * C_PON / T) in Gbps.

    ``c_uoap`` is a spectral efficiency (bit/s/Hz), scaled by the optical link
    bandwidth; C_PON is the aggregate upstream rate.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    return min(T * c_uoap * bandwidth_hz / 1e9, pon.eta * pon.r_up_total / T)


def hard_switch(c_direct: float, c_oris: float, c_threshold: float, mode: str = "threshold") -> float:
    if mode == "threshold":
        return c_direct if c_direct >= c_threshold else c_oris
    if mode == "optimal":
        return max(c_direct, c_oris)
    raise ValueError(f"unknown switching mode {mode!r}")


def op_megg(gamma_th: float, model: channel.MEGG, r: int, mu_r: float, pointing=None) -> float:
    return _clamp(channel.megg_cdf(gamma_th, model, r, mu_r, pointing), "OP")


def db(x) -> np.ndarray:
    return channel.lin_to_db(x)


def undb(x_db) -> np.ndarray:
    return channel.db_to_lin(x_db)
