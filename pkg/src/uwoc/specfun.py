"""Special-function kernel: log-Gamma, K_nu and a numerical Meijer-G evaluator.

The Meijer-G evaluator handles real parameters and positive real argument.
Two routes are used:

* residue summation over the poles of ``Gamma(b_j - s)`` (fast path, simple
  poles and ``z < 1`` after normalization), and
* direct quadrature of the Mellin-Barnes integral along a vertical line that
  separates the two pole families.  The abscissa of the line is placed at the
  minimum of the integrand envelope so that exponentially small or large
  values are obtained without cancellation.

All heavy lifting is done in log space; :func:`meijer_g_eval` returns the
logarithm of the magnitude and the sign besides the plain value so callers can
combine huge prefactors with tiny G values.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special as sc

GUARANTEED_REL_TOL = 1e-8
_EPS = np.finfo(float).eps
_INT_TOL = 1e-12
_COINCIDENT_TOL = 1e-9
_PERTURBATION = 1e-7
PERTURBED_REL_TOL = 1e-5


class SpecfunError(ArithmeticError):
    """Base class for kernel failures."""


class DomainError(SpecfunError, ValueError):
    pass


class UnsupportedParameters(SpecfunError):
    """Logarithmic (pole-collision) configurations and contour-less orders."""


class NoConvergence(SpecfunError):
    def __init__(self, message: str, estimate: float, rel_err: float):
        super().__init__(f"{message} (best estimate {estimate!r}, rel. error {rel_err:.2e})")
        self.estimate = estimate
        self.rel_err = rel_err


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x!r}")
    return float(sc.gammaln(x))


def bessel_k(v: float, x: float) -> float:
    """Modified Bessel function of the second kind, real order and argument."""
    if not x > 0:
        raise DomainError(f"bessel_k needs x > 0, got {x!r}")
    return float(sc.kv(abs(v), x))


def _is_nonpositive_int(x: float) -> bool:
    r = round(x)
    return r <= 0 and abs(x - r) < _INT_TOL


def _is_int(x: float) -> bool:
    return abs(x - round(x)) < _INT_TOL


@dataclass(frozen=True)
class MeijerGOrder:
    """``G^{m,n}_{p,q}`` with real parameter vectors ``a`` (length p) and ``b`` (length q)."""

    m: int
    n: int
    a_params: tuple[float, ...] = ()
    b_params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple(float(x) for x in self.a_params))
        object.__setattr__(self, "b_params", tuple(float(x) for x in self.b_params))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError(f"invalid order m={self.m}, n={self.n}, p={self.p}, q={self.q}")
        if not all(map(math.isfinite, self.a_params + self.b_params)):
            raise ValueError("Meijer-G parameters must be finite")
        for aj in self.a_params[: self.n]:
            for bk in self.b_params[: self.m]:
                d = aj - bk
                if d > 0.5 and _is_int(d):
                    raise UnsupportedParameters(
                        f"a - b = {d:g} is a positive integer: pole families collide"
                    )

    @property
    def p(self) -> int:
        return len(self.a_params)

    @property
    def q(self) -> int:
        return len(self.b_params)

    @property
    def delta(self) -> float:
        """Exponential decay rate (in units of pi) of the integrand on vertical lines."""
        return self.m + self.n - 0.5 * (self.p + self.q)

    def inverted(self) -> "MeijerGOrder":
        """Parameters of the equivalent instance at argument ``1/z``."""
        return MeijerGOrder(
            self.n, self.m,
            tuple(1.0 - b for b in self.b_params),
            tuple(1.0 - a for a in self.a_params),
        )

    def spec(self) -> str:
        fmt = lambda v: " ".join(repr(x) for x in v) or "-"
        return f"{self.m} {self.n} | {fmt(self.a_params)} | {fmt(self.b_params)}"


@dataclass(frozen=True)
class EvalAccuracy:
    rel_tol: float = 1e-10
    max_nodes: int = 200_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.max_nodes > 0:
            raise ValueError("max_nodes must be positive")


DEFAULT_ACCURACY = EvalAccuracy()


class GValue(NamedTuple):
    value: float
    log_abs: float
    sign: float
    rel_err: float
    method: str


def _combine(logs: np.ndarray, signs: np.ndarray) -> tuple[float, float, float]:
    """Signed log-sum-exp. Returns (log|sum|, sign, log sum|terms|)."""
    if logs.size == 0 or not np.isfinite(logs).any():
        return -math.inf, 0.0, -math.inf
    lmax = float(np.max(logs[np.isfinite(logs)]))
    w = np.exp(logs - lmax)
    total = float(np.sum(signs * w))
    l1 = lmax + math.log(float(np.sum(w)))
    if total == 0.0:
        return -math.inf, 0.0, l1
    return lmax + math.log(abs(total)), math.copysign(1.0, total), l1


# ---------------------------------------------------------------- residues


def _log_gamma_minus_k(d: float, k: np.ndarray):
    """(log|Gamma(d - k)|, sign) for integer k >= 0 and non-integer d.

    Forming d - k loses the distance to the nearest pole when d is tiny, so
    the reflection formula is used with sin(pi (d - k)) = (-1)^k sin(pi d).
    """
    refl = d - k < 0.5
    s = math.sin(math.pi * d)
    par = np.where(k % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore"):
        lg_r = math.log(math.pi) - math.log(abs(s)) - sc.gammaln(1.0 - d + k)
    sg_r = par * math.copysign(1.0, s) * sc.gammasgn(1.0 - d + k)
    lg = np.where(refl, lg_r, sc.gammaln(np.where(refl, 1.0, d - k)))
    sg = np.where(refl, sg_r, sc.gammasgn(np.where(refl, 1.0, d - k)))
    return lg, sg


def _residue_series(order: MeijerGOrder, z: float, rel_tol: float, kmax: int = 4000):
    """Slater residue sum over the poles of Gamma(b_h - s), h < m.

    Returns None when some pole is not simple or a reciprocal Gamma degenerates.
    """
    a = np.asarray(order.a_params)
    b = np.asarray(order.b_params)
    m, n = order.m, order.n
    lz = math.log(z)
    all_logs, all_signs = [], []
    for h in range(m):
        bh = b[h]
        others = np.delete(b[:m], h)
        if any(_is_int(d) for d in others - bh):
            return None
        if any(_is_nonpositive_int(x) for x in 1.0 + bh - b[m:]):
            return None
        chunk = 64
        k0 = 0
        prev_tail = math.inf
        while True:
            k = np.arange(k0, k0 + chunk, dtype=float)
            logs = -sc.gammaln(k + 1.0) + (bh + k) * lz
            signs = np.where(k % 2 == 0, 1.0, -1.0)
            for bj in others:
                lg, sg = _log_gamma_minus_k(bj - bh, k)
                logs = logs + lg
                signs = signs * sg
            for aj in a[:n]:
                arg = 1.0 - aj + bh + k
                logs = logs + sc.gammaln(arg)
                signs = signs * sc.gammasgn(arg)
            for bj in b[m:]:
                arg = 1.0 - bj + bh + k
                zero = np.array([_is_nonpositive_int(x) for x in arg])
                logs = np.where(zero, -np.inf, logs - sc.gammaln(arg))
                signs = signs * np.where(zero, 0.0, sc.gammasgn(arg))
            for aj in a[n:]:
                if _is_int(aj - bh):
                    zero = np.array([_is_nonpositive_int(x) for x in aj - bh - k])
                    logs = np.where(zero, -np.inf, logs - sc.gammaln(aj - bh - k))
                    signs = signs * np.where(zero, 0.0, sc.gammasgn(aj - bh - k))
                else:
                    lg, sg = _log_gamma_minus_k(aj - bh, k)
                    logs = logs - lg
                    signs = signs * sg
            all_logs.append(logs)
            all_signs.append(signs)
            k0 += chunk
            tail = float(np.max(logs[-8:])) if np.isfinite(logs[-8:]).any() else -math.inf
            lsum, _, _ = _combine(np.concatenate(all_logs), np.concatenate(all_signs))
            if tail < lsum + math.log(rel_tol * 1e-3) and tail <= prev_tail:
                break
            prev_tail = tail
            if k0 >= kmax or not np.isfinite(logs).all() and np.isnan(logs).any():
                return None
    logs = np.concatenate(all_logs)
    signs = np.concatenate(all_signs)
    log_abs, sign, l1 = _combine(logs, signs)
    if sign == 0.0:
        return None
    err = 64 * _EPS * math.exp(min(l1 - log_abs, 700.0))
    return log_abs, sign, err


# ---------------------------------------------------------------- contour


class _Integrand:
    def __init__(self, order: MeijerGOrder, z: float):
        a = np.asarray(order.a_params)
        b = np.asarray(order.b_params)
        m, n = order.m, order.n
        self.bm, self.an = b[:m], a[:n]
        self.bq, self.ap = b[m:], a[n:]
        self.lz = math.log(z)

    def log(self, s):
        s = np.asarray(s, dtype=complex)[..., None]
        out = (
            np.sum(sc.loggamma(self.bm - s), axis=-1)
            + np.sum(sc.loggamma(1.0 - self.an + s), axis=-1)
            - np.sum(sc.loggamma(1.0 - self.bq + s), axis=-1)
            - np.sum(sc.loggamma(self.ap - s), axis=-1)
        )
        return out + s[..., 0] * self.lz

    def dlog(self, s):
        s = np.asarray(s, dtype=complex)[..., None]
        out = (
            -np.sum(sc.psi(self.bm - s), axis=-1)
            + np.sum(sc.psi(1.0 - self.an + s), axis=-1)
            - np.sum(sc.psi(1.0 - self.bq + s), axis=-1)
            + np.sum(sc.psi(self.ap - s), axis=-1)
        )
        return out + self.lz


# coarse t grid used to locate the tail
_T_COARSE = np.concatenate([[0.0], np.logspace(-4, 5, 181)])
# sparser copy for scoring abscissae
_T_SCORE = np.concatenate([[0.0], np.logspace(-4, 5, 46)])
_W_SCORE = np.gradient(_T_SCORE)


def _envelopes(f: _Integrand, cs: np.ndarray) -> np.ndarray:
    """Log of the integral of |integrand| along Re(s) = c, for each c in cs."""
    lf = f.log(cs[:, None] + 1j * _T_SCORE[None, :]).real
    x = np.where(np.isnan(lf), -np.inf, lf) + np.log(_W_SCORE)[None, :]
    x = np.where(np.isfinite(x), x, -np.inf)
    mx = np.max(x, axis=1)
    out = np.full(cs.shape, math.inf)
    ok = np.isfinite(mx)
    out[ok] = mx[ok] + np.log(np.sum(np.exp(x[ok] - mx[ok, None]), axis=1))
    return out


def _live_params(own: Sequence[float], partners: Sequence[float]) -> list[float]:
    """Drop parameters whose Gamma ratio with a partner is a polynomial in s.

    Gamma(1-a+s)/Gamma(1-b+s) and Gamma(b-s)/Gamma(a-s) are polynomials when
    b - a (resp. b - a) is a non-negative integer, so the corresponding pole
    family does not exist and must not constrain the contour.
    """
    free = list(partners)
    live = []
    for x in own:
        hit = next((i for i, y in enumerate(free) if _is_int(y - x) and round(y - x) >= 0), None)
        if hit is None:
            live.append(x)
        else:
            free.pop(hit)
    return live


def _pole_bounds(order: MeijerGOrder) -> tuple[float, float]:
    a, b = order.a_params, order.b_params
    # right family: a_j (j < n) cancelled by b_k (k >= m) with b_k - a_j in {0, 1, ...}
    a_live = _live_params(a[: order.n], b[order.m:])
    # left family: b_k (k < m) cancelled by a_j (j >= n) with b_k - a_j in {0, 1, ...}
    b_live = [-x for x in _live_params([-y for y in b[: order.m]], [-y for y in a[order.n:]])]
    lo = max(a_live) - 1.0 if a_live else -math.inf
    hi = min(b_live) if b_live else math.inf
    return lo, hi


def _choose_abscissa(order: MeijerGOrder, f: _Integrand, z: float) -> tuple[float, float, float]:
    a, b = order.a_params, order.b_params
    lo, hi = _pole_bounds(order)
    if not lo < hi:
        raise UnsupportedParameters("no vertical line separates the pole families")
    spread = max((abs(x) for x in a + b), default=0.0)
    reach = 10.0 + 2.0 * spread + 2.0 * z ** (1.0 / max(order.q - order.p, 1)) + abs(f.lz)
    if order.q < order.p:
        reach += 2.0 * (1.0 / z) ** (1.0 / (order.p - order.q))
    left = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0) - reach
    right = hi if math.isfinite(hi) else left + reach + (0.0 if math.isfinite(hi) else reach)
    if not math.isfinite(lo) and not math.isfinite(hi):
        left, right = -reach, reach
    width = right - left
    # interior grid, denser near the pole-bounded edges
    u = (np.arange(48) + 0.5) / 48
    u = 0.5 - 0.5 * np.cos(np.pi * u)
    cand = left + width * u
    scores = _envelopes(f, cand)
    i = int(np.argmin(scores))
    lo_b = cand[i - 1] if i > 0 else left + 0.5 * (cand[0] - left)
    hi_b = cand[i + 1] if i < len(cand) - 1 else right - 0.5 * (right - cand[-1])
    # one finer pass between the neighbours of the best candidate
    fine = np.linspace(lo_b, hi_b, 26)[1:-1]
    fs = _envelopes(f, fine)
    j = int(np.argmin(fs))
    c = float(fine[j]) if fs[j] < scores[i] else float(cand[i])
    return c, lo, hi


def _panel_edges(f: _Integrand, c: float, lo: float, hi: float, tmax: float) -> np.ndarray:
    edges = [0.0]
    t = 0.0
    d0 = min(c - lo, hi - c)
    while t < tmax:
        s = c + 1j * t
        dl = complex(f.dlog(s))
        h = 1e-3 * max(1.0, abs(s))
        d2 = abs(complex(f.dlog(s + 1j * h) - f.dlog(s - 1j * h)) / (2 * h))
        dist = math.hypot(d0, t)
        w = min(0.5 * dist, 2.0 / max(abs(dl), 1e-300), 1.0 / math.sqrt(max(d2, 1e-300)))
        w = max(w, 1e-7 * max(1.0, tmax))
        t = min(t + w, tmax)
        edges.append(t)
        if len(edges) > 20000:
            break
    if edges[-1] < tmax:
        edges.append(tmax)
    return np.asarray(edges)


def _gl_integrate(f: _Integrand, c: float, edges: np.ndarray, npts: int, scale: float):
    x, w = np.polynomial.legendre.leggauss(npts)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    t = (lo + hi) * 0.5 + half * x[None, :]
    val = np.exp(f.log(c + 1j * t) - scale)
    val = np.where(np.isfinite(val), val, 0.0)
    ww = half * w[None, :]
    return float(np.sum(ww * val.real)), float(np.sum(ww * np.abs(val)))


def _contour(order: MeijerGOrder, z: float, acc: EvalAccuracy):
    if order.delta <= 0:
        raise UnsupportedParameters(
            f"G^{order.m},{order.n}_{order.p},{order.q} has no exponentially convergent contour"
        )
    f = _Integrand(order, z)
    c, lo, hi = _choose_abscissa(order, f, z)
    # locate the tail: integrand below 1e-18 of its peak
    tgrid = _T_COARSE
    lf = f.log(c + 1j * tgrid).real
    lf = np.where(np.isnan(lf), -np.inf, lf)
    peak = float(np.max(lf))
    while lf[-1] > peak - 41.0 and tgrid[-1] < 1e9:
        tgrid = tgrid * 10.0
        lf = f.log(c + 1j * tgrid).real
        peak = max(peak, float(np.max(lf)))
    above = np.nonzero(lf > peak - 41.0)[0]
    tmax = float(tgrid[min(above[-1] + 1, len(tgrid) - 1)])
    edges = _panel_edges(f, c, lo, hi, tmax)
    npts = 16
    prev, _ = _gl_integrate(f, c, edges, npts, peak)
    best, absint, err = prev, 0.0, math.inf
    while True:
        if edges.size * npts * 2 > acc.max_nodes:
            break
        if npts < 64:
            npts *= 2
        else:
            edges = np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))
        cur, absint = _gl_integrate(f, c, edges, npts, peak)
        roundoff = 64 * _EPS * absint
        err = (abs(cur - prev) + roundoff) / abs(cur) if cur != 0.0 else math.inf
        best = cur
        if abs(cur - prev) <= max(acc.rel_tol * abs(cur), roundoff):
            break
        prev = cur
    if best == 0.0:
        return -math.inf, 0.0, err
    return peak + math.log(abs(best) / math.pi), math.copysign(1.0, best), err


# ---------------------------------------------------------------- public


def _separate_coincident(order: MeijerGOrder) -> MeijerGOrder:
    b = list(order.b_params)
    moved = False
    for j in range(order.m):
        for k in range(j):
            if abs(b[j] - b[k]) < _COINCIDENT_TOL:
                b[j] = b[k] + _PERTURBATION
                moved = True
    if moved:
        warnings.warn(
            "near-coincident b parameters perturbed by 1e-7 (logarithmic case not supported)",
            RuntimeWarning, stacklevel=3,
        )
    return MeijerGOrder(order.m, order.n, order.a_params, tuple(b))


def meijer_g_eval(order: MeijerGOrder, z: float, acc: EvalAccuracy = DEFAULT_ACCURACY) -> GValue:
    """Evaluate ``G^{m,n}_{p,q}(z | a; b)`` for real ``z > 0``.

    Raises :class:`UnsupportedParameters` for pole-collision orders and
    :class:`NoConvergence` when the budget is exhausted above the guaranteed
    1e-8 relative accuracy.
    """
    if not z > 0 or not math.isfinite(z):
        raise DomainError(f"meijer_g needs finite z > 0, got {z!r}")
    norm, zn = order, z
    if order.p > order.q or (order.p == order.q and z > 1.0):
        norm, zn = order.inverted(), 1.0 / z

    candidates = []
    if zn < 1.0:
        res = _residue_series(norm, zn, acc.rel_tol)
        if res is not None:
            log_abs, sign, err = res
            if err <= acc.rel_tol:
                return GValue(sign * math.exp(log_abs) if log_abs < 709 else sign * math.inf,
                              log_abs, sign, err, "residues")
            candidates.append((err, log_abs, sign, "residues"))

    try:
        log_abs, sign, err = _contour(order, z, acc)
        candidates.append((err, log_abs, sign, "contour"))
    except UnsupportedParameters:
        if candidates:
            pass
        elif order.delta <= 0:
            pert = _separate_coincident(norm)
            res = _residue_series(pert, zn, acc.rel_tol) if zn < 1.0 else None
            if res is None:
                raise
            candidates.append((res[2], res[0], res[1], "residues-perturbed"))
        else:
            raise

    err, log_abs, sign, method = min(candidates, key=lambda c: c[0])
    value = sign * math.exp(log_abs) if log_abs < 709.7 else sign * math.inf
    # the perturbed fallback is itself an O(1e-7) approximation (already warned about)
    limit = PERTURBED_REL_TOL if method == "residues-perturbed" else max(acc.rel_tol, GUARANTEED_REL_TOL)
    if err > limit:
        raise NoConvergence(f"Meijer-G {order.spec()} at z={z!r}", value, err)
    return GValue(value, log_abs, sign, err, method)


def meijer_g(order: MeijerGOrder, z: float, acc: EvalAccuracy = DEFAULT_ACCURACY) -> float:
    return meijer_g_eval(order, z, acc).value


def G(m: int, n: int, a: Sequence[float], b: Sequence[float]) -> MeijerGOrder:
    """Short constructor used by the closed forms."""
    return MeijerGOrder(m, n, tuple(a), tuple(b))


# ---------------------------------------------------------------- golden corpus


@dataclass
class GoldenRecord:
    order: MeijerGOrder
    z: float
    value: float
    tol: float
    label: str = field(default="")


def parse_order(text: str) -> MeijerGOrder:
    head, a, b = (part.strip() for part in text.split("|"))
    m, n = (int(x) for x in head.split())
    vec = lambda s: tuple(float(x) for x in s.split()) if s != "-" else ()
    return MeijerGOrder(m, n, vec(a), vec(b))


def load_golden(path: str | Path | None = None) -> list[GoldenRecord]:
    """Read ``m n | a.. | b.. ; z ; value ; tol ; label`` records."""
    if path is None:
        path = Path(__file__).with_name("data") / "meijerg_golden.txt"
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [x.strip() for x in line.split(";")]
        order = parse_order(fields[0])
        label = fields[4] if len(fields) > 4 else ""
        out.append(GoldenRecord(order, float(fields[1]), float(fields[2]), float(fields[3]), label))
    return out
