"""Monte Carlo simulation of the O-RIS reflection configurations."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np
from scipy import special as sc
from scipy import stats
from scipy.integrate import cumulative_trapezoid

from .channel import pdf_fading_gg
from .metrics import ModulationSpec

CHUNK = 1 << 16
WORKERS_ENV = "UWOC_MAX_WORKERS"


# ---------------------------------------------------------------- configurations


@dataclass(frozen=True)
class PassiveRandom:
    pass


@dataclass(frozen=True)
class PassiveIdeal:
    pass


@dataclass(frozen=True)
class PassiveControlled:
    sigma_phase: float

    def __post_init__(self):
        if not self.sigma_phase >= 0:
            raise ValueError("sigma_phase must be >= 0")


@dataclass(frozen=True)
class ActiveControlled:
    gain_db: float = 7.0
    sigma_phase_active: float = math.pi / 36
    p_noise_element_dbw: float = -113.0

    def __post_init__(self):
        if not self.gain_db > 0:
            raise ValueError("active gain must exceed 0 dB")
        if not self.sigma_phase_active >= 0:
            raise ValueError("sigma_phase_active must be >= 0")

    @property
    def amplitude(self) -> float:
        # gain_db is a power gain; the element applies its square root to the field
        return 10 ** (self.gain_db / 20)

    @property
    def p_noise(self) -> float:
        return 10 ** (self.p_noise_element_dbw / 10)


@dataclass(frozen=True)
class PassiveQuantized:
    bits: int

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 1:
            raise ValueError("bits must be an integer >= 1")


OrisConfig = Union[PassiveRandom, PassiveIdeal, PassiveControlled, ActiveControlled, PassiveQuantized]


def config_label(cfg: OrisConfig) -> str:
    if isinstance(cfg, PassiveControlled):
        return f"passive_controlled(sigma={cfg.sigma_phase!r})"
    if isinstance(cfg, PassiveQuantized):
        return f"passive_quantized(bits={cfg.bits})"
    if isinstance(cfg, ActiveControlled):
        return f"active_controlled(gain_db={cfg.gain_db!r},sigma={cfg.sigma_phase_active!r},pn_dbw={cfg.p_noise_element_dbw!r})"
    return {PassiveRandom: "passive_random", PassiveIdeal: "passive_ideal"}[type(cfg)]


@dataclass(frozen=True)
class SimPlan:
    trials: int
    seed: int
    N_elements: int
    alpha: float
    beta: float
    xi_sq: float = math.inf
    A0: float = 1.0
    gamma_bar_db: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.N_elements < 1:
            raise ValueError("N_elements must be >= 1")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("fading shapes must be positive")
        if not (self.xi_sq > 0 and 0 < self.A0 <= 1):
            raise ValueError("invalid pointing parameters")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


# ---------------------------------------------------------------- sampling


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one chunk of trials."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def sample_cascade(alpha: float, beta: float, rng: np.random.Generator, size=None):
    """Product of two unit-mean Gamma variates."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("shapes must be positive")
    return rng.gamma(alpha, 1.0 / alpha, size) * rng.gamma(beta, 1.0 / beta, size)


def sample_pointing(xi_sq: float, A0: float, rng: np.random.Generator, size=None):
    """h_p with CDF (h/A0)^xi_sq on (0, A0]."""
    u = rng.random(size)
    if math.isinf(xi_sq):
        return np.full_like(u, A0)
    return A0 * u ** (1.0 / xi_sq)


def quantize_phase(phi, bits: int):
    levels = 2**bits
    step = 2 * np.pi / levels
    return np.mod(np.round(np.mod(phi, 2 * np.pi) / step), levels) * step


def _gain_chunk(cfg: OrisConfig, plan: SimPlan, index: int, n: int) -> np.ndarray:
    """gamma / gamma_bar for n trials."""
    rng = chunk_rng(plan.seed, index)
    N = plan.N_elements
    h_amp = sample_cascade(plan.alpha, plan.beta, rng, (n, N))
    h_phase = rng.uniform(0.0, 2 * np.pi, (n, N))
    h_p = sample_pointing(plan.xi_sq, plan.A0, rng, n)
    if isinstance(cfg, PassiveIdeal):
        amp = np.sum(h_amp, axis=1)
        return h_p**2 * amp**2
    if isinstance(cfg, PassiveRandom):
        rho = rng.random((n, N))
        theta = rng.uniform(0.0, 2 * np.pi, (n, N))
    elif isinstance(cfg, PassiveControlled):
        rho = rng.random((n, N))
        theta = -h_phase + rng.normal(0.0, cfg.sigma_phase, (n, N))
    elif isinstance(cfg, PassiveQuantized):
        rho = rng.random((n, N))
        theta = quantize_phase(-h_phase, cfg.bits)
    elif isinstance(cfg, ActiveControlled):
        rho = cfg.amplitude
        theta = -h_phase + rng.normal(0.0, cfg.sigma_phase_active, (n, N))
    else:
        raise TypeError(f"unknown configuration {cfg!r}")
    field_sum = np.sum(rho * h_amp * np.exp(1j * (h_phase + theta)), axis=1)
    g = h_p**2 * np.abs(field_sum) ** 2
    if isinstance(cfg, ActiveControlled):
        g = g / (1.0 + N * cfg.p_noise)
    return g


def _chunks(trials: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, trials - i * CHUNK)) for i in range((trials + CHUNK - 1) // CHUNK)]


def worker_count(requested: int | None = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _map_chunks(fn, trials: int, workers: int | None):
    jobs = _chunks(trials)
    w = worker_count(workers)
    if w == 1 or len(jobs) == 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(w) as pool:
        return list(pool.map(lambda j: fn(*j), jobs))


def simulate_gain(cfg: OrisConfig, plan: SimPlan, workers: int | None = None) -> np.ndarray:
    """All per-trial normalized SNRs gamma/gamma_bar (in trial order)."""
    parts = _map_chunks(lambda i, n: _gain_chunk(cfg, plan, i, n), plan.trials, workers)
    return np.concatenate(parts)


def simulate_snr(cfg: OrisConfig, plan: SimPlan, gamma_bar: float, workers: int | None = None) -> np.ndarray:
    return gamma_bar * simulate_gain(cfg, plan, workers)


# ---------------------------------------------------------------- estimators


@dataclass(frozen=True)
class Estimate:
    value: float
    lo: float
    hi: float
    n: int


def _wilson(k: int, n: int) -> Estimate:
    ci = stats.binomtest(k, n).proportion_ci(0.95, method="wilson")
    return Estimate(k / n, float(ci.low), float(ci.high), n)


def empirical_op(samples, gamma_th: float) -> Estimate:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample stream")
    return _wilson(int(np.count_nonzero(x <= gamma_th)), x.size)


def conditional_ber(gamma, mod: ModulationSpec):
    """Instantaneous error probability delta/2 * sum_k Q(p, q_k gamma)."""
    g = np.asarray(gamma, dtype=float)
    return 0.5 * mod.delta * sum(sc.gammaincc(mod.p, q * g) for q in mod.q_k)


def empirical_ber(samples, mod: ModulationSpec) -> Estimate:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample stream")
    pe = conditional_ber(x, mod)
    m = float(np.mean(pe))
    se = float(np.std(pe, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.inf
    return Estimate(m, max(m - 1.96 * se, 0.0), min(m + 1.96 * se, 1.0), x.size)


def op_curve(cfg: OrisConfig, plan: SimPlan, gamma_th: float, workers: int | None = None) -> list[Estimate]:
    """Empirical OP on plan.gamma_bar_db, reusing one gain sample per trial."""
    gbar = 10 ** (np.asarray(plan.gamma_bar_db, dtype=float) / 10)
    thr = gamma_th / gbar

    def count(i, n):
        g = _gain_chunk(cfg, plan, i, n)
        return np.array([np.count_nonzero(g <= t) for t in thr], dtype=np.int64)

    counts = np.sum(_map_chunks(count, plan.trials, workers), axis=0)
    return [_wilson(int(k), plan.trials) for k in counts]


def write_op_csv(path, rows: Iterable[tuple]) -> None:
    """rows of (gamma_bar_db, config, N, trials, Estimate)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma_bar_db", "config", "N", "trials", "op_hat", "op_lo", "op_hi"])
        for gdb, cfg, N, trials, est in rows:
            w.writerow([repr(float(gdb)), cfg, N, trials, repr(est.value), repr(est.lo), repr(est.hi)])


# ---------------------------------------------------------------- sum approximation


@dataclass(frozen=True)
class SumApproxReport:
    N: int
    trials: int
    mean: float
    mean_expected: float
    mean_se: float
    var: float
    var_expected: float
    ks_distance: float


def gg_cdf_table(A: float, B: float, Omega: float, lo: float, hi: float, points: int = 40001):
    """Gamma-Gamma CDF tabulated on a log grid by cumulative quadrature of the density."""
    u = np.linspace(math.log(lo), math.log(hi), points)
    h = np.exp(u)
    dens = pdf_fading_gg(h, A, B, Omega) * h
    F = cumulative_trapezoid(dens, u, initial=0.0)
    # mass below lo from the small-argument power law h^min(A,B)
    s = min(A, B)
    F = F + dens[0] / s
    return h, np.clip(F, 0.0, 1.0)


def validate_sum_approx(alpha: float, beta: float, N: int, trials: int = 100_000, seed: int = 0) -> SumApproxReport:
    rng = chunk_rng(seed, 0)
    y = np.sum(sample_cascade(alpha, beta, rng, (trials, N)), axis=1)
    var_exp = (1 / alpha + 1 / beta + 1 / (alpha * beta)) * N
    A, B = N * alpha, N * beta
    ys = np.sort(y)
    h, F = gg_cdf_table(A, B, float(N), ys[0] * 1e-3, ys[-1] * 1e3)
    Fs = np.interp(ys, h, F)
    n = ys.size
    ks = float(max(np.max(np.arange(1, n + 1) / n - Fs), np.max(Fs - np.arange(n) / n)))
    return SumApproxReport(N, trials, float(np.mean(y)), float(N), float(np.std(y, ddof=1) / math.sqrt(trials)),
                           float(np.var(y, ddof=1)), var_exp, ks)
