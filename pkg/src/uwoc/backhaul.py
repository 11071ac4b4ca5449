"""PON backhaul: delay decomposition, Zipf demand, allocation and throughput."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields

import numpy as np


@dataclass(frozen=True)
class PONConfig:
    r_up_branch: float = 15.0  # Gbps, UOAP -> splitter
    r_up_total: float = 240.0  # Gbps, splitter -> OLT
    fiber_km: float = 80.0
    t_prop_per_km: float = 5e-6  # s/km
    t_fec: float = 0.25e-3
    t_proc: float = 0.2e-3
    t_base: float = 0.4e-3
    t_report: float = 0.4e-6
    t_grant: float = 0.4e-6
    t_guard: float = 100e-9
    t_service: float = 100e-6
    k_proc: float = 0.005e-3
    alpha_powerlaw: float = 2.5
    eta: float = 0.85
    c_max: float = 15.0  # Gbps
    alpha_zipf: float = 1.0
    overload_factor: float = 1.6
    t_base_queue: float = 0.1e-3
    k_load_factor: float = 0.2e-3
    noise_std: float = 0.01e-3
    retrans_unit: float = 0.4e-3
    loss_cap: float = 0.25
    loss_coeff: float = 0.005

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")
        if self.eta > 1:
            raise ValueError("eta must lie in (0, 1]")

    @property
    def effective_capacity(self) -> float:
        return self.eta * self.r_up_total

    def replace(self, **kw) -> "PONConfig":
        return PONConfig(**{**asdict(self), **kw})


def zipf_demands(T: int, alpha: float = 1.0, r_up: float = 240.0, overload_factor: float = 1.6) -> np.ndarray:
    if T < 1:
        raise ValueError("T must be >= 1")
    w = np.arange(1, T + 1, dtype=float) ** -alpha
    return w / w.sum() * (overload_factor * r_up)


def overload_ratio(demands, pon: PONConfig) -> float:
    return max(float(np.sum(demands)) / pon.effective_capacity, 1.0)


def packet_loss(ratio: float, pon: PONConfig) -> float:
    return min(pon.loss_cap, pon.loss_coeff * ratio**pon.alpha_powerlaw)


def ideal_throughput(T: int, pon: PONConfig) -> float:
    return min(pon.effective_capacity / T, pon.c_max)


def saturation_threshold(pon: PONConfig) -> int:
    """Smallest node count at which the fair share drops below the per-link cap."""
    return math.ceil(pon.effective_capacity / pon.c_max)


@dataclass(frozen=True)
class ThroughputReport:
    demands: np.ndarray
    allocated: np.ndarray
    th_real: np.ndarray
    th_ideal: float
    overload: float
    p_loss: float

    @property
    def th_min(self) -> float:
        return float(np.min(self.th_real))

    @property
    def th_max(self) -> float:
        return float(np.max(self.th_real))

    @property
    def th_avg(self) -> float:
        # summation roundoff must not push the mean outside [min, max]
        return float(np.clip(np.mean(self.th_real), self.th_min, self.th_max))


def allocate(demands, pon: PONConfig = PONConfig()) -> ThroughputReport:
    d = np.asarray(demands, dtype=float)
    if d.size == 0:
        raise ValueError("demands must be non-empty")
    if np.any(d < 0):
        raise ValueError("demands must be non-negative")
    T = d.size
    total = float(np.sum(d))
    raw = d / total * pon.effective_capacity if total > 0 else np.zeros_like(d)
    cap = min(pon.c_max, pon.effective_capacity / T)
    alloc = np.minimum(d, np.minimum(raw, cap))
    ratio = overload_ratio(d, pon)
    loss = packet_loss(ratio, pon)
    return ThroughputReport(d, alloc, alloc * (1 - loss), ideal_throughput(T, pon), ratio, loss)


def report_for(T: int, pon: PONConfig = PONConfig()) -> ThroughputReport:
    return allocate(zipf_demands(T, pon.alpha_zipf, pon.r_up_total, pon.overload_factor), pon)


def total_delay(T: int, pon: PONConfig = PONConfig(), noise_seed: int | None = None) -> float:
    """End-to-end upstream delay in seconds; Gaussian queue jitter only when a seed is given."""
    if T < 1:
        raise ValueError("T must be >= 1")
    polling = 0.5 * T * (pon.t_report + pon.t_grant + pon.t_guard + pon.t_service)
    t_dba = pon.t_base + polling + pon.k_proc * T**pon.alpha_powerlaw
    d = zipf_demands(T, pon.alpha_zipf, pon.r_up_total, pon.overload_factor)
    load = float(np.sum(d)) / pon.effective_capacity
    t_queue = pon.t_base_queue + pon.k_load_factor * load**pon.alpha_powerlaw
    if noise_seed is not None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([noise_seed, T])))
        t_queue += rng.normal(0.0, pon.noise_std)
    t_prop = pon.fiber_km * pon.t_prop_per_km
    t_retrans = packet_loss(overload_ratio(d, pon), pon) * pon.retrans_unit
    return t_dba + pon.t_fec + pon.t_proc + t_queue + t_prop + t_retrans


BACKHAUL_COLUMNS = ["T", "delay_ms", "th_ideal", "th_min", "th_max", "th_avg", "p_loss"]


def backhaul_rows(T_values, pon: PONConfig = PONConfig(), noise_seed: int | None = None):
    for T in T_values:
        r = report_for(int(T), pon)
        yield [int(T), total_delay(int(T), pon, noise_seed) * 1e3, r.th_ideal, r.th_min, r.th_max, r.th_avg, r.p_loss]


def write_backhaul_csv(path, T_values, pon: PONConfig = PONConfig(), noise_seed: int | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BACKHAUL_COLUMNS)
        for row in backhaul_rows(T_values, pon, noise_seed):
            w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])
