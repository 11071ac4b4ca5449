import csv

import numpy as np
import pytest

from uwoc import backhaul as bh

PON = bh.PONConfig()


def test_zipf_single():
    assert bh.zipf_demands(1) == pytest.approx([1.6 * 240])


def test_zipf_two():
    d = bh.zipf_demands(2)
    assert d / d.sum() == pytest.approx([2 / 3, 1 / 3], rel=1e-14)


@pytest.mark.parametrize("T", [1, 5, 16, 64])
def test_zipf_total(T):
    assert bh.zipf_demands(T).sum() == pytest.approx(384.0, rel=1e-13)
    with pytest.raises(ValueError):
        bh.zipf_demands(0)


def test_effective_capacity():
    assert PON.effective_capacity == pytest.approx(204.0)


def test_overload_and_loss_at_16():
    d = bh.zipf_demands(16)
    ratio = bh.overload_ratio(d, PON)
    assert ratio == pytest.approx(384 / 204, rel=1e-13)
    assert ratio == pytest.approx(1.8824, rel=1e-4)
    assert bh.packet_loss(ratio, PON) == pytest.approx(0.005 * (384 / 204) ** 2.5, rel=1e-13)
    assert bh.packet_loss(ratio, PON) == pytest.approx(0.0243, rel=1e-2)


def test_loss_cap():
    assert bh.packet_loss(1e3, PON) == 0.25


def test_saturation_threshold():
    assert bh.saturation_threshold(PON) == 14
    assert bh.ideal_throughput(13, PON) == 15.0
    assert bh.ideal_throughput(14, PON) == pytest.approx(204 / 14)
    assert bh.ideal_throughput(20, PON) == pytest.approx(204 / 20)


def test_zero_demand():
    r = bh.allocate(np.zeros(8), PON)
    assert np.all(r.th_real == 0)
    assert r.overload == 1.0
    assert r.p_loss == pytest.approx(0.005)


def test_allocate_rejects():
    with pytest.raises(ValueError):
        bh.allocate([], PON)
    with pytest.raises(ValueError):
        bh.allocate([1.0, -1.0], PON)


def test_propagation_term():
    assert PON.fiber_km * PON.t_prop_per_km == pytest.approx(0.4e-3)


def delay_oracle(T):
    polling = 0.5 * T * (0.4e-6 + 0.4e-6 + 100e-9 + 100e-6)
    dba = 0.4e-3 + polling + 0.005e-3 * T ** 2.5
    load = 384 / 204
    queue = 0.1e-3 + 0.2e-3 * load ** 2.5
    retrans = min(0.25, 0.005 * max(load, 1.0) ** 2.5) * 0.4e-3
    return dba + 0.25e-3 + 0.2e-3 + queue + 80 * 5e-6 + retrans


def test_delay_at_16():
    assert bh.total_delay(16, PON) == pytest.approx(delay_oracle(16), rel=1e-13)
    assert bh.total_delay(16, PON) * 1e3 == pytest.approx(8.2591831, rel=1e-7)


def test_delay_monotone_and_deterministic():
    ds = [bh.total_delay(T, PON) for T in range(1, 33)]
    assert np.all(np.diff(ds) > 0)
    assert ds == [bh.total_delay(T, PON) for T in range(1, 33)]


def test_delay_noise_is_seeded():
    a = bh.total_delay(8, PON, noise_seed=3)
    assert a == bh.total_delay(8, PON, noise_seed=3)
    assert a != bh.total_delay(8, PON)
    assert abs(a - bh.total_delay(8, PON)) < 10 * PON.noise_std


@pytest.mark.parametrize("T", range(2, 17))
def test_throughput_invariants(T):
    r = bh.report_for(T, PON)
    assert r.th_real.sum() <= PON.effective_capacity + 1e-12
    assert r.th_min <= r.th_avg <= r.th_max
    assert 0 <= r.p_loss <= 0.25
    if T > bh.saturation_threshold(PON):
        assert r.th_max <= r.th_ideal


def test_config_validation():
    with pytest.raises(ValueError):
        bh.PONConfig(eta=1.5)
    with pytest.raises(ValueError):
        bh.PONConfig(fiber_km=0.0)
    assert PON.replace(eta=0.5).effective_capacity == pytest.approx(120.0)


def test_csv(tmp_path):
    path = tmp_path / "bh.csv"
    bh.write_backhaul_csv(path, [2, 16])
    rows = list(csv.reader(path.open()))
    assert rows[0] == bh.BACKHAUL_COLUMNS
    assert len(rows) == 3
    assert rows[2][0] == "16"
    assert float(rows[2][1]) == pytest.approx(8.2591831, rel=1e-7)
