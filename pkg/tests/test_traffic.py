import numpy as np
import pytest

from tddsim.traffic import DL, UL, Packet, TrafficState, generate_arrivals


def make_packet(pid=0, ue=0, direction=DL, size=400, arrival=0.0):
    return Packet(pid=pid, ue=ue, direction=direction, size_bits=size,
                  remaining_bits=size, arrival_ms=arrival, earliest_tx_ms=arrival)


def test_zero_rate_gives_no_arrivals():
    rng = np.random.default_rng(0)
    assert generate_arrivals(rng, 0.0, 10_000.0).size == 0


def test_arrival_times_sorted_and_in_horizon():
    rng = np.random.default_rng(1)
    t = generate_arrivals(rng, 500.0, 2_000.0)
    assert np.all(np.diff(t) > 0)
    assert t[0] >= 0 and t[-1] < 2_000.0


def test_poisson_count_statistics():
    # 1000 independent horizons at 125/s over 10 s: the mean count estimator
    # has sigma = sqrt(1250/1000); check the 3-sigma band around 1250
    rng = np.random.default_rng(7)
    counts = [generate_arrivals(rng, 125.0, 10_000.0).size for _ in range(1000)]
    mean = np.mean(counts)
    assert abs(mean - 1250.0) <= 3.0 * np.sqrt(1250.0 / 1000.0)
    # and the count variance is Poisson-like (generous band)
    assert 0.8 * 1250 <= np.var(counts) <= 1.2 * 1250


def test_offered_load_arithmetic_matches_one_mbps_point():
    # 10 users x 400 bits x 125/s = 0.5 Mbps per direction per cell
    k, f, lam = 10, 400, 125.0
    omega_dl = k * f * lam
    assert omega_dl == pytest.approx(0.5e6)
    assert 2 * omega_dl == pytest.approx(1.0e6)


def test_invalid_args():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        generate_arrivals(rng, -1.0, 10.0)
    with pytest.raises(ValueError):
        generate_arrivals(rng, 10.0, 0.0)


# -- buffer accounting -----------------------------------------------------------

def test_empty_buffers_sample_zero():
    state = TrafficState(2)
    assert state.sample_buffered(0) == (0, 0)


def test_fresh_dl_packet_counts_fully():
    state = TrafficState(1)
    state.push(0, make_packet(direction=DL, size=400))
    assert state.sample_buffered(0) == (400, 0)


def test_half_served_accounting_oracle():
    state = TrafficState(1)
    p_dl = make_packet(pid=0, ue=0, direction=DL, size=400)
    p_ul = make_packet(pid=1, ue=1, direction=UL, size=400)
    state.push(0, p_dl)
    state.push(0, p_ul)
    state.serve_bits(0, p_dl, 200)
    assert state.sample_buffered(0) == (200, 400)
    assert state.sample_buffered(0) == state.recount_buffered(0)


def test_sampling_does_not_mutate():
    state = TrafficState(1)
    state.push(0, make_packet())
    before = [list(q) for q in state.cells[0].queues.values()]
    state.sample_buffered(0)
    state.sample_buffered(0)
    after = [list(q) for q in state.cells[0].queues.values()]
    assert before == after
    assert state.sample_buffered(0) == (400, 0)


def test_conservation_identity():
    state = TrafficState(1)
    packets = [make_packet(pid=i, ue=i % 3) for i in range(10)]
    for p in packets:
        state.push(0, p)
    for p in packets[:4]:
        state.serve_bits(0, p, p.remaining_bits)
        state.complete(0, p)
    state.drop(0, packets[4])
    state.check_conservation()
    assert state.generated[DL] == 10
    assert state.completed[DL] == 4
    assert state.dropped[DL] == 1
    assert state.residual_packets() == 5
    assert state.residual_bits() == 5 * 400
    # totals track the scans exactly
    assert state.sample_buffered(0) == state.recount_buffered(0)


def test_overserving_rejected():
    state = TrafficState(1)
    p = make_packet()
    state.push(0, p)
    with pytest.raises(RuntimeError):
        state.serve_bits(0, p, 500)


def test_out_of_order_completion_rejected():
    state = TrafficState(1)
    first = make_packet(pid=0)
    second = make_packet(pid=1)
    state.push(0, first)
    state.push(0, second)
    with pytest.raises(RuntimeError):
        state.complete(0, second)
