import numpy as np
import pytest

from tddsim.scenario import (RngFactory, STREAM_TOPOLOGY, Scenario, ScenarioError,
                             build_topology, load_scenario, parse_overrides,
                             replication_seed, scenario_to_text)

TABLE_DEFAULTS = dict(cell_count=21, bs_antennas=8, ue_antennas=2, ue_per_cell_dl=10,
                      ue_per_cell_ul=10, payload_dl_bits=400, payload_ul_bits=400,
                      bandwidth_hz=10e6, scs_hz=30e3, carrier_freq_hz=3.5e9,
                      rfc_update_period_ms=10.0, prep_delay_symbols=3.0,
                      pdsch_decode_symbols=4.5, pusch_decode_symbols=5.5)


def test_empty_document_yields_defaults():
    s = load_scenario("")
    for key, value in TABLE_DEFAULTS.items():
        assert getattr(s, key) == value
    assert s.slots_per_frame == 20
    assert s.slot_ms == pytest.approx(0.5)
    assert s.prb_count == 24


def test_document_parsing_with_comments_and_overrides():
    text = """
    # cluster size
    cell_count = 7
    seed = 42
    beta_hat = 0.2   # window shaping
    dynamic_cli_free = true
    quantile_targets = 0.01,0.001
    """
    s = load_scenario(text)
    assert s.cell_count == 7 and s.seed == 42
    assert s.beta_hat == 0.2
    assert s.dynamic_cli_free is True
    assert s.quantile_targets == (0.01, 0.001)
    # the rest stays at defaults
    assert s.ue_per_cell_dl == 10


def test_override_precedence():
    s = load_scenario("cell_count = 7", overrides=parse_overrides(["cell_count=3"]))
    assert s.cell_count == 3


def test_beta_hat_out_of_range_rejected():
    with pytest.raises(ScenarioError, match="beta_hat"):
        load_scenario("beta_hat = 1.5")


def test_unknown_key_rejected():
    with pytest.raises(ScenarioError, match="unknown scenario key"):
        load_scenario("no_such_key = 3")


def test_malformed_line_rejected():
    with pytest.raises(ScenarioError, match="key = value"):
        load_scenario("cell_count 7")


def test_bad_types_name_the_field():
    with pytest.raises(ScenarioError, match="cell_count"):
        load_scenario("cell_count = seven")
    with pytest.raises(ScenarioError, match="pure_sir"):
        load_scenario("pure_sir = maybe")


def test_validation_names_field():
    with pytest.raises(ScenarioError, match="quantile_targets"):
        Scenario(quantile_targets=(0.5, 1.5)).validate()
    with pytest.raises(ScenarioError, match="tdd_policy"):
        Scenario(tdd_policy="other").validate()
    with pytest.raises(ScenarioError, match="rfc_update_period_ms"):
        Scenario(rfc_update_period_ms=7.0).validate()


def test_resolved_echo_round_trips():
    s = load_scenario("cell_count = 5\nseed = 9")
    text = scenario_to_text(s)
    s2 = load_scenario(text)
    assert s2 == s


def test_offered_share_from_rates():
    s = Scenario(arrival_rate_dl=375.0, arrival_rate_ul=125.0)
    assert s.offered_dl_share == pytest.approx(0.75)


def test_alternating_pattern_rates_preserve_cell_total():
    s = Scenario(cell_ratio_pattern="alternating", pattern_dl_share=0.75)
    for cell in range(4):
        lam_dl, lam_ul = s.cell_arrival_rates(cell)
        total = (s.ue_per_cell_dl * s.payload_dl_bits * lam_dl
                 + s.ue_per_cell_ul * s.payload_ul_bits * lam_ul)
        base = (s.ue_per_cell_dl * s.payload_dl_bits * s.arrival_rate_dl
                + s.ue_per_cell_ul * s.payload_ul_bits * s.arrival_rate_ul)
        assert total == pytest.approx(base)
    assert s.cell_dl_share(0) == pytest.approx(0.75)
    assert s.cell_dl_share(1) == pytest.approx(0.25)
    assert s.offered_dl_share == pytest.approx(0.5, abs=0.02)


# -- topology ---------------------------------------------------------------------

def small_scenario(**kw):
    defaults = dict(cell_count=21, ue_per_cell_dl=3, ue_per_cell_ul=3, seed=5)
    defaults.update(kw)
    return Scenario(**defaults)


def test_single_cell_single_ue():
    s = Scenario(cell_count=1, ue_per_cell_dl=1, ue_per_cell_ul=0, seed=1)
    topo = build_topology(s, RngFactory(1).stream(STREAM_TOPOLOGY))
    assert topo.n_cells == 1 and topo.n_ues == 1
    assert topo.ue_cell[0] == 0


def test_topology_deterministic():
    s = small_scenario()
    t1 = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    t2 = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    assert np.array_equal(t1.ue_xy, t2.ue_xy)
    assert np.array_equal(t1.gain_db, t2.gain_db)
    assert np.array_equal(t1.ue_cell, t2.ue_cell)


def test_serving_cell_is_argmax_gain():
    s = small_scenario()
    topo = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    bs_to_ue = topo.gain_db[:s.cell_count, s.cell_count:]
    for ue in range(topo.n_ues):
        serving = topo.ue_cell[ue]
        assert bs_to_ue[serving, ue] == bs_to_ue[:, ue].max()


def test_gain_table_complete_and_symmetric():
    s = small_scenario(cell_count=4)
    topo = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    n = s.cell_count + topo.n_ues
    assert topo.gain_db.shape == (n, n)
    assert np.all(np.isfinite(topo.gain_db))
    assert np.allclose(topo.gain_db, topo.gain_db.T)


def test_bs_bs_pairs_attenuate_less_than_ue_pairs_at_same_distance():
    # same separation, lower exponent: expected gain difference matches the
    # pathloss-exponent override (shadowing aside, checked in expectation)
    s = small_scenario(cell_count=21, shadowing_std_db=0.0)
    topo = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    d01 = np.linalg.norm(topo.cell_xy[0] - topo.cell_xy[1])
    expected_delta = 10.0 * (s.pathloss_exponent - s.bs_bs_pathloss_exponent) \
        * np.log10(d01 / s.ref_distance_m)
    # compare a BS-BS gain with the UE-exponent prediction at that distance
    from tddsim.scenario import free_space_pathloss_db
    pl0 = free_space_pathloss_db(s.ref_distance_m, s.carrier_freq_hz)
    ue_like = -(pl0 + 10.0 * s.pathloss_exponent * np.log10(d01 / s.ref_distance_m))
    assert topo.gain_db[0, 1] - ue_like == pytest.approx(expected_delta, abs=1e-9)


def test_ues_within_drop_annulus():
    s = small_scenario()
    topo = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    for ue in range(topo.n_ues):
        center = topo.cell_xy[topo.ue_drop_cell[ue]]
        r = np.linalg.norm(topo.ue_xy[ue] - center)
        assert s.min_ue_distance_m <= r <= s.resolved_cell_radius_m + 1e-9


def test_direction_split():
    s = small_scenario(ue_per_cell_dl=2, ue_per_cell_ul=5)
    topo = build_topology(s, RngFactory(s.seed).stream(STREAM_TOPOLOGY))
    assert int(np.sum(topo.ue_dir == 0)) == 2 * s.cell_count
    assert int(np.sum(topo.ue_dir == 1)) == 5 * s.cell_count


def test_replication_seeds_are_distinct():
    seeds = {replication_seed(1, p, r) for p in range(4) for r in range(4)}
    assert len(seeds) == 16


def test_rng_factory_streams_are_stable_and_independent():
    f = RngFactory(123)
    a1 = f.stream(7).standard_normal(4)
    a2 = f.stream(7).standard_normal(4)
    b = f.stream(8).standard_normal(4)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
