import pytest
from hypothesis import given, strategies as st

from tddsim.frame import (D, F, U, RfcSet, SlotCapacityError, build_rfc,
                          build_slot_pattern, format_slot, make_rfc_set, parse_ratio,
                          quantize_theta, validate_slot_format)

VALID_BLOCK_COUNTS = [(d, u) for d in range(4) for u in range(4)
                      if 1 <= d + u <= 3]


def test_quoted_two_one_pattern():
    assert format_slot(build_slot_pattern(2, 1)) == "[DDDDFUUUUDDDDF]"


def test_all_dl_blocks_merge():
    sf = build_slot_pattern(3, 0)
    assert format_slot(sf) == "[DDDDDDDDDDDDFF]"
    assert sf.ul_symbols == 0
    validate_slot_format(sf)


def test_one_one_pattern():
    assert format_slot(build_slot_pattern(1, 1)) == "[DDDDFUUUUFFFFF]"


@pytest.mark.parametrize("dl,ul", VALID_BLOCK_COUNTS)
def test_all_valid_patterns_satisfy_invariants(dl, ul):
    sf = build_slot_pattern(dl, ul)
    validate_slot_format(sf)
    assert sf.dl_symbols == 4 * dl
    assert sf.ul_symbols == 4 * ul
    assert len(sf.blocks) == dl + ul
    # block starts match a direction run of four symbols
    for start, direction in sf.blocks:
        assert sf.symbols[start:start + 4] == (direction,) * 4


def test_too_many_blocks_rejected():
    with pytest.raises(SlotCapacityError):
        build_slot_pattern(2, 2)
    with pytest.raises(ValueError):
        build_slot_pattern(0, 0)


def test_single_slot_frame_reproduces_quoted_pattern():
    rfc = build_rfc("2:1", 1)
    assert format_slot(rfc.slots[0]) == "[DDDDFUUUUDDDDF]"


def test_one_to_four_symbol_ratio_within_quantization():
    rfc = build_rfc("1:4", 20)
    ratio = rfc.u_count / rfc.d_count
    assert 4 * 0.85 <= ratio <= 4 * 1.15


def test_balanced_frame_is_symmetric():
    rfc = build_rfc("1:1", 20)
    assert rfc.d_count == rfc.u_count


def test_frame_symbol_accounting():
    for rfc in make_rfc_set().members:
        f_count = sum(sf.symbols.count(F) for sf in rfc.slots)
        assert rfc.d_count + rfc.u_count + f_count == 14 * 20


def test_both_directions_every_half_frame():
    for rfc in make_rfc_set().members:
        for half in (rfc.slots[:10], rfc.slots[10:]):
            dirs = {direction for sf in half for _, direction in sf.blocks}
            assert dirs == {D, U}, rfc.ratio_label


def test_default_set_ordering_and_fallback():
    rfc_set = make_rfc_set()
    fracs = [m.dl_fraction for m in rfc_set.members]
    assert fracs == sorted(fracs)
    assert rfc_set.default.ratio_label == "1:1"


def test_rfc_set_rejects_unordered_members():
    members = (build_rfc("2:1", 20), build_rfc("1:2", 20))
    with pytest.raises(ValueError):
        RfcSet(members=members)


def test_quantize_anchor_points():
    rfc_set = make_rfc_set()
    assert quantize_theta(0.2, rfc_set).ratio_label == "1:4"
    assert quantize_theta(0.5, rfc_set).ratio_label == "1:1"
    # 0.68 sits nearer 2/3 than 3/4
    assert quantize_theta(0.68, rfc_set).ratio_label == "2:1"


def test_quantize_tie_prefers_more_dl():
    rfc_set = make_rfc_set(("1:2", "2:1"), 20)
    # 0.5 is equidistant from 1/3 and 2/3
    assert quantize_theta(0.5, rfc_set).ratio_label == "2:1"


def test_quantize_rejects_out_of_range():
    rfc_set = make_rfc_set()
    with pytest.raises(ValueError):
        quantize_theta(1.5, rfc_set)


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
def test_quantize_monotone(theta1, theta2):
    rfc_set = make_rfc_set()
    if theta1 > theta2:
        theta1, theta2 = theta2, theta1
    f1 = quantize_theta(theta1, rfc_set).dl_fraction
    f2 = quantize_theta(theta2, rfc_set).dl_fraction
    assert f1 <= f2


@given(st.integers(min_value=1, max_value=40))
def test_build_rfc_invariants_any_length(slots_per_frame):
    rfc = build_rfc("1:1", slots_per_frame)
    for sf in rfc.slots:
        validate_slot_format(sf)
    assert rfc.d_count > 0 and rfc.u_count > 0


def test_parse_ratio_rejects_zero_direction():
    with pytest.raises(ValueError):
        parse_ratio("1:0")
    with pytest.raises(ValueError):
        parse_ratio("nonsense")


def test_build_rfc_unknown_label():
    with pytest.raises(ValueError):
        build_rfc("5:0", 20)


def test_no_unguarded_dl_to_ul_switch_across_slots():
    # every slot layout ends with at least one F, so a U block can never
    # directly follow a D block across a slot boundary
    for rfc in make_rfc_set().members:
        for sf in rfc.slots:
            assert sf.symbols[-1] == F
