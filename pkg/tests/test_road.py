import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from advfuzz.errors import InvalidGeometryError, OutOfRoadError
from advfuzz.kinematics import OrientedBox
from advfuzz.road import (EDGE, STRADDLING, YELLOW, Point, build_road, distance_to_illegal_lines, lane_of_box,
                          load_road, road_from_dict)


def box_at(d, s=100.0, heading=0.0, length=4.7, width=2.0):
    return OrientedBox(Point(s, d), heading, length, width)


def corner_lane_oracle(road, box):
    """Lane whose open band holds every corner, else None."""
    ds = [c.d for c in box.corners()]
    for i in range(road.lane_count):
        lo, hi = i * road.lane_width, (i + 1) * road.lane_width
        if all(lo < d < hi for d in ds):
            return i
    return None


def test_two_lane_urban_road(urban2):
    assert urban2.centerlines() == [1.75, 5.25]
    assert (urban2.bubble_start, urban2.bubble_end) == (50.0, 350.0)
    assert urban2.has_yellow_line
    assert {line.kind for line in urban2.illegal_lines} == {YELLOW, EDGE}


def test_single_lane_edges():
    road = build_road(1, 3.5, 400, 50, 300)
    assert road.centerlines() == [1.75]
    assert sorted(line.offset for line in road.illegal_lines) == [0.0, 3.5]


def test_four_lane_highway(highway4):
    assert highway4.lane_count == 4
    assert highway4.road_length == 600.0
    assert not highway4.has_yellow_line


@pytest.mark.parametrize("args", [(0, 3.5, 500, 50, 300), (2, -3.5, 500, 50, 300), (2, 3.5, 500, 0, 300),
                                  (2, 3.5, 500, 50, 0), (2, 3.5, math.nan, 50, 300), (1.5, 3.5, 500, 50, 300)])
def test_bad_dimensions(args):
    with pytest.raises(InvalidGeometryError):
        build_road(*args)


def test_bubble_overflow():
    with pytest.raises(InvalidGeometryError):
        build_road(2, 3.5, 300, 50, 300)


def test_lane_of_box_examples(urban2):
    assert lane_of_box(urban2, box_at(1.75)) == 0
    assert lane_of_box(urban2, box_at(3.5)) is STRADDLING
    # corners at d = 5.0 and 5.4
    narrow = OrientedBox(Point(100.0, 5.2), 0.0, 4.0, 0.4)
    assert sorted({round(c.d, 9) for c in narrow.corners()}) == [5.0, 5.4]
    assert lane_of_box(urban2, narrow) == corner_lane_oracle(urban2, narrow) == 1


def test_lane_of_box_outside_road(urban2):
    with pytest.raises(OutOfRoadError):
        lane_of_box(urban2, box_at(0.5))


def test_distance_examples(urban2):
    assert distance_to_illegal_lines(urban2, box_at(0.0)) == 0.0
    assert distance_to_illegal_lines(urban2, box_at(1.75)) == pytest.approx(0.75, abs=1e-12)
    assert distance_to_illegal_lines(urban2, box_at(-0.2)) == 0.0   # across the yellow line


@pytest.mark.parametrize("w", [3.5, 3.0, 3.75])
def test_centerlines_equidistant(w):
    road = build_road(5, w, 800, 50, 300)
    assert {road.centerline(i + 1) - road.centerline(i) for i in range(4)} == {w}


def test_centerlines_equidistant_inexact_width():
    # 3.2 has no exact binary form; spacing holds to rounding
    road = build_road(5, 3.2, 800, 50, 300)
    for i in range(4):
        assert road.centerline(i + 1) - road.centerline(i) == pytest.approx(3.2, abs=1e-12)


in_road_box = st.builds(
    lambda d, h: box_at(d, heading=h),
    st.floats(1.3, 5.7), st.floats(-0.1, 0.1),
)


@given(in_road_box)
def test_lane_assignment_partition(box):
    road = build_road(2, 3.5, 500, 50, 300)
    try:
        lane = lane_of_box(road, box)
    except OutOfRoadError:
        return
    assert lane == corner_lane_oracle(road, box)
    assert lane is STRADDLING or 0 <= lane < road.lane_count


@given(st.floats(1.1, 6.9), st.floats(0.01, 1.0))
def test_line_distance_monotone_toward_line(d, step):
    road = build_road(2, 3.5, 500, 50, 300)
    here = distance_to_illegal_lines(road, box_at(d))
    # moving toward the nearer edge never increases the distance
    toward = -1 if d < road.width / 2 else 1
    moved = distance_to_illegal_lines(road, box_at(d + toward * step))
    assert here >= 0.0
    assert moved <= here + 1e-12


def test_presets_and_custom_file(tmp_path):
    assert load_road("urban2").lane_count == 2
    assert load_road("highway4").lane_count == 4
    cfg = {"road": {"lanes": 3, "lane_width_m": 3.0, "length_m": 450, "bubble_offset_m": 40,
                    "bubble_length_m": 200, "yellow_line": True}}
    path = tmp_path / "road.json"
    path.write_text(json.dumps(cfg))
    road = load_road(f"custom:{path}")
    assert (road.lane_count, road.lane_width, road.bubble_end, road.has_yellow_line) == (3, 3.0, 240.0, True)
    assert road_from_dict(road.to_dict()) == road
    with pytest.raises(InvalidGeometryError):
        load_road("motorway9")
