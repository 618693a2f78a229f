import pytest
from hypothesis import given, strategies as st

from citypulse.errors import BadGeometry
from citypulse.geo import (CITY_PRESETS, FilterReason, GeoBox, GeoPoint, GeoTagKind, GeotagBreakdown,
                           PlaceMode, city_filter, classify_geotag, contains, geotag_breakdown, overlaps)
from citypulse.ingest import parse_record
from conftest import tweet

CITY = GeoBox.from_corners((0.0, 0.0), (10.0, 10.0))


def ring(s, w, n, e):
    return [[w, s], [e, s], [e, n], [w, n]]


def test_box_validation():
    with pytest.raises(BadGeometry):
        GeoBox.from_corners((5, 0), (1, 10))
    with pytest.raises(BadGeometry):
        GeoBox.from_corners((0, 170), (10, -170))  # antimeridian crossing
    with pytest.raises(BadGeometry):
        GeoPoint(float("nan"), 0)


def test_closed_box_edges_are_inside():
    assert contains(CITY, GeoPoint(0.0, 10.0))
    assert not contains(CITY, GeoPoint(-1e-9, 5.0))


def test_coordinate_dominates_place():
    rec = parse_record(tweet(coords=(50.0, 50.0), place_ring=ring(1, 1, 2, 2)))
    d = city_filter(rec, CITY)
    assert not d.accepted
    assert d.reason is FilterReason.COORDINATE_OUTSIDE



def test_place_mode_table():
    straddling = parse_record(tweet(place_ring=ring(8, 8, 11, 11.5)))
    centre_out = parse_record(tweet(place_ring=ring(9, 9, 20, 20)))
    assert not city_filter(straddling, CITY, PlaceMode.CONTAINMENT).accepted
    assert city_filter(straddling, CITY, PlaceMode.CENTER).accepted
    assert city_filter(straddling, CITY, PlaceMode.OVERLAP).accepted
    assert not city_filter(centre_out, CITY, PlaceMode.CENTER).accepted
    assert city_filter(centre_out, CITY, PlaceMode.OVERLAP).accepted


def test_untagged_rejected():
    d = city_filter(parse_record(tweet()), CITY)
    assert not d.accepted and d.reason is FilterReason.NO_GEO_INFO


def test_classify_geotag():
    assert classify_geotag(parse_record(tweet(coords=(1, 1)))) is GeoTagKind.PRECISE_COORDINATE
    assert classify_geotag(parse_record(tweet(place_ring=ring(1, 1, 1, 1)))) is GeoTagKind.DEGENERATE_PLACE_BOX
    assert classify_geotag(parse_record(tweet(place_ring=ring(1, 1, 2, 2)))) is GeoTagKind.VARIABLE_PLACE_BOX
    assert classify_geotag(parse_record(tweet())) is GeoTagKind.UNTAGGED


def test_breakdown_distinct_and_percentages():
    recs = [parse_record(tweet(coords=(1, 1))), parse_record(tweet(coords=(1, 1))),
            parse_record(tweet(place_ring=ring(1, 1, 1, 1))), parse_record(tweet())]
    table = geotag_breakdown(recs)
    assert table[GeoTagKind.PRECISE_COORDINATE].tweets == 2
    assert table[GeoTagKind.PRECISE_COORDINATE].distinct == 1
    assert table[GeoTagKind.PRECISE_COORDINATE].percentage == pytest.approx(200 / 3)
    assert table[GeoTagKind.VARIABLE_PLACE_BOX].tweets == 0


def test_breakdown_merge_equals_whole():
    recs = [parse_record(tweet(coords=(i % 3, 1))) for i in range(7)]
    recs += [parse_record(tweet(place_ring=ring(1, 1, 2, 2 + i % 2))) for i in range(5)]
    whole = GeotagBreakdown().update(recs).table()
    merged = GeotagBreakdown().update(recs[:4]).merge(GeotagBreakdown().update(recs[4:])).table()
    assert whole == merged


def test_presets_are_lat_lon():
    rio = CITY_PRESETS["rio"]
    assert rio.box.sw.lat == pytest.approx(-23.08302)
    assert rio.box.sw.lon == pytest.approx(-43.795449)
    assert rio.utc_offset_minutes == -180
    assert contains(rio.box, GeoPoint(-22.9068, -43.1729))  # city centre
    assert contains(CITY_PRESETS["new_york"].box, GeoPoint(40.7128, -74.0060))


coord = st.floats(-89, 89, allow_nan=False)


@given(coord, coord, coord, coord)
def test_overlap_is_symmetric_and_contains_implies_overlap(a, b, c, d):
    box1 = GeoBox.from_corners((min(a, b), min(c, d)), (max(a, b), max(c, d)))
    box2 = GeoBox.from_corners((min(a, c), min(b, d)), (max(a, c), max(b, d)))
    assert overlaps(box1, box2) == overlaps(box2, box1)
    assert overlaps(box1, box1)
