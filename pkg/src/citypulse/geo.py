"""Bounding boxes, Twitter's two geo heuristics and the post-hoc city filter.

All coordinates are held as (latitude, longitude). Boxes are closed: a point
on an edge or corner is inside, and boxes sharing only an edge overlap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import BadGeometry


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise BadGeometry(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise BadGeometry(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise BadGeometry(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class GeoBox:
    sw: GeoPoint
    ne: GeoPoint

    def __post_init__(self):
        if self.sw.lat > self.ne.lat:
            raise BadGeometry("south-west latitude above north-east latitude")
        if self.sw.lon > self.ne.lon:
            # also rejects antimeridian-crossing boxes
            raise BadGeometry("south-west longitude east of north-east longitude")

    @classmethod
    def from_corners(cls, sw, ne) -> "GeoBox":
        """Build from two ``(lat, lon)`` pairs."""
        return cls(GeoPoint(float(sw[0]), float(sw[1])), GeoPoint(float(ne[0]), float(ne[1])))

    @classmethod
    def from_ring(cls, ring) -> "GeoBox":
        """Envelope of a ring of ``(lon, lat)`` vertices, as Twitter emits them."""
        lons = [float(v[0]) for v in ring]
        lats = [float(v[1]) for v in ring]
        return cls(GeoPoint(min(lats), min(lons)), GeoPoint(max(lats), max(lons)))

    @property
    def is_degenerate(self) -> bool:
        return self.sw == self.ne

    @property
    def center(self) -> GeoPoint:
        return GeoPoint((self.sw.lat + self.ne.lat) / 2.0, (self.sw.lon + self.ne.lon) / 2.0)

    def ring(self) -> list:
        """Four-vertex ``(lon, lat)`` ring, counter-clockwise from the south-west corner."""
        s, w, n, e = self.sw.lat, self.sw.lon, self.ne.lat, self.ne.lon
        return [[w, s], [e, s], [e, n], [w, n]]


@dataclass(frozen=True)
class PlaceTag:
    name: str
    box: GeoBox
    # raw (lon, lat) vertices as read from the wire, kept for faithful re-serialization
    ring: Optional[tuple] = field(default=None, compare=True)

    def wire_ring(self) -> list:
        if self.ring is not None:
            return [list(v) for v in self.ring]
        return self.box.ring()


class GeoTagKind(enum.Enum):
    PRECISE_COORDINATE = "precise_coordinate"
    DEGENERATE_PLACE_BOX = "degenerate_place_box"
    VARIABLE_PLACE_BOX = "variable_place_box"
    UNTAGGED = "untagged"


TAGGED_KINDS = (
    GeoTagKind.PRECISE_COORDINATE,
    GeoTagKind.DEGENERATE_PLACE_BOX,
    GeoTagKind.VARIABLE_PLACE_BOX,
)


class PlaceMode(enum.Enum):
    CONTAINMENT = "containment"
    CENTER = "center"
    OVERLAP = "overlap"


class FilterReason(enum.Enum):
    COORDINATE_INSIDE = "coordinate_inside"
    PLACE_MATCHED = "place_matched"
    COORDINATE_OUTSIDE = "coordinate_outside"
    PLACE_UNMATCHED = "place_unmatched"
    NO_GEO_INFO = "no_geo_info"


@dataclass(frozen=True)
class FilterDecision:
    accepted: bool
    reason: FilterReason


def contains(box: GeoBox, p: GeoPoint) -> bool:
    return box.sw.lat <= p.lat <= box.ne.lat and box.sw.lon <= p.lon <= box.ne.lon


def contains_box(outer: GeoBox, inner: GeoBox) -> bool:
    return contains(outer, inner.sw) and contains(outer, inner.ne)


def overlaps(a: GeoBox, b: GeoBox) -> bool:
    return (
        a.sw.lat <= b.ne.lat
        and b.sw.lat <= a.ne.lat
        and a.sw.lon <= b.ne.lon
        and b.sw.lon <= a.ne.lon
    )


def classify_geotag(record) -> GeoTagKind:
    if record.coordinate is not None:
        return GeoTagKind.PRECISE_COORDINATE
    if record.place is not None:
        if record.place.box.is_degenerate:
            return GeoTagKind.DEGENERATE_PLACE_BOX
        return GeoTagKind.VARIABLE_PLACE_BOX
    return GeoTagKind.UNTAGGED


def place_matches(place_box: GeoBox, city: GeoBox, mode: PlaceMode) -> bool:
    if mode is PlaceMode.CONTAINMENT:
        return contains_box(city, place_box)
    if mode is PlaceMode.CENTER:
        return contains(city, place_box.center)
    return overlaps(city, place_box)


def city_filter(record, city: GeoBox, place_mode: PlaceMode = PlaceMode.CONTAINMENT) -> FilterDecision:
    """Decide whether a tweet belongs to ``city``.

    A precise coordinate, when present, settles the question on its own and
    the place field is never consulted. Otherwise the place box is matched
    against the city box according to ``place_mode``.
    """
    if record.coordinate is not None:
        if contains(city, record.coordinate):
            return FilterDecision(True, FilterReason.COORDINATE_INSIDE)
        return FilterDecision(False, FilterReason.COORDINATE_OUTSIDE)
    if record.place is not None:
        if place_matches(record.place.box, city, place_mode):
            return FilterDecision(True, FilterReason.PLACE_MATCHED)
        return FilterDecision(False, FilterReason.PLACE_UNMATCHED)
    return FilterDecision(False, FilterReason.NO_GEO_INFO)


@dataclass
class KindCount:
    distinct: int
    tweets: int
    percentage: float


class GeotagBreakdown:
    """Fold over records counting tweets and distinct geometries per geotag kind.

    Shards can be counted independently and combined with :meth:`merge`.
    Distinctness is exact equality of the coordinate or of the box corners.
    """

    def __init__(self):
        self._keys = {kind: set() for kind in GeoTagKind}
        self._tweets = {kind: 0 for kind in GeoTagKind}

    def add(self, record) -> GeoTagKind:
        kind = classify_geotag(record)
        self._tweets[kind] += 1
        if kind is GeoTagKind.PRECISE_COORDINATE:
            self._keys[kind].add((record.coordinate.lat, record.coordinate.lon))
        elif kind is not GeoTagKind.UNTAGGED:
            box = record.place.box
            self._keys[kind].add((box.sw.lat, box.sw.lon, box.ne.lat, box.ne.lon))
        return kind

    def update(self, records: Iterable) -> "GeotagBreakdown":
        for r in records:
            self.add(r)
        return self

    def merge(self, other: "GeotagBreakdown") -> "GeotagBreakdown":
        out = GeotagBreakdown()
        for kind in GeoTagKind:
            out._keys[kind] = self._keys[kind] | other._keys[kind]
            out._tweets[kind] = self._tweets[kind] + other._tweets[kind]
        return out

    @property
    def untagged(self) -> int:
        return self._tweets[GeoTagKind.UNTAGGED]

    def table(self) -> dict:
        total = sum(self._tweets[k] for k in TAGGED_KINDS)
        rows = {}
        for kind in TAGGED_KINDS:
            n = self._tweets[kind]
            pct = 100.0 * n / total if total else 0.0
            rows[kind] = KindCount(len(self._keys[kind]), n, pct)
        return rows


def geotag_breakdown(records: Iterable) -> dict:
    """Per-kind ``KindCount`` over the tagged records; untagged ones are ignored."""
    return GeotagBreakdown().update(records).table()


@dataclass(frozen=True)
class City:
    name: str
    box: GeoBox
    utc_offset_minutes: int = 0
    languages: tuple = ()
    place_mode: PlaceMode = PlaceMode.CONTAINMENT


def _preset(name, sw_lon_lat, ne_lon_lat, offset, langs):
    # source table lists (lon, lat); transpose into (lat, lon)
    box = GeoBox.from_corners((sw_lon_lat[1], sw_lon_lat[0]), (ne_lon_lat[1], ne_lon_lat[0]))
    return City(name, box, offset, langs)


# Twitter default place boxes for the five studied cities; fixed offsets, no DST.
CITY_PRESETS = {
    "rio": _preset("rio", (-43.795449, -23.08302), (-43.087707, -22.739823), -180, ("pt",)),
    "sao_paulo": _preset("sao_paulo", (-46.826039, -24.008814), (-46.365052, -23.356792), -180, ("pt",)),
    "new_york": _preset("new_york", (-74.255641, 40.495865), (-73.699793, 40.91533), -300, ("en",)),
    "london": _preset("london", (-0.510365, 51.286702), (0.334043, 51.691824), 0, ("en",)),
    "melbourne": _preset("melbourne", (144.593742, -38.433859), (145.512529, -37.511274), 600, ("en",)),
}
