"""NDJSON tweet ingestion.

Each input line is one Twitter status object. Only a fixed subset of the
v1.1 schema is read (see ``WIRE_FIELDS``); everything else is ignored.
Malformed lines are counted and skipped, never fatal.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, Optional

from .errors import BadGeometry, IngestIOError, MalformedJson, MissingField, ParseError
from .geo import GeoBox, GeoPoint, PlaceTag

log = logging.getLogger(__name__)

TWITTER_DATE_FORMAT = "%a %b %d %H:%M:%S %z %Y"
WIRE_FIELDS = ("id_str", "text", "created_at", "lang", "coordinates", "place", "entities", "user")
ENTITY_KINDS = ("hashtags", "user_mentions", "urls", "media")

_DAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")


@dataclass(frozen=True)
class EntityCounts:
    hashtags: int = 0
    user_mentions: int = 0
    urls: int = 0
    media: int = 0

    def __post_init__(self):
        for kind in ENTITY_KINDS:
            if getattr(self, kind) < 0:
                raise ValueError(f"negative {kind} count")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    created_at_utc: datetime
    lang: str
    coordinate: Optional[GeoPoint] = None
    place: Optional[PlaceTag] = None
    entities: EntityCounts = field(default_factory=EntityCounts)
    user_id: str = ""


@dataclass
class IngestStats:
    lines_read: int = 0
    parsed_ok: int = 0
    malformed: int = 0
    language_rejected: int = 0
    errors: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "lines_read": self.lines_read,
            "parsed_ok": self.parsed_ok,
            "malformed": self.malformed,
            "language_rejected": self.language_rejected,
            "errors": dict(sorted(self.errors.items())),
        }


def parse_created_at(value: str) -> datetime:
    if not isinstance(value, str):
        raise MalformedJson("created_at is not a string")
    try:
        dt = datetime.strptime(value, TWITTER_DATE_FORMAT)
    except ValueError as exc:
        raise MalformedJson(f"bad created_at {value!r}") from exc
    return dt.astimezone(timezone.utc)


def format_created_at(dt: datetime) -> str:
    """Inverse of :func:`parse_created_at`; locale independent."""
    dt = dt.astimezone(timezone.utc)
    return (
        f"{_DAYS[dt.weekday()]} {_MONTHS[dt.month - 1]} {dt.day:02d} "
        f"{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d} +0000 {dt.year:04d}"
    )


def _count(entities: dict, kind: str) -> int:
    value = entities.get(kind)
    if value is None:
        return 0
    if not isinstance(value, list):
        raise MalformedJson(f"entities.{kind} is not an array")
    return len(value)


def _parse_coordinate(obj) -> Optional[GeoPoint]:
    if obj is None:
        return None
    try:
        lon, lat = obj["coordinates"]
        return GeoPoint(float(lat), float(lon))
    except BadGeometry:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise BadGeometry(f"bad coordinates {obj!r}") from exc


def _parse_place(obj) -> Optional[PlaceTag]:
    if obj is None:
        return None
    try:
        ring = obj["bounding_box"]["coordinates"][0]
    except (KeyError, TypeError, IndexError) as exc:
        raise BadGeometry("place without bounding_box ring") from exc
    if not isinstance(ring, list) or len(ring) != 4:
        raise BadGeometry("bounding box ring must have exactly 4 vertices")
    try:
        vertices = tuple((float(v[0]), float(v[1])) for v in ring)
    except (TypeError, ValueError, IndexError) as exc:
        raise BadGeometry("non-numeric bounding box vertex") from exc
    return PlaceTag(str(obj.get("full_name") or ""), GeoBox.from_ring(vertices), vertices)


def parse_object(obj) -> TweetRecord:
    if not isinstance(obj, dict):
        raise MalformedJson("line is not a JSON object")
    rid = obj.get("id_str")
    if rid is None and obj.get("id") is not None:
        rid = str(obj["id"])
    if rid is None:
        raise MissingField("id_str")
    text = obj.get("text")
    if not isinstance(text, str) or not text:
        raise MissingField("text")
    if obj.get("created_at") is None:
        raise MissingField("created_at")
    lang = obj.get("lang")
    if not isinstance(lang, str) or not lang:
        raise MissingField("lang")
    entities = obj.get("entities") or {}
    if not isinstance(entities, dict):
        raise MalformedJson("entities is not an object")
    user = obj.get("user") or {}
    user_id = user.get("id_str") if isinstance(user, dict) else None
    return TweetRecord(
        id=str(rid),
        text=text,
        created_at_utc=parse_created_at(obj["created_at"]),
        lang=lang.lower(),
        coordinate=_parse_coordinate(obj.get("coordinates")),
        place=_parse_place(obj.get("place")),
        entities=EntityCounts(*(_count(entities, k) for k in ENTITY_KINDS)),
        user_id=str(user_id) if user_id is not None else "",
    )


def parse_record(line) -> TweetRecord:
    """Parse one NDJSON line (``str`` or ``bytes``) into a :class:`TweetRecord`.

    Raises a :class:`~citypulse.errors.ParseError` subclass for anything that
    cannot be turned into a record.
    """
    if isinstance(line, (bytes, bytearray)):
        try:
            line = bytes(line).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJson("invalid UTF-8") from exc
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise MalformedJson(str(exc)) from exc
    return parse_object(obj)


def to_wire(record: TweetRecord) -> dict:
    """Serialize back to the recognized wire subset; ``parse_object`` inverts it."""
    coords = None
    if record.coordinate is not None:
        coords = {"type": "Point", "coordinates": [record.coordinate.lon, record.coordinate.lat]}
    place = None
    if record.place is not None:
        place = {
            "full_name": record.place.name,
            "bounding_box": {"type": "Polygon", "coordinates": [record.place.wire_ring()]},
        }
    ent = record.entities
    return {
        "id_str": record.id,
        "text": record.text,
        "created_at": format_created_at(record.created_at_utc),
        "lang": record.lang,
        "coordinates": coords,
        "place": place,
        "entities": {kind: [{}] * getattr(ent, kind) for kind in ENTITY_KINDS},
        "user": {"id_str": record.user_id},
    }


def dumps(record: TweetRecord) -> str:
    return json.dumps(to_wire(record), ensure_ascii=False, separators=(",", ":"))


class _Throttle:
    def __init__(self, rate: float, clock=time.monotonic, sleep=time.sleep):
        self.interval = 1.0 / rate
        self.clock = clock
        self.sleep = sleep
        self.next_at = None

    def wait(self):
        now = self.clock()
        if self.next_at is None:
            self.next_at = now
        elif now < self.next_at:
            self.sleep(self.next_at - now)
        self.next_at += self.interval


def _iter_stream(source: Iterable, allowed_langs, stats: IngestStats, throttle) -> Iterator[TweetRecord]:
    try:
        for raw in source:
            if not raw.strip():
                continue
            stats.lines_read += 1
            try:
                record = parse_record(raw)
            except ParseError as exc:
                stats.malformed += 1
                name = type(exc).__name__
                stats.errors[name] = stats.errors.get(name, 0) + 1
                log.debug("skipping line %d: %s", stats.lines_read, exc)
                continue
            stats.parsed_ok += 1
            if allowed_langs is not None and record.lang not in allowed_langs:
                stats.language_rejected += 1
                continue
            if throttle is not None:
                throttle.wait()
            yield record
    except OSError as exc:
        raise IngestIOError(str(exc)) from exc


def read_stream(source: IO, allowed_langs=None, rate: Optional[float] = None, *, _throttle=None):
    """Lazily parse a line source.

    Returns ``(records, stats)``: ``records`` is a single-pass iterator and
    ``stats`` fills in as it is consumed. ``allowed_langs=None`` accepts every
    language. ``rate`` throttles emission to that many records per second.
    """
    stats = IngestStats()
    allowed = None if allowed_langs is None else {lang.lower() for lang in allowed_langs}
    throttle = _throttle if _throttle is not None else (_Throttle(rate) if rate else None)
    return _iter_stream(source, allowed, stats, throttle), stats


def read_path(path, allowed_langs=None, rate=None):
    """Like :func:`read_stream` over a file path (``-`` for stdin); the file closes when exhausted."""
    import sys

    if str(path) == "-":
        return read_stream(sys.stdin.buffer, allowed_langs, rate)
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise IngestIOError(str(exc)) from exc
    records, stats = read_stream(fh, allowed_langs, rate)

    def closing():
        with fh:
            yield from records

    return closing(), stats
