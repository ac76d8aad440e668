"""Route map: ordered pipe segments with junction metadata between them.

The map is a 1-D description of the pipeline: each segment has a length,
diameter and inclination, and between consecutive segments sits a junction
whose configuration entry tells the robot which exit to take and how far to
rotate. Arc length s runs from 0 at the route start to route_length at the
end; a junction boundary belongs to the downstream segment.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

from .errors import InvariantError, OutOfRoute, SchemaError

MAP_VERSION = 1

SEGMENT_KINDS = ("bend", "t_junction")
EXITS = ("straight", "left", "right")

ROUTE_END = "route_end"
JUNCTION = "junction"


@dataclass(frozen=True)
class PipeSegment:
    """One straight pipe run. Lengths in m, inclination in rad from horizontal."""

    length: float
    diameter: float
    inclination: float = 0.0

    def __post_init__(self):
        if not (self.length > 0.0 and math.isfinite(self.length)):
            raise InvariantError(f"segment.length_m must be positive, got {self.length}")
        if not (self.diameter > 0.0 and math.isfinite(self.diameter)):
            raise InvariantError(f"segment.diameter_m must be positive, got {self.diameter}")
        if not (abs(self.inclination) <= math.pi / 2):
            raise InvariantError(
                f"segment.inclination_rad must lie in [-pi/2, pi/2], got {self.inclination}"
            )


@dataclass(frozen=True)
class ConfigurationType:
    """Junction descriptor: what the junction is and how to traverse it.

    desired_rotation is the signed yaw the robot must accumulate at the
    junction: positive for a left exit, negative for a right exit, zero iff
    the exit is straight. The sign linkage is enforced so the rotation
    error check can terminate.
    """

    kind: str
    desired_exit: str
    desired_rotation: float

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise InvariantError(f"ct.kind must be one of {SEGMENT_KINDS}, got {self.kind!r}")
        if self.desired_exit not in EXITS:
            raise InvariantError(f"ct.desired_exit must be one of {EXITS}, got {self.desired_exit!r}")
        if not math.isfinite(self.desired_rotation):
            raise InvariantError("ct.desired_rotation_rad must be finite")
        if self.desired_exit == "straight":
            if self.desired_rotation != 0.0:
                raise InvariantError("ct.desired_rotation_rad must be 0 for a straight exit")
        else:
            if not (0.0 < abs(self.desired_rotation) < math.pi):
                raise InvariantError(
                    "ct.desired_rotation_rad magnitude must lie in (0, pi) for a turning exit"
                )
            if self.desired_exit == "left" and self.desired_rotation <= 0.0:
                raise InvariantError("ct.desired_rotation_rad must be positive for a left exit")
            if self.desired_exit == "right" and self.desired_rotation >= 0.0:
                raise InvariantError("ct.desired_rotation_rad must be negative for a right exit")


@dataclass(frozen=True)
class Feature:
    """The next reflecting feature downstream of a position."""

    kind: str  # JUNCTION or ROUTE_END
    index: int | None = None  # junction index when kind == JUNCTION


@dataclass(frozen=True)
class RouteMap:
    """Immutable route description. Safe to share across threads."""

    segments: tuple[PipeSegment, ...]
    ct: tuple[ConfigurationType, ...]

    def __post_init__(self):
        if len(self.segments) == 0:
            raise InvariantError("map.segments must be non-empty")
        if len(self.ct) != len(self.segments) - 1:
            raise InvariantError(
                f"map.ct must have one entry per junction "
                f"(len(segments) - 1 = {len(self.segments) - 1}), got {len(self.ct)}"
            )

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Cumulative segment end positions; the last entry is route_length."""
        out = []
        acc = 0.0
        for seg in self.segments:
            acc += seg.length
            out.append(acc)
        return tuple(out)


def route_length(route: RouteMap) -> float:
    """Total arc length of the route in m."""
    return route.boundaries[-1]


def locate(route: RouteMap, s: float) -> tuple[int, float]:
    """Map arc length s to (segment_index, offset_within_segment).

    A junction boundary belongs to the downstream segment; s == route_length
    returns the last segment at offset == its length.
    """
    bounds = route.boundaries
    total = bounds[-1]
    if not (0.0 <= s <= total):
        raise OutOfRoute(f"s = {s} outside [0, {total}]")
    if s == total:
        return len(route.segments) - 1, route.segments[-1].length
    idx = bisect.bisect_right(bounds, s)
    start = 0.0 if idx == 0 else bounds[idx - 1]
    return idx, s - start


def distance_to_next_feature(route: RouteMap, s: float) -> tuple[float, Feature]:
    """Distance from s to the first reflecting feature strictly downstream.

    Features are junction openings and the route end. A position exactly on
    a junction boundary has already passed that junction, so the next
    feature lies further downstream; s == route_length returns distance 0
    to the route end.
    """
    bounds = route.boundaries
    total = bounds[-1]
    if not (0.0 <= s <= total):
        raise OutOfRoute(f"s = {s} outside [0, {total}]")
    if s == total:
        return 0.0, Feature(ROUTE_END)
    idx = bisect.bisect_right(bounds, s)
    if idx >= len(bounds) - 1:
        return total - s, Feature(ROUTE_END)
    return bounds[idx] - s, Feature(JUNCTION, idx)


def ct_entry(route: RouteMap, junction_index: int) -> ConfigurationType:
    """Configuration entry for junction junction_index (0-based, upstream first)."""
    if not (0 <= junction_index < len(route.ct)):
        raise InvariantError(
            f"junction_index {junction_index} outside [0, {len(route.ct)})"
        )
    return route.ct[junction_index]


def _require_keys(doc: dict, allowed: dict[str, bool], where: str) -> None:
    """allowed maps key -> required. Rejects unknown keys."""
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r} in {where}")
    for key, required in allowed.items():
        if required and key not in doc:
            raise SchemaError(f"missing key {key!r} in {where}")


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number, got {type(value).__name__}")
    return float(value)


def parse_map(doc: dict) -> RouteMap:
    """Build a RouteMap from a parsed JSON document. Unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise SchemaError(f"map document must be an object, got {type(doc).__name__}")
    _require_keys(doc, {"version": True, "segments": True, "ct": True}, "map")
    if doc["version"] != MAP_VERSION:
        raise SchemaError(f"map.version must be {MAP_VERSION}, got {doc['version']!r}")
    if not isinstance(doc["segments"], list):
        raise SchemaError("map.segments must be an array")
    if not isinstance(doc["ct"], list):
        raise SchemaError("map.ct must be an array")

    segments = []
    for i, raw in enumerate(doc["segments"]):
        where = f"map.segments[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where} must be an object")
        _require_keys(
            raw,
            {"length_m": True, "diameter_m": True, "inclination_rad": False},
            where,
        )
        segments.append(
            PipeSegment(
                length=_as_number(raw["length_m"], where + ".length_m"),
                diameter=_as_number(raw["diameter_m"], where + ".diameter_m"),
                inclination=_as_number(raw.get("inclination_rad", 0.0), where + ".inclination_rad"),
            )
        )

    ct = []
    for i, raw in enumerate(doc["ct"]):
        where = f"map.ct[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where} must be an object")
        _require_keys(
            raw,
            {"kind": True, "desired_exit": True, "desired_rotation_rad": True},
            where,
        )
        ct.append(
            ConfigurationType(
                kind=raw["kind"],
                desired_exit=raw["desired_exit"],
                desired_rotation=_as_number(raw["desired_rotation_rad"], where + ".desired_rotation_rad"),
            )
        )

    return RouteMap(segments=tuple(segments), ct=tuple(ct))


def render_map(route: RouteMap) -> dict:
    """Inverse of parse_map: parse_map(render_map(m)) == m."""
    return {
        "version": MAP_VERSION,
        "segments": [
            {
                "length_m": seg.length,
                "diameter_m": seg.diameter,
                "inclination_rad": seg.inclination,
            }
            for seg in route.segments
        ],
        "ct": [
            {
                "kind": entry.kind,
                "desired_exit": entry.desired_exit,
                "desired_rotation_rad": entry.desired_rotation,
            }
            for entry in route.ct
        ],
    }
