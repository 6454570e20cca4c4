#!/usr/bin/env python3
# Copyright 2026 The DiffRoad Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes toy_city.geojson: eight scenario centres (two per type) with four
roads each, plus distractor ways that ingestion must ignore."""

import json
import math
import pathlib

R = 6371000.0


def to_lnglat(center, pts):
    lat0, lng0 = center
    out = []
    for x, y in pts:
        lat = lat0 + math.degrees(y / R)
        lng = lng0 + math.degrees(x / (R * math.cos(math.radians(lat0))))
        out.append([round(lng, 9), round(lat, 9)])
    return out


def rot(pts, deg):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return [(c * x - s * y, s * x + c * y) for x, y in pts]


def ray(angle, r0, r1, bend=0.0, steps=12):
    pts = []
    for i in range(steps + 1):
        u = i / steps
        r = r0 + (r1 - r0) * u
        a = math.radians(angle + bend * u * u)
        pts.append((r * math.cos(a), r * math.sin(a)))
    return pts


def arc(cx, cy, radius, a0, a1, steps=24, ry=None):
    ry = radius if ry is None else ry
    return [(cx + radius * math.cos(math.radians(a0 + (a1 - a0) * i / steps)),
             cy + ry * math.sin(math.radians(a0 + (a1 - a0) * i / steps)))
            for i in range(steps + 1)]


def intersection_a():
    return [ray(a, 0, 180) for a in (0, 90, 180, 270)]


def intersection_b():
    return [ray(15, 0, 170, 8), ray(100, 0, 175, -6), ray(195, 0, 180, 5), ray(290, 0, 165, -9)]


def pudo_a():
    main = [(-190, 0), (190, 0)]
    bay = [(-70, 0), (-45, -14), (45, -14), (70, 0)]
    side = [(0, 0), (0, 170)]
    aisle = [(-60, -40), (60, -40)]
    return [main, bay, side, aisle]


def pudo_b():
    return [rot(r, 30) for r in ([(-185, 0), (185, 0)], [(-60, 0), (-38, 16), (38, 16), (60, 0)],
                                 [(20, 0), (20, -165)], [(-50, 45), (55, 45)])]


def roundabout_a():
    ring = arc(0, 0, 40, 0, 360, 36)
    return [ring] + [ray(a, 40, 190) for a in (0, 120, 240)]


def roundabout_b():
    ring = arc(0, 0, 32, 45, 405, 36, ry=26)
    arms = [ray(45, 40, 180, 10), ray(160, 30, 185), ray(270, 26, 175, -8)]
    return [ring] + arms


def flyover_a():
    ew = [(-190, 0), (190, 0)]
    ns = [(0, -190), (0, 190)]
    ramp_ne = arc(95, 95, 55, 200, 430, 24)
    ramp_sw = arc(-95, -95, 55, 20, 250, 24)
    return [ew, ns, ramp_ne, ramp_sw]


def flyover_b():
    return [rot(r, 20) for r in flyover_a()[:2]] + [rot(arc(90, -90, 50, 110, 340, 24), 20),
                                                     rot(arc(-90, 90, 50, 290, 520, 24), 20)]


SCENARIOS = [
    ("int-a", "Intersection", intersection_a),
    ("int-b", "Intersection", intersection_b),
    ("pudo-a", "PUDO", pudo_a),
    ("pudo-b", "PUDO", pudo_b),
    ("rab-a", "Roundabout", roundabout_a),
    ("rab-b", "Roundabout", roundabout_b),
    ("fly-a", "Flyover", flyover_a),
    ("fly-b", "Flyover", flyover_b),
]


def main():
    features = []
    for i, (sid, stype, build) in enumerate(SCENARIOS):
        center = (1.30 + 0.01 * (i // 4), 103.80 + 0.01 * (i % 4))
        features.append({"type": "Feature",
                         "properties": {"id": sid, "scenario_type": stype},
                         "geometry": {"type": "Point", "coordinates": to_lnglat(center, [(0, 0)])[0]}})
        for j, road in enumerate(build()):
            features.append({"type": "Feature",
                             "properties": {"id": f"{sid}/r{j}", "highway": "primary" if j == 0 else "secondary"},
                             "geometry": {"type": "LineString", "coordinates": to_lnglat(center, road)}})
        # footpath inside the window: wrong class
        features.append({"type": "Feature",
                         "properties": {"id": f"{sid}/path", "highway": "footway"},
                         "geometry": {"type": "LineString",
                                      "coordinates": to_lnglat(center, [(-20, 25), (25, 20)])}})
    features.append({"type": "Feature",
                     "properties": {"id": "far/r0", "highway": "primary"},
                     "geometry": {"type": "LineString",
                                  "coordinates": to_lnglat((1.40, 103.90), [(-100, 0), (100, 0)])}})
    doc = {"type": "FeatureCollection", "features": features}
    out = pathlib.Path(__file__).with_name("toy_city.geojson")
    out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
