// Copyright 2026 The DiffRoad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIFFROAD__GEOMETRY_HPP_
#define DIFFROAD__GEOMETRY_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "diffroad/scenario.hpp"

namespace diffroad::geometry
{

double polyline_length(std::span<const Vec2> line);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double point_polyline_distance(Vec2 p, std::span<const Vec2> line);

/// Intersection of closed segments [a0, a1] and [b0, b1]. Parallel and
/// collinear segments report no intersection.
std::optional<Vec2> segment_intersection(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

struct Crossing
{
  Vec2 point;
  std::size_t road_a;
  std::size_t road_b;
  double sin_angle{0.0};  // |sin| of the angle between the two segments
};

/// Pairwise crossings between distinct roads.
std::vector<Crossing> find_crossings(const std::vector<Polyline> & roads);

/// True when two non-adjacent segments of the same road intersect.
bool self_intersects(std::span<const Vec2> line);

/// Junction centres: clusters (single linkage, radius) of road endpoints and
/// crossings where at least three road arms meet. A road contributes one arm
/// per endpoint inside the cluster, or two arms if it passes through it.
std::vector<Vec2> detect_junctions(const std::vector<Polyline> & roads, double radius);

}  // namespace diffroad::geometry

#endif  // DIFFROAD__GEOMETRY_HPP_
