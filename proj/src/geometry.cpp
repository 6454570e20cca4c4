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

#include "diffroad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace diffroad::geometry
{

double polyline_length(std::span<const Vec2> line)
{
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    total += distance(line[i - 1], line[i]);
  }
  return total;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b)
{
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) {
    return distance(p, a);
  }
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double point_polyline_distance(Vec2 p, std::span<const Vec2> line)
{
  if (line.size() == 1) {
    return distance(p, line.front());
  }
  double best = INFINITY;
  for (std::size_t i = 1; i < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i - 1], line[i]));
  }
  return best;
}

std::optional<Vec2> segment_intersection(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1)
{
  const Vec2 r = a1 - a0;
  const Vec2 s = b1 - b0;
  const double denom = cross(r, s);
  const double scale = norm(r) * norm(s);
  if (scale == 0.0 || std::abs(denom) <= 1e-12 * scale) {
    return std::nullopt;
  }
  const Vec2 qp = b0 - a0;
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) {
    return std::nullopt;
  }
  return a0 + t * r;
}

std::vector<Crossing> find_crossings(const std::vector<Polyline> & roads)
{
  std::vector<Crossing> out;
  for (std::size_t a = 0; a < roads.size(); ++a) {
    for (std::size_t b = a + 1; b < roads.size(); ++b) {
      const auto & ra = roads[a];
      const auto & rb = roads[b];
      for (std::size_t i = 1; i < ra.size(); ++i) {
        for (std::size_t j = 1; j < rb.size(); ++j) {
          if (auto p = segment_intersection(ra[i - 1], ra[i], rb[j - 1], rb[j])) {
            const Vec2 r = ra[i] - ra[i - 1];
            const Vec2 s = rb[j] - rb[j - 1];
            out.push_back({*p, a, b, std::abs(cross(r, s)) / (norm(r) * norm(s))});
          }
        }
      }
    }
  }
  return out;
}

bool self_intersects(std::span<const Vec2> line)
{
  const bool closed = line.size() > 3 && distance(line.front(), line.back()) == 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    for (std::size_t j = i + 2; j < line.size(); ++j) {
      if (closed && i == 1 && j == line.size() - 1) {
        continue;  // first and last segments of a ring share the closing vertex
      }
      if (segment_intersection(line[i - 1], line[i], line[j - 1], line[j])) {
        return true;
      }
    }
  }
  return false;
}

namespace
{

struct DisjointSet
{
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i)
  {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b)
  {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
};

}  // namespace

std::vector<Vec2> detect_junctions(const std::vector<Polyline> & roads, double radius)
{
  std::vector<Vec2> candidates;
  for (const auto & road : roads) {
    if (road.size() >= 2) {
      candidates.push_back(road.front());
      candidates.push_back(road.back());
    }
  }
  for (const auto & c : find_crossings(roads)) {
    candidates.push_back(c.point);
  }

  DisjointSet sets(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (distance(candidates[i], candidates[j]) <= radius) {
        sets.unite(i, j);
      }
    }
  }

  std::vector<Vec2> junctions;
  for (std::size_t root = 0; root < candidates.size(); ++root) {
    if (sets.find(root) != root) {
      continue;
    }
    std::vector<Vec2> members;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (sets.find(i) == root) {
        members.push_back(candidates[i]);
      }
    }
    Vec2 centre{};
    for (const auto & m : members) {
      centre = centre + m;
    }
    centre = (1.0 / static_cast<double>(members.size())) * centre;

    const auto near_cluster = [&](Vec2 p) {
      return std::any_of(members.begin(), members.end(),
                         [&](Vec2 m) { return distance(p, m) <= radius; });
    };
    int arms = 0;
    for (const auto & road : roads) {
      if (road.size() < 2) {
        continue;
      }
      const int ends = static_cast<int>(near_cluster(road.front())) +
                       static_cast<int>(near_cluster(road.back()));
      if (ends > 0) {
        arms += ends;
      } else if (point_polyline_distance(centre, road) <= radius) {
        arms += 2;
      }
    }
    if (arms >= 3) {
      junctions.push_back(centre);
    }
  }
  return junctions;
}

}  // namespace diffroad::geometry
