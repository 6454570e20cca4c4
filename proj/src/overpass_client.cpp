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

#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "diffroad/error.hpp"
#include "diffroad/geo.hpp"

namespace diffroad::geo
{

namespace
{

struct Endpoint
{
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string & url)
{
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw Error(ErrorKind::kConfig, "invalid Overpass endpoint URL: " + url);
  }
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

std::string post_query(const OverpassOptions & options, const std::string & query)
{
  const Endpoint ep = split_url(options.endpoint);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_follow_location(true);

  const std::string body = "data=" + httplib::detail::encode_query_param(query);
  auto res = client.Post(ep.path, body, "application/x-www-form-urlencoded");
  if (!res) {
    throw Error(ErrorKind::kNetwork,
                "Overpass request to " + options.endpoint + " failed: " + httplib::to_string(res.error()),
                /*retryable=*/true);
  }
  if (res->status != 200) {
    const bool transient = res->status == 429 || res->status >= 500;
    throw Error(ErrorKind::kNetwork,
                "Overpass request returned HTTP " + std::to_string(res->status), transient);
  }
  return res->body;
}

}  // namespace

std::vector<RawRoad> fetch_osm_roads(const BoundingBox & bbox,
                                     const std::set<std::string> & classes,
                                     const OverpassOptions & options)
{
  if (!bbox.well_formed()) {
    // A degenerate query covers no area.
    if (bbox.south == bbox.north || bbox.west == bbox.east) {
      return {};
    }
    throw Error(ErrorKind::kInvalidArgument, "fetch_osm_roads: malformed bounding box");
  }
  const std::string query = build_overpass_query(bbox, classes, options.timeout);

  std::string body;
  const bool cached = !options.cache_dir.empty();
  const auto cache_file = cached ? overpass_cache_path(options.cache_dir, query)
                                 : std::filesystem::path{};
  if (cached && std::filesystem::exists(cache_file)) {
    std::ifstream in(cache_file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  } else if (options.offline) {
    throw Error(ErrorKind::kNetwork,
                "offline mode: no cached Overpass response" +
                  (cached ? " at " + cache_file.string() : std::string(" (no cache directory)")));
  } else {
    body = post_query(options, query);
    if (cached) {
      std::filesystem::create_directories(options.cache_dir);
      std::ofstream out(cache_file, std::ios::binary);
      out << body;
      if (!out) {
        throw Error(ErrorKind::kIo, "cannot write cache file " + cache_file.string());
      }
    }
  }
  return parse_overpass_response(body, bbox, classes);
}

}  // namespace diffroad::geo
