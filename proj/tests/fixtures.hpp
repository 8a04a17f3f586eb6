#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caps/checkin_data.hpp"
#include "caps/numerics.hpp"

namespace caps::test {

struct PoiSpec {
  double lat;
  double lon;
  int category;
};

// Catalog with `users` users, the given POIs and `categories` categories, no
// sessions and no friendships.
inline Dataset make_catalog(int users, const std::vector<PoiSpec>& pois, int categories) {
  Dataset d;
  for (int u = 0; u < users; ++u) d.enc.add_user("u" + std::to_string(u));
  for (std::size_t i = 0; i < pois.size(); ++i) {
    d.enc.add_poi("p" + std::to_string(i));
    d.pois.push_back({{pois[i].lat, pois[i].lon}, pois[i].category, "test"});
  }
  for (int c = 0; c < categories; ++c) d.enc.add_category("c" + std::to_string(c));
  d.graph = SocialGraph(users);
  return d;
}

// POIs on a line of latitude 0, `spacing_km` apart.
inline std::vector<PoiSpec> line_pois(int n, double spacing_km, int categories) {
  std::vector<PoiSpec> out;
  const double deg = spacing_km / 111.19492664455873;
  for (int i = 0; i < n; ++i) out.push_back({0.0, i * deg, i % categories});
  return out;
}

// Visits at the given POIs; arrivals are hour offsets from a midnight day
// start, each stay `stay_min` minutes.
inline Session make_session(int user, const std::vector<int>& pois,
                            const std::vector<double>& hours, double stay_min = 30.0,
                            std::int64_t day = 0) {
  Session s{user, {}};
  const std::int64_t base = 1272672000 + day * 86400;  // 2010-05-01T00:00Z
  for (std::size_t i = 0; i < pois.size(); ++i) {
    const auto a = base + static_cast<std::int64_t>(hours[i] * 3600.0);
    s.visits.push_back({pois[i], a, a + static_cast<std::int64_t>(stay_min * 60.0)});
  }
  return s;
}

// Random small dataset: users visit random POIs at random hours with random
// stays; friendships drawn with probability `friend_p`.
inline Dataset random_dataset(std::uint64_t seed, int users, int pois, int categories,
                              int max_checkins, double friend_p = 0.3) {
  num::Rng rng(seed);
  std::vector<PoiSpec> specs;
  for (int i = 0; i < pois; ++i) {
    specs.push_back({rng.uniform(40.0, 40.1), rng.uniform(-74.1, -74.0),
                     static_cast<int>(rng.index(static_cast<std::size_t>(categories)))});
  }
  Dataset d = make_catalog(users, specs, categories);
  int budget = max_checkins;
  for (int u = 0; u < users && budget > 0; ++u) {
    const int sessions = 1 + static_cast<int>(rng.index(3));
    for (int k = 0; k < sessions && budget > 0; ++k) {
      const int len = std::min(budget, 1 + static_cast<int>(rng.index(4)));
      budget -= len;
      Session s{u, {}};
      std::int64_t t = 1272672000 + (u * 5 + k) * 86400 +
                       static_cast<std::int64_t>(rng.index(16 * 3600));
      for (int i = 0; i < len; ++i) {
        const int p = static_cast<int>(rng.index(static_cast<std::size_t>(pois)));
        const auto stay = static_cast<std::int64_t>(rng.index(7200));
        s.visits.push_back({p, t, t + stay});
        t += stay + 60 + static_cast<std::int64_t>(rng.index(3600));
      }
      d.sessions.push_back(std::move(s));
    }
  }
  for (int a = 0; a < users; ++a) {
    for (int b = a + 1; b < users; ++b) {
      if (rng.uniform() < friend_p) d.graph.add_edge(a, b);
    }
  }
  return d;
}

}  // namespace caps::test
