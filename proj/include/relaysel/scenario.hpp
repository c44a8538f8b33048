#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "relaysel/errors.hpp"

namespace relaysel {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// 1-based grid state number m, as used in every file format. Containers are
// indexed with zero_based().
class StateIndex {
 public:
  constexpr StateIndex() = default;
  constexpr explicit StateIndex(std::size_t m) : m_(m) {}

  static constexpr StateIndex from_zero_based(std::size_t i) { return StateIndex(i + 1); }

  constexpr std::size_t value() const noexcept { return m_; }
  constexpr std::size_t zero_based() const noexcept { return m_ - 1; }

  friend constexpr auto operator<=>(StateIndex, StateIndex) = default;

 private:
  std::size_t m_ = 1;
};

enum class MobilityRole { MobileRelay, MobileDestination };

inline std::string to_string(MobilityRole role) {
  return role == MobilityRole::MobileRelay ? "mobile_relay" : "mobile_destination";
}

// Both directions of the edge are blocked.
struct BlockedEdge {
  StateIndex a;
  StateIndex b;

  friend bool operator==(const BlockedEdge&, const BlockedEdge&) = default;
};

// Discretised geography. Grid points are enumerated row-major starting at the
// lowest (x, y) corner: m - 1 = row * nx + col, x = origin.x + col * spacing.
struct GridScenario {
  std::size_t nx = 10;
  std::size_t ny = 10;
  double spacing_m = 8.0;
  Vec2 origin{4.0, 4.0};
  Vec2 ap_coord{16.0, 40.0};
  Vec2 dest_coord{64.0, 40.0};
  std::vector<Vec2> relay_coords;
  MobilityRole mobility_role = MobilityRole::MobileRelay;
  // Number of mobile relays in MobileRelay mode (identical mobility each).
  std::size_t mobile_relays = 1;
  std::vector<BlockedEdge> walls;

  friend bool operator==(const GridScenario&, const GridScenario&) = default;

  std::size_t size() const noexcept { return nx * ny; }

  // Number of relay candidates K.
  std::size_t relay_count() const noexcept {
    return mobility_role == MobilityRole::MobileRelay ? mobile_relays : relay_coords.size();
  }

  Vec2 lower_corner() const { return origin; }
  Vec2 upper_corner() const {
    return {origin.x + spacing_m * static_cast<double>(nx - 1),
            origin.y + spacing_m * static_cast<double>(ny - 1)};
  }

  std::size_t col_of(StateIndex m) const { return m.zero_based() % nx; }
  std::size_t row_of(StateIndex m) const { return m.zero_based() / nx; }

  StateIndex at(std::size_t col, std::size_t row) const {
    if (col >= nx || row >= ny) throw DomainError("grid position out of range");
    return StateIndex::from_zero_based(row * nx + col);
  }

  bool contains(StateIndex m) const { return m.value() >= 1 && m.value() <= size(); }

  Vec2 index_to_coord(StateIndex m) const {
    if (!contains(m)) {
      throw DomainError("state index " + std::to_string(m.value()) + " outside [1, " +
                        std::to_string(size()) + "]");
    }
    return {origin.x + spacing_m * static_cast<double>(col_of(m)),
            origin.y + spacing_m * static_cast<double>(row_of(m))};
  }

  // Nearest grid point; ties go to the lower index.
  StateIndex coord_to_index(Vec2 p) const {
    const double half = spacing_m / 2.0;
    const Vec2 lo = lower_corner();
    const Vec2 hi = upper_corner();
    if (!(p.x >= lo.x - half && p.x <= hi.x + half && p.y >= lo.y - half && p.y <= hi.y + half)) {
      throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ") outside grid bounds");
    }
    const auto nearest = [&](double v, double o, std::size_t n) {
      const double u = (v - o) / spacing_m;
      // Exact halves round down so ties pick the lower index.
      double k = std::ceil(u - 0.5);
      k = std::clamp(k, 0.0, static_cast<double>(n - 1));
      return static_cast<std::size_t>(k);
    };
    return at(nearest(p.x, origin.x, nx), nearest(p.y, origin.y, ny));
  }

  bool adjacent(StateIndex a, StateIndex b) const {
    if (!contains(a) || !contains(b)) return false;
    const auto dc = static_cast<long>(col_of(a)) - static_cast<long>(col_of(b));
    const auto dr = static_cast<long>(row_of(a)) - static_cast<long>(row_of(b));
    return std::abs(dc) + std::abs(dr) == 1;
  }

  bool blocked(StateIndex a, StateIndex b) const {
    return std::any_of(walls.begin(), walls.end(), [&](const BlockedEdge& e) {
      return (e.a == a && e.b == b) || (e.a == b && e.b == a);
    });
  }

  // 4-neighbourhood members that exist and are not walled off, ascending.
  std::vector<StateIndex> neighbours(StateIndex m) const {
    std::vector<StateIndex> out;
    const std::size_t c = col_of(m);
    const std::size_t r = row_of(m);
    if (r > 0) out.push_back(at(c, r - 1));
    if (c > 0) out.push_back(at(c - 1, r));
    if (c + 1 < nx) out.push_back(at(c + 1, r));
    if (r + 1 < ny) out.push_back(at(c, r + 1));
    std::erase_if(out, [&](StateIndex n) { return blocked(m, n); });
    return out;
  }

  // Throws DomainError describing the first violated invariant.
  void validate() const {
    if (nx == 0 || ny == 0 || nx * ny < 2) throw DomainError("grid needs at least 2 points");
    if (!(spacing_m > 0.0) || !std::isfinite(spacing_m)) throw DomainError("spacing_m must be > 0");
    const auto inside = [&](Vec2 p) {
      const Vec2 lo = lower_corner();
      const Vec2 hi = upper_corner();
      return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    };
    if (!inside(ap_coord)) throw DomainError("ap coordinate outside grid bounding box");
    if (!inside(dest_coord)) throw DomainError("destination coordinate outside grid bounding box");
    if (mobility_role == MobilityRole::MobileRelay && mobile_relays == 0) {
      throw DomainError("mobile_relays must be >= 1");
    }
    if (mobility_role == MobilityRole::MobileDestination && relay_coords.empty()) {
      throw DomainError("mobile destination mode needs at least one static relay");
    }
    for (const auto& e : walls) {
      if (!adjacent(e.a, e.b)) {
        throw DomainError("wall " + std::to_string(e.a.value()) + "-" + std::to_string(e.b.value()) +
                          " does not join adjacent grid points");
      }
    }
  }
};

}  // namespace relaysel
