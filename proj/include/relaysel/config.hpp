#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "relaysel/errors.hpp"
#include "relaysel/radio.hpp"
#include "relaysel/scenario.hpp"
#include "relaysel/tables.hpp"

namespace relaysel {

struct UpdateParams {
  double tau_hz = 0.2;
  double mu_hz = 1.0 / 0.3748e-3;
  double p_loss = 0.0;
  std::size_t queue_size = 2;

  friend bool operator==(const UpdateParams&, const UpdateParams&) = default;
};

struct LocationErrorParams {
  double sigma_m = 0.0;
  Vec2 bias{};

  friend bool operator==(const LocationErrorParams&, const LocationErrorParams&) = default;
};

struct SimulationParams {
  double data_tx_interval_s = 25.0;
  double duration_s = 1e4;
  double warmup_s = 500.0;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  // Deterministic update timer instead of exponential inter-update times.
  bool periodic_updates = false;
  // Draw reports from the error matrix rows (matches the analytical model) or
  // from a continuous Gaussian snapped to the grid.
  bool continuous_error = false;

  friend bool operator==(const SimulationParams&, const SimulationParams&) = default;
};

// Closed rectangle in metres.
struct Rect {
  Vec2 lo;
  Vec2 hi;

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct ScenarioConfig {
  std::string name;
  GridScenario grid;
  double speed_mps = 1.0;
  UpdateParams updates;
  LocationErrorParams error;
  LinkModelParams radio;
  SimulationParams sim;
  std::optional<Rect> heuristic_rect;
  // As written in the file; resolved against base_dir.
  std::string throughput_map;
  std::filesystem::path base_dir;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  std::filesystem::path throughput_map_path() const {
    std::filesystem::path p(throughput_map);
    return p.is_absolute() ? p : base_dir / p;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  // Allow simple fractions such as 1/25.
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const auto num = to_double(trim(s.substr(0, slash)));
    const auto den = to_double(trim(s.substr(slash + 1)));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
  }
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != end) return std::nullopt;
  return v;
}

// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class ScenarioParser {
 public:
  ScenarioParser(std::string file, std::filesystem::path base_dir) : file_(std::move(file)) {
    cfg_.base_dir = std::move(base_dir);
    cfg_.radio.rate_table.clear();
  }

  ScenarioConfig parse(std::istream& in) {
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      line_ = line_no;
      std::string line = raw;
      if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("", "unterminated section header");
        section = trim(std::string_view(line).substr(1, line.size() - 2));
        if (!known_sections().count(section)) fail(section, "unknown section");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("", "expected key = value");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (section.empty()) fail(key, "key outside of any section");
      assign(section, key, value);
    }
    line_ = 0;
    finish();
    return cfg_;
  }

 private:
  static const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"scenario", "grid",     "nodes",     "mobility", "updates",
                                         "location_error", "radio", "walls", "throughput_map",
                                         "simulation", "policy"};
    return s;
  }

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(file_, line_, field, what);
  }

  double number(const std::string& field, const std::string& v) const {
    const auto d = to_double(v);
    if (!d) fail(field, "expected a number, got '" + v + "'");
    return *d;
  }

  std::size_t count(const std::string& field, const std::string& v) const {
    const auto u = to_uint(v);
    if (!u) fail(field, "expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(*u);
  }

  Vec2 pair(const std::string& field, const std::string& v) const {
    const auto parts = split(v, ',');
    if (parts.size() != 2) fail(field, "expected 'x, y'");
    return {number(field, parts[0]), number(field, parts[1])};
  }

  bool boolean(const std::string& field, const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(field, "expected true or false");
  }

  void once(const std::string& field) {
    if (!seen_.insert(field).second) fail(field, "duplicate key");
    lines_[field] = line_;
  }

  void assign(const std::string& section, const std::string& key, const std::string& v) {
    const std::string field = section + "." + key;
    auto& g = cfg_.grid;
    if (section == "scenario") {
      once(field);
      if (key == "name") cfg_.name = v;
      else fail(field, "unknown key");
    } else if (section == "grid") {
      once(field);
      if (key == "nx") g.nx = count(field, v);
      else if (key == "ny") g.ny = count(field, v);
      else if (key == "spacing_m") g.spacing_m = number(field, v);
      else if (key == "origin_m") g.origin = pair(field, v);
      else fail(field, "unknown key");
    } else if (section == "nodes") {
      if (key == "relay_m") {
        g.relay_coords.push_back(pair(field, v));
        lines_[field] = line_;
        return;
      }
      once(field);
      if (key == "ap_m") g.ap_coord = pair(field, v);
      else if (key == "dest_m") g.dest_coord = pair(field, v);
      else if (key == "mobility_role") {
        if (v == "mobile_relay") g.mobility_role = MobilityRole::MobileRelay;
        else if (v == "mobile_destination") g.mobility_role = MobilityRole::MobileDestination;
        else fail(field, "expected mobile_relay or mobile_destination");
      } else if (key == "mobile_relays") g.mobile_relays = count(field, v);
      else fail(field, "unknown key");
    } else if (section == "mobility") {
      once(field);
      if (key == "speed_mps") cfg_.speed_mps = number(field, v);
      else fail(field, "unknown key");
    } else if (section == "updates") {
      once(field);
      auto& u = cfg_.updates;
      if (key == "tau_hz") u.tau_hz = number(field, v);
      else if (key == "mu_hz") u.mu_hz = number(field, v);
      else if (key == "p_loss") u.p_loss = number(field, v);
      else if (key == "queue_size") u.queue_size = count(field, v);
      else fail(field, "unknown key");
    } else if (section == "location_error") {
      once(field);
      auto& e = cfg_.error;
      if (key == "sigma_m") e.sigma_m = number(field, v);
      else if (key == "bias_x_m") e.bias.x = number(field, v);
      else if (key == "bias_y_m") e.bias.y = number(field, v);
      else fail(field, "unknown key");
    } else if (section == "radio") {
      auto& r = cfg_.radio;
      if (key == "rate") {
        const auto parts = split(v, ',');
        if (parts.size() != 3) fail(field, "expected 'mbps, snr_db, overhead_us'");
        r.rate_table.push_back({number(field, parts[0]), number(field, parts[1]), number(field, parts[2])});
        lines_[field] = line_;
        return;
      }
      once(field);
      if (key == "pl_d0_db") r.pl_d0_db = number(field, v);
      else if (key == "d0_m") r.d0_m = number(field, v);
      else if (key == "path_loss_exp") r.n_exp = number(field, v);
      else if (key == "tx_power_dbm") r.tx_power_dbm = number(field, v);
      else if (key == "noise_floor_dbm") r.noise_floor_dbm = number(field, v);
      else if (key == "ricean_k") r.ricean_k = number(field, v);
      else if (key == "b_msdu_bytes") r.b_msdu_bytes = static_cast<int>(count(field, v));
      else if (key == "snr_scale_db") r.snr_scale_db = number(field, v);
      else if (key == "wall_loss_db") r.wall_loss_db = number(field, v);
      else if (key == "secondary_rate") {
        if (v == "robust") r.secondary = SecondaryRate::Robust;
        else if (v == "same") r.secondary = SecondaryRate::Same;
        else if (v == "next_lower") r.secondary = SecondaryRate::NextLower;
        else fail(field, "expected robust, same or next_lower");
      } else fail(field, "unknown key");
    } else if (section == "walls") {
      if (key != "edges") fail(field, "unknown key");
      lines_[field] = line_;
      for (const auto& tok : split(v, ',')) {
        if (tok.empty()) continue;
        const auto dash = tok.find('-');
        if (dash == std::string::npos) fail(field, "expected 'm1-m2', got '" + tok + "'");
        const auto a = to_uint(trim(tok.substr(0, dash)));
        const auto b = to_uint(trim(tok.substr(dash + 1)));
        if (!a || !b || *a == 0 || *b == 0) fail(field, "bad wall edge '" + tok + "'");
        g.walls.push_back({StateIndex(*a), StateIndex(*b)});
      }
    } else if (section == "throughput_map") {
      once(field);
      if (key == "path") cfg_.throughput_map = v;
      else fail(field, "unknown key");
    } else if (section == "simulation") {
      once(field);
      auto& s = cfg_.sim;
      if (key == "data_tx_interval_s") s.data_tx_interval_s = number(field, v);
      else if (key == "duration_s") s.duration_s = number(field, v);
      else if (key == "warmup_s") s.warmup_s = number(field, v);
      else if (key == "replications") s.replications = count(field, v);
      else if (key == "seed") s.seed = count(field, v);
      else if (key == "periodic_updates") s.periodic_updates = boolean(field, v);
      else if (key == "continuous_error") s.continuous_error = boolean(field, v);
      else fail(field, "unknown key");
    } else if (section == "policy") {
      once(field);
      if (key == "heuristic_rect_m") {
        const auto parts = split(v, ',');
        if (parts.size() != 4) fail(field, "expected 'x0, y0, x1, y1'");
        cfg_.heuristic_rect = Rect{{number(field, parts[0]), number(field, parts[1])},
                                   {number(field, parts[2]), number(field, parts[3])}};
      } else fail(field, "unknown key");
    }
  }

  void require(const std::string& field) const {
    if (!seen_.count(field)) fail(field, "missing mandatory field");
  }

  void check(const std::string& field, bool ok, const std::string& what) {
    if (ok) return;
    const auto it = lines_.find(field);
    line_ = it == lines_.end() ? 0 : it->second;
    fail(field, what);
  }

  void finish() {
    for (const char* f : {"grid.nx", "grid.ny", "grid.spacing_m", "nodes.ap_m", "nodes.dest_m", "nodes.mobility_role"}) {
      require(f);
    }
    auto& g = cfg_.grid;
    if (!seen_.count("grid.origin_m")) g.origin = {g.spacing_m / 2.0, g.spacing_m / 2.0};
    if (cfg_.radio.rate_table.empty()) cfg_.radio.rate_table = default_rate_table();

    check("grid.nx", g.nx >= 1 && g.ny >= 1 && g.nx * g.ny >= 2, "grid needs at least 2 points");
    check("grid.spacing_m", g.spacing_m > 0.0, "must be > 0");
    check("mobility.speed_mps", cfg_.speed_mps > 0.0, "must be > 0");
    check("updates.tau_hz", cfg_.updates.tau_hz > 0.0, "must be > 0");
    check("updates.mu_hz", cfg_.updates.mu_hz > 0.0, "must be > 0");
    check("updates.p_loss", cfg_.updates.p_loss >= 0.0 && cfg_.updates.p_loss < 1.0, "must lie in [0, 1)");
    check("updates.queue_size", cfg_.updates.queue_size >= 1 && cfg_.updates.queue_size <= 16, "must lie in [1, 16]");
    check("location_error.sigma_m", cfg_.error.sigma_m >= 0.0, "must be >= 0");
    check("simulation.duration_s", cfg_.sim.duration_s > cfg_.sim.warmup_s && cfg_.sim.warmup_s >= 0.0,
          "duration must exceed warmup >= 0");
    check("simulation.replications", cfg_.sim.replications >= 1, "must be >= 1");
    check("simulation.data_tx_interval_s", cfg_.sim.data_tx_interval_s > 0.0, "must be > 0");
    for (const auto& w : g.walls) {
      check("walls.edges", g.adjacent(w.a, w.b),
            "wall " + std::to_string(w.a.value()) + "-" + std::to_string(w.b.value()) +
                " does not join adjacent grid points");
    }
    try {
      g.validate();
    } catch (const DomainError& e) {
      check("nodes", false, e.what());
    }
    try {
      cfg_.radio.validate();
    } catch (const DomainError& e) {
      check("radio.rate", false, e.what());
    }
  }

  std::string file_;
  std::size_t line_ = 0;
  ScenarioConfig cfg_;
  std::set<std::string> seen_;
  std::map<std::string, std::size_t> lines_;
};

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {},
                                     const std::string& source_name = "<string>") {
  std::istringstream in(text);
  return detail::ScenarioParser(source_name, base_dir).parse(in);
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open scenario file");
  return detail::ScenarioParser(path.string(), path.parent_path()).parse(in);
}

// Writes every field explicitly; parse_scenario(serialize_scenario(c)) == c
// given the same base directory.
inline std::string serialize_scenario(const ScenarioConfig& c) {
  using detail::fmt;
  std::ostringstream os;
  const auto& g = c.grid;
  if (!c.name.empty()) os << "[scenario]\nname = " << c.name << "\n\n";
  os << "[grid]\nnx = " << g.nx << "\nny = " << g.ny << "\nspacing_m = " << fmt(g.spacing_m)
     << "\norigin_m = " << fmt(g.origin.x) << ", " << fmt(g.origin.y) << "\n\n";
  os << "[nodes]\nap_m = " << fmt(g.ap_coord.x) << ", " << fmt(g.ap_coord.y) << "\ndest_m = " << fmt(g.dest_coord.x)
     << ", " << fmt(g.dest_coord.y) << "\nmobility_role = " << to_string(g.mobility_role)
     << "\nmobile_relays = " << g.mobile_relays << "\n";
  for (const auto& r : g.relay_coords) os << "relay_m = " << fmt(r.x) << ", " << fmt(r.y) << "\n";
  os << "\n[mobility]\nspeed_mps = " << fmt(c.speed_mps) << "\n\n";
  os << "[updates]\ntau_hz = " << fmt(c.updates.tau_hz) << "\nmu_hz = " << fmt(c.updates.mu_hz)
     << "\np_loss = " << fmt(c.updates.p_loss) << "\nqueue_size = " << c.updates.queue_size << "\n\n";
  os << "[location_error]\nsigma_m = " << fmt(c.error.sigma_m) << "\nbias_x_m = " << fmt(c.error.bias.x)
     << "\nbias_y_m = " << fmt(c.error.bias.y) << "\n\n";
  const auto& r = c.radio;
  os << "[radio]\npl_d0_db = " << fmt(r.pl_d0_db) << "\nd0_m = " << fmt(r.d0_m) << "\npath_loss_exp = " << fmt(r.n_exp)
     << "\ntx_power_dbm = " << fmt(r.tx_power_dbm) << "\nnoise_floor_dbm = " << fmt(r.noise_floor_dbm)
     << "\nricean_k = " << fmt(r.ricean_k) << "\nb_msdu_bytes = " << r.b_msdu_bytes
     << "\nsnr_scale_db = " << fmt(r.snr_scale_db) << "\nwall_loss_db = " << fmt(r.wall_loss_db)
     << "\nsecondary_rate = " << to_string(r.secondary) << "\n";
  for (const auto& e : r.rate_table) {
    os << "rate = " << fmt(e.phy_rate_mbps) << ", " << fmt(e.snr_threshold_db) << ", " << fmt(e.overhead_us) << "\n";
  }
  if (!g.walls.empty()) {
    os << "\n[walls]\n";
    for (std::size_t i = 0; i < g.walls.size(); ++i) {
      if (i % 8 == 0) os << (i ? "\n" : "") << "edges = ";
      else os << ", ";
      os << g.walls[i].a.value() << "-" << g.walls[i].b.value();
    }
    os << "\n";
  }
  if (!c.throughput_map.empty()) os << "\n[throughput_map]\npath = " << c.throughput_map << "\n";
  const auto& s = c.sim;
  os << "\n[simulation]\ndata_tx_interval_s = " << fmt(s.data_tx_interval_s) << "\nduration_s = " << fmt(s.duration_s)
     << "\nwarmup_s = " << fmt(s.warmup_s) << "\nreplications = " << s.replications << "\nseed = " << s.seed
     << "\nperiodic_updates = " << (s.periodic_updates ? "true" : "false")
     << "\ncontinuous_error = " << (s.continuous_error ? "true" : "false") << "\n";
  if (c.heuristic_rect) {
    const auto& h = *c.heuristic_rect;
    os << "\n[policy]\nheuristic_rect_m = " << fmt(h.lo.x) << ", " << fmt(h.lo.y) << ", " << fmt(h.hi.x) << ", "
       << fmt(h.hi.y) << "\n";
  }
  return os.str();
}

// CSV: m,x_m,y_m,t_direct_mbps,t_relay1_mbps[,t_relay2_mbps,...], one row per
// grid index in ascending order.
inline ThroughputTableSet read_throughput_map(std::istream& in, const GridScenario& scn,
                                              const std::string& source = "<map>") {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source, 0, "header", "empty throughput map");
  ++line_no;
  const auto header = detail::split(line, ',');
  if (header.size() < 5 || header[0] != "m" || header[1] != "x_m" || header[2] != "y_m" ||
      header[3] != "t_direct_mbps") {
    throw ParseError(source, line_no, "header", "expected m,x_m,y_m,t_direct_mbps,t_relay1_mbps[,...]");
  }
  for (std::size_t k = 4; k < header.size(); ++k) {
    if (header[k] != "t_relay" + std::to_string(k - 3) + "_mbps") {
      throw ParseError(source, line_no, header[k], "unexpected column name");
    }
  }
  const std::size_t relays = header.size() - 4;
  const std::size_t n2 = scn.size();
  ThroughputTableSet t;
  t.t_direct = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n2));
  t.t_relay.assign(relays, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n2)));
  std::vector<bool> seen(n2, false);
  std::size_t prev = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != header.size()) {
      throw ParseError(source, line_no, "", "expected " + std::to_string(header.size()) + " columns, got " +
                                                std::to_string(cols.size()));
    }
    const auto m = detail::to_uint(cols[0]);
    if (!m || *m < 1 || *m > n2) throw ParseError(source, line_no, "m", "grid index out of range");
    if (seen[*m - 1]) throw ParseError(source, line_no, "m", "duplicate grid point " + std::to_string(*m));
    if (*m < prev) throw ParseError(source, line_no, "m", "rows must be in ascending m");
    prev = *m;
    seen[*m - 1] = true;
    for (std::size_t k = 1; k < cols.size(); ++k) {
      const auto v = detail::to_double(cols[k]);
      if (!v) throw ParseError(source, line_no, header[k], "not a number");
      if (k >= 3 && *v < 0.0) throw ParseError(source, line_no, header[k], "negative throughput");
      if (k == 3) t.t_direct(static_cast<Eigen::Index>(*m - 1)) = *v;
      else if (k > 3) t.t_relay[k - 4](static_cast<Eigen::Index>(*m - 1)) = *v;
    }
  }
  for (std::size_t i = 0; i < n2; ++i) {
    if (!seen[i]) throw ParseError(source, line_no, "m", "missing grid point " + std::to_string(i + 1));
  }
  return t;
}

inline ThroughputTableSet load_throughput_map(const std::filesystem::path& path, const GridScenario& scn) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open throughput map");
  return read_throughput_map(in, scn, path.string());
}

inline void write_throughput_map(std::ostream& os, const GridScenario& scn, const ThroughputTableSet& t) {
  os << "m,x_m,y_m,t_direct_mbps";
  for (std::size_t r = 1; r <= t.relay_count(); ++r) os << ",t_relay" << r << "_mbps";
  os << "\n" << std::setprecision(10);
  for (std::size_t m = 0; m < t.size(); ++m) {
    const Vec2 c = scn.index_to_coord(StateIndex::from_zero_based(m));
    os << m + 1 << ',' << c.x << ',' << c.y << ',' << t.t_direct(static_cast<Eigen::Index>(m));
    for (const auto& tr : t.t_relay) os << ',' << tr(static_cast<Eigen::Index>(m));
    os << "\n";
  }
}

}  // namespace relaysel
