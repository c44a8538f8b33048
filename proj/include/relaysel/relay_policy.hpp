#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace relaysel {

// Decision per believed grid point: 0 = direct, n = relay n.
struct RelayPolicy {
  using Decision = std::uint8_t;
  std::vector<Decision> decisions;

  RelayPolicy() = default;
  explicit RelayPolicy(std::size_t n2, Decision fill = 0) : decisions(n2, fill) {}
  explicit RelayPolicy(std::vector<Decision> d) : decisions(std::move(d)) {}

  friend bool operator==(const RelayPolicy&, const RelayPolicy&) = default;

  std::size_t size() const noexcept { return decisions.size(); }
  Decision operator[](std::size_t i) const { return decisions[i]; }
  Decision& operator[](std::size_t i) { return decisions[i]; }

  bool relays_at(std::size_t i) const { return decisions[i] != 0; }

  std::size_t relay_points() const {
    return static_cast<std::size_t>(std::count_if(decisions.begin(), decisions.end(),
                                                  [](Decision d) { return d != 0; }));
  }

  Decision max_decision() const {
    return decisions.empty() ? 0 : *std::max_element(decisions.begin(), decisions.end());
  }

  // "0010..." style key, also used for hashing.
  std::string key() const {
    std::string s;
    s.reserve(decisions.size());
    for (auto d : decisions) s += static_cast<char>('0' + d);
    return s;
  }
};

struct RelayPolicyHash {
  std::size_t operator()(const RelayPolicy& p) const { return std::hash<std::string>{}(p.key()); }
};

}  // namespace relaysel
