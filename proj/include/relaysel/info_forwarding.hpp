#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "relaysel/errors.hpp"

namespace relaysel {

enum class Label : std::uint8_t { D = 0, R = 1 };

inline char to_char(Label l) { return l == Label::D ? 'D' : 'R'; }

// State of the AP-view / interface-queue process at one grid point.
// queue.front() is the update in service.
struct ForwardState {
  Label ap_view = Label::D;
  std::vector<Label> queue;

  friend bool operator==(const ForwardState&, const ForwardState&) = default;

  std::string label() const {
    std::string s(1, to_char(ap_view));
    s += '|';
    for (auto l : queue) s += to_char(l);
    return s;
  }
};

// a + b_D * w_D + b_R * w_R
struct LinearRate {
  double constant = 0.0;
  double coef_wd = 0.0;
  double coef_wr = 0.0;

  double operator()(double w_d, double w_r) const { return constant + coef_wd * w_d + coef_wr * w_r; }
  bool depends_on_weights() const { return coef_wd != 0.0 || coef_wr != 0.0; }

  LinearRate& operator+=(const LinearRate& o) {
    constant += o.constant;
    coef_wd += o.coef_wd;
    coef_wr += o.coef_wr;
    return *this;
  }
};

struct TemplateEntry {
  std::size_t from = 0;
  std::size_t to = 0;
  LinearRate rate;
};

struct InfoForwardTemplate {
  std::size_t n_q = 2;
  double tau_hz = 0.2;
  double mu_hz = 1.0;
  double p_loss = 0.0;
  std::vector<ForwardState> states;
  // Sorted by (from, to); includes the diagonal.
  std::vector<TemplateEntry> entries;

  std::size_t size() const { return states.size(); }

  // Dense instantiation at one weight pair.
  Eigen::MatrixXd instantiate(double w_d, double w_r) const {
    const auto l = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(l, l);
    for (const auto& e : entries) {
      q(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += e.rate(w_d, w_r);
    }
    return q;
  }

  std::size_t index_of(const ForwardState& s) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i] == s) return i;
    }
    throw DomainError("unknown forwarding state " + s.label());
  }
};

// 2 * (2^(n_q + 1) - 1)
inline std::size_t forwarding_state_count(std::size_t n_q) {
  return 2 * ((std::size_t{1} << (n_q + 1)) - 1);
}

namespace detail {

// Queue contents of length 0..n_q in length-then-lexicographic order (D < R).
inline std::vector<std::vector<Label>> enumerate_queues(std::size_t n_q) {
  std::vector<std::vector<Label>> out;
  out.emplace_back();
  for (std::size_t len = 1; len <= n_q; ++len) {
    for (std::size_t bits = 0; bits < (std::size_t{1} << len); ++bits) {
      std::vector<Label> q(len);
      for (std::size_t k = 0; k < len; ++k) {
        q[k] = ((bits >> (len - 1 - k)) & 1U) ? Label::R : Label::D;
      }
      out.push_back(std::move(q));
    }
  }
  return out;
}

inline std::size_t queue_offset(const std::vector<Label>& q) {
  std::size_t offset = (std::size_t{1} << q.size()) - 1;
  std::size_t bits = 0;
  for (auto l : q) bits = (bits << 1) | static_cast<std::size_t>(l);
  return offset + bits;
}

}  // namespace detail

// Builds the symbolic forwarding generator. States are numbered so that the
// D-view block comes first (idle, one update, two updates, ...), followed by
// the R-view block in the same order; for n_q = 2 this matches the familiar
// 14-state picture (state 3 = view D with an R update in service, state 8 =
// view R idle).
inline InfoForwardTemplate build_template(std::size_t n_q, double tau_hz, double mu_hz, double p_loss) {
  if (n_q < 1) throw DomainError("queue size must be >= 1");
  if (n_q > 16) throw DomainError("queue size too large");
  if (!(tau_hz >= 0.0) || !std::isfinite(tau_hz)) throw DomainError("tau must be >= 0");
  if (!(mu_hz > 0.0) || !std::isfinite(mu_hz)) throw DomainError("mu must be > 0");
  if (!(p_loss >= 0.0 && p_loss < 1.0)) throw DomainError("p_loss must lie in [0, 1)");

  InfoForwardTemplate t;
  t.n_q = n_q;
  t.tau_hz = tau_hz;
  t.mu_hz = mu_hz;
  t.p_loss = p_loss;

  const auto queues = detail::enumerate_queues(n_q);
  const std::size_t per_view = queues.size();
  for (Label v : {Label::D, Label::R}) {
    for (const auto& q : queues) t.states.push_back({v, q});
  }
  const auto index = [&](Label v, const std::vector<Label>& q) {
    return static_cast<std::size_t>(v) * per_view + detail::queue_offset(q);
  };

  for (std::size_t s = 0; s < t.states.size(); ++s) {
    const auto& st = t.states[s];
    std::map<std::size_t, LinearRate> row;
    LinearRate out_total;
    if (st.queue.size() < n_q) {
      auto qd = st.queue;
      qd.push_back(Label::D);
      auto qr = st.queue;
      qr.push_back(Label::R);
      row[index(st.ap_view, qd)] += LinearRate{0.0, tau_hz, 0.0};
      row[index(st.ap_view, qr)] += LinearRate{0.0, 0.0, tau_hz};
      out_total += LinearRate{0.0, tau_hz, tau_hz};
    }
    if (!st.queue.empty()) {
      const Label head = st.queue.front();
      const std::vector<Label> rest(st.queue.begin() + 1, st.queue.end());
      row[index(head, rest)] += LinearRate{mu_hz * (1.0 - p_loss), 0.0, 0.0};
      if (p_loss > 0.0) row[index(st.ap_view, rest)] += LinearRate{mu_hz * p_loss, 0.0, 0.0};
      out_total += LinearRate{mu_hz, 0.0, 0.0};
    }
    row[s] += LinearRate{-out_total.constant, -out_total.coef_wd, -out_total.coef_wr};
    for (const auto& [to, rate] : row) t.entries.push_back({s, to, rate});
  }
  return t;
}

struct StateSets {
  std::vector<std::size_t> d_view;
  std::vector<std::size_t> r_view;
};

inline StateSets state_sets(const InfoForwardTemplate& t) {
  StateSets sets;
  for (std::size_t s = 0; s < t.states.size(); ++s) {
    (t.states[s].ap_view == Label::D ? sets.d_view : sets.r_view).push_back(s);
  }
  return sets;
}

// from,to,const,coef_wD,coef_wR with 1-based state numbers.
inline void dump_template(std::ostream& os, const InfoForwardTemplate& t) {
  os << "from,to,const,coef_wD,coef_wR\n";
  for (const auto& e : t.entries) {
    os << e.from + 1 << ',' << e.to + 1 << ',' << e.rate.constant << ',' << e.rate.coef_wd << ','
       << e.rate.coef_wr << '\n';
  }
}

}  // namespace relaysel
