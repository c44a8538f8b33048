#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "relaysel/errors.hpp"

namespace relaysel {

using SparseGenerator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Closed communicating classes of the transition graph (edges with rate > 0).
// Each entry is the smallest state index in the class. A generator has a unique
// stationary distribution iff exactly one class is closed.
inline std::vector<std::size_t> closed_classes(const SparseGenerator& q) {
  const auto n = static_cast<std::size_t>(q.rows());
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0, n_comp = 0;

  struct Frame {
    std::size_t v;
    SparseGenerator::InnerIterator it;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    call.push_back({root, SparseGenerator::InnerIterator(q, static_cast<Eigen::Index>(root))});
    while (!call.empty()) {
      auto& f = call.back();
      bool descended = false;
      for (; f.it; ++f.it) {
        const auto w = static_cast<std::size_t>(f.it.col());
        if (w == f.v || !(f.it.value() > 0.0)) continue;
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          ++f.it;
          call.push_back({w, SparseGenerator::InnerIterator(q, static_cast<Eigen::Index>(w))});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = n_comp;
        } while (w != v);
        ++n_comp;
      }
    }
  }

  std::vector<bool> leaks(n_comp, false);
  std::vector<std::size_t> smallest(n_comp, unvisited);
  for (std::size_t v = 0; v < n; ++v) {
    smallest[comp[v]] = std::min(smallest[comp[v]], v);
    for (SparseGenerator::InnerIterator it(q, static_cast<Eigen::Index>(v)); it; ++it) {
      const auto w = static_cast<std::size_t>(it.col());
      if (w != v && it.value() > 0.0 && comp[w] != comp[v]) leaks[comp[v]] = true;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < n_comp; ++c) {
    if (!leaks[c]) out.push_back(smallest[c]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Returns the smallest state of the single closed class.
inline std::size_t require_unique_stationary(const SparseGenerator& q) {
  const auto closed = closed_classes(q);
  if (closed.size() != 1) {
    const std::size_t s = closed.size() > 1 ? closed[1] : 0;
    throw ReducibleChainError(
        s, "generator has " + std::to_string(closed.size()) +
               " closed classes; state " + std::to_string(s) + " lies in an unreached class");
  }
  return closed.front();
}

// States reachable from `from` along positive rates.
inline std::vector<bool> reachable_from(const SparseGenerator& q, Eigen::Index from) {
  std::vector<bool> seen(static_cast<std::size_t>(q.rows()), false);
  std::vector<Eigen::Index> todo{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!todo.empty()) {
    const Eigen::Index v = todo.back();
    todo.pop_back();
    for (SparseGenerator::InnerIterator it(q, v); it; ++it) {
      const auto w = static_cast<std::size_t>(it.col());
      if (!seen[w] && it.value() > 0.0) {
        seen[w] = true;
        todo.push_back(it.col());
      }
    }
  }
  return seen;
}

// ||p Q||_inf
inline double stationary_residual(const SparseGenerator& q, const Eigen::VectorXd& p) {
  Eigen::VectorXd r = (p.transpose() * q).transpose();
  return r.cwiseAbs().maxCoeff();
}

struct StationaryResult {
  Eigen::VectorXd p;
  double residual = 0.0;
};

// Solves p Q = 0, sum(p) = 1 by pinning one recurrent state to 1, dropping its
// balance equation and normalising afterwards. This keeps the system free of
// dense rows. Reuses the symbolic factorisation while the sparsity pattern of
// successive generators stays the same.
class StationarySolver {
 public:
  StationaryResult solve(const SparseGenerator& q, bool check_classes = true) {
    const Eigen::Index n = q.rows();
    if (n != q.cols() || n == 0) throw DomainError("generator must be square and non-empty");
    const auto k = static_cast<Eigen::Index>(check_classes ? require_unique_stationary(q) : 0);
    if (n == 1) return {Eigen::VectorXd::Ones(1), 0.0};
    Eigen::Index pin = k;
    std::vector<bool> recurrent;
    if (check_classes) {
      // Rates many orders below the rest (a weight of 1e-16, say) leave states
      // with almost no mass, and pinning one of those makes the reduced system
      // hopelessly scaled. Start from a closed class of the graph without them.
      recurrent = reachable_from(q, k);
      SparseGenerator strong = q;
      strong.prune(strong.coeffs().cwiseAbs().maxCoeff(), 1e-12);
      for (auto c : closed_classes(strong)) {
        if (recurrent[c]) {
          pin = static_cast<Eigen::Index>(c);
          break;
        }
      }
    }
    Eigen::VectorXd p = solve_pinned(q, pin);
    if (check_classes) {
      // Still re-pin on the heaviest recurrent state if the first guess was light.
      Eigen::Index heaviest = pin;
      double top = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (recurrent[static_cast<std::size_t>(i)] && std::abs(p(i)) > top) {
          top = std::abs(p(i));
          heaviest = i;
        }
      }
      if (std::abs(p(pin)) < 1e-6 * top) p = solve_pinned(q, heaviest);
    }
    const double most_negative = p.minCoeff() / p.sum();
    if (most_negative < -1e-9) {
      throw NumericError("stationary solve produced negative probability " + std::to_string(most_negative));
    }
    p = p.cwiseMax(0.0);
    p /= p.sum();
    if (!p.allFinite()) throw NumericError("stationary solve produced non-finite values");
    return {p, stationary_residual(q, p)};
  }

 private:
  // Unnormalised solution with p(k) = 1.
  Eigen::VectorXd solve_pinned(const SparseGenerator& q, Eigen::Index k) {
    const Eigen::Index n = q.rows();
    // Reduced unknowns skip index k.
    auto reduced = [k](Eigen::Index i) { return i < k ? i : i - 1; };
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(q.nonZeros()));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (SparseGenerator::InnerIterator it(q, i); it; ++it) {
        if (it.col() == k) continue;
        if (i == k) b(reduced(it.col())) = -it.value();
        else trips.emplace_back(reduced(it.col()), reduced(i), it.value());
      }
    }
    Eigen::SparseMatrix<double> a(n - 1, n - 1);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    if (!same_pattern(a, k)) {
      lu_.analyzePattern(a);
      remember_pattern(a, k);
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) {
      throw NumericError("sparse LU factorisation failed: " + lu_.lastErrorMessage());
    }
    Eigen::VectorXd x = lu_.solve(b);
    // One step of iterative refinement.
    const Eigen::VectorXd r = b - a * x;
    x += lu_.solve(r);

    Eigen::VectorXd p(n);
    p.head(k) = x.head(k);
    p(k) = 1.0;
    p.tail(n - 1 - k) = x.tail(n - 1 - k);
    return p;
  }

  bool same_pattern(const Eigen::SparseMatrix<double>& a, Eigen::Index pinned) const {
    if (a.rows() != rows_ || pinned != pinned_ || a.nonZeros() != static_cast<Eigen::Index>(inner_.size())) return false;
    return std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr()) &&
           std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr());
  }

  void remember_pattern(const Eigen::SparseMatrix<double>& a, Eigen::Index pinned) {
    rows_ = a.rows();
    pinned_ = pinned;
    inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.cols() + 1);
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  Eigen::Index rows_ = -1;
  Eigen::Index pinned_ = -1;
  std::vector<int> inner_;
  std::vector<int> outer_;
};

inline StationaryResult stationary_distribution(const SparseGenerator& q) {
  StationarySolver solver;
  return solver.solve(q);
}

}  // namespace relaysel
