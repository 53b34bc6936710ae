// Copyright 2026 The mps Authors
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

// Offline ground truth: exact optimum makespan by branch-and-bound, exact
// optimal packing of a few-size multiset, and the List/LPT greedy rules.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "mps/core.hpp"
#include "mps/detail/scaled.hpp"

namespace mps {

/// max(prefix_sum / m, max_p): the trivial lower bound on the optimum.
inline Rational lower_bound(const Rational& prefix_sum, const Rational& max_p, std::size_t m) {
  if (m == 0) throw std::invalid_argument("lower_bound: m must be positive");
  return max(prefix_sum / Rational(static_cast<long>(m)), max_p);
}

/// Graham's List: every job to a least loaded machine, in arrival order.
inline Schedule list_schedule(const JobSequence& seq) {
  Schedule s(seq.m, 0, "list");
  for (const auto& job : seq.jobs) s.assign(s.least_loaded(), job);
  return s;
}

/// List applied to the jobs sorted by non-increasing size (stable).
inline Schedule lpt_schedule(const JobSequence& seq) {
  std::vector<Job> sorted = seq.jobs;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Job& a, const Job& b) { return b.p < a.p; });
  Schedule s(seq.m, 0, "lpt");
  for (const auto& job : sorted) s.assign(s.least_loaded(), job);
  return s;
}

struct OptResult {
  Rational makespan;
  std::vector<std::size_t> machine_of;  // by arrival position (0-based)
};

namespace detail {

template <class Num>
class MakespanBranchAndBound {
 public:
  // sizes must be sorted non-increasing.
  MakespanBranchAndBound(std::vector<Num> sizes, std::size_t m, Num lower, Num upper,
                         std::vector<std::size_t> upper_assign)
      : sizes_(std::move(sizes)),
        m_(m),
        lower_(std::move(lower)),
        best_(std::move(upper)),
        best_assign_(std::move(upper_assign)),
        loads_(m),
        assign_(sizes_.size()) {}

  void solve() {
    if (!(lower_ < best_)) return;
    dfs(0, Num{});
  }

  const Num& best() const { return best_; }
  const std::vector<std::size_t>& best_assign() const { return best_assign_; }

 private:
  void dfs(std::size_t k, const Num& cur_max) {
    if (k == sizes_.size()) {
      if (cur_max < best_) {
        best_ = cur_max;
        best_assign_ = assign_;
      }
      return;
    }
    // Machines with equal load are interchangeable; this also lets a job
    // open at most one empty machine.
    std::vector<Num> tried;
    tried.reserve(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      if (std::find(tried.begin(), tried.end(), loads_[j]) != tried.end()) continue;
      tried.push_back(loads_[j]);
      Num next = loads_[j] + sizes_[k];
      if (!(next < best_)) continue;
      const Num saved = loads_[j];
      loads_[j] = next;
      assign_[k] = j;
      dfs(k + 1, cur_max < next ? next : cur_max);
      loads_[j] = saved;
      if (!(lower_ < best_)) return;
    }
  }

  std::vector<Num> sizes_;
  std::size_t m_;
  Num lower_;
  Num best_;
  std::vector<std::size_t> best_assign_;
  std::vector<Num> loads_;
  std::vector<std::size_t> assign_;
};

}  // namespace detail

/// Exact minimum makespan with a witness assignment. Branch-and-bound over
/// jobs in non-increasing size, seeded with LPT.
inline OptResult opt_exact_with_witness(const JobSequence& seq, std::size_t cap = 24) {
  const std::size_t n = seq.size();
  if (n > cap) {
    throw CapExceeded("opt_exact: " + std::to_string(n) + " jobs exceed the search cap of " + std::to_string(cap));
  }
  OptResult result;
  if (n == 0) return result;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seq.jobs[b].p < seq.jobs[a].p; });

  const Schedule lpt = lpt_schedule(seq);
  std::vector<std::size_t> lpt_assign(n);
  for (std::size_t k = 0; k < n; ++k) lpt_assign[k] = *lpt.machine_of(seq.jobs[order[k]].index);
  const Rational lower = lower_bound(seq.total(), seq.max_size(), seq.m);

  std::vector<Rational> sorted;
  for (auto k : order) sorted.push_back(seq.jobs[k].p);

  auto finish = [&](const Rational& best, const std::vector<std::size_t>& assign) {
    result.makespan = best;
    result.machine_of.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) result.machine_of[order[k]] = assign[k];
  };

  // The lower bound Σp/m need not be a scaled integer, so the int64 kernel
  // uses max p as its bound and stops only on a proven match.
  if (auto scaled = detail::scale_to_int64(sorted, mpz_class(static_cast<long>(n)))) {
    std::int64_t total = 0;
    for (auto v : scaled->values) total += v;
    const auto m = static_cast<std::int64_t>(seq.m);
    std::int64_t lb = std::max<std::int64_t>(scaled->values.front(), (total + m - 1) / m);
    const Rational lpt_span = lpt.makespan();
    const std::int64_t ub = (lpt_span * Rational(scaled->scale, mpz_class(1))).floor().get_si();
    detail::MakespanBranchAndBound<std::int64_t> bb(scaled->values, seq.m, lb, ub, lpt_assign);
    bb.solve();
    finish(detail::unscale(bb.best(), scaled->scale), bb.best_assign());
    return result;
  }
  detail::MakespanBranchAndBound<Rational> bb(sorted, seq.m, lower, lpt.makespan(), lpt_assign);
  bb.solve();
  finish(bb.best(), bb.best_assign());
  return result;
}

inline Rational opt_exact(const JobSequence& seq, std::size_t cap = 24) {
  return opt_exact_with_witness(seq, cap).makespan;
}

// ---------------------------------------------------------------------------
// Optimal schedules for multisets with few distinct sizes.

struct SizeClass {
  Rational size;
  std::size_t count = 0;
};

struct MultisetInstance {
  std::vector<SizeClass> classes;
  std::size_t m = 1;
};

/// Per-machine class counts of an optimal packing; class order follows the
/// instance.
struct MultisetSchedule {
  std::size_t m = 0;
  std::vector<Rational> sizes;
  std::vector<std::vector<std::size_t>> counts;  // counts[machine][class]
  std::vector<Rational> loads;
  Rational makespan;

  /// Concrete schedule; jobs are numbered class by class (class 0 first).
  Schedule expand() const {
    Schedule s(m, 0, "multiset");
    std::vector<std::size_t> next_index(sizes.size());
    std::size_t base = 1;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      next_index[c] = base;
      for (std::size_t j = 0; j < m; ++j) base += counts[j][c];
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        for (std::size_t k = 0; k < counts[j][c]; ++k) s.assign(j, Job{next_index[c]++, sizes[c]});
      }
    }
    return s;
  }
};

struct MultisetOptions {
  std::size_t max_classes = 16;       // nonzero classes
  std::size_t candidate_limit = 5'000'000;
  std::size_t node_limit = 50'000'000;
};

namespace detail {

template <class Num>
class HighMultiplicityPacker {
 public:
  HighMultiplicityPacker(std::vector<Num> sizes, std::vector<int> counts, std::size_t m, std::size_t node_limit)
      : sizes_(std::move(sizes)), counts_(std::move(counts)), m_(m), node_limit_(node_limit) {}

  /// Bin completion with failure memo: can every item fit on m machines of capacity cap?
  bool feasible(const Num& cap, std::vector<std::vector<int>>& machines) {
    cap_ = cap;
    memo_.clear();
    path_.clear();
    std::vector<int> residual = counts_;
    if (!dfs(residual, m_)) return false;
    machines = path_;
    return true;
  }

  std::size_t nodes() const { return nodes_; }

 private:
  static std::string key_of(const std::vector<int>& r) {
    return std::string(reinterpret_cast<const char*>(r.data()), r.size() * sizeof(int));
  }

  long lower_bound_machines(const std::vector<int>& r) const {
    // Martello-Toth L2 bound over thresholds alpha in {0} U {sizes <= cap/2}.
    const std::size_t k = sizes_.size();
    long best = 0;
    auto evaluate = [&](const Num& alpha) {
      long j1 = 0, j2 = 0;
      Num j2_sum{}, j3_sum{};
      for (std::size_t i = 0; i < k; ++i) {
        if (r[i] == 0) continue;
        const Num& s = sizes_[i];
        if (cap_ - alpha < s) {
          j1 += r[i];
        } else if (cap_ < s + s) {
          j2 += r[i];
          j2_sum += s * Num(r[i]);
        } else if (!(s < alpha)) {
          j3_sum += s * Num(r[i]);
        }
      }
      const Num slack = cap_ * Num(j2) - j2_sum;
      long extra = 0;
      if (slack < j3_sum) extra = ceil_div(j3_sum - slack, cap_);
      best = std::max(best, j1 + j2 + extra);
    };
    evaluate(Num{});
    for (std::size_t i = 0; i < k; ++i) {
      if (r[i] > 0 && !(cap_ < sizes_[i] + sizes_[i])) evaluate(sizes_[i]);
    }
    return best;
  }

  bool dfs(std::vector<int>& r, std::size_t machines_left) {
    if (++nodes_ > node_limit_) throw CapExceeded("opt_multiset: search node limit exceeded");
    std::size_t first = r.size();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] > 0) { first = i; break; }
    }
    if (first == r.size()) return true;
    if (machines_left == 0) return false;
    if (lower_bound_machines(r) > static_cast<long>(machines_left)) return false;
    const std::string key = key_of(r);
    if (auto it = memo_.find(key); it != memo_.end() && machines_left <= it->second) return false;

    std::vector<int> config(r.size(), 0);
    config[first] = 1;
    r[first] -= 1;
    const bool ok = complete(r, config, first, sizes_[first], machines_left);
    r[first] += 1;
    if (ok) return true;
    auto& slot = memo_[key];
    slot = std::max(slot, machines_left);
    return false;
  }

  // Extends `config` with items of classes >= i (largest counts first) and
  // recurses on each maximal completion. `r` excludes the items in config.
  bool complete(std::vector<int>& r, std::vector<int>& config, std::size_t i, const Num& load,
                std::size_t machines_left) {
    if (i == r.size()) {
      for (std::size_t t = 0; t < r.size(); ++t) {
        if (r[t] > 0 && !(cap_ < load + sizes_[t])) return false;  // not maximal
      }
      path_.push_back(config);
      if (dfs(r, machines_left - 1)) return true;
      path_.pop_back();
      return false;
    }
    int most = 0;
    Num room = cap_ - load;
    while (most < r[i] && !(room < sizes_[i] * Num(most + 1))) ++most;
    for (int c = most; c >= 0; --c) {
      config[i] += c;
      r[i] -= c;
      const bool ok = complete(r, config, i + 1, load + sizes_[i] * Num(c), machines_left);
      r[i] += c;
      config[i] -= c;
      if (ok) return true;
    }
    return false;
  }

  std::vector<Num> sizes_;
  std::vector<int> counts_;
  std::size_t m_;
  std::size_t node_limit_;
  std::size_t nodes_ = 0;
  Num cap_{};
  std::unordered_map<std::string, std::size_t> memo_;
  std::vector<std::vector<int>> path_;
};

template <class Num>
void collect_subset_sums(const std::vector<Num>& sizes, const std::vector<int>& counts, std::size_t i, const Num& sum,
                         const Num& upper, std::vector<Num>& out, std::size_t limit) {
  if (i == sizes.size()) {
    out.push_back(sum);
    if (out.size() > limit) throw CapExceeded("opt_multiset: candidate makespan set too large");
    return;
  }
  Num s = sum;
  for (int c = 0; c <= counts[i]; ++c) {
    if (upper < s) break;
    collect_subset_sums(sizes, counts, i + 1, s, upper, out, limit);
    s += sizes[i];
  }
}

// sizes sorted strictly decreasing, counts > 0. Returns per-machine configs.
template <class Num>
std::vector<std::vector<int>> solve_multiset(const std::vector<Num>& sizes, const std::vector<int>& counts,
                                             std::size_t m, const MultisetOptions& options) {
  const std::size_t k = sizes.size();
  // LPT witness: items in decreasing size, each to a least loaded machine.
  std::vector<std::vector<int>> best(m, std::vector<int>(k, 0));
  std::vector<Num> loads(m);
  for (std::size_t c = 0; c < k; ++c) {
    for (int q = 0; q < counts[c]; ++q) {
      std::size_t j = 0;
      for (std::size_t t = 1; t < m; ++t) {
        if (loads[t] < loads[j]) j = t;
      }
      loads[j] += sizes[c];
      best[j][c] += 1;
    }
  }
  Num upper = *std::max_element(loads.begin(), loads.end());
  Num area{};
  for (std::size_t c = 0; c < k; ++c) area += sizes[c] * Num(counts[c]);

  std::vector<Num> candidates;
  collect_subset_sums(sizes, counts, 0, Num{}, upper, candidates, options.candidate_limit);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  const Num mm(static_cast<long>(m));
  std::erase_if(candidates, [&](const Num& t) { return t < sizes.front() || t * mm < area; });
  // upper itself is a machine load, hence a candidate.
  std::size_t lo = 0, hi = static_cast<std::size_t>(
                           std::lower_bound(candidates.begin(), candidates.end(), upper) - candidates.begin());
  HighMultiplicityPacker<Num> packer(sizes, counts, m, options.node_limit);
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<std::vector<int>> machines;
    if (packer.feasible(candidates[mid], machines)) {
      hi = mid;
      machines.resize(m, std::vector<int>(k, 0));
      best = std::move(machines);
    } else {
      lo = mid + 1;
    }
  }
  return best;
}

}  // namespace detail

/// Exact optimal schedule of a multiset of jobs given as (size, count) classes.
/// Binary search over the achievable machine loads, each decided by bin
/// completion with an L2 bound and a failure memo.
inline MultisetSchedule opt_multiset(const MultisetInstance& inst, const MultisetOptions& options = {}) {
  if (inst.m == 0) throw std::invalid_argument("opt_multiset: m must be positive");
  const std::size_t classes = inst.classes.size();
  for (std::size_t a = 0; a < classes; ++a) {
    if (inst.classes[a].size.sign() <= 0) throw std::invalid_argument("opt_multiset: sizes must be positive");
    for (std::size_t b = a + 1; b < classes; ++b) {
      if (inst.classes[a].size == inst.classes[b].size) {
        throw std::invalid_argument("opt_multiset: class sizes must be distinct");
      }
    }
  }
  MultisetSchedule out;
  out.m = inst.m;
  for (const auto& c : inst.classes) out.sizes.push_back(c.size);
  out.counts.assign(inst.m, std::vector<std::size_t>(classes, 0));
  out.loads.assign(inst.m, Rational{});

  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < classes; ++c) {
    if (inst.classes[c].count > 0) active.push_back(c);
  }
  if (active.size() > options.max_classes) {
    throw CapExceeded("opt_multiset: " + std::to_string(active.size()) + " nonempty classes exceed the cap of " +
                      std::to_string(options.max_classes));
  }
  if (active.empty()) return out;
  std::sort(active.begin(), active.end(),
            [&](std::size_t a, std::size_t b) { return inst.classes[b].size < inst.classes[a].size; });

  std::vector<Rational> sizes;
  std::vector<int> counts;
  long total_items = 0;
  for (auto c : active) {
    sizes.push_back(inst.classes[c].size);
    counts.push_back(static_cast<int>(inst.classes[c].count));
    total_items += static_cast<long>(inst.classes[c].count);
  }

  std::vector<std::vector<int>> machines;
  if (auto scaled = detail::scale_to_int64(sizes, mpz_class(total_items + 1))) {
    machines = detail::solve_multiset<std::int64_t>(scaled->values, counts, inst.m, options);
  } else {
    machines = detail::solve_multiset<Rational>(sizes, counts, inst.m, options);
  }
  for (std::size_t j = 0; j < inst.m; ++j) {
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto q = static_cast<std::size_t>(machines[j][a]);
      out.counts[j][active[a]] = q;
      out.loads[j] += sizes[a] * Rational(static_cast<long>(q));
    }
    out.makespan = max(out.makespan, out.loads[j]);
  }
  return out;
}

}  // namespace mps
