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

// The (4/3+eps)-competitive family for a known optimum T. Machines split
// into mu core machines, which follow a sparsified target configuration of
// large jobs and absorb all small jobs, and m - mu reserve machines that
// take surplus large jobs by Best-Fit.

#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mps/a1.hpp"
#include "mps/core.hpp"
#include "mps/family.hpp"

namespace mps::a2 {

struct Params {
  Rational eps;
  Rational eps_prime;
  Rational assumed_opt;
  long lambda = 0;
  long l = 0;
  std::vector<Rational> a;  // a[i-1] = a_i * T, i = 1..l
  std::vector<Rational> b;  // b[i-1] = b_i * T
  std::size_t m = 0;
  std::size_t mu = 0;
  std::size_t kappa = 0;
  std::size_t m0 = 0;

  std::size_t classes() const { return static_cast<std::size_t>(2 * l - 1); }
  std::size_t l_size() const { return static_cast<std::size_t>(l); }
  /// Exclusive lower end of class i (1-based, 1..2l-1).
  Rational lower(std::size_t i) const { return i <= l_size() ? a.at(i - 1) : Rational(2) * a.at(i - l_size() - 1); }
  /// Inclusive upper end of class i.
  Rational upper(std::size_t i) const { return i <= l_size() ? b.at(i - 1) : Rational(2) * b.at(i - l_size() - 1); }
  Rational small_limit() const { return (Rational(1, 3) + Rational(2) * eps_prime) * assumed_opt; }
  Rational top() const { return upper(classes()); }
  /// (4/3 + eps) T, the load every valid lane respects.
  Rational load_bound() const { return (Rational(4, 3) + eps) * assumed_opt; }
  /// (1 + eps') T from the small-job structure property.
  Rational lemma_bound() const { return (Rational(1) + eps_prime) * assumed_opt; }
  /// Machine count from which valid configurations are guaranteed: 2l/eps'^2.
  Rational threshold() const { return Rational(2 * l) / (eps_prime * eps_prime); }
  bool above_threshold() const { return Rational(static_cast<long>(m)) >= threshold(); }
  /// Targeted minimal and maximal large-job loads for a class-c core machine.
  Rational ell_minus(std::size_t c) const { return c == 0 ? Rational{} : Rational(2) * a.at(base_class(c) - 1); }
  Rational ell_plus(std::size_t c) const { return c == 0 ? Rational{} : Rational(2) * b.at(base_class(c) - 1); }
  /// Number of class-c jobs a class-c machine is meant to hold.
  std::size_t slots(std::size_t c) const { return c == 0 ? 0 : (c <= l_size() ? 2 : 1); }

 private:
  std::size_t base_class(std::size_t c) const { return c <= l_size() ? c : c - l_size(); }
};

inline Params make_params(const Rational& eps, std::size_t m, const Rational& assumed_opt) {
  if (eps.sign() <= 0 || eps > Rational(1)) throw std::invalid_argument("a2: epsilon must lie in (0, 1]");
  if (m == 0) throw std::invalid_argument("a2: m must be positive");
  if (assumed_opt.sign() <= 0) throw std::invalid_argument("a2: assumed optimum must be positive");
  Params p;
  p.eps = eps;
  p.eps_prime = eps / Rational(8);
  p.assumed_opt = assumed_opt;
  p.m = m;
  p.lambda = ceil_log(Rational(3, 8) + Rational(1) / (Rational(48) * p.eps_prime), Rational(2));
  p.l = p.lambda + 2;
  const Rational base = Rational(1, 3) - Rational(2) * p.eps_prime;
  const Rational width = Rational(1, 12) + Rational(3, 2) * p.eps_prime;
  const Rational floor_a = Rational(1, 3) + Rational(2) * p.eps_prime;
  for (long i = 1; i <= p.l; ++i) {
    p.a.push_back(max(base + width / pow(Rational(2), p.lambda + 1 - i), floor_a) * assumed_opt);
    p.b.push_back((base + width / pow(Rational(2), p.lambda - i)) * assumed_opt);
  }
  const Rational ml(static_cast<long>(m));
  p.mu = static_cast<std::size_t>(((Rational(1) + p.eps_prime) / (Rational(1) + Rational(2) * p.eps_prime) * ml).ceil_long());
  p.kappa = static_cast<std::size_t>(
      (Rational(2) * (Rational(2) + Rational(1) / p.eps_prime) * Rational(2 * p.l - 1)).ceil_long());
  p.m0 = (m - p.mu) / p.classes();
  return p;
}

inline nlohmann::json to_json(const Params& p) {
  nlohmann::json j;
  j["epsilon"] = p.eps.str();
  j["eps_prime"] = p.eps_prime.str();
  j["T"] = p.assumed_opt.str();
  j["lambda"] = p.lambda;
  j["l"] = p.l;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    j["a"].push_back(p.a[i].str());
    j["b"].push_back(p.b[i].str());
  }
  j["classes"] = p.classes();
  j["m"] = p.m;
  j["mu"] = p.mu;
  j["kappa"] = p.kappa;
  j["m0"] = p.m0;
  j["threshold"] = p.threshold().str();
  j["above_threshold"] = p.above_threshold();
  j["load_bound"] = p.load_bound().str();
  return j;
}

/// 0 for small jobs, the class index otherwise; nullopt above the top class.
inline std::optional<std::size_t> classify(const Params& p, const Rational& size) {
  if (size <= p.small_limit()) return 0;
  for (std::size_t i = 1; i <= p.classes(); ++i) {
    if (size <= p.upper(i)) return i;
  }
  return std::nullopt;
}

using ClassCounts = std::vector<std::size_t>;  // entry i-1 is n_i
using UVector = std::vector<std::size_t>;

inline ClassCounts class_counts(const Params& p, std::span<const Job> jobs) {
  ClassCounts n(p.classes(), 0);
  for (const auto& job : jobs) {
    const auto c = classify(p, job.p);
    if (!c) throw std::domain_error("a2: job " + std::to_string(job.index) + " lies above the top class");
    if (*c > 0) ++n[*c - 1];
  }
  return n;
}

/// As class_counts, but jobs above the top class are ignored.
inline ClassCounts classifiable_counts(const Params& p, std::span<const Job> jobs) {
  ClassCounts n(p.classes(), 0);
  for (const auto& job : jobs) {
    const auto c = classify(p, job.p);
    if (c && *c > 0) ++n[*c - 1];
  }
  return n;
}

struct Configuration {
  std::vector<std::size_t> c;        // length mu, entries in 0..2l-1
  std::vector<std::size_t> machines; // machines[i-1] = m_i

  std::size_t mu1(std::size_t l) const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < l; ++i) s += machines[i];
    return s;
  }
  std::size_t mu2(std::size_t l) const {
    std::size_t s = 0;
    for (std::size_t i = l; i < machines.size(); ++i) s += machines[i];
    return s;
  }
};

/// c(u): u_i * m0 entries of value i in increasing i, cut or zero-padded to mu.
inline Configuration config_from_u(const Params& p, const UVector& u) {
  if (u.size() != p.classes()) throw std::invalid_argument("a2: u must have 2l-1 entries");
  Configuration cfg;
  cfg.machines.assign(p.classes(), 0);
  cfg.c.reserve(p.mu);
  for (std::size_t i = 1; i <= p.classes() && cfg.c.size() < p.mu; ++i) {
    if (u[i - 1] > p.kappa) throw std::invalid_argument("a2: u entry exceeds kappa");
    const std::size_t want = u[i - 1] * p.m0;
    const std::size_t take = std::min(want, p.mu - cfg.c.size());
    cfg.c.insert(cfg.c.end(), take, i);
    cfg.machines[i - 1] = take;
  }
  cfg.c.resize(p.mu, 0);
  return cfg;
}

inline bool is_valid(const Params& p, const Configuration& cfg, const ClassCounts& n) {
  const std::size_t l = p.l_size();
  for (std::size_t i = 0; i < p.classes(); ++i) {
    const std::size_t need = i < l ? 2 * cfg.machines[i] : cfg.machines[i];
    if (need > n.at(i)) return false;
  }
  long small_surplus = 0;
  long big_surplus = 0;
  for (std::size_t i = 0; i < l; ++i) small_surplus += static_cast<long>(n[i]);
  for (std::size_t i = l; i < p.classes(); ++i) big_surplus += static_cast<long>(n[i]);
  small_surplus -= 2 * static_cast<long>(cfg.mu1(l));
  big_surplus -= static_cast<long>(cfg.mu2(l));
  // Both surpluses are nonnegative once conditions (i) and (ii) hold.
  const long pairs = (small_surplus + 1) / 2;
  return pairs + big_surplus <= static_cast<long>(p.m - p.mu);
}

/// Counting consequence of OPT <= T: ceil(sum_{i<=l} n_i / 2) + sum_{i>l} n_i <= m.
inline bool packing_bound_holds(const Params& p, const ClassCounts& n) {
  std::size_t small = 0;
  std::size_t big = 0;
  for (std::size_t i = 0; i < p.classes(); ++i) (i < p.l_size() ? small : big) += n.at(i);
  return (small + 1) / 2 + big <= p.m;
}

/// The constructive choice u_i = floor(n_i / (2 m0)) for i <= l and
/// floor(n_i / m0) above. Throws when the machine count is below 2l/eps'^2
/// or the counts cannot come from a sequence with OPT <= T.
inline UVector valid_u(const Params& p, const ClassCounts& n) {
  if (!p.above_threshold()) {
    throw std::domain_error("a2: m = " + std::to_string(p.m) + " is below 2l/eps'^2 = " + p.threshold().str());
  }
  if (n.size() != p.classes()) throw std::invalid_argument("a2: class counts must have 2l-1 entries");
  if (!packing_bound_holds(p, n)) throw std::domain_error("a2: class counts are inconsistent with OPT <= T");
  UVector u(p.classes(), 0);
  for (std::size_t i = 0; i < p.classes(); ++i) {
    u[i] = i < p.l_size() ? n[i] / (2 * p.m0) : n[i] / p.m0;
    if (u[i] > p.kappa) throw std::logic_error("a2: constructed u leaves U");
  }
  return u;
}

/// valid_u without preconditions: entries are clamped into U and m0 = 0
/// yields the zero vector. Used when the guess T may be wrong.
inline UVector clamped_u(const Params& p, const ClassCounts& n) {
  UVector u(p.classes(), 0);
  if (p.m0 == 0) return u;
  for (std::size_t i = 0; i < p.classes(); ++i) {
    u[i] = std::min(p.kappa, i < p.l_size() ? n.at(i) / (2 * p.m0) : n.at(i) / p.m0);
  }
  return u;
}

/// Minimum segment tree answering "leftmost active index with value <= x".
class LeftmostAtMost {
 public:
  explicit LeftmostAtMost(std::size_t n) : n_(n), values_(n) {
    size_ = 1;
    while (size_ < n) size_ <<= 1;
    best_.assign(2 * size_, kNone);
  }

  void set(std::size_t i, Rational value) {
    values_[i] = std::move(value);
    std::size_t node = size_ + i;
    best_[node] = i;
    for (node >>= 1; node >= 1; node >>= 1) best_[node] = pick(best_[2 * node], best_[2 * node + 1]);
  }

  std::optional<std::size_t> leftmost_at_most(const Rational& x) const {
    if (n_ == 0 || best_[1] == kNone || x < values_[best_[1]]) return std::nullopt;
    std::size_t node = 1;
    while (node < size_) {
      const std::size_t left = best_[2 * node];
      node = (left != kNone && values_[left] <= x) ? 2 * node : 2 * node + 1;
    }
    return node - size_;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t pick(std::size_t a, std::size_t b) const {
    if (a == kNone) return b;
    if (b == kNone) return a;
    return values_[b] < values_[a] ? b : a;
  }
  std::size_t n_;
  std::size_t size_ = 1;
  std::vector<Rational> values_;
  std::vector<std::size_t> best_;
};

/// A single lane A_c.
class Lane : public OnlineScheduler {
 public:
  Lane(Params params, Configuration cfg, std::size_t label = 0)
      : p_(std::move(params)),
        cfg_(std::move(cfg)),
        schedule_(p_.m, label, "a2" + counts_str(cfg_.machines)),
        bound_(p_.load_bound()),
        small_fit_(p_.mu) {
    if (cfg_.c.size() != p_.mu) throw std::invalid_argument("a2: configuration length must equal mu");
    const std::size_t classes = p_.classes();
    members_.assign(classes + 1, {});
    for (std::size_t j = 0; j < p_.mu; ++j) {
      if (cfg_.c[j] > classes) throw std::invalid_argument("a2: configuration entry out of range");
      members_[cfg_.c[j]].push_back(j);
    }
    admit_cursor_.assign(classes + 1, 0);
    fresh_cursor_.assign(classes + 1, 0);
    slots_.resize(p_.mu);
    for (std::size_t j = 0; j < p_.mu; ++j) slots_[j] = p_.slots(cfg_.c[j]);
    small_.assign(p_.mu, Rational{});
    for (std::size_t c = 0; c <= classes; ++c) {
      minus_.push_back(p_.ell_minus(c));
      plus_.push_back(p_.ell_plus(c));
    }
  }

  Placement place(const Job& job) override {
    const auto cls = classify(p_, job.p);
    if (!cls) return Placement::none();
    const std::optional<std::size_t> target = *cls == 0 ? place_small(job.p) : place_large(*cls, job.p);
    if (!target) return Placement::none();
    schedule_.assign(*target, job);
    return Placement::to(*target);
  }

  const Schedule& schedule() const override { return schedule_; }
  std::string describe() const override { return schedule_.tag(); }

  const Params& params() const { return p_; }
  const Configuration& configuration() const { return cfg_; }
  std::size_t core_machines() const { return p_.mu; }
  bool is_core(std::size_t j) const { return j < p_.mu; }
  std::size_t config_entry(std::size_t j) const { return cfg_.c.at(j); }
  const Rational& ell_minus(std::size_t j) const { return minus_[cfg_.c.at(j)]; }
  const Rational& ell_plus(std::size_t j) const { return plus_[cfg_.c.at(j)]; }
  const Rational& small_load(std::size_t j) const { return small_.at(j); }
  bool admissible(std::size_t j) const { return slots_.at(j) > 0; }

  static std::string counts_str(const std::vector<std::size_t>& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ")";
    return os.str();
  }

 private:
  std::optional<std::size_t> place_large(std::size_t cls, const Rational& size) {
    auto& cursor = admit_cursor_[cls];
    const auto& list = members_[cls];
    while (cursor < list.size() && slots_[list[cursor]] == 0) ++cursor;
    if (cursor < list.size()) {
      const std::size_t j = list[cursor];
      --slots_[j];
      return j;
    }
    if (p_.mu >= p_.m) return std::nullopt;  // no reserve machine exists
    std::optional<std::size_t> best;
    for (std::size_t j = p_.mu; j < p_.m; ++j) {
      if (schedule_.load(j) + size <= bound_ && (!best || schedule_.load(j) > schedule_.load(*best))) best = j;
    }
    return best ? *best : p_.mu;
  }

  std::optional<std::size_t> place_small(const Rational& size) {
    std::optional<std::size_t> target = small_fit_.leftmost_at_most(bound_ - size);
    if (!target) {
      // Among machines without small jobs, the lowest l^- whose l^+ + p fits.
      for (std::size_t c = 0; c < members_.size(); ++c) {
        auto& cursor = fresh_cursor_[c];
        const auto& list = members_[c];
        while (cursor < list.size() && small_[list[cursor]].sign() > 0) ++cursor;
        if (cursor == list.size() || plus_[c] + size > bound_) continue;
        const std::size_t j = list[cursor];
        if (!target || minus_[c] < ell_minus(*target) || (minus_[c] == ell_minus(*target) && j < *target)) target = j;
      }
    }
    const std::size_t j = target ? *target : 0;
    small_[j] += size;
    small_fit_.set(j, plus_[cfg_.c[j]] + small_[j]);
    return j;
  }

  Params p_;
  Configuration cfg_;
  Schedule schedule_;
  Rational bound_;
  std::vector<std::vector<std::size_t>> members_;  // core machines by class entry
  std::vector<std::size_t> admit_cursor_;
  std::vector<std::size_t> fresh_cursor_;
  std::vector<std::size_t> slots_;
  std::vector<Rational> small_;
  std::vector<Rational> minus_;
  std::vector<Rational> plus_;
  LeftmostAtMost small_fit_;
};

struct Full {
  std::size_t lane_cap = default_lane_cap();
};
struct Targeted {
  UVector u;
};
using Mode = std::variant<Full, Targeted>;

/// A2(eps) for m machines and assumed optimum T.
class Family : public LaneFamily {
 public:
  Family(const Rational& eps, std::size_t m, const Rational& assumed_opt, Mode mode)
      : p_(make_params(eps, m, assumed_opt)) {
    if (const auto* targeted = std::get_if<Targeted>(&mode)) {
      config_from_u(p_, targeted->u);  // validates
      targeted_ = targeted->u;
      return;
    }
    const mpz_class total = full_size_closed_form(p_);
    const std::size_t cap = std::get<Full>(mode).lane_cap;
    if (total > mpz_class(static_cast<unsigned long>(cap))) {
      throw CapExceeded("a2: full family has " + total.get_str() + " lanes, above the cap of " + std::to_string(cap));
    }
    size_ = total.get_ui();
  }

  /// (kappa + 1)^(2l - 1).
  static mpz_class full_size_closed_form(const Params& p) {
    mpz_class out;
    mpz_ui_pow_ui(out.get_mpz_t(), p.kappa + 1, p.classes());
    return out;
  }

  std::size_t size() const override { return targeted_ ? 1 : size_; }

  /// Lane index to u, u_1 the most significant digit in base kappa + 1.
  UVector u_of(std::size_t index) const {
    if (targeted_) return *targeted_;
    UVector u(p_.classes(), 0);
    for (std::size_t i = p_.classes(); i-- > 0;) {
      u[i] = index % (p_.kappa + 1);
      index /= p_.kappa + 1;
    }
    return u;
  }

  std::unique_ptr<OnlineScheduler> make_lane(std::size_t index) const override {
    return std::make_unique<Lane>(p_, config_from_u(p_, u_of(index)), index);
  }

  /// c(u) is fixed by its per-class machine counts, so lanes with equal
  /// counts behave identically.
  std::optional<std::string> share_key(std::size_t index) const override {
    if (targeted_) return std::nullopt;
    return Lane::counts_str(config_from_u(p_, u_of(index)).machines);
  }

  std::string name() const override { return "A2(" + p_.eps.str() + ")"; }
  const Params& params() const { return p_; }

 private:
  Params p_;
  std::size_t size_ = 0;
  std::optional<UVector> targeted_;
};

/// Whether A3(eps) runs A1(1/3) on m machines, i.e. m < 2l/eps'^2.
inline bool a3_uses_a1(const Rational& eps, std::size_t m) {
  return !make_params(eps, m, Rational(1)).above_threshold();
}

inline const Rational& a3_fallback_eps() {
  static const Rational kThird(1, 3);
  return kThird;
}

enum class Selection { kFull, kTargeted };

/// A3(eps): A1(1/3) below the machine threshold, A2(eps) otherwise. In
/// targeted mode the single lane is derived from `jobs`: the exact class
/// vector when the sequence fits the assumed optimum, a clamped vector when
/// it does not.
inline std::unique_ptr<LaneFamily> a3_family(const Rational& eps, std::size_t m, const Rational& assumed_opt,
                                             Selection selection, std::span<const Job> jobs = {},
                                             std::size_t lane_cap = default_lane_cap()) {
  if (a3_uses_a1(eps, m)) {
    if (selection == Selection::kFull) {
      return std::make_unique<a1::Family>(a3_fallback_eps(), m, assumed_opt, a1::Full{lane_cap});
    }
    const a1::Partition part = a1::make_partition(a3_fallback_eps(), assumed_opt);
    return std::make_unique<a1::Family>(a3_fallback_eps(), m, assumed_opt,
                                        a1::Targeted{a1::clamped_vector(jobs, part, m)});
  }
  if (selection == Selection::kFull) return std::make_unique<Family>(eps, m, assumed_opt, Full{lane_cap});
  const Params p = make_params(eps, m, assumed_opt);
  const ClassCounts n = classifiable_counts(p, jobs);
  UVector u = packing_bound_holds(p, n) ? valid_u(p, n) : clamped_u(p, n);
  return std::make_unique<Family>(eps, m, assumed_opt, Targeted{std::move(u)});
}

/// Counts violations of "at most one core machine has l_s > 0 and
/// l^- + l_s < (1 + eps') T" after every step of every A2 lane.
class StructureMonitor : public StepObserver {
 public:
  struct Violation {
    std::size_t lane;
    std::size_t job;
    std::size_t machines;
  };

  void on_lane_start(std::size_t lane, const OnlineScheduler&) override { below_[lane].clear(); }

  void on_step(std::size_t lane, const OnlineScheduler& scheduler, const Job& job, std::size_t machine) override {
    const auto* a2 = dynamic_cast<const Lane*>(&scheduler);
    if (a2 == nullptr) return;
    ++steps_;
    auto& below = below_[lane];
    if (!a2->is_core(machine)) return;
    // Only the receiving machine changes, so the set is updated in place.
    const bool is_below =
        a2->small_load(machine).sign() > 0 && a2->ell_minus(machine) + a2->small_load(machine) < a2->params().lemma_bound();
    auto it = std::find(below.begin(), below.end(), machine);
    if (is_below && it == below.end()) below.push_back(machine);
    if (!is_below && it != below.end()) below.erase(it);
    if (below.size() > 1) violations_.push_back({lane, job.index, below.size()});
  }

  const std::vector<Violation>& violations() const { return violations_; }
  std::size_t steps() const { return steps_; }

 private:
  std::unordered_map<std::size_t, std::vector<std::size_t>> below_;
  std::vector<Violation> violations_;
  std::size_t steps_ = 0;
};

}  // namespace mps::a2
