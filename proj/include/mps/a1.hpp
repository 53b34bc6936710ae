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

// The (1+eps)-competitive family for a known optimum T: one lane per guess
// v of how many large jobs fall in each geometric size class. Lane A_v
// follows an optimal packing of the rounded-up guessed jobs.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mps/core.hpp"
#include "mps/family.hpp"
#include "mps/oracle.hpp"

namespace mps::a1 {

/// Size classes I_0 = (0, eps' T] and I_i = ((1+eps')^(i-1) eps' T, (1+eps')^i eps' T].
struct Partition {
  Rational eps;
  Rational eps_prime;
  Rational assumed_opt;
  long l = 0;
  std::vector<Rational> upper;  // upper[i] = (1+eps')^i eps' T, i = 0..l

  const Rational& small_limit() const { return upper.front(); }
  const Rational& top() const { return upper.back(); }
  /// Rounded-up size of class i (1-based).
  const Rational& rounded(std::size_t i) const { return upper.at(i); }
  std::size_t classes() const { return static_cast<std::size_t>(l); }
};

inline Partition make_partition(const Rational& eps, const Rational& assumed_opt) {
  if (eps.sign() <= 0 || eps > Rational(1)) throw std::invalid_argument("a1: epsilon must lie in (0, 1]");
  if (assumed_opt.sign() <= 0) throw std::invalid_argument("a1: assumed optimum must be positive");
  Partition part;
  part.eps = eps;
  part.eps_prime = eps / Rational(2);
  part.assumed_opt = assumed_opt;
  const Rational step = Rational(1) + part.eps_prime;
  part.l = ceil_log(Rational(1) / part.eps_prime, step);
  Rational bound = part.eps_prime * assumed_opt;
  for (long i = 0; i <= part.l; ++i) {
    part.upper.push_back(bound);
    bound *= step;
  }
  return part;
}

struct JobClass {
  enum class Kind { kSmall, kLarge, kOverflow };
  Kind kind = Kind::kSmall;
  std::size_t index = 0;  // 1-based class for large jobs

  bool small() const { return kind == Kind::kSmall; }
  bool large() const { return kind == Kind::kLarge; }
  bool overflow() const { return kind == Kind::kOverflow; }
};

inline JobClass classify(const Partition& part, const Rational& p) {
  if (p <= part.small_limit()) return {JobClass::Kind::kSmall, 0};
  if (p > part.top()) return {JobClass::Kind::kOverflow, 0};
  // upper is increasing: first i with p <= upper[i].
  const auto it = std::lower_bound(part.upper.begin(), part.upper.end(), p);
  return {JobClass::Kind::kLarge, static_cast<std::size_t>(it - part.upper.begin())};
}

using CountVector = std::vector<std::size_t>;  // entry i-1 counts class i

/// floor(m / eps'): the most large jobs a sequence with OPT <= T can hold.
inline std::size_t count_bound(const Partition& part, std::size_t m) {
  return static_cast<std::size_t>((Rational(static_cast<long>(m)) / part.eps_prime).floor_long());
}

/// Class counts of the actual sequence; the index of its matching lane.
inline CountVector true_vector(std::span<const Job> jobs, const Partition& part, std::size_t m) {
  CountVector v(part.classes(), 0);
  for (const auto& job : jobs) {
    const JobClass c = classify(part, job.p);
    if (c.overflow()) {
      throw std::domain_error("a1: job " + std::to_string(job.index) + " exceeds the top class boundary");
    }
    if (c.large()) ++v[c.index - 1];
  }
  const std::size_t bound = count_bound(part, m);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > bound) {
      throw std::domain_error("a1: class " + std::to_string(i + 1) + " holds " + std::to_string(v[i]) +
                              " jobs, more than floor(m/eps') = " + std::to_string(bound));
    }
  }
  return v;
}

/// Class counts clamped into V, ignoring jobs above the top class. Used when
/// the assumed optimum may be too small for the sequence.
inline CountVector clamped_vector(std::span<const Job> jobs, const Partition& part, std::size_t m) {
  CountVector v(part.classes(), 0);
  const std::size_t bound = count_bound(part, m);
  for (const auto& job : jobs) {
    const JobClass c = classify(part, job.p);
    if (c.large() && v[c.index - 1] < bound) ++v[c.index - 1];
  }
  return v;
}

inline CountVector true_vector(const JobSequence& seq, const Partition& part) {
  return true_vector(seq.jobs, part, seq.m);
}

inline std::string vector_str(const CountVector& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

/// The rounded multiset a lane plans for: v_i jobs of size (1+eps')^i eps' T.
inline MultisetInstance rounded_instance(const Partition& part, const CountVector& v, std::size_t m) {
  MultisetInstance inst;
  inst.m = m;
  for (std::size_t i = 1; i <= part.classes(); ++i) inst.classes.push_back({part.rounded(i), v.at(i - 1)});
  return inst;
}

/// A single lane A_v.
class Lane : public OnlineScheduler {
 public:
  Lane(Partition part, std::size_t m, CountVector v, const MultisetSchedule& plan, std::size_t label = 0)
      : part_(std::move(part)), v_(std::move(v)), schedule_(m, label, "a1" + vector_str(v_)) {
    const std::size_t l = part_.classes();
    if (v_.size() != l) throw std::invalid_argument("a1: count vector length must equal l");
    if (plan.m != m || plan.sizes.size() != l) throw std::invalid_argument("a1: plan does not match the partition");
    planned_.assign(m, std::vector<std::size_t>(l, 0));
    placed_.assign(m, std::vector<std::size_t>(l, 0));
    planned_load_.assign(m, Rational{});
    small_load_.assign(m, Rational{});
    large_load_.assign(m, Rational{});
    for (std::size_t j = 0; j < m; ++j) {
      planned_[j] = plan.counts[j];
      planned_load_[j] = plan.loads[j];
    }
  }

  Placement place(const Job& job) override {
    const JobClass c = classify(part_, job.p);
    if (c.overflow()) return Placement::none();
    const std::size_t m = schedule_.machines();
    std::size_t target = 0;
    if (c.large()) {
      const std::size_t i = c.index - 1;
      std::optional<std::size_t> open;
      for (std::size_t j = 0; j < m; ++j) {
        if (planned_[j][i] > placed_[j][i]) {
          open = j;
          break;
        }
      }
      target = open ? *open : schedule_.least_loaded();
      ++placed_[target][i];
      large_load_[target] += job.p;
    } else {
      Rational best = planned_load_[0] + small_load_[0];
      for (std::size_t j = 1; j < m; ++j) {
        Rational value = planned_load_[j] + small_load_[j];
        if (value < best) {
          best = std::move(value);
          target = j;
        }
      }
      small_load_[target] += job.p;
    }
    schedule_.assign(target, job);
    return Placement::to(target);
  }

  const Schedule& schedule() const override { return schedule_; }
  std::string describe() const override { return schedule_.tag(); }

  const Partition& partition() const { return part_; }
  const CountVector& vector() const { return v_; }
  /// l*(j): machine j's load in the planned packing.
  const Rational& planned_load(std::size_t j) const { return planned_load_.at(j); }
  std::size_t planned_count(std::size_t j, std::size_t cls) const { return planned_.at(j).at(cls - 1); }
  std::size_t placed_count(std::size_t j, std::size_t cls) const { return placed_.at(j).at(cls - 1); }
  const Rational& small_load(std::size_t j) const { return small_load_.at(j); }
  const Rational& large_load(std::size_t j) const { return large_load_.at(j); }

 private:
  Partition part_;
  CountVector v_;
  Schedule schedule_;
  std::vector<std::vector<std::size_t>> planned_;
  std::vector<std::vector<std::size_t>> placed_;
  std::vector<Rational> planned_load_;
  std::vector<Rational> small_load_;
  std::vector<Rational> large_load_;
};

/// S*_v for assumed optimum T. Optimal packings are invariant under scaling,
/// so the search runs on the T = 1 sizes (small denominators, int64 friendly)
/// and its result is cached per (eps, m, v); loads are then multiplied by T.
inline MultisetSchedule planned_schedule(const Partition& part, std::size_t m, const CountVector& v) {
  static std::mutex mutex;
  static std::map<std::string, MultisetSchedule> cache;
  const std::string key = part.eps.str() + "|" + std::to_string(m) + "|" + vector_str(v);
  MultisetSchedule plan;
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) plan = it->second;
  }
  if (plan.m == 0) {
    plan = opt_multiset(rounded_instance(make_partition(part.eps, Rational(1)), v, m));
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= 4096) cache.clear();
    cache.emplace(key, plan);
  }
  for (auto& size : plan.sizes) size *= part.assumed_opt;
  for (auto& load : plan.loads) load *= part.assumed_opt;
  plan.makespan *= part.assumed_opt;
  return plan;
}

inline std::unique_ptr<Lane> make_lane(const Partition& part, std::size_t m, const CountVector& v,
                                       std::size_t label = 0) {
  return std::make_unique<Lane>(part, m, v, planned_schedule(part, m, v), label);
}

struct Full {
  std::size_t lane_cap = default_lane_cap();
  /// Skip vectors whose rounded volume exceeds m (1+eps') T; such a vector
  /// is never the class profile of a sequence with OPT <= T.
  bool prune_volume = false;
};
struct Targeted {
  CountVector v;
};
using Mode = std::variant<Full, Targeted>;

/// A1(eps) for m machines and assumed optimum T.
class Family : public LaneFamily {
 public:
  Family(const Rational& eps, std::size_t m, const Rational& assumed_opt, Mode mode)
      : part_(make_partition(eps, assumed_opt)), m_(m) {
    if (m == 0) throw std::invalid_argument("a1: m must be positive");
    bound_ = a1::count_bound(part_, m);
    if (const auto* targeted = std::get_if<Targeted>(&mode)) {
      if (targeted->v.size() != part_.classes()) throw std::invalid_argument("a1: targeted vector has wrong length");
      for (auto x : targeted->v) {
        if (x > bound_) throw std::invalid_argument("a1: targeted vector is outside V");
      }
      vectors_.push_back(targeted->v);
      return;
    }
    const auto& full = std::get<Full>(mode);
    const mpz_class total = full_size_closed_form(bound_, part_.l);
    if (!full.prune_volume && total > mpz_class(static_cast<unsigned long>(full.lane_cap))) {
      throw CapExceeded("a1: full family has " + total.get_str() + " lanes, above the cap of " +
                        std::to_string(full.lane_cap));
    }
    const Rational volume_cap = Rational(static_cast<long>(m)) * (Rational(1) + part_.eps_prime) * assumed_opt;
    // Odometer over V = {0..bound}^l, first coordinate fastest.
    CountVector v(part_.classes(), 0);
    while (true) {
      bool keep = true;
      if (full.prune_volume) {
        Rational volume;
        for (std::size_t i = 0; i < v.size(); ++i) volume += part_.rounded(i + 1) * Rational(static_cast<long>(v[i]));
        keep = volume <= volume_cap;
      }
      if (keep) {
        vectors_.push_back(v);
        if (vectors_.size() > full.lane_cap) {
          throw CapExceeded("a1: full family exceeds the lane cap of " + std::to_string(full.lane_cap));
        }
      }
      std::size_t i = 0;
      while (i < v.size() && v[i] == bound_) v[i++] = 0;
      if (i == v.size()) break;
      ++v[i];
    }
  }

  /// (floor(m/eps') + 1)^l.
  static mpz_class full_size_closed_form(std::size_t bound, long l) {
    mpz_class out;
    mpz_ui_pow_ui(out.get_mpz_t(), bound + 1, static_cast<unsigned long>(l));
    return out;
  }

  std::size_t size() const override { return vectors_.size(); }
  std::unique_ptr<OnlineScheduler> make_lane(std::size_t index) const override {
    return a1::make_lane(part_, m_, vectors_.at(index), index);
  }
  std::string name() const override { return "A1(" + part_.eps.str() + ")"; }

  const CountVector& vector(std::size_t index) const { return vectors_.at(index); }
  const Partition& partition() const { return part_; }
  std::size_t count_bound() const { return bound_; }

 private:
  Partition part_;
  std::size_t m_;
  std::size_t bound_ = 0;
  std::vector<CountVector> vectors_;
};

}  // namespace mps::a1
