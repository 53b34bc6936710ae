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

// Turns a rho-competitive family for a known optimum into an algorithm that
// needs no knowledge of the optimum. It keeps h geometrically spaced guesses,
// runs a copy of the family per guess, and raises guesses whose lanes have
// all failed.

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mps/core.hpp"
#include "mps/family.hpp"

namespace mps::wrapper {

struct Params {
  Rational rho;
  Rational eps;   // target additive slack on the competitive ratio
  Rational step;  // guess spacing factor is 1 + step
  long h = 0;
};

/// step = eps / (3 rho), h = ceil(log(1 + 6 rho / eps) / log(1 + step)).
inline Params astar_params(const Rational& rho, const Rational& eps) {
  if (rho < Rational(1)) throw std::invalid_argument("wrapper: rho must be at least 1");
  if (eps.sign() <= 0 || eps > Rational(1)) throw std::invalid_argument("wrapper: epsilon must lie in (0, 1]");
  Params p;
  p.rho = rho;
  p.eps = eps;
  p.step = eps / (Rational(3) * rho);
  p.h = ceil_log(Rational(1) + Rational(6) * rho / eps, Rational(1) + p.step);
  return p;
}

/// Explicit spacing and group count, for experiments outside the tuned setting.
inline Params raw_params(const Rational& rho, const Rational& step, long h) {
  if (step.sign() <= 0 || h < 1) throw std::invalid_argument("wrapper: need step > 0 and h >= 1");
  return {rho, Rational(3) * rho * step, step, h};
}

/// What an inner family may depend on when it is (re)started.
struct EpochContext {
  Rational assumed_opt;
  std::size_t m = 0;
  /// Jobs from the epoch's first job to the end of the input. Only targeted
  /// test-time families read this; online rules never do.
  std::span<const Job> upcoming;
};

using InnerFactory = std::function<std::unique_ptr<LaneFamily>(const EpochContext&)>;
using TraceSink = std::function<void(const nlohmann::json&)>;

enum class FailReason { kNone, kNoRule, kOverload, kLowerBound };

inline const char* reason_code(FailReason r) {
  switch (r) {
    case FailReason::kNoRule: return "i";
    case FailReason::kOverload: return "ii";
    case FailReason::kLowerBound: return "iii";
    case FailReason::kNone: break;
  }
  return "-";
}

struct GuessLane {
  std::unique_ptr<OnlineScheduler> inner;
  bool failed = false;
  Schedule physical;
  std::vector<Rational> epoch_load;      // per physical machine, jobs since the epoch start
  std::vector<std::size_t> to_physical;  // virtual machine -> physical machine
  std::vector<bool> taken;               // physical machine already bound this epoch
};

struct GuessGroup {
  GuessGroup() = default;
  GuessGroup(GuessGroup&&) noexcept = default;
  GuessGroup& operator=(GuessGroup&&) noexcept = default;

  Rational guess;
  std::size_t variable = 0;     // stable identity across renumbering
  std::size_t epoch_start = 1;  // index of the epoch's first job
  std::size_t adjustments = 0;
  std::vector<GuessLane> lanes;

  bool all_failed() const {
    return std::all_of(lanes.begin(), lanes.end(), [](const GuessLane& l) { return l.failed; });
  }
  bool has_live_lane() const { return !all_failed(); }
};

struct Result {
  Schedule best;
  std::size_t best_group = 0;
  std::size_t best_lane = 0;
  std::vector<Rational> guesses;  // final, ascending
  bool smallest_has_live_lane = false;
  std::size_t adjustments = 0;
  std::vector<std::size_t> adjustments_per_variable;
  std::size_t lanes = 0;  // physical schedules kept, h * |K|
};

class AStar {
 public:
  AStar(Params params, std::size_t m, InnerFactory factory, std::span<const Job> sigma, TraceSink trace = {},
        std::size_t lane_cap = default_lane_cap())
      : p_(std::move(params)),
        m_(m),
        factory_(std::move(factory)),
        sigma_(sigma),
        trace_(std::move(trace)),
        lane_cap_(lane_cap),
        growth_(pow(Rational(1) + p_.step, p_.h)) {
    if (m_ == 0) throw std::invalid_argument("wrapper: m must be positive");
    if (p_.h < 1) throw std::invalid_argument("wrapper: h must be at least 1");
  }

  bool done() const { return next_ >= sigma_.size(); }
  std::size_t processed() const { return next_; }
  const std::vector<GuessGroup>& groups() const { return groups_; }
  const Rational& prefix_sum() const { return prefix_sum_; }
  const Params& params() const { return p_; }
  std::size_t lanes_per_guess() const { return per_guess_; }

  void run() {
    while (!done()) step();
  }

  void step() {
    if (done()) throw std::logic_error("wrapper: no job left");
    const std::size_t pos = next_++;
    const Job& job = sigma_[pos];
    prefix_sum_ += job.p;
    if (pos == 0) initialize(job);

    for (std::size_t g = 0; g < groups_.size(); ++g) {
      auto& group = groups_[g];
      for (std::size_t k = 0; k < group.lanes.size(); ++k) {
        auto& lane = group.lanes[k];
        if (!lane.failed) {
          const auto [reason, virt] = attempt(group.guess, lane, job);
          if (reason == FailReason::kNone) {
            commit(lane, job, bind(lane, virt));
            continue;
          }
          lane.failed = true;
          emit({{"t", job.index}, {"event", "fail"}, {"variable", group.variable}, {"guess", group.guess.str()},
                {"lane", k}, {"reason", reason_code(reason)}});
        }
        commit(lane, job, least_epoch_load(lane));
      }
    }

    std::optional<std::size_t> top;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      if (groups_[g].all_failed()) top = g;
    }
    if (top) adjust(*top, pos);
  }

  Result finish() const {
    Result r;
    r.lanes = groups_.size() * per_guess_;
    if (groups_.empty()) {
      r.best = Schedule(m_, 0, "empty");
      return r;
    }
    std::vector<Schedule> all;
    all.reserve(r.lanes);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      for (std::size_t k = 0; k < groups_[g].lanes.size(); ++k) {
        Schedule s = groups_[g].lanes[k].physical;
        s.set_lane(g * per_guess_ + k);
        all.push_back(std::move(s));
      }
    }
    r.best = select_best(all);
    r.best_group = r.best.lane() / per_guess_;
    r.best_lane = r.best.lane() % per_guess_;
    for (const auto& g : groups_) r.guesses.push_back(g.guess);
    r.smallest_has_live_lane = groups_.front().has_live_lane();
    r.adjustments = adjustments_;
    r.adjustments_per_variable.assign(groups_.size(), 0);
    for (const auto& g : groups_) r.adjustments_per_variable[g.variable] = g.adjustments;
    return r;
  }

 private:
  void initialize(const Job& first) {
    Rational guess = first.p;
    for (long i = 0; i < p_.h; ++i) {
      GuessGroup group;
      group.guess = guess;
      group.variable = static_cast<std::size_t>(i);
      group.epoch_start = first.index;
      start_epoch(group, 0);
      groups_.push_back(std::move(group));
      guess *= Rational(1) + p_.step;
    }
    emit_guesses(first.index, "init");
  }

  /// Fresh inner lanes for the group's current guess, starting at sigma_[pos].
  void start_epoch(GuessGroup& group, std::size_t pos) {
    auto family = factory_({group.guess, m_, sigma_.subspan(pos)});
    const std::size_t count = family->size();
    if (per_guess_ == 0) {
      if (count == 0) throw std::invalid_argument("wrapper: inner family is empty");
      if (count * static_cast<std::size_t>(p_.h) > lane_cap_) {
        throw CapExceeded("wrapper: " + std::to_string(p_.h) + " guesses x " + std::to_string(count) +
                          " lanes exceed the lane cap of " + std::to_string(lane_cap_));
      }
      per_guess_ = count;
    } else if (count != per_guess_) {
      throw std::logic_error("wrapper: inner family size changed between epochs");
    }
    const bool fresh = group.lanes.empty();
    if (fresh) group.lanes.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      auto& lane = group.lanes[k];
      lane.inner = family->make_lane(k);
      lane.failed = false;
      if (fresh) lane.physical = Schedule(m_, k, family->name());
      lane.epoch_load.assign(m_, Rational{});
      lane.to_physical.assign(m_, kUnbound);
      lane.taken.assign(m_, false);
    }
  }

  std::pair<FailReason, std::size_t> attempt(const Rational& guess, GuessLane& lane, const Job& job) const {
    if (guess * Rational(static_cast<long>(m_)) < prefix_sum_ || guess < job.p) return {FailReason::kLowerBound, 0};
    const Placement where = lane.inner->place(job);
    if (!where.has_rule() || *where.machine >= m_) return {FailReason::kNoRule, 0};
    // The inner schedule holds exactly the epoch's jobs.
    if (lane.inner->schedule().load(*where.machine) > p_.rho * guess) return {FailReason::kOverload, *where.machine};
    return {FailReason::kNone, *where.machine};
  }

  std::size_t bind(GuessLane& lane, std::size_t virt) const {
    if (lane.to_physical[virt] != kUnbound) return lane.to_physical[virt];
    std::optional<std::size_t> pick;
    for (std::size_t j = 0; j < m_; ++j) {
      if (lane.taken[j]) continue;
      if (!pick || lane.physical.load(j) < lane.physical.load(*pick)) pick = j;
    }
    if (!pick) throw std::logic_error("wrapper: no physical machine left to bind");
    lane.to_physical[virt] = *pick;
    lane.taken[*pick] = true;
    return *pick;
  }

  std::size_t least_epoch_load(const GuessLane& lane) const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m_; ++j) {
      if (lane.epoch_load[j] < lane.epoch_load[best]) best = j;
    }
    return best;
  }

  static void commit(GuessLane& lane, const Job& job, std::size_t machine) {
    lane.physical.assign(machine, job);
    lane.epoch_load[machine] += job.p;
  }

  void adjust(std::size_t top, std::size_t pos) {
    const Job& job = sigma_[pos];
    const Rational mean = prefix_sum_ / Rational(static_cast<long>(m_));
    const Rational base = max(max(groups_.back().guess, job.p), mean);
    Rational factor(1);
    for (std::size_t g = 0; g <= top; ++g) {
      auto& group = groups_[g];
      factor *= Rational(1) + p_.step;
      const Rational old = group.guess;
      group.guess = factor * base;
      if (group.guess < old * growth_) throw std::logic_error("wrapper: adjusted guess grew by less than (1+step)^h");
      group.epoch_start = job.index;
      ++group.adjustments;
      ++adjustments_;
      emit({{"t", job.index}, {"event", "adjust"}, {"variable", group.variable}, {"from", old.str()},
            {"to", group.guess.str()}});
      start_epoch(group, pos);
      for (std::size_t k = 0; k < group.lanes.size(); ++k) replay(group, group.lanes[k], k, job);
    }
    std::stable_sort(groups_.begin(), groups_.end(),
                     [](const GuessGroup& x, const GuessGroup& y) { return x.guess < y.guess; });
    for (std::size_t g = 1; g < groups_.size(); ++g) {
      if (groups_[g].guess < groups_[g - 1].guess * (Rational(1) + p_.step)) {
        throw std::logic_error("wrapper: guesses lost their geometric spacing");
      }
    }
    emit_guesses(job.index, "renumber");
  }

  /// Feeds the adjusting job to a fresh inner lane and pins the virtual
  /// machine it picks to the physical machine that already holds the job.
  void replay(const GuessGroup& group, GuessLane& lane, std::size_t k, const Job& job) {
    const auto [reason, virt] = attempt(group.guess, lane, job);
    const std::size_t phys = *lane.physical.machine_of(job.index);
    lane.epoch_load[phys] = job.p;
    if (reason != FailReason::kNone) {
      lane.failed = true;
      emit({{"t", job.index}, {"event", "fail"}, {"variable", group.variable}, {"guess", group.guess.str()},
            {"lane", k}, {"reason", reason_code(reason)}, {"replay", true}});
      return;
    }
    lane.to_physical[virt] = phys;
    lane.taken[phys] = true;
  }

  void emit(nlohmann::json event) const {
    if (trace_) trace_(event);
  }

  void emit_guesses(std::size_t t, const char* what) const {
    if (!trace_) return;
    nlohmann::json event{{"t", t}, {"event", what}};
    for (const auto& g : groups_) {
      event["guesses"].push_back(g.guess.str());
      event["variables"].push_back(g.variable);
    }
    trace_(event);
  }

  static constexpr std::size_t kUnbound = static_cast<std::size_t>(-1);

  Params p_;
  std::size_t m_;
  InnerFactory factory_;
  std::span<const Job> sigma_;
  TraceSink trace_;
  std::size_t lane_cap_;
  Rational growth_;
  std::vector<GuessGroup> groups_;
  std::size_t per_guess_ = 0;
  std::size_t next_ = 0;
  Rational prefix_sum_;
  std::size_t adjustments_ = 0;
};

inline Result run_astar(const Params& params, const JobSequence& seq, InnerFactory factory, TraceSink trace = {},
                        std::size_t lane_cap = default_lane_cap()) {
  AStar astar(params, seq.m, std::move(factory), seq.jobs, std::move(trace), lane_cap);
  astar.run();
  return astar.finish();
}

}  // namespace mps::wrapper
