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

#pragma once

#include <cstddef>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>

#include "mps/core.hpp"

namespace mps {

inline constexpr std::size_t kDefaultLaneCap = 500'000;

/// Lane cap from MPS_LANE_CAP, falling back to kDefaultLaneCap.
inline std::size_t default_lane_cap() {
  if (const char* env = std::getenv("MPS_LANE_CAP"); env != nullptr && *env != '\0') {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("MPS_LANE_CAP is not a number: ") + env);
    }
  }
  return kDefaultLaneCap;
}

/// An indexed family of MPS_opt lanes {A_k}. Lanes are built on demand so a
/// family can be far larger than what fits in memory at once.
class LaneFamily {
 public:
  virtual ~LaneFamily() = default;
  virtual std::size_t size() const = 0;
  virtual std::unique_ptr<OnlineScheduler> make_lane(std::size_t index) const = 0;
  virtual std::string name() const = 0;
  /// Lanes returning equal keys follow identical rules, so their schedules
  /// coincide on every input.
  virtual std::optional<std::string> share_key(std::size_t) const { return std::nullopt; }
};

/// Hooks into a family evaluation, e.g. for in-run lemma checks.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_lane_start(std::size_t /*lane*/, const OnlineScheduler& /*scheduler*/) {}
  virtual void on_step(std::size_t lane, const OnlineScheduler& scheduler, const Job& job, std::size_t machine) = 0;
};

struct FamilyRun {
  Schedule best;
  std::size_t best_lane = 0;
  std::size_t lanes = 0;        // logical family size
  std::size_t simulated = 0;    // lanes actually stepped
  std::size_t without_rule = 0; // lanes that hit a job their rules do not cover
};

/// Runs every lane over the jobs and keeps the min-makespan schedule
/// (smallest lane index on ties). Lanes sharing a key with an earlier lane
/// are not re-simulated: they cannot beat that lane under the tie rule.
inline FamilyRun evaluate_family(const LaneFamily& family, std::span<const Job> jobs, StepObserver* observer = nullptr) {
  FamilyRun run;
  run.lanes = family.size();
  std::unordered_set<std::string> seen;
  std::optional<Rational> best_span;
  for (std::size_t k = 0; k < run.lanes; ++k) {
    if (auto key = family.share_key(k)) {
      if (!seen.insert(*key).second) continue;
    }
    auto lane = family.make_lane(k);
    ++run.simulated;
    if (observer) observer->on_lane_start(k, *lane);
    bool complete = true;
    for (const auto& job : jobs) {
      const Placement where = lane->place(job);
      if (!where.has_rule()) {
        complete = false;
        break;
      }
      if (observer) observer->on_step(k, *lane, job, *where.machine);
    }
    if (!complete) {
      ++run.without_rule;
      continue;
    }
    Rational span = lane->schedule().makespan();
    if (!best_span || span < *best_span) {
      best_span = span;
      run.best = lane->schedule();
      run.best.set_lane(k);
      run.best_lane = k;
    }
  }
  if (!best_span) throw std::runtime_error("evaluate_family: no lane of " + family.name() + " completed the sequence");
  return run;
}

/// A family holding a single prebuilt-on-demand lane.
template <class Make>
class SingleLaneFamily : public LaneFamily {
 public:
  SingleLaneFamily(std::string name, Make make) : name_(std::move(name)), make_(std::move(make)) {}
  std::size_t size() const override { return 1; }
  std::unique_ptr<OnlineScheduler> make_lane(std::size_t) const override { return make_(); }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Make make_;
};

}  // namespace mps
