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

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mps/rational.hpp"

namespace mps {

/// Thrown when a family or search would exceed a configured size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Job {
  std::size_t index = 0;  // 1-based arrival position
  Rational p;
};

/// An ordered job sequence for m identical machines.
struct JobSequence {
  std::size_t m = 1;
  std::vector<Job> jobs;
  std::optional<Rational> planted_opt;

  JobSequence() = default;
  JobSequence(std::size_t machines, const std::vector<Rational>& sizes,
              std::optional<Rational> opt = std::nullopt)
      : m(machines), planted_opt(std::move(opt)) {
    if (m == 0) throw std::invalid_argument("job sequence: m must be positive");
    jobs.reserve(sizes.size());
    for (std::size_t t = 0; t < sizes.size(); ++t) {
      if (sizes[t].sign() <= 0) throw std::invalid_argument("job sequence: processing times must be positive");
      jobs.push_back(Job{t + 1, sizes[t]});
    }
  }

  std::size_t size() const { return jobs.size(); }
  bool empty() const { return jobs.empty(); }

  std::vector<Rational> sizes() const {
    std::vector<Rational> out;
    out.reserve(jobs.size());
    for (const auto& j : jobs) out.push_back(j.p);
    return out;
  }
  Rational total() const {
    Rational s;
    for (const auto& j : jobs) s += j.p;
    return s;
  }
  Rational max_size() const {
    Rational best;
    for (const auto& j : jobs) best = max(best, j.p);
    return best;
  }
};

/// One lane's schedule: append-only job placement with exact loads.
/// Machines are 0-based in code; job indices are the 1-based arrival times.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::size_t m, std::size_t lane = 0, std::string tag = {})
      : loads_(m), lane_(lane), tag_(std::move(tag)) {
    if (m == 0) throw std::invalid_argument("schedule: m must be positive");
  }

  void assign(std::size_t machine, const Job& job) {
    if (machine >= loads_.size()) throw std::out_of_range("schedule: machine index out of range");
    if (job.index == 0) throw std::invalid_argument("schedule: job indices are 1-based");
    if (job.index >= machine_of_.size()) machine_of_.resize(job.index + 1, kUnassigned);
    if (machine_of_[job.index] != kUnassigned) {
      throw std::invalid_argument("schedule: job " + std::to_string(job.index) + " already assigned");
    }
    machine_of_[job.index] = machine;
    loads_[machine] += job.p;
    order_.push_back({job.index, machine});
    sizes_.push_back(job.p);
  }

  std::size_t machines() const { return loads_.size(); }
  const Rational& load(std::size_t machine) const { return loads_.at(machine); }
  const std::vector<Rational>& loads() const { return loads_; }

  Rational makespan() const {
    Rational best;
    for (const auto& l : loads_) best = max(best, l);
    return best;
  }

  /// Lowest-index machine of minimum load.
  std::size_t least_loaded() const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < loads_.size(); ++j) {
      if (loads_[j] < loads_[best]) best = j;
    }
    return best;
  }

  std::optional<std::size_t> machine_of(std::size_t job_index) const {
    if (job_index >= machine_of_.size() || machine_of_[job_index] == kUnassigned) return std::nullopt;
    return machine_of_[job_index];
  }

  /// (job index, machine) pairs in assignment order.
  const std::vector<std::pair<std::size_t, std::size_t>>& placements() const { return order_; }
  std::size_t job_count() const { return order_.size(); }

  /// Number of jobs currently on each machine.
  std::vector<std::size_t> job_counts() const {
    std::vector<std::size_t> out(loads_.size());
    for (const auto& [job, machine] : order_) ++out[machine];
    return out;
  }

  /// Recomputes every load from the placements; used as a consistency check.
  bool loads_consistent() const {
    std::vector<Rational> recomputed(loads_.size());
    for (std::size_t k = 0; k < order_.size(); ++k) recomputed[order_[k].second] += sizes_[k];
    return recomputed == loads_;
  }

  std::size_t lane() const { return lane_; }
  void set_lane(std::size_t lane) { lane_ = lane; }
  const std::string& tag() const { return tag_; }
  void set_tag(std::string tag) { tag_ = std::move(tag); }

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

  std::vector<Rational> loads_;
  std::vector<std::size_t> machine_of_;
  std::vector<std::pair<std::size_t, std::size_t>> order_;
  std::vector<Rational> sizes_;
  std::size_t lane_ = 0;
  std::string tag_;
};

/// Minimum-makespan schedule; ties go to the smallest lane label.
inline const Schedule& select_best(std::span<const Schedule> schedules) {
  if (schedules.empty()) throw std::invalid_argument("select_best: empty schedule set");
  const Schedule* best = &schedules[0];
  Rational best_span = best->makespan();
  for (const auto& s : schedules.subspan(1)) {
    Rational span = s.makespan();
    if (span < best_span || (span == best_span && s.lane() < best->lane())) {
      best = &s;
      best_span = std::move(span);
    }
  }
  return *best;
}

/// Result of asking a lane where the next job goes. An empty machine means
/// the lane's rules do not specify a placement.
struct Placement {
  std::optional<std::size_t> machine;
  static Placement none() { return {}; }
  static Placement to(std::size_t j) { return {j}; }
  bool has_rule() const { return machine.has_value(); }
};

/// Uniform stepping interface implemented by every algorithm lane.
///
/// A lane owns its schedule; place() decides where the job goes and, if a
/// machine is returned, records the job there. Lanes are deterministic and
/// never look at other lanes.
class OnlineScheduler {
 public:
  virtual ~OnlineScheduler() = default;
  virtual Placement place(const Job& job) = 0;
  virtual const Schedule& schedule() const = 0;
  virtual std::string describe() const = 0;
};

using LaneSet = std::vector<std::unique_ptr<OnlineScheduler>>;

/// Feeds a sequence through one lane; throws if the lane ever has no rule.
inline void run_lane(OnlineScheduler& lane, std::span<const Job> jobs) {
  for (const auto& job : jobs) {
    if (!lane.place(job).has_rule()) {
      throw std::runtime_error("lane " + lane.describe() + " has no rule for job " + std::to_string(job.index));
    }
  }
}

// JobSequence file: {"m": int, "jobs": ["p1", ...], "opt": "q"}.

inline nlohmann::json to_json(const JobSequence& seq) {
  nlohmann::json j;
  j["m"] = seq.m;
  auto& jobs = j["jobs"] = nlohmann::json::array();
  for (const auto& job : seq.jobs) jobs.push_back(job.p.str());
  if (seq.planted_opt) j["opt"] = seq.planted_opt->str();
  return j;
}

inline Rational rational_from_json(const nlohmann::json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw std::invalid_argument("expected a rational string, got " + v.dump());
}

inline JobSequence job_sequence_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("jobs")) {
    throw std::invalid_argument("job sequence JSON needs \"m\" and \"jobs\"");
  }
  const long m = j.at("m").get<long>();
  if (m <= 0) throw std::invalid_argument("job sequence: m must be positive");
  std::vector<Rational> sizes;
  for (const auto& v : j.at("jobs")) sizes.push_back(rational_from_json(v));
  std::optional<Rational> opt;
  if (j.contains("opt") && !j.at("opt").is_null()) opt = rational_from_json(j.at("opt"));
  return JobSequence(static_cast<std::size_t>(m), sizes, opt);
}

inline JobSequence load_job_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return job_sequence_from_json(nlohmann::json::parse(in));
}

inline void save_job_sequence(const JobSequence& seq, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(seq).dump() << "\n";
}

inline nlohmann::json loads_json(const Schedule& s) {
  auto arr = nlohmann::json::array();
  for (const auto& l : s.loads()) arr.push_back(l.str());
  return arr;
}

}  // namespace mps
