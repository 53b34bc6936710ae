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

// Experiment plumbing: instances with a planted optimum, algorithm
// composition by name, and batch runs that emit JSONL and CSV reports.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "mps/a1.hpp"
#include "mps/a2.hpp"
#include "mps/adversary.hpp"
#include "mps/core.hpp"
#include "mps/family.hpp"
#include "mps/oracle.hpp"
#include "mps/wrapper.hpp"

namespace mps::harness {

// -------------------------------------------------------------- generator

enum class Order { kShuffle, kLargestFirst, kSmallestFirst, kInterleaved };

inline Order parse_order(const std::string& s) {
  if (s == "shuffle") return Order::kShuffle;
  if (s == "largest") return Order::kLargestFirst;
  if (s == "smallest") return Order::kSmallestFirst;
  if (s == "interleaved") return Order::kInterleaved;
  throw std::invalid_argument("unknown order '" + s + "' (shuffle|largest|smallest|interleaved)");
}

inline const char* order_name(Order o) {
  switch (o) {
    case Order::kShuffle: return "shuffle";
    case Order::kLargestFirst: return "largest";
    case Order::kSmallestFirst: return "smallest";
    case Order::kInterleaved: return "interleaved";
  }
  return "shuffle";
}

/// How each hidden machine of load 1 is cut into jobs.
struct PlantProfile {
  std::size_t min_jobs = 1;   // jobs per machine
  std::size_t max_jobs = 3;
  std::size_t min_units = 1;  // smallest job, in units of 1/denom
};

struct Planted {
  JobSequence seq;
  std::vector<std::size_t> witness;  // machine per job in arrival order
};

/// Every machine of a hidden schedule gets jobs that are multiples of
/// 1/denom summing to exactly 1. Sum p = m together with this witness
/// certifies OPT = 1.
inline Planted gen_planted(std::size_t m, const PlantProfile& profile, long denom, std::uint64_t seed,
                           Order order = Order::kShuffle) {
  if (m == 0) throw std::invalid_argument("gen: m must be positive");
  if (denom < 2) throw std::invalid_argument("gen: denom must be at least 2");
  if (profile.min_jobs == 0 || profile.min_jobs > profile.max_jobs || profile.min_units == 0 ||
      profile.min_jobs * profile.min_units > static_cast<std::size_t>(denom)) {
    throw std::invalid_argument("gen: infeasible machine profile");
  }
  std::mt19937_64 rng(seed);
  const std::size_t units = static_cast<std::size_t>(denom);
  const std::size_t most = std::min(profile.max_jobs, units / profile.min_units);
  std::vector<std::pair<long, std::size_t>> jobs;  // (units, machine)
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(profile.min_jobs, most)(rng);
    // A random composition of the spare units into k parts, each part
    // topped up to min_units.
    const std::size_t spare = units - k * profile.min_units;
    std::vector<std::size_t> cuts{0, spare};
    for (std::size_t c = 1; c < k; ++c) cuts.push_back(std::uniform_int_distribution<std::size_t>(0, spare)(rng));
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c < k; ++c) {
      jobs.emplace_back(static_cast<long>(cuts[c + 1] - cuts[c] + profile.min_units), j);
    }
  }
  switch (order) {
    case Order::kShuffle:
      std::shuffle(jobs.begin(), jobs.end(), rng);
      break;
    case Order::kLargestFirst:
      std::stable_sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      break;
    case Order::kSmallestFirst:
      std::stable_sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      break;
    case Order::kInterleaved: {
      std::stable_sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<std::pair<long, std::size_t>> mixed;
      for (std::size_t lo = 0, hi = jobs.size(); lo < hi;) {
        mixed.push_back(jobs[lo++]);
        if (lo < hi) mixed.push_back(jobs[--hi]);
      }
      jobs = std::move(mixed);
      break;
    }
  }
  Planted out;
  std::vector<Rational> sizes;
  for (const auto& [u, j] : jobs) {
    sizes.emplace_back(u, denom);
    out.witness.push_back(j);
  }
  out.seq = JobSequence(m, sizes, Rational(1));
  return out;
}

/// Checks the certificate: sum p = m, and the witness has every load equal to 1.
inline bool certify_planted(const Planted& p) {
  if (p.seq.total() != Rational(static_cast<long>(p.seq.m))) return false;
  Schedule s(p.seq.m);
  for (std::size_t t = 0; t < p.seq.jobs.size(); ++t) s.assign(p.witness.at(t), p.seq.jobs[t]);
  return std::all_of(s.loads().begin(), s.loads().end(), [](const Rational& l) { return l == Rational(1); });
}

/// n jobs of size k/denom, k uniform in [1, denom]; no optimum attached.
inline JobSequence gen_random(std::size_t m, std::size_t n, long denom, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Rational> sizes;
  for (std::size_t t = 0; t < n; ++t) sizes.emplace_back(std::uniform_int_distribution<long>(1, denom)(rng), denom);
  return JobSequence(m, sizes);
}

// ------------------------------------------------------------ composition

enum class Algo { kList, kA1, kA2, kA3, kA1Star, kA3Star };

inline Algo parse_algo(const std::string& s) {
  if (s == "list") return Algo::kList;
  if (s == "a1") return Algo::kA1;
  if (s == "a2") return Algo::kA2;
  if (s == "a3") return Algo::kA3;
  if (s == "a1star") return Algo::kA1Star;
  if (s == "a3star") return Algo::kA3Star;
  throw std::invalid_argument("unknown algorithm '" + s + "' (list|a1|a2|a3|a1star|a3star)");
}

inline const char* algo_name(Algo a) {
  switch (a) {
    case Algo::kList: return "list";
    case Algo::kA1: return "a1";
    case Algo::kA2: return "a2";
    case Algo::kA3: return "a3";
    case Algo::kA1Star: return "a1star";
    case Algo::kA3Star: return "a3star";
  }
  return "list";
}

inline bool is_star(Algo a) { return a == Algo::kA1Star || a == Algo::kA3Star; }

struct AlgoSpec {
  Algo algo = Algo::kList;
  Rational eps{1};
  std::optional<Rational> assumed_opt;  // bare families; falls back to the instance's optimum
  a2::Selection mode = a2::Selection::kTargeted;
  std::size_t lane_cap = default_lane_cap();
  bool check_lemmas = false;
};

/// Competitive ratio the composed algorithm promises.
inline Rational promised_ratio(const AlgoSpec& spec, std::size_t m) {
  switch (spec.algo) {
    case Algo::kList: return Rational(2) - Rational(1, static_cast<long>(m));
    case Algo::kA1:
    case Algo::kA1Star: return Rational(1) + spec.eps;
    case Algo::kA2:
    case Algo::kA3:
    case Algo::kA3Star: return Rational(4, 3) + spec.eps;
  }
  return Rational(2);
}

/// Inner ratio rho of a star composition: 1 + eps/2 or 4/3 + eps/2.
inline Rational star_rho(const AlgoSpec& spec) {
  return (spec.algo == Algo::kA1Star ? Rational(1) : Rational(4, 3)) + spec.eps / Rational(2);
}

inline wrapper::Params star_params(const AlgoSpec& spec) {
  if (!is_star(spec.algo)) throw std::invalid_argument("star_params: not a star composition");
  return wrapper::astar_params(star_rho(spec), spec.eps / Rational(2));
}

/// Inner family factory: A1(eps/2) or A3(eps/2) thresholds at the epoch's guess.
inline wrapper::InnerFactory star_factory(const AlgoSpec& spec) {
  const Rational inner_eps = spec.eps / Rational(2);
  const auto mode = spec.mode;
  const std::size_t cap = spec.lane_cap;
  if (spec.algo == Algo::kA1Star) {
    return [inner_eps, mode, cap](const wrapper::EpochContext& ctx) -> std::unique_ptr<LaneFamily> {
      if (mode == a2::Selection::kFull) {
        return std::make_unique<a1::Family>(inner_eps, ctx.m, ctx.assumed_opt, a1::Full{cap});
      }
      const a1::Partition part = a1::make_partition(inner_eps, ctx.assumed_opt);
      return std::make_unique<a1::Family>(inner_eps, ctx.m, ctx.assumed_opt,
                                          a1::Targeted{a1::clamped_vector(ctx.upcoming, part, ctx.m)});
    };
  }
  return [inner_eps, mode, cap](const wrapper::EpochContext& ctx) {
    return a2::a3_family(inner_eps, ctx.m, ctx.assumed_opt, mode, ctx.upcoming, cap);
  };
}

/// Closed-form schedule count of the composed algorithm (as a decimal string).
inline std::string logical_lanes(const AlgoSpec& spec, std::size_t m) {
  auto a1_count = [m](const Rational& eps) {
    const a1::Partition part = a1::make_partition(eps, Rational(1));
    return a1::Family::full_size_closed_form(a1::count_bound(part, m), part.l);
  };
  auto a3_count = [&](const Rational& eps) {
    if (a2::a3_uses_a1(eps, m)) return a1_count(a2::a3_fallback_eps());
    return a2::Family::full_size_closed_form(a2::make_params(eps, m, Rational(1)));
  };
  switch (spec.algo) {
    case Algo::kList: return "1";
    case Algo::kA1: return a1_count(spec.eps).get_str();
    case Algo::kA2: return a2::Family::full_size_closed_form(a2::make_params(spec.eps, m, Rational(1))).get_str();
    case Algo::kA3: return a3_count(spec.eps).get_str();
    case Algo::kA1Star: return mpz_class(mpz_class(star_params(spec).h) * a1_count(spec.eps / Rational(2))).get_str();
    case Algo::kA3Star: return mpz_class(mpz_class(star_params(spec).h) * a3_count(spec.eps / Rational(2))).get_str();
  }
  return "1";
}

struct Outcome {
  Schedule best;
  std::string lanes;           // closed-form count of the full algorithm
  std::size_t simulated = 0;   // lanes actually run
  std::size_t adjustments = 0;
  std::vector<Rational> guesses;
  bool smallest_guess_live = true;
  std::vector<std::string> lemma_failures;
};

namespace detail {

/// Records, per lane, whether an A1 lane ever put more large load on a
/// machine than its planned packing.
class A1LargeLoadMonitor : public StepObserver {
 public:
  void on_step(std::size_t lane, const OnlineScheduler& scheduler, const Job& job, std::size_t machine) override {
    const auto* a1 = dynamic_cast<const a1::Lane*>(&scheduler);
    if (a1 == nullptr || a1->large_load(machine) <= a1->planned_load(machine)) return;
    failures.push_back("a1 lane " + std::to_string(lane) + ": job " + std::to_string(job.index) +
                       " pushes large load above planned load on machine " + std::to_string(machine + 1));
  }
  std::vector<std::string> failures;
};

class Fanout : public StepObserver {
 public:
  std::vector<StepObserver*> children;
  void on_lane_start(std::size_t lane, const OnlineScheduler& s) override {
    for (auto* c : children) c->on_lane_start(lane, s);
  }
  void on_step(std::size_t lane, const OnlineScheduler& s, const Job& job, std::size_t machine) override {
    for (auto* c : children) c->on_step(lane, s, job, machine);
  }
};

}  // namespace detail

/// The bare family for `spec` at assumed optimum T over the given input.
/// Targeted mode derives the single lane from the input's true profile.
inline std::unique_ptr<LaneFamily> bare_family(const AlgoSpec& spec, const JobSequence& seq, const Rational& T) {
  const std::size_t m = seq.m;
  switch (spec.algo) {
    case Algo::kA1:
      if (spec.mode == a2::Selection::kFull) return std::make_unique<a1::Family>(spec.eps, m, T, a1::Full{spec.lane_cap});
      return std::make_unique<a1::Family>(
          spec.eps, m, T, a1::Targeted{a1::true_vector(seq, a1::make_partition(spec.eps, T))});
    case Algo::kA2: {
      if (spec.mode == a2::Selection::kFull) return std::make_unique<a2::Family>(spec.eps, m, T, a2::Full{spec.lane_cap});
      const a2::Params p = a2::make_params(spec.eps, m, T);
      return std::make_unique<a2::Family>(spec.eps, m, T, a2::Targeted{a2::valid_u(p, a2::class_counts(p, seq.jobs))});
    }
    case Algo::kA3:
      return a2::a3_family(spec.eps, m, T, spec.mode, seq.jobs, spec.lane_cap);
    default:
      throw std::invalid_argument("bare_family: not a bare MPS_opt algorithm");
  }
}

/// Runs the composed algorithm on one sequence.
inline Outcome run_algorithm(const AlgoSpec& spec, const JobSequence& seq, wrapper::TraceSink trace = {}) {
  Outcome out;
  out.lanes = logical_lanes(spec, seq.m);
  if (spec.algo == Algo::kList) {
    adversary::ListLane lane(seq.m, {});
    run_lane(lane, seq.jobs);
    out.best = lane.schedule();
    out.simulated = 1;
    return out;
  }
  if (is_star(spec.algo)) {
    wrapper::AStar astar(star_params(spec), seq.m, star_factory(spec), seq.jobs, std::move(trace), spec.lane_cap);
    astar.run();
    const wrapper::Result r = astar.finish();
    out.best = r.best;
    out.simulated = r.lanes;
    out.adjustments = r.adjustments;
    out.guesses = r.guesses;
    out.smallest_guess_live = seq.empty() || r.smallest_has_live_lane;
    if (spec.check_lemmas && !out.smallest_guess_live) out.lemma_failures.push_back("no live lane for the smallest guess");
    return out;
  }
  const std::optional<Rational> T = spec.assumed_opt ? spec.assumed_opt : seq.planted_opt;
  if (!T) throw std::invalid_argument(std::string(algo_name(spec.algo)) + " needs --assumed-opt (or an instance optimum)");
  const auto family = bare_family(spec, seq, *T);
  a2::StructureMonitor structure;
  detail::A1LargeLoadMonitor large;
  detail::Fanout fan;
  const bool targeted = spec.mode == a2::Selection::kTargeted;
  if (spec.check_lemmas) {
    fan.children.push_back(&structure);
    if (targeted) fan.children.push_back(&large);
  }
  const FamilyRun run = evaluate_family(*family, seq.jobs, spec.check_lemmas ? &fan : nullptr);
  out.best = run.best;
  out.simulated = run.simulated;
  for (const auto& v : structure.violations()) {
    out.lemma_failures.push_back("a2 lane " + std::to_string(v.lane) + ": after job " + std::to_string(v.job) + ", " +
                                 std::to_string(v.machines) + " core machines have small load below (1+eps')T");
  }
  out.lemma_failures.insert(out.lemma_failures.end(), large.failures.begin(), large.failures.end());
  return out;
}

// ------------------------------------------------------------------ batch

struct Instance {
  std::string id;
  JobSequence seq;
};

struct BatchConfig {
  AlgoSpec spec;
  bool timing = false;           // otherwise the ms column is 0 for byte-stable output
  std::size_t oracle_cap = 24;  // opt_exact fallback for instances without an optimum
};

struct Row {
  std::string instance_id;
  std::size_t m = 0;
  std::size_t n = 0;
  std::optional<Rational> opt;
  Rational makespan;
  std::optional<Rational> ratio;
  Outcome outcome;
  long ms = 0;
  std::vector<std::string> failures;  // assertion failures for --check
};

inline const char* kCsvHeader = "instance_id,m,n,algo,epsilon,lanes,opt,makespan,ratio_num,ratio_den,adjustments,ms";

inline Row run_instance(const BatchConfig& cfg, const Instance& inst) {
  Row row;
  row.instance_id = inst.id;
  row.m = inst.seq.m;
  row.n = inst.seq.size();
  row.opt = inst.seq.planted_opt;
  if (!row.opt && inst.seq.size() <= cfg.oracle_cap) row.opt = opt_exact(inst.seq, cfg.oracle_cap);
  // Bare families without --assumed-opt run at the computed optimum.
  JobSequence seq = inst.seq;
  if (!seq.planted_opt) seq.planted_opt = row.opt;
  const auto start = std::chrono::steady_clock::now();
  row.outcome = run_algorithm(cfg.spec, seq);
  if (cfg.timing) {
    row.ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  }
  row.makespan = row.outcome.best.makespan();
  row.failures = row.outcome.lemma_failures;
  if (row.opt && row.opt->sign() > 0) {
    row.ratio = row.makespan / *row.opt;
    // Bare families promise their ratio against the assumed optimum.
    const Rational reference = (!is_star(cfg.spec.algo) && cfg.spec.algo != Algo::kList && cfg.spec.assumed_opt)
                                   ? *cfg.spec.assumed_opt
                                   : *row.opt;
    const Rational bound = promised_ratio(cfg.spec, row.m) * reference;
    if (row.makespan > bound) {
      row.failures.push_back("makespan " + row.makespan.str() + " exceeds " + bound.str());
    }
    if (is_star(cfg.spec.algo) && !row.outcome.guesses.empty()) {
      const Rational cap = (Rational(1) + star_params(cfg.spec).step) * *row.opt;
      if (row.outcome.guesses.front() > cap) row.failures.push_back("smallest guess exceeds (1+step) OPT");
      if (!row.outcome.smallest_guess_live) row.failures.push_back("every lane of the smallest guess failed");
    }
  }
  return row;
}

inline nlohmann::json to_json(const BatchConfig& cfg, const Row& row) {
  nlohmann::json j;
  j["instance_id"] = row.instance_id;
  j["m"] = row.m;
  j["n"] = row.n;
  j["algo"] = algo_name(cfg.spec.algo);
  j["epsilon"] = cfg.spec.eps.str();
  j["lanes"] = row.outcome.lanes;
  j["simulated_lanes"] = row.outcome.simulated;
  j["opt"] = row.opt ? nlohmann::json(row.opt->str()) : nlohmann::json();
  j["makespan"] = row.makespan.str();
  j["ratio"] = row.ratio ? nlohmann::json(row.ratio->str()) : nlohmann::json();
  j["adjustments"] = row.outcome.adjustments;
  auto guesses = nlohmann::json::array();
  for (const auto& g : row.outcome.guesses) guesses.push_back(g.str());
  j["guesses"] = guesses;
  j["loads"] = loads_json(row.outcome.best);
  j["failures"] = row.failures;
  j["ms"] = row.ms;
  return j;
}

inline std::string csv_line(const BatchConfig& cfg, const Row& row) {
  std::string out = row.instance_id + "," + std::to_string(row.m) + "," + std::to_string(row.n) + "," +
                    algo_name(cfg.spec.algo) + "," + cfg.spec.eps.str() + "," + row.outcome.lanes + "," +
                    (row.opt ? row.opt->str() : "") + "," + row.makespan.str() + ",";
  if (row.ratio) out += row.ratio->numerator().get_str() + "," + row.ratio->denominator().get_str();
  else out += ",";
  out += "," + std::to_string(row.outcome.adjustments) + "," + std::to_string(row.ms);
  return out;
}

struct BatchSummary {
  std::size_t instances = 0;
  std::size_t failed = 0;
  std::optional<Rational> worst_ratio;
};

/// Runs every instance in order and streams one JSONL record and one CSV
/// row per instance.
inline BatchSummary run_batch(const BatchConfig& cfg, const std::vector<Instance>& instances, std::ostream* jsonl,
                              std::ostream* csv) {
  BatchSummary summary;
  if (csv) *csv << kCsvHeader << "\n";
  for (const auto& inst : instances) {
    const Row row = run_instance(cfg, inst);
    ++summary.instances;
    if (!row.failures.empty()) ++summary.failed;
    if (row.ratio && (!summary.worst_ratio || *row.ratio > *summary.worst_ratio)) summary.worst_ratio = row.ratio;
    if (jsonl) *jsonl << to_json(cfg, row).dump() << "\n";
    if (csv) *csv << csv_line(cfg, row) << "\n";
  }
  return summary;
}

}  // namespace mps::harness
