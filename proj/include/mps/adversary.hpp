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

// Adaptive adversaries that force a ratio on any algorithm keeping too few
// schedules. Both play a prefix of equal tiny jobs, read off which load
// profiles the victim's schedules realize, pick a profile nobody realized,
// and then send the large jobs that complete that profile to makespan 1.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mps/core.hpp"

namespace mps::adversary {

// ---------------------------------------------------------------- victims

/// Graham's List rule: a least-loaded machine, ties resolved by a fixed
/// priority order over machines.
class ListLane : public OnlineScheduler {
 public:
  ListLane(std::size_t m, std::vector<std::size_t> priority, std::size_t label = 0)
      : priority_(std::move(priority)), schedule_(m, label, "list") {
    if (priority_.empty()) {
      priority_.resize(m);
      std::iota(priority_.begin(), priority_.end(), 0);
    }
    std::vector<std::size_t> sorted = priority_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < m; ++j) {
      if (sorted.size() != m || sorted[j] != j) throw std::invalid_argument("list victim: tie-break order must permute machines");
    }
  }

  Placement place(const Job& job) override {
    std::size_t best = priority_.front();
    for (std::size_t j : priority_) {
      if (schedule_.load(j) < schedule_.load(best)) best = j;
    }
    schedule_.assign(best, job);
    return Placement::to(best);
  }
  const Schedule& schedule() const override { return schedule_; }
  std::string describe() const override { return "list"; }

 private:
  std::vector<std::size_t> priority_;
  Schedule schedule_;
};

/// Follows a fixed machine script, then falls back to List.
class ScriptedLane : public OnlineScheduler {
 public:
  ScriptedLane(std::size_t m, std::vector<std::size_t> script, std::size_t label = 0)
      : script_(std::move(script)), schedule_(m, label, "scripted") {
    for (auto j : script_) {
      if (j >= m) throw std::invalid_argument("scripted victim: machine out of range");
    }
  }
  Placement place(const Job& job) override {
    const std::size_t j = next_ < script_.size() ? script_[next_] : schedule_.least_loaded();
    ++next_;
    schedule_.assign(j, job);
    return Placement::to(j);
  }
  const Schedule& schedule() const override { return schedule_; }
  std::string describe() const override { return "scripted"; }

 private:
  std::vector<std::size_t> script_;
  std::size_t next_ = 0;
  Schedule schedule_;
};

class RoundRobinLane : public OnlineScheduler {
 public:
  explicit RoundRobinLane(std::size_t m, std::size_t label = 0) : schedule_(m, label, "round_robin") {}
  Placement place(const Job& job) override {
    const std::size_t j = next_++ % schedule_.machines();
    schedule_.assign(j, job);
    return Placement::to(j);
  }
  const Schedule& schedule() const override { return schedule_; }
  std::string describe() const override { return "round_robin"; }

 private:
  std::size_t next_ = 0;
  Schedule schedule_;
};

/// Seeded greedy: picks uniformly among the two least-loaded machines.
class RandomGreedyLane : public OnlineScheduler {
 public:
  RandomGreedyLane(std::size_t m, std::uint64_t seed, std::size_t label = 0)
      : rng_(seed), schedule_(m, label, "random_greedy") {}
  Placement place(const Job& job) override {
    std::vector<std::size_t> order(schedule_.machines());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return schedule_.load(a) < schedule_.load(b); });
    const std::size_t choices = std::min<std::size_t>(2, order.size());
    const std::size_t j = order[std::uniform_int_distribution<std::size_t>(0, choices - 1)(rng_)];
    schedule_.assign(j, job);
    return Placement::to(j);
  }
  const Schedule& schedule() const override { return schedule_; }
  std::string describe() const override { return "random_greedy"; }

 private:
  std::mt19937_64 rng_;
  Schedule schedule_;
};

/// k List lanes whose tie-break orders are the k rotations 0, 1, ... of the
/// machine numbering, so no two lanes break ties alike.
inline LaneSet list_victims(std::size_t m, std::size_t k) {
  if (k > m) throw std::invalid_argument("list victims: at most m distinct rotations exist");
  LaneSet lanes;
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<std::size_t> order(m);
    for (std::size_t j = 0; j < m; ++j) order[j] = (j + r) % m;
    lanes.push_back(std::make_unique<ListLane>(m, order, r));
  }
  return lanes;
}

/// Lanes from a strategy document:
/// {"lanes":[{"kind":"list","tiebreak":[2,1,3]},
///           {"kind":"scripted","machines":[1,1,2]},
///           {"kind":"round_robin"}, {"kind":"random_greedy","seed":7}]}
/// Machine numbers in the document are 1-based.
inline LaneSet victims_from_json(const nlohmann::json& doc, std::size_t m) {
  if (!doc.is_object() || !doc.contains("lanes") || !doc["lanes"].is_array()) {
    throw std::invalid_argument("strategy: expected an object with a \"lanes\" array");
  }
  auto zero_based = [m](const nlohmann::json& arr) {
    std::vector<std::size_t> out;
    for (const auto& v : arr) {
      const long j = v.get<long>();
      if (j < 1 || static_cast<std::size_t>(j) > m) throw std::invalid_argument("strategy: machine out of range");
      out.push_back(static_cast<std::size_t>(j - 1));
    }
    return out;
  };
  LaneSet lanes;
  for (const auto& spec : doc["lanes"]) {
    const std::string kind = spec.value("kind", "");
    const std::size_t label = lanes.size();
    if (kind == "list") {
      lanes.push_back(std::make_unique<ListLane>(
          m, spec.contains("tiebreak") ? zero_based(spec["tiebreak"]) : std::vector<std::size_t>{}, label));
    } else if (kind == "scripted") {
      lanes.push_back(std::make_unique<ScriptedLane>(m, zero_based(spec.at("machines")), label));
    } else if (kind == "round_robin") {
      lanes.push_back(std::make_unique<RoundRobinLane>(m, label));
    } else if (kind == "random_greedy") {
      lanes.push_back(std::make_unique<RandomGreedyLane>(m, spec.value("seed", std::uint64_t{0}), label));
    } else {
      throw std::invalid_argument("strategy: unknown lane kind '" + kind + "'");
    }
  }
  return lanes;
}

/// "list:K" or "file:path".
inline LaneSet parse_victims(const std::string& spec, std::size_t m) {
  if (spec.rfind("list:", 0) == 0) return list_victims(m, std::stoul(spec.substr(5)));
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream in(spec.substr(5));
    if (!in) throw std::runtime_error("cannot open " + spec.substr(5));
    return victims_from_json(nlohmann::json::parse(in), m);
  }
  throw std::invalid_argument("victim spec must be list:K or file:PATH");
}

// --------------------------------------------------------------- profiles

struct PairProfile {
  std::size_t m1 = 0;
  std::size_t m3 = 0;
  auto operator<=>(const PairProfile&) const = default;
};

using VectorProfile = std::vector<std::size_t>;  // (m_0, ..., m_2h)

/// (m1, m3) when every machine holds 0, 1 or 3 jobs.
inline std::optional<PairProfile> classify_lb1(const Schedule& s) {
  PairProfile p;
  for (auto count : s.job_counts()) {
    if (count == 1) {
      ++p.m1;
    } else if (count == 3) {
      ++p.m3;
    } else if (count != 0) {
      return std::nullopt;
    }
  }
  return p;
}

/// All (m - 3k, k), ordered by m1 ascending.
inline std::vector<PairProfile> lb1_universe(std::size_t m) {
  std::vector<PairProfile> out;
  for (std::size_t k = m / 3 + 1; k-- > 0;) out.push_back({m - 3 * k, k});
  return out;
}

/// The vector profile of tiny-job loads when each load is exactly 1 or at
/// most 1/2 - eps'. Machines flagged in `skip` are left out.
inline std::optional<VectorProfile> classify_lb2(const Schedule& s, std::size_t h, const Rational& eps_prime,
                                                 const std::vector<bool>& skip = {}) {
  VectorProfile v(2 * h + 1, 0);
  const Rational low_cap = Rational(1, 2) - eps_prime;
  for (std::size_t j = 0; j < s.machines(); ++j) {
    if (!skip.empty() && skip[j]) continue;
    const Rational& load = s.load(j);
    if (load == Rational(1)) {
      ++v[2 * h];
    } else if (load <= low_cap) {
      const Rational count = load / eps_prime;
      if (!count.is_integer()) return std::nullopt;
      ++v[static_cast<std::size_t>(count.floor_long())];
    } else {
      return std::nullopt;
    }
  }
  return v;
}

/// Lexicographic walk over M = {v : sum v = machines, 4h v_2h + sum i v_i = machines h}.
/// `visit` returns false to stop early.
template <class Visit>
void for_each_lb2_profile(std::size_t machines, std::size_t h, Visit&& visit) {
  const std::size_t len = 2 * h + 1;
  const std::size_t target = machines * h;
  VectorProfile v(len, 0);
  auto weight = [&](std::size_t i) { return i == 2 * h ? 4 * h : i; };
  // Fill position i given remaining machine count and remaining job count.
  std::function<bool(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left,
                                                                        std::size_t jobs) -> bool {
    if (i + 1 == len) {
      if (jobs == left * weight(i)) {
        v[i] = left;
        const bool more = visit(static_cast<const VectorProfile&>(v));
        v[i] = 0;
        return more;
      }
      return true;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      if (c * weight(i) > jobs) break;
      // The remaining machines can carry at most 4h jobs each.
      if (jobs - c * weight(i) > (left - c) * 4 * h) continue;
      v[i] = c;
      if (!rec(i + 1, left - c, jobs - c * weight(i))) return false;
    }
    v[i] = 0;
    return true;
  };
  rec(0, machines, target);
}

inline std::size_t lb2_universe_size(std::size_t machines, std::size_t h) {
  std::size_t count = 0;
  for_each_lb2_profile(machines, h, [&](const VectorProfile&) {
    ++count;
    return true;
  });
  return count;
}

/// binom(floor(m/2) + h - 1, h - 1), the injected subset size bounding |M| from below.
inline mpz_class lb2_injection_bound(std::size_t m, std::size_t h) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), m / 2 + h - 1, h - 1);
  return out;
}

/// Smallest universe element not in `realized`.
inline std::optional<PairProfile> missing_lb1(const std::set<PairProfile>& realized, std::size_t m) {
  for (const auto& p : lb1_universe(m)) {
    if (!realized.count(p)) return p;
  }
  return std::nullopt;
}

inline std::optional<VectorProfile> missing_lb2(const std::set<VectorProfile>& realized, std::size_t machines,
                                                std::size_t h) {
  std::optional<VectorProfile> out;
  for_each_lb2_profile(machines, h, [&](const VectorProfile& v) {
    if (realized.count(v)) return true;
    out = v;
    return false;
  });
  return out;
}

// ---------------------------------------------------------------- reports

struct Report {
  std::string theorem;
  JobSequence sigma;
  Rational opt;
  std::vector<std::size_t> witness;  // machine per job, 0-based
  Rational witness_makespan;
  Rational forced_makespan;
  std::vector<Rational> lane_makespans;
  std::vector<std::string> realized;  // per lane, "none" if it did not conform
  std::string chosen;
  std::size_t universe = 0;
  bool stopped_early = false;
  Rational target;  // ratio the construction forces
};

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["theorem"] = r.theorem;
  j["sigma"] = mps::to_json(r.sigma);
  j["opt"] = r.opt.str();
  j["witness"] = r.witness;
  j["witness_makespan"] = r.witness_makespan.str();
  j["forced_makespan"] = r.forced_makespan.str();
  j["target"] = r.target.str();
  j["lane_makespans"] = nlohmann::json::array();
  for (const auto& x : r.lane_makespans) j["lane_makespans"].push_back(x.str());
  j["realized"] = r.realized;
  j["chosen_profile"] = r.chosen;
  j["universe_size"] = r.universe;
  j["stopped_early"] = r.stopped_early;
  j["forced_ratio_holds"] = r.forced_makespan >= r.target * r.opt;
  return j;
}

namespace detail {

inline void feed(LaneSet& lanes, const Job& job) {
  for (auto& lane : lanes) {
    if (!lane->place(job).has_rule()) {
      throw std::invalid_argument("adversary: victim " + lane->describe() + " left job " + std::to_string(job.index) +
                                  " unplaced");
    }
  }
}

inline Rational witness_span(const JobSequence& seq, const std::vector<std::size_t>& witness) {
  Schedule s(seq.m);
  for (std::size_t t = 0; t < seq.jobs.size(); ++t) s.assign(witness.at(t), seq.jobs[t]);
  if (s.job_count() != seq.jobs.size()) throw std::logic_error("adversary: witness misses jobs");
  return s.makespan();
}

inline std::string str(const PairProfile& p) { return "(" + std::to_string(p.m1) + "," + std::to_string(p.m3) + ")"; }
inline std::string str(const VectorProfile& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out + ")";
}

/// Balanced witness for a run cut short after the tiny-job prefix: job t
/// goes to machine (t - first) mod (m - first), earlier jobs to their own machine.
inline std::vector<std::size_t> round_robin_witness(std::size_t n, std::size_t m, std::size_t first) {
  std::vector<std::size_t> w(n);
  for (std::size_t t = 0; t < n; ++t) w[t] = t < first ? t : first + (t - first) % (m - first);
  return w;
}

inline void finish(Report& r, const LaneSet& lanes) {
  r.lane_makespans.clear();
  for (const auto& lane : lanes) r.lane_makespans.push_back(lane->schedule().makespan());
  r.forced_makespan = *std::min_element(r.lane_makespans.begin(), r.lane_makespans.end());
  r.witness_makespan = witness_span(r.sigma, r.witness);
  // The witness is optimal when it meets the trivial lower bound.
  const Rational bound = max(r.sigma.total() / Rational(static_cast<long>(r.sigma.m)), r.sigma.max_size());
  if (r.witness_makespan != bound) throw std::logic_error("adversary: witness is not provably optimal");
  r.opt = r.witness_makespan;
}

}  // namespace detail

struct Options {
  /// Stop after the tiny-job prefix when every lane already has the target load.
  bool early_stop = false;
};

/// Forces ratio 4/3 on any victim with at most floor(m/3) schedules.
inline Report lb1_run(std::size_t m, LaneSet& lanes, Options options = {}) {
  if (m < 3) throw std::invalid_argument("lb1: needs m >= 3");
  if (lanes.empty()) throw std::invalid_argument("lb1: victim has no lanes");
  if (lanes.size() > m / 3) {
    throw std::invalid_argument("lb1: victim keeps " + std::to_string(lanes.size()) + " schedules, more than floor(m/3)");
  }
  Report r;
  r.theorem = "lb1";
  r.target = Rational(4, 3);
  r.opt = Rational(1);
  r.universe = m / 3 + 1;
  std::vector<Rational> sizes(m, Rational(1, 3));
  for (std::size_t t = 0; t < m; ++t) detail::feed(lanes, Job{t + 1, sizes[t]});

  std::set<PairProfile> realized;
  bool all_forced = true;
  for (const auto& lane : lanes) {
    const auto p = classify_lb1(lane->schedule());
    r.realized.push_back(p ? detail::str(*p) : "none");
    if (p) realized.insert(*p);
    all_forced = all_forced && lane->schedule().makespan() >= r.target;
  }
  const PairProfile chosen = *missing_lb1(realized, m);
  r.chosen = detail::str(chosen);

  // Witness: three tiny jobs on each of the last m3 machines, one on each of
  // the m1 machines before them; the rest stay empty for the unit jobs.
  const std::size_t empty = m - chosen.m1 - chosen.m3;
  r.witness.resize(m);
  for (std::size_t t = 0; t < chosen.m1; ++t) r.witness[t] = empty + t;
  for (std::size_t t = chosen.m1; t < m; ++t) r.witness[t] = empty + chosen.m1 + (t - chosen.m1) / 3;

  r.stopped_early = options.early_stop && all_forced;
  if (r.stopped_early) {
    r.witness = detail::round_robin_witness(m, m, 0);
  } else {
    for (std::size_t j = 0; j < empty; ++j) {
      sizes.push_back(Rational(1));
      r.witness.push_back(j);
    }
    for (std::size_t j = 0; j < chosen.m1; ++j) {
      sizes.push_back(Rational(2, 3));
      r.witness.push_back(empty + j);
    }
    for (std::size_t t = m; t < sizes.size(); ++t) detail::feed(lanes, Job{t + 1, sizes[t]});
  }
  r.sigma = JobSequence(m, sizes);
  detail::finish(r, lanes);
  r.sigma.planted_opt = r.opt;
  return r;
}

struct Lb2Setup {
  std::size_t h = 0;
  Rational eps_prime;
  std::size_t machines = 0;  // machines the tiny-job game is played on
  bool odd = false;
};

inline Lb2Setup lb2_setup(std::size_t m, const Rational& eps) {
  if (eps.sign() <= 0 || eps > Rational(1, 4)) throw std::invalid_argument("lb2: epsilon must lie in (0, 1/4]");
  if (m < 2) throw std::invalid_argument("lb2: needs m >= 2");
  Lb2Setup s;
  s.h = static_cast<std::size_t>((Rational(1) / (Rational(4) * eps)).floor_long());
  s.eps_prime = Rational(1) / Rational(static_cast<long>(4 * s.h));
  s.odd = m % 2 == 1;
  s.machines = s.odd ? m - 1 : m;
  return s;
}

/// Forces ratio 1 + eps' on any victim with fewer schedules than |M|.
inline Report lb2_run(std::size_t m, const Rational& eps, LaneSet& lanes, Options options = {}) {
  const Lb2Setup setup = lb2_setup(m, eps);
  const std::size_t h = setup.h;
  if (lanes.empty()) throw std::invalid_argument("lb2: victim has no lanes");
  Report r;
  r.theorem = "lb2";
  r.opt = Rational(1);
  r.target = Rational(1) + setup.eps_prime;
  r.universe = lb2_universe_size(setup.machines, h);
  if (lanes.size() >= r.universe) {
    throw std::invalid_argument("lb2: victim keeps " + std::to_string(lanes.size()) + " schedules, not fewer than |M| = " +
                                std::to_string(r.universe));
  }
  std::vector<Rational> sizes;
  if (setup.odd) sizes.push_back(Rational(1));
  sizes.insert(sizes.end(), setup.machines * h, setup.eps_prime);
  for (std::size_t t = 0; t < sizes.size(); ++t) detail::feed(lanes, Job{t + 1, sizes[t]});

  std::set<VectorProfile> realized;
  bool all_forced = true;
  for (const auto& lane : lanes) {
    const Schedule& s = lane->schedule();
    std::vector<bool> skip;
    bool ok = true;
    if (setup.odd) {
      // The unit job's machine must hold nothing else.
      const std::size_t unit = *s.machine_of(1);
      skip.assign(m, false);
      skip[unit] = true;
      ok = s.load(unit) == Rational(1);
    }
    const auto v = ok ? classify_lb2(s, h, setup.eps_prime, skip) : std::nullopt;
    r.realized.push_back(v ? detail::str(*v) : "none");
    if (v) realized.insert(*v);
    all_forced = all_forced && s.makespan() >= r.target;
  }
  const VectorProfile chosen = *missing_lb2(realized, setup.machines, h);
  r.chosen = detail::str(chosen);

  // Witness machines: [unit] then by tiny-job count ascending, i.e. type 0
  // (empty) first and the full machines last.
  const std::size_t offset = setup.odd ? 1 : 0;
  r.witness.clear();
  if (setup.odd) r.witness.push_back(0);
  std::vector<std::size_t> first_of(2 * h + 1, 0);
  std::size_t next = offset;
  for (std::size_t i = 0; i <= 2 * h; ++i) {
    first_of[i] = next;
    next += chosen[i];
  }
  for (std::size_t i = 1; i <= 2 * h; ++i) {
    const std::size_t per = i == 2 * h ? 4 * h : i;
    for (std::size_t k = 0; k < chosen[i]; ++k) r.witness.insert(r.witness.end(), per, first_of[i] + k);
  }

  r.stopped_early = options.early_stop && all_forced;
  if (r.stopped_early) {
    r.witness = detail::round_robin_witness(sizes.size(), m, offset);
  } else {
    const std::size_t prefix = sizes.size();
    // Non-increasing sizes: 1 - i eps' for i = 0, 1, ..., 2h - 1.
    for (std::size_t i = 0; i < 2 * h; ++i) {
      for (std::size_t k = 0; k < chosen[i]; ++k) {
        sizes.push_back(Rational(1) - Rational(static_cast<long>(i)) * setup.eps_prime);
        r.witness.push_back(first_of[i] + k);
      }
    }
    for (std::size_t t = prefix; t < sizes.size(); ++t) detail::feed(lanes, Job{t + 1, sizes[t]});
  }
  r.sigma = JobSequence(m, sizes);
  detail::finish(r, lanes);
  r.sigma.planted_opt = r.opt;
  return r;
}

}  // namespace mps::adversary
