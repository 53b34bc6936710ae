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

// Acceptance run: one PASS or FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mps/harness.hpp"

namespace {

using mps::JobSequence;
using mps::Rational;
namespace a1 = mps::a1;
namespace a2 = mps::a2;
namespace adv = mps::adversary;
namespace h = mps::harness;

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

Rational random_eps(std::mt19937_64& rng) {
  const long d = 1 + static_cast<long>(rng() % 64);
  return Rational(1 + static_cast<long>(rng() % d), d);
}

long denom_for(std::uint64_t seed) {
  static const long kDenoms[] = {6, 8, 12, 24};
  return kDenoms[seed % 4];
}

// A1 at eps = 1 and T = 1 on planted instances of OPT = 1.
Verdict criterion1() {
  Verdict v;
  std::size_t runs = 0;
  Rational worst;
  for (std::size_t m = 2; m <= 8; ++m) {
    const std::size_t max_jobs = std::min<std::size_t>(5, 40 / m);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const h::Planted p = h::gen_planted(m, {1, max_jobs, 1}, denom_for(seed), 1000 * m + seed,
                                          static_cast<h::Order>(seed % 4));
      h::AlgoSpec spec;
      spec.algo = h::Algo::kA1;
      spec.check_lemmas = true;
      const h::Outcome o = h::run_algorithm(spec, p.seq);
      const Rational span = o.best.makespan();
      worst = mps::max(worst, span);
      ++runs;
      if (span > Rational(2)) v.fail("m=" + std::to_string(m) + " seed " + std::to_string(seed) + ": makespan " + span.str());
      if (!o.lemma_failures.empty()) v.fail(o.lemma_failures.front());
      if (m <= 5 && seed < 10) {
        spec.mode = a2::Selection::kFull;
        spec.check_lemmas = false;
        const Rational full = h::run_algorithm(spec, p.seq).best.makespan();
        if (full > Rational(2) || full > span) v.fail("full family at m=" + std::to_string(m) + ": " + full.str());
        ++runs;
      }
    }
  }
  v.detail = v.pass ? std::to_string(runs) + " runs, worst makespan " + worst.str() + " <= 2" : v.detail;
  return v;
}

// Enumerated A1 family size against the closed form.
Verdict criterion2() {
  Verdict v;
  std::size_t checked = 0;
  for (const Rational& eps : {Rational(1), Rational(2, 3)}) {
    for (std::size_t m = 2; m <= 6; ++m) {
      const a1::Partition part = a1::make_partition(eps, Rational(1));
      const Rational bound = Rational(static_cast<long>(2 * m)) / eps;
      mpz_class expect;
      mpz_ui_pow_ui(expect.get_mpz_t(), static_cast<unsigned long>(bound.floor_long()) + 1,
                    static_cast<unsigned long>(part.l));
      const a1::Family family(eps, m, Rational(1), a1::Full{});
      if (mpz_class(static_cast<unsigned long>(family.size())) != expect) {
        v.fail("eps=" + eps.str() + " m=" + std::to_string(m) + ": " + std::to_string(family.size()) + " lanes, expected " +
               expect.get_str());
      }
      ++checked;
    }
  }
  if (v.pass) v.detail = std::to_string(checked) + " (eps, m) pairs enumerate (floor(2m/eps)+1)^l lanes";
  return v;
}

struct A2Runs {
  std::vector<std::string> failures;
  std::vector<std::string> lemma_failures;
  Rational worst;
  std::size_t runs = 0;
};

// Shared by criteria 3 and 4: targeted and full A2 runs at m = 256.
const A2Runs& a2_runs() {
  static const A2Runs runs = [] {
    A2Runs out;
    h::AlgoSpec spec;
    spec.algo = h::Algo::kA2;
    spec.check_lemmas = true;
    auto record = [&](const std::string& what, const JobSequence& seq) {
      const h::Outcome o = h::run_algorithm(spec, seq);
      const Rational span = o.best.makespan();
      out.worst = mps::max(out.worst, span);
      ++out.runs;
      if (span > Rational(7, 3)) out.failures.push_back(what + ": makespan " + span.str());
      for (const auto& f : o.lemma_failures) out.lemma_failures.push_back(what + ": " + f);
    };
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const h::Planted p =
          h::gen_planted(256, {1, 2, 1}, denom_for(seed), 7000 + seed, static_cast<h::Order>(seed % 4));
      record("planted seed " + std::to_string(seed), p.seq);
    }
    spec.mode = a2::Selection::kFull;
    const h::Planted p = h::gen_planted(256, {1, 2, 1}, 12, 4242, h::Order::kShuffle);
    if (p.seq.size() > 600) out.failures.push_back("full run instance too long");
    record("full family", p.seq);
    return out;
  }();
  return runs;
}

Verdict criterion3() {
  Verdict v;
  const A2Runs& runs = a2_runs();
  if (!runs.failures.empty()) v.fail(runs.failures.front());
  if (v.pass) v.detail = std::to_string(runs.runs) + " A2(1) runs at m=256, worst makespan " + runs.worst.str() + " <= 7/3";
  return v;
}

Verdict criterion4() {
  Verdict v;
  const A2Runs& runs = a2_runs();
  if (!runs.lemma_failures.empty()) {
    v.fail(std::to_string(runs.lemma_failures.size()) + " violations, first: " + runs.lemma_failures.front());
  }
  if (v.pass) v.detail = "structure monitor saw no violation over " + std::to_string(runs.runs) + " runs";
  return v;
}

// kappa * m0 covers m above the threshold, and the constructive u is valid.
Verdict criterion5() {
  Verdict v;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Rational eps = random_eps(rng);
    const a2::Params probe = a2::make_params(eps, 1, Rational(1));
    const std::size_t m = static_cast<std::size_t>(probe.threshold().ceil_long()) + rng() % 100000;
    const a2::Params p = a2::make_params(eps, m, Rational(1));
    if (p.kappa * p.m0 < m) v.fail("eps=" + eps.str() + " m=" + std::to_string(m) + ": kappa*m0 < m");
  }
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const std::size_t m = 256 + seed % 200;
    const h::Planted planted = h::gen_planted(m, {1, 3, 1}, denom_for(seed), 500 + seed);
    const a2::Params p = a2::make_params(Rational(1), m, Rational(1));
    const a2::ClassCounts n = a2::class_counts(p, planted.seq.jobs);
    const a2::UVector u = a2::valid_u(p, n);
    if (!a2::is_valid(p, a2::config_from_u(p, u), n)) v.fail("planted seed " + std::to_string(seed) + ": c(u) invalid");
    ++checked;
  }
  if (v.pass) v.detail = "500 (eps, m) samples satisfy kappa*m0 >= m; " + std::to_string(checked) + " planted u are valid";
  return v;
}

// Star compositions checked against the oracle optimum.
Verdict criterion6() {
  Verdict v;
  h::BatchConfig cfg;
  cfg.spec.algo = h::Algo::kA1Star;
  std::vector<h::Instance> instances;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t m = 2 + seed % 5;
    const std::size_t max_jobs = std::min<std::size_t>(4, 20 / m);
    instances.push_back({"planted" + std::to_string(seed),
                         h::gen_planted(m, {1, max_jobs, 1}, denom_for(seed), 600 + seed,
                                        static_cast<h::Order>(seed % 4))
                             .seq});
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t m = 2 + seed % 4;
    const std::size_t n = 1 + seed % 20;
    instances.push_back({"random" + std::to_string(seed), h::gen_random(m, n, denom_for(seed) * 5, 900 + seed)});
  }
  Rational worst;
  for (const auto& inst : instances) {
    // The oracle settles OPT for random instances; planted ones are checked too.
    JobSequence bare = inst.seq;
    const Rational opt = mps::opt_exact(bare);
    if (bare.planted_opt && opt != *bare.planted_opt) v.fail(inst.id + ": planted optimum disagrees with the oracle");
    bare.planted_opt = opt;
    const h::Row row = h::run_instance(cfg, {inst.id, bare});
    if (!row.failures.empty()) v.fail(inst.id + ": " + row.failures.front());
    if (row.ratio) worst = mps::max(worst, *row.ratio);
  }
  cfg.spec.algo = h::Algo::kA3Star;
  Rational worst3;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const h::Planted p = h::gen_planted(256, {1, 2, 1}, 12, 8800 + seed);
    const h::Row row = h::run_instance(cfg, {"a3star" + std::to_string(seed), p.seq});
    if (!row.failures.empty()) v.fail("a3star seed " + std::to_string(seed) + ": " + row.failures.front());
    if (row.ratio) worst3 = mps::max(worst3, *row.ratio);
  }
  if (v.pass) {
    v.detail = "A1*(1) worst ratio " + worst.str() + " <= 2 on 300 instances; A3*(1) at m=256 worst " + worst3.str() +
               " <= 7/3";
  }
  return v;
}

// Independent brute force on integer numerators over a common denominator.
long brute_makespan(const std::vector<long>& units, std::size_t m) {
  std::vector<long> loads(m, 0);
  long best = 0;
  for (long u : units) best += u;
  std::function<void(std::size_t)> rec = [&](std::size_t t) {
    if (t == units.size()) {
      best = std::min(best, *std::max_element(loads.begin(), loads.end()));
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      loads[j] += units[t];
      rec(t + 1);
      loads[j] -= units[t];
    }
  };
  rec(0);
  return best;
}

Verdict criterion7() {
  Verdict v;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t m = 1 + rng() % 4;
    const std::size_t n = 1 + rng() % 10;
    const long denom = 1 + static_cast<long>(rng() % 30);
    std::vector<long> units;
    std::vector<Rational> sizes;
    for (std::size_t t = 0; t < n; ++t) {
      units.push_back(1 + static_cast<long>(rng() % (2 * denom)));
      sizes.emplace_back(units.back(), denom);
    }
    const Rational expect(brute_makespan(units, m), denom);
    const Rational got = mps::opt_exact(JobSequence(m, sizes));
    if (got != expect) v.fail("trial " + std::to_string(i) + ": " + got.str() + " vs " + expect.str());
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t m = 1 + rng() % 4;
    const std::size_t n = 1 + rng() % 12;
    const std::size_t kinds = 1 + rng() % 4;
    std::vector<Rational> palette;
    for (std::size_t k = 0; k < kinds; ++k) palette.emplace_back(1 + static_cast<long>(rng() % 24), 12);
    std::vector<Rational> sizes;
    for (std::size_t t = 0; t < n; ++t) sizes.push_back(palette[rng() % kinds]);
    mps::MultisetInstance inst;
    inst.m = m;
    std::sort(sizes.begin(), sizes.end());
    for (const auto& s : sizes) {
      if (inst.classes.empty() || inst.classes.back().size != s) inst.classes.push_back({s, 0});
      ++inst.classes.back().count;
    }
    const Rational multiset = mps::opt_multiset(inst).makespan;
    const Rational exact = mps::opt_exact(JobSequence(m, sizes));
    if (multiset != exact) v.fail("multiset trial " + std::to_string(i) + ": " + multiset.str() + " vs " + exact.str());
  }
  if (v.pass) v.detail = "opt_exact matches m^n enumeration on 1000 instances; opt_multiset matches on 200";
  return v;
}

// The witness schedule of a report, recomputed from sigma.
Rational recompute_witness(const adv::Report& r) {
  mps::Schedule s(r.sigma.m);
  for (std::size_t t = 0; t < r.sigma.jobs.size(); ++t) s.assign(r.witness.at(t), r.sigma.jobs[t]);
  return s.makespan();
}

Verdict criterion8() {
  Verdict v;
  std::size_t runs = 0;
  for (std::size_t m = 3; m <= 12; ++m) {
    for (std::size_t k = 1; k <= m / 3; ++k) {
      mps::LaneSet lanes = adv::list_victims(m, k);
      const adv::Report r = adv::lb1_run(m, lanes);
      const std::string tag = "m=" + std::to_string(m) + " k=" + std::to_string(k);
      if (r.forced_makespan < Rational(4, 3)) v.fail(tag + ": forced only " + r.forced_makespan.str());
      if (recompute_witness(r) != Rational(1)) v.fail(tag + ": witness makespan " + recompute_witness(r).str());
      ++runs;
    }
  }
  if (v.pass) v.detail = std::to_string(runs) + " List victims forced to >= 4/3 against a witness of makespan 1";
  return v;
}

std::size_t direct_lb2_count(std::size_t machines, std::size_t hh) {
  // Every vector in {0..machines}^(2h+1), filtered by both constraints.
  const std::size_t len = 2 * hh + 1;
  std::vector<std::size_t> vec(len, 0);
  std::size_t count = 0;
  while (true) {
    std::size_t sum = 0;
    std::size_t weighted = 0;
    for (std::size_t i = 0; i < len; ++i) {
      sum += vec[i];
      weighted += vec[i] * (i == 2 * hh ? 4 * hh : i);
    }
    if (sum == machines && weighted == machines * hh) ++count;
    std::size_t i = 0;
    while (i < len && vec[i] == machines) vec[i++] = 0;
    if (i == len) break;
    ++vec[i];
  }
  return count;
}

Verdict criterion9() {
  Verdict v;
  const Rational eps(1, 4);
  std::size_t runs = 0;
  for (std::size_t m : {4u, 5u, 6u, 8u}) {
    const adv::Lb2Setup setup = adv::lb2_setup(m, eps);
    const std::size_t direct = direct_lb2_count(setup.machines, setup.h);
    if (adv::lb2_universe_size(setup.machines, setup.h) != direct) v.fail("m=" + std::to_string(m) + ": |M| mismatch");
    for (int kind = 0; kind < 4; ++kind) {
      mps::LaneSet lanes;
      std::vector<std::size_t> order(m);
      for (std::size_t j = 0; j < m; ++j) order[j] = kind == 3 ? m - 1 - j : j;
      if (kind == 0 || kind == 3) lanes.push_back(std::make_unique<adv::ListLane>(m, order));
      if (kind == 1) lanes.push_back(std::make_unique<adv::RoundRobinLane>(m));
      if (kind == 2) lanes.push_back(std::make_unique<adv::RandomGreedyLane>(m, 11 * m));
      const adv::Report r = adv::lb2_run(m, eps, lanes);
      const std::string tag = "m=" + std::to_string(m) + " victim " + std::to_string(kind);
      if (r.forced_makespan < Rational(5, 4)) v.fail(tag + ": forced only " + r.forced_makespan.str());
      if (recompute_witness(r) != Rational(1)) v.fail(tag + ": witness makespan " + recompute_witness(r).str());
      ++runs;
    }
  }
  if (v.pass) v.detail = std::to_string(runs) + " single-lane victims forced to >= 5/4; |M| matches enumeration";
  return v;
}

Verdict criterion10() {
  Verdict v;
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const Rational eps = random_eps(rng);
    const Rational T(1 + static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 3));
    const a2::Params p = a2::make_params(eps, 1000, T);
    const Rational e = p.eps_prime;
    const std::string tag = "eps=" + eps.str();
    if (p.a.front() != (Rational(1, 3) + Rational(2) * e) * T) v.fail(tag + ": a_1");
    if (p.b[p.l_size() - 2] != (Rational(1, 2) + e) * T) v.fail(tag + ": b_(l-1)");
    if (p.b.back() != (Rational(2, 3) + Rational(4) * e) * T) v.fail(tag + ": b_l");
    if (p.lower(1) != p.small_limit()) v.fail(tag + ": small limit");
    for (std::size_t c = 1; c <= p.classes(); ++c) {
      if (!(p.lower(c) < p.upper(c))) v.fail(tag + ": empty class " + std::to_string(c));
      if (c > 1 && p.lower(c) != p.upper(c - 1)) v.fail(tag + ": gap before class " + std::to_string(c));
    }
    if (p.top() != (Rational(1) + Rational(2) * e) * T) v.fail(tag + ": top boundary");
  }
  if (v.pass) v.detail = "class boundaries contiguous and identities exact for 50 random eps";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
