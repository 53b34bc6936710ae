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

// Command-line front end: gen, run, oracle, adversary, params.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mps/a1.hpp"
#include "mps/a2.hpp"
#include "mps/adversary.hpp"
#include "mps/harness.hpp"
#include "mps/oracle.hpp"
#include "mps/wrapper.hpp"

namespace {

using mps::Rational;
using nlohmann::json;

/// A single sequence object, or one sequence object per line.
std::vector<mps::harness::Instance> read_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<mps::harness::Instance> out;
  auto add = [&](const json& j) {
    std::string id = j.contains("id") ? j["id"].get<std::string>() : std::to_string(out.size());
    out.push_back({id, mps::job_sequence_from_json(j)});
  };
  try {
    add(json::parse(text));
    return out;
  } catch (const json::parse_error&) {
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    add(json::parse(line));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct GenArgs {
  std::size_t m = 2;
  std::size_t count = 1;
  long denom = 12;
  std::uint64_t seed = 1;
  std::string order = "shuffle";
  std::size_t min_jobs = 1;
  std::size_t max_jobs = 4;
  std::size_t min_units = 1;
  std::size_t random_n = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  std::ostringstream os;
  for (std::size_t i = 0; i < a.count; ++i) {
    const std::uint64_t seed = a.seed + i;
    json j;
    if (a.random_n > 0) {
      j = mps::to_json(mps::harness::gen_random(a.m, a.random_n, a.denom, seed));
    } else {
      const auto planted = mps::harness::gen_planted(a.m, {a.min_jobs, a.max_jobs, a.min_units}, a.denom, seed,
                                                     mps::harness::parse_order(a.order));
      if (!mps::harness::certify_planted(planted)) throw std::logic_error("gen: certificate check failed");
      j = mps::to_json(planted.seq);
      j["witness"] = json::array();
      for (auto w : planted.witness) j["witness"].push_back(w + 1);
    }
    if (a.count > 1) j["id"] = "s" + std::to_string(seed);
    os << j.dump() << "\n";
  }
  write_text(a.out, os.str());
  return 0;
}

struct RunArgs {
  std::string algo = "a1star";
  std::string epsilon = "1";
  std::string assumed_opt;
  std::string mode = "targeted";
  std::string input;
  std::string trace;
  std::string report;
  std::string csv;
  std::size_t lane_cap = mps::default_lane_cap();
  bool check = false;
  bool check_lemmas = false;
  bool timing = false;
};

int cmd_run(const RunArgs& a) {
  mps::harness::BatchConfig cfg;
  cfg.spec.algo = mps::harness::parse_algo(a.algo);
  cfg.spec.eps = Rational::parse(a.epsilon);
  if (!a.assumed_opt.empty()) cfg.spec.assumed_opt = Rational::parse(a.assumed_opt);
  if (a.mode != "full" && a.mode != "targeted") throw std::invalid_argument("--mode must be full or targeted");
  cfg.spec.mode = a.mode == "full" ? mps::a2::Selection::kFull : mps::a2::Selection::kTargeted;
  cfg.spec.lane_cap = a.lane_cap;
  cfg.spec.check_lemmas = a.check_lemmas;
  cfg.timing = a.timing;
  const auto instances = read_instances(a.input);

  if (!a.trace.empty()) {
    if (!mps::harness::is_star(cfg.spec.algo)) throw std::invalid_argument("--trace applies to a1star and a3star");
    std::ofstream trace(a.trace);
    if (!trace) throw std::runtime_error("cannot write " + a.trace);
    for (const auto& inst : instances) {
      mps::harness::run_algorithm(cfg.spec, inst.seq, [&](const json& e) {
        json tagged = e;
        tagged["instance_id"] = inst.id;
        trace << tagged.dump() << "\n";
      });
    }
  }

  std::ofstream jsonl_file;
  std::ofstream csv_file;
  if (!a.report.empty()) jsonl_file.open(a.report);
  if (!a.csv.empty()) csv_file.open(a.csv);
  const bool stdout_report = a.report.empty() && a.csv.empty();
  const auto summary = mps::harness::run_batch(cfg, instances, a.report.empty() ? (stdout_report ? &std::cout : nullptr) : &jsonl_file,
                                               a.csv.empty() ? nullptr : &csv_file);
  json s{{"instances", summary.instances},
         {"failed", summary.failed},
         {"worst_ratio", summary.worst_ratio ? json(summary.worst_ratio->str()) : json()}};
  (stdout_report ? std::cerr : std::cout) << s.dump() << "\n";
  return a.check && summary.failed > 0 ? 1 : 0;
}

int cmd_oracle(const std::string& input, std::size_t cap) {
  const auto seq = mps::load_job_sequence(input);
  std::cout << json{{"opt", mps::opt_exact(seq, cap).str()}}.dump() << "\n";
  return 0;
}

struct AdvArgs {
  std::string theorem = "lb1";
  std::size_t m = 3;
  std::string epsilon = "1/4";
  std::string victim = "list:1";
  std::string out;
  bool early_stop = false;
};

int cmd_adversary(const AdvArgs& a) {
  auto lanes = mps::adversary::parse_victims(a.victim, a.m);
  mps::adversary::Options options{a.early_stop};
  mps::adversary::Report r;
  if (a.theorem == "lb1") {
    r = mps::adversary::lb1_run(a.m, lanes, options);
  } else if (a.theorem == "lb2") {
    r = mps::adversary::lb2_run(a.m, Rational::parse(a.epsilon), lanes, options);
  } else {
    throw std::invalid_argument("--theorem must be lb1 or lb2");
  }
  const json j = mps::adversary::to_json(r);
  write_text(a.out, j.dump(2) + "\n");
  return j["forced_ratio_holds"].get<bool>() ? 0 : 1;
}

int cmd_params(const std::string& algo_name, const std::string& epsilon, std::size_t m, const std::string& t) {
  const Rational eps = Rational::parse(epsilon);
  const Rational T = t.empty() ? Rational(1) : Rational::parse(t);
  const auto algo = mps::harness::parse_algo(algo_name);
  json j;
  auto a1_json = [&](const Rational& e) {
    const auto part = mps::a1::make_partition(e, T);
    json p{{"epsilon", e.str()}, {"eps_prime", part.eps_prime.str()}, {"l", part.l},
           {"count_bound", mps::a1::count_bound(part, m)},
           {"lanes", mps::a1::Family::full_size_closed_form(mps::a1::count_bound(part, m), part.l).get_str()}};
    for (const auto& u : part.upper) p["upper"].push_back(u.str());
    return p;
  };
  mps::harness::AlgoSpec spec;
  spec.algo = algo;
  spec.eps = eps;
  switch (algo) {
    case mps::harness::Algo::kList: j = {{"algo", "list"}, {"lanes", "1"}}; break;
    case mps::harness::Algo::kA1: j = a1_json(eps); break;
    case mps::harness::Algo::kA2: j = mps::a2::to_json(mps::a2::make_params(eps, m, T)); break;
    case mps::harness::Algo::kA3:
      j = mps::a2::a3_uses_a1(eps, m) ? json{{"dispatch", "a1"}, {"a1", a1_json(mps::a2::a3_fallback_eps())}}
                                       : json{{"dispatch", "a2"}, {"a2", mps::a2::to_json(mps::a2::make_params(eps, m, T))}};
      break;
    case mps::harness::Algo::kA1Star:
    case mps::harness::Algo::kA3Star: {
      const auto w = mps::harness::star_params(spec);
      j = {{"rho", w.rho.str()}, {"outer_eps", w.eps.str()}, {"step", w.step.str()}, {"h", w.h},
           {"inner_eps", (eps / Rational(2)).str()}};
      break;
    }
  }
  j["m"] = m;
  j["total_lanes"] = mps::harness::logical_lanes(spec, m);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online makespan minimization with parallel schedules"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate instances with a planted optimum of 1");
  g->add_option("--m", gen.m, "Machines")->required();
  g->add_option("--count", gen.count, "Number of instances (JSONL when > 1)");
  g->add_option("--denom", gen.denom, "Job sizes are multiples of 1/denom");
  g->add_option("--seed", gen.seed, "Seed of the first instance");
  g->add_option("--order", gen.order, "shuffle|largest|smallest|interleaved");
  g->add_option("--min-jobs", gen.min_jobs, "Fewest jobs per hidden machine");
  g->add_option("--max-jobs", gen.max_jobs, "Most jobs per hidden machine");
  g->add_option("--min-units", gen.min_units, "Smallest job in units of 1/denom");
  g->add_option("--random", gen.random_n, "Emit N uniformly random jobs instead (no planted optimum)");
  g->add_option("--out", gen.out, "Output file (default stdout)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run an algorithm on one or more sequences");
  r->add_option("--algo", run.algo, "list|a1|a2|a3|a1star|a3star");
  r->add_option("--epsilon", run.epsilon, "Accuracy, a rational in (0,1]");
  r->add_option("--assumed-opt", run.assumed_opt, "Known optimum for a1|a2|a3 (default: instance opt)");
  r->add_option("--mode", run.mode, "full|targeted");
  r->add_option("--input", run.input, "Sequence JSON or JSONL")->required();
  r->add_option("--trace", run.trace, "JSONL trace of guess events (stars only)");
  r->add_option("--report", run.report, "JSONL report path");
  r->add_option("--csv", run.csv, "CSV summary path");
  r->add_option("--lane-cap", run.lane_cap, "Largest family that may be simulated");
  r->add_flag("--check", run.check, "Exit nonzero if any guarantee check fails");
  r->add_flag("--check-lemmas", run.check_lemmas, "Assert structural properties during the run");
  r->add_flag("--timing", run.timing, "Fill the ms column with wall time");

  std::string oracle_input;
  std::size_t oracle_cap = 24;
  auto* o = app.add_subcommand("oracle", "Exact optimum makespan");
  o->add_option("--input", oracle_input, "Sequence JSON")->required();
  o->add_option("--cap", oracle_cap, "Largest job count searched");

  AdvArgs adv;
  auto* a = app.add_subcommand("adversary", "Play a lower-bound adversary against a victim");
  a->add_option("--theorem", adv.theorem, "lb1|lb2");
  a->add_option("--m", adv.m, "Machines")->required();
  a->add_option("--epsilon", adv.epsilon, "lb2 accuracy in (0,1/4]");
  a->add_option("--victim", adv.victim, "list:K or file:strategy.json");
  a->add_option("--out", adv.out, "Report path (default stdout)");
  a->add_flag("--early-stop", adv.early_stop, "Skip the large jobs when every lane is already forced");

  std::string p_algo = "a2";
  std::string p_eps = "1";
  std::size_t p_m = 256;
  std::string p_t;
  auto* p = app.add_subcommand("params", "Dump derived parameters as JSON");
  p->add_option("--algo", p_algo, "a1|a2|a3|a1star|a3star");
  p->add_option("--epsilon", p_eps, "Accuracy");
  p->add_option("--m", p_m, "Machines");
  p->add_option("--assumed-opt", p_t, "Scale T (default 1)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return cmd_gen(gen);
    if (*r) return cmd_run(run);
    if (*o) return cmd_oracle(oracle_input, oracle_cap);
    if (*a) return cmd_adversary(adv);
    if (*p) return cmd_params(p_algo, p_eps, p_m, p_t);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
