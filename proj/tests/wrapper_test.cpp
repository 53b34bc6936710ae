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

#include "mps/wrapper.hpp"

#include <gtest/gtest.h>

#include "mps/a1.hpp"
#include "mps/harness.hpp"
#include "mps/oracle.hpp"

namespace mps::wrapper {
namespace {

/// Inner lane that puts every job on its machine 0.
class Stacker : public OnlineScheduler {
 public:
  explicit Stacker(std::size_t m) : s_(m) {}
  Placement place(const Job& j) override {
    s_.assign(0, j);
    return Placement::to(0);
  }
  const Schedule& schedule() const override { return s_; }
  std::string describe() const override { return "stacker"; }

 private:
  Schedule s_;
};

/// Inner lane with no rule for anything.
class Refuser : public Stacker {
 public:
  using Stacker::Stacker;
  Placement place(const Job&) override { return Placement::none(); }
};

template <class L>
InnerFactory single() {
  return [](const EpochContext& ctx) -> std::unique_ptr<LaneFamily> {
    auto make = [m = ctx.m] { return std::make_unique<L>(m); };
    return std::make_unique<SingleLaneFamily<decltype(make)>>("inner", make);
  };
}

struct Recorder {
  std::vector<nlohmann::json> events;
  TraceSink sink() {
    return [this](const nlohmann::json& e) { events.push_back(e); };
  }
  std::vector<nlohmann::json> of(const std::string& kind) const {
    std::vector<nlohmann::json> out;
    for (const auto& e : events) {
      if (e["event"] == kind) out.push_back(e);
    }
    return out;
  }
};

std::vector<std::string> strs(std::initializer_list<Rational> xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(x.str());
  return out;
}

TEST(AStarParams, Examples) {
  const Params a = astar_params(Rational(4, 3), Rational(1));
  EXPECT_EQ(a.step, Rational(1, 4));
  EXPECT_EQ(a.h, 10);
  const Params b = astar_params(Rational(1), Rational(1));
  EXPECT_EQ(b.step, Rational(1, 3));
  EXPECT_EQ(b.h, 7);
  // Inner slack eps/2 composed with A*(eps/2): step eps/(6 rho).
  const Params c = astar_params(Rational(3, 2), Rational(1, 2));
  EXPECT_EQ(c.step, Rational(1, 9));
  EXPECT_EQ(c.h, ceil_log(Rational(19), Rational(10, 9)));
  EXPECT_EQ(c.h, 28);
  EXPECT_THROW(astar_params(Rational(1, 2), Rational(1)), std::invalid_argument);
  EXPECT_THROW(astar_params(Rational(1), Rational(0)), std::invalid_argument);
  EXPECT_THROW(raw_params(Rational(1), Rational(1), 0), std::invalid_argument);
}

TEST(AStarInit, GeometricGuesses) {
  Recorder rec;
  const JobSequence seq(4, {Rational(2)});
  const Result r = run_astar(raw_params(Rational(2), Rational(1, 4), 3), seq, single<Stacker>(), rec.sink());
  EXPECT_EQ(rec.of("init").at(0)["guesses"], strs({Rational(2), Rational(5, 2), Rational(25, 8)}));
  EXPECT_EQ(r.lanes, 3u);
  EXPECT_EQ(r.adjustments, 0u);
}

TEST(AStarInit, SingleGuessAndSecondExample) {
  Recorder one;
  run_astar(raw_params(Rational(1), Rational(1, 3), 1), JobSequence(2, {Rational(3)}), single<Stacker>(), one.sink());
  EXPECT_EQ(one.of("init").at(0)["guesses"], strs({Rational(3)}));
  Recorder two;
  run_astar(raw_params(Rational(1), Rational(1, 3), 2), JobSequence(2, {Rational(1)}), single<Stacker>(), two.sink());
  EXPECT_EQ(two.of("init").at(0)["guesses"], strs({Rational(1), Rational(4, 3)}));
}

TEST(Failure, JobLargerThanGuess) {
  Recorder rec;
  const Result r = run_astar(raw_params(Rational(1), Rational(1), 1), JobSequence(2, {Rational(1), Rational(2)}),
                             single<Stacker>(), rec.sink());
  const auto fails = rec.of("fail");
  ASSERT_EQ(fails.size(), 1u);
  EXPECT_EQ(fails[0]["reason"], "iii");
  EXPECT_EQ(fails[0]["t"], 2);
  // (1 + 1) * max{1, 2, 3/2} = 4.
  EXPECT_EQ(r.guesses, (std::vector<Rational>{Rational(4)}));
}

TEST(Failure, MeanLoadAboveGuess) {
  Recorder rec;
  run_astar(raw_params(Rational(3), Rational(1), 1), JobSequence(2, {Rational(1), Rational(1, 2), Rational(1, 2),
                                                                      Rational(1)}),
            single<Stacker>(), rec.sink());
  const auto fails = rec.of("fail");
  ASSERT_FALSE(fails.empty());
  // Prefix sum 3 after job 4 puts 3/2 above the guess 1.
  EXPECT_EQ(fails[0]["t"], 4);
  EXPECT_EQ(fails[0]["reason"], "iii");
}

TEST(Failure, OverloadedMachine) {
  Recorder rec;
  run_astar(raw_params(Rational(1), Rational(1), 1), JobSequence(2, {Rational(1), Rational(1)}), single<Stacker>(),
            rec.sink());
  const auto fails = rec.of("fail");
  ASSERT_FALSE(fails.empty());
  EXPECT_EQ(fails[0]["t"], 2);
  EXPECT_EQ(fails[0]["reason"], "ii");
}

TEST(Failure, InnerOverloadWithA1) {
  // A1(1) at T = 1/2 with the empty count vector: the 1/2 job falls back to
  // machine 0 and the small 1/4 job ties onto it, giving load 3/4 > 1/2.
  Recorder rec;
  auto factory = [](const EpochContext& ctx) -> std::unique_ptr<LaneFamily> {
    return std::make_unique<a1::Family>(Rational(1), ctx.m, ctx.assumed_opt, a1::Targeted{{0, 0}});
  };
  run_astar(raw_params(Rational(1), Rational(1), 1), JobSequence(2, {Rational(1, 2), Rational(1, 4)}), factory,
            rec.sink());
  const auto fails = rec.of("fail");
  ASSERT_FALSE(fails.empty());
  EXPECT_EQ(fails[0]["t"], 2);
  EXPECT_EQ(fails[0]["reason"], "ii");
}

TEST(Failure, NoRule) {
  Recorder rec;
  run_astar(raw_params(Rational(1), Rational(1), 1), JobSequence(2, {Rational(1)}), single<Refuser>(), rec.sink());
  const auto fails = rec.of("fail");
  ASSERT_FALSE(fails.empty());
  EXPECT_EQ(fails[0]["reason"], "i");
}

TEST(Adjust, SmallestGuessMovesToTop) {
  Recorder rec;
  const JobSequence seq(2, {Rational(1), Rational(1), Rational(1)});
  AStar astar(raw_params(Rational(1), Rational(1), 2), 2, single<Stacker>(), seq.jobs, rec.sink());
  astar.step();
  ASSERT_EQ(astar.groups().size(), 2u);
  EXPECT_EQ(astar.groups()[0].guess, Rational(1));
  EXPECT_EQ(astar.groups()[1].guess, Rational(2));
  astar.step();
  // Guess 1 fails (load 2 > 1); it becomes 2 * max{2, 1, 1} = 4.
  EXPECT_EQ(astar.groups()[0].guess, Rational(2));
  EXPECT_EQ(astar.groups()[1].guess, Rational(4));
  EXPECT_EQ(astar.groups()[1].variable, 0u);
  EXPECT_EQ(astar.groups()[1].epoch_start, 2u);
  const auto adjust = rec.of("adjust");
  ASSERT_EQ(adjust.size(), 1u);
  EXPECT_EQ(adjust[0]["from"], "1/1");
  EXPECT_EQ(adjust[0]["to"], "4/1");
  EXPECT_EQ(rec.of("renumber").size(), 1u);
  astar.step();
  // The failed lane put job 2 on machine 1; the restarted epoch binds its
  // machine 0 there, so job 3 follows. (Guess 2 fails on job 3 and moves up.)
  const GuessGroup* moved = nullptr;
  for (const auto& g : astar.groups()) {
    if (g.variable == 0) moved = &g;
  }
  ASSERT_NE(moved, nullptr);
  const auto& lane = moved->lanes[0];
  EXPECT_EQ(lane.physical.load(0), Rational(1));
  EXPECT_EQ(lane.physical.load(1), Rational(2));
  EXPECT_FALSE(lane.failed);
  EXPECT_TRUE(astar.done());
  const Result r = astar.finish();
  EXPECT_EQ(r.adjustments_per_variable, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(r.guesses, (std::vector<Rational>{Rational(4), Rational(8)}));
}

TEST(Adjust, FullCascade) {
  Recorder rec;
  const Result r = run_astar(raw_params(Rational(1), Rational(1, 2), 3), JobSequence(3, {Rational(1), Rational(5)}),
                             single<Stacker>(), rec.sink());
  // Every guess fails (iii) on the 5; all three are adjusted.
  EXPECT_EQ(rec.of("fail").size(), 3u);
  EXPECT_EQ(rec.of("adjust").size(), 3u);
  EXPECT_EQ(r.guesses, (std::vector<Rational>{Rational(15, 2), Rational(45, 4), Rational(135, 8)}));
  EXPECT_TRUE(r.smallest_has_live_lane);
}

TEST(Finish, EmptySequence) {
  const Result r = run_astar(raw_params(Rational(1), Rational(1), 2), JobSequence(3, {}), single<Stacker>());
  EXPECT_EQ(r.best.makespan(), Rational(0));
  EXPECT_TRUE(r.guesses.empty());
}

TEST(Finish, PicksBestLaneAcrossGuesses) {
  // Guess 2 never fails, so its stacked schedule (2) competes with the
  // failed guess-1 lane that spread the jobs (1).
  const Result r = run_astar(raw_params(Rational(1), Rational(1), 2), JobSequence(2, {Rational(1), Rational(1)}),
                             single<Stacker>());
  EXPECT_EQ(r.best.makespan(), Rational(1));
}

TEST(Guarantee, A1StarOnPlantedAndRandom) {
  harness::AlgoSpec spec;
  spec.algo = harness::Algo::kA1Star;
  spec.eps = Rational(1);
  const Params p = harness::star_params(spec);
  EXPECT_EQ(p.step, Rational(1, 9));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto planted = harness::gen_planted(2 + seed % 4, {1, 3, 1}, 6, seed, harness::Order::kShuffle);
    const auto out = harness::run_algorithm(spec, planted.seq);
    EXPECT_LE(out.best.makespan(), Rational(2));
    EXPECT_LE(out.guesses.front(), (Rational(1) + p.step));
    EXPECT_TRUE(out.smallest_guess_live);
    const JobSequence rnd = harness::gen_random(2 + seed % 3, 8, 5, seed);
    const Rational opt = opt_exact(rnd);
    const auto r2 = harness::run_algorithm(spec, rnd);
    EXPECT_LE(r2.best.makespan(), Rational(2) * opt);
    EXPECT_LE(r2.guesses.front(), (Rational(1) + p.step) * opt);
    EXPECT_TRUE(r2.smallest_guess_live);
  }
}

TEST(Guarantee, GuessesStaySpacedAndGrow) {
  harness::AlgoSpec spec;
  spec.algo = harness::Algo::kA1Star;
  const Params p = harness::star_params(spec);
  const JobSequence seq = harness::gen_random(3, 14, 7, 4);
  AStar astar(p, seq.m, harness::star_factory(spec), seq.jobs);
  while (!astar.done()) {
    astar.step();
    for (std::size_t g = 1; g < astar.groups().size(); ++g) {
      ASSERT_GE(astar.groups()[g].guess, astar.groups()[g - 1].guess * (Rational(1) + p.step));
    }
    // One lane per guess: a failing smallest guess is adjusted at once.
    ASSERT_GE(astar.groups().front().guess * Rational(static_cast<long>(seq.m)), astar.prefix_sum());
  }
}

}  // namespace
}  // namespace mps::wrapper
