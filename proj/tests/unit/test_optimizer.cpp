// Copyright 2026 The qgadget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qgadget/optimizer.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "test_util.hpp"

using namespace qgadget;

namespace {

double bowl(const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * (x[i] - 0.5 * i) * (x[i] - 0.5 * i);
    return s;
}

double rosenbrock(const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

double double_well(const std::vector<double>& x) { return std::pow(x[0] * x[0] - 1.0, 2) + 0.3 * x[0]; }

TrainConfig small_config(std::uint64_t seed, int niter = 3) {
    TrainConfig cfg;
    cfg.cutoff = CutoffDim(8);
    cfg.hopper.niter = niter;
    cfg.hopper.seed = seed;
    cfg.hopper.max_local_iters = 60;
    cfg.pnr = pnr_pattern({1});
    return cfg;
}

}  // namespace

TEST(Loss, PerfectPreparationAndImpossibleHerald) {
    const CutoffDim c(8);
    LossConfig lc;
    lc.architecture = Architecture::TwoMode;
    lc.target = vacuum(1, c);
    lc.cutoff = c;
    lc.pnr = pnr_pattern({0});
    const std::vector<double> zero(10, 0.0);
    EXPECT_DOUBLE_EQ(loss(zero, lc), -1.0);
    lc.handle = LossHandle::FidProb;
    EXPECT_DOUBLE_EQ(loss(zero, lc), -2.0);

    lc.pnr = pnr_pattern({2});
    const auto t = loss_terms(zero, lc);
    EXPECT_TRUE(t.zero_norm);
    EXPECT_DOUBLE_EQ(t.value, lc.penalty_weight);
}

TEST(Loss, ProbabilityHandleRewardsProbability) {
    std::mt19937_64 rng(3);
    LossConfig lc;
    lc.architecture = Architecture::ThreeMode;
    lc.cutoff = CutoffDim(10);
    lc.target = weak_cubic_state(0.3, lc.cutoff);
    for (int draw = 0; draw < 5; ++draw) {
        const auto x = random_initial_point(Architecture::ThreeMode, rng);
        lc.handle = LossHandle::FidOnly;
        const auto a = loss_terms(x, lc);
        lc.handle = LossHandle::FidProb;
        const auto b = loss_terms(x, lc);
        EXPECT_NEAR(b.value - a.value, -a.probability, 1e-15);
        EXPECT_GE(a.penalty, 0.0);
        EXPECT_GE(a.fidelity, 0.0);
        EXPECT_LE(a.fidelity, 1.0 + 1e-12);
    }
}

TEST(Loss, PenaltyGrowsWithLeakage) {
    LossConfig lc;
    lc.architecture = Architecture::TwoMode;
    lc.cutoff = CutoffDim(8);
    lc.target = vacuum(1, lc.cutoff);
    lc.pnr = pnr_pattern({1});
    auto x = std::vector<double>(10, 0.0);
    x[4] = 0.5;  // d0
    x[8] = 0.7;  // theta
    const double small = loss_terms(x, lc).penalty;
    x[4] = 2.5;
    const double large = loss_terms(x, lc).penalty;
    EXPECT_GT(large, small);
    EXPECT_GT(large, 1.0);
}

TEST(LocalMinimize, QuadraticBowl) {
    const auto r = local_minimize(bowl, {3.0, -2.0, 1.0, 4.0});
    ASSERT_TRUE(r.converged);
    for (std::size_t i = 0; i < r.x.size(); ++i) EXPECT_NEAR(r.x[i], 0.5 * i, 1e-5);
    EXPECT_LT(r.f, 1e-9);
}

TEST(LocalMinimize, Rosenbrock) {
    LocalOptions opt;
    opt.max_iters = 2000;
    opt.tol = 1e-14;
    opt.gtol = 1e-8;
    const auto r = local_minimize(rosenbrock, {-1.2, 1.0}, opt);
    EXPECT_NEAR(r.x[0], 1.0, 1e-4);
    EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(LocalMinimize, StartingAtTheMinimumStaysThere) {
    const std::vector<double> x0{0.0, 0.5, 1.0};
    const auto r = local_minimize(bowl, x0);
    EXPECT_EQ(r.x, x0);
    EXPECT_EQ(r.f, 0.0);
}

TEST(LocalMinimize, NonFiniteObjectiveIsReported) {
    const Objective bad = [](const std::vector<double>&) { return std::numeric_limits<double>::quiet_NaN(); };
    EXPECT_TRUE(test::throws_code([&] { local_minimize(bad, {0.0}); }, Errc::NonFiniteLoss));
}

TEST(Basinhopping, ZeroHopsIsALocalSearch) {
    HopperConfig cfg;
    cfg.niter = 0;
    const std::vector<double> x0{1.0, 2.0};
    const auto hop = basinhopping(rosenbrock, x0, cfg);
    const auto loc = local_minimize(rosenbrock, x0, {cfg.local_tol, cfg.local_gtol, cfg.max_local_iters});
    EXPECT_EQ(hop.x, loc.x);
    EXPECT_EQ(hop.f, loc.f);
    EXPECT_EQ(hop.trace.size(), 1u);
}

TEST(Basinhopping, EscapesTheShallowWell) {
    HopperConfig cfg;
    cfg.niter = 20;
    cfg.seed = 0;
    const auto hop = basinhopping(double_well, {1.0}, cfg);
    // Grid scan for the global minimum.
    double best_x = -3.0;
    for (double x = -3.0; x <= 3.0; x += 1e-5) {
        if (double_well({x}) < double_well({best_x})) best_x = x;
    }
    EXPECT_NEAR(hop.x[0], best_x, 1e-4);
    EXPECT_NEAR(hop.x[0], -1.04, 0.01);
}

TEST(Basinhopping, TraceIsNonIncreasingAndDeterministic) {
    HopperConfig cfg;
    cfg.niter = 15;
    cfg.seed = 5;
    cfg.temperature = 2.0;
    const auto a = basinhopping(double_well, {1.3}, cfg);
    const auto b = basinhopping(double_well, {1.3}, cfg);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.trace.size(), 16u);
    for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1]);
    EXPECT_EQ(a.f, a.trace.back());
}

TEST(Basinhopping, ColdWalkerIsGreedy) {
    HopperConfig cfg;
    cfg.niter = 10;
    cfg.seed = 2;
    cfg.step_size = 2.0;
    cfg.temperature = 1e-12;
    // The extra test only sees minima that already passed Metropolis.
    auto accepted_values = [&](double temperature) {
        cfg.temperature = temperature;
        std::vector<double> seen;
        std::mt19937_64 rng(cfg.seed);
        basinhopping(double_well, {-1.0}, cfg, rng, [&](const std::vector<double>&, double f) {
            seen.push_back(f);
            return true;
        });
        return seen;
    };
    const auto cold = accepted_values(1e-12);
    for (std::size_t i = 1; i < cold.size(); ++i) EXPECT_LE(cold[i], cold[i - 1] + 1e-10);
    const auto hot = accepted_values(1e6);
    bool uphill = false;
    for (std::size_t i = 1; i < hot.size(); ++i) uphill = uphill || hot[i] > hot[i - 1] + 1e-3;
    EXPECT_TRUE(uphill);
}

TEST(Basinhopping, AcceptTestAndStopBelow) {
    HopperConfig cfg;
    cfg.niter = 20;
    cfg.seed = 11;
    std::mt19937_64 rng(cfg.seed);
    const auto kept = basinhopping(double_well, {1.0}, cfg, rng,
                                   [](const std::vector<double>& x, double) { return x[0] > 0.0; });
    EXPECT_GT(kept.x[0], 0.0);

    cfg.stop_below = 10.0;
    const auto early = basinhopping(double_well, {1.0}, cfg);
    EXPECT_EQ(early.trace.size(), 1u);

    cfg.step_size = 0.0;
    EXPECT_TRUE(test::throws_code([&] { basinhopping(double_well, {1.0}, cfg); }, Errc::InvalidArgument));
}

TEST(Training, RunStreamsAreIndependentAndRepeatable) {
    auto a = run_rng(7, 0);
    auto b = run_rng(7, 0);
    auto c = run_rng(7, 1);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
}

TEST(Training, SmallTwoModeRunIsDeterministicAndPenalized) {
    const auto target = weak_cubic_state(0.2, CutoffDim(8));
    const auto cfg = small_config(4);
    const auto a = train_gadget(Architecture::TwoMode, target, cfg);
    const auto b = train_gadget(Architecture::TwoMode, target, cfg);
    EXPECT_EQ(a.params, b.params);
    EXPECT_EQ(a.fidelity, b.fidelity);
    EXPECT_GT(a.fidelity, 0.9);
    EXPECT_GE(a.probability, cfg.min_probability);
    EXPECT_LT(std::abs(1.0 - a.norm_out), 0.01);
    for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1]);
    // The summary matches a fresh evaluation of the stored circuit.
    const auto r = run_gadget(a.params, cfg.cutoff);
    EXPECT_NEAR(fidelity(*r.state, target), a.fidelity, 1e-12);
    EXPECT_NEAR(r.probability, a.probability, 1e-12);
}

TEST(Training, TargetShapeIsChecked) {
    const auto cfg = small_config(1);
    EXPECT_TRUE(test::throws_code([&] { train_gadget(Architecture::TwoMode, vacuum(1, CutoffDim(9)), cfg); },
                                  Errc::ShapeMismatch));
    auto bad = cfg;
    bad.pnr = pnr_pattern({1, 1});
    EXPECT_TRUE(test::throws_code([&] { train_gadget(Architecture::TwoMode, vacuum(1, CutoffDim(8)), bad); },
                                  Errc::LengthMismatch));
}

TEST(ProbOpt, SingleBatchIsOneTraining) {
    const auto target = weak_cubic_state(0.2, CutoffDim(8));
    auto cfg = small_config(9, 2);
    const auto po = prob_opt(Architecture::TwoMode, target, cfg, {1, 1e-3, 1});
    cfg.stage2 = 0;
    const auto single = train_gadget(Architecture::TwoMode, target, cfg);
    EXPECT_EQ(po.params, single.params);
    EXPECT_EQ(po.probability, single.probability);
    EXPECT_TRUE(test::throws_code([&] { prob_opt(Architecture::TwoMode, target, cfg, {0, 1e-3, 1}); },
                                  Errc::InvalidArgument));
}

TEST(ProbOpt, MoreRunsNeverLowerTheProbability) {
    const auto target = weak_cubic_state(0.2, CutoffDim(8));
    const auto cfg = small_config(21, 1);
    const double inf = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (int nbh = 1; nbh <= 3; ++nbh) {
        const auto r = prob_opt(Architecture::TwoMode, target, cfg, {nbh, inf, 1});
        EXPECT_GE(r.probability, last);
        last = r.probability;
    }
    // The fidelity band keeps the pick close to the best fidelity.
    const auto banded = prob_opt(Architecture::TwoMode, target, cfg, {3, 1e-3, 2});
    for (int i = 0; i < 3; ++i) {
        auto c = cfg;
        c.run_index = static_cast<std::uint64_t>(i);
        EXPECT_GE(banded.fidelity, train_gadget(Architecture::TwoMode, target, c).fidelity - 1e-3);
    }
}

TEST(PnrSweep, RowsAreSortedByCounts) {
    const auto target = weak_cubic_state(0.2, CutoffDim(8));
    const auto cfg = small_config(3, 0);
    const auto rows = pnr_sweep(Architecture::TwoMode, target, {pnr_pattern({2}), pnr_pattern({0}), pnr_pattern({1})},
                                cfg, 2);
    ASSERT_EQ(rows.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(rows[i].pattern[0].count, i);
        EXPECT_EQ(rows[i].result.params.pnr[0].count, i);
    }
}

TEST(Persistence, TrainedResultRoundTrip) {
    const auto target = weak_cubic_state(0.2, CutoffDim(8));
    const auto r = train_gadget(Architecture::TwoMode, target, small_config(6, 0));
    const auto back = trained_from_json(nlohmann::json::parse(trained_to_json(r).dump()));
    EXPECT_EQ(back.params, r.params);
    EXPECT_EQ(back.fidelity, r.fidelity);
    EXPECT_EQ(back.probability, r.probability);
    EXPECT_EQ(back.trace, r.trace);
}

TEST(Parallel, ResultsKeepIndexOrder) {
    const auto out = parallel_map(50, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
    std::atomic<int> calls{0};
    EXPECT_THROW(parallel_map(10, 3,
                              [&](std::size_t i) {
                                  ++calls;
                                  if (i == 4) throw std::runtime_error("boom");
                                  return 0;
                              }),
                 std::runtime_error);
    EXPECT_EQ(calls.load(), 10);
}
