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

#include "qgadget/metrics.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "qgadget/gadgets.hpp"
#include "qgadget/gates.hpp"
#include "qgadget/position.hpp"
#include "test_util.hpp"

using namespace qgadget;

namespace {

const double kInvTwoPi = 1.0 / (2.0 * std::numbers::pi);

GridSpec centered(int n) {
    GridSpec g;
    g.nx = n;
    g.np = n;
    return g;
}

}  // namespace

TEST(Metrics, FidelityOfFockStates) {
    const CutoffDim c(5);
    EXPECT_DOUBLE_EQ(fidelity(fock_state(2, c), fock_state(2, c)), 1.0);
    EXPECT_DOUBLE_EQ(fidelity(fock_state(2, c), fock_state(3, c)), 0.0);
    const double h = 1.0 / std::sqrt(2.0);
    const cplx coeffs[] = {h, h};
    EXPECT_NEAR(fidelity(single_mode(coeffs, c), fock_state(0, c)), 0.5, 1e-15);
}

TEST(Metrics, FidelityIsPhaseInvariantAndSymmetric) {
    std::mt19937_64 rng(17);
    const CutoffDim c(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = normalize(test::random_state(1, c, rng)).state;
        const auto b = normalize(test::random_state(1, c, rng)).state;
        StateVector rotated = b;
        rotated.amplitudes() *= std::polar(1.0, 0.37 * trial);
        EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-14);
        EXPECT_NEAR(fidelity(a, b), fidelity(a, rotated), 1e-14);
        EXPECT_GE(fidelity(a, b), 0.0);
        EXPECT_LE(fidelity(a, b), 1.0 + 1e-14);
        EXPECT_NEAR(fidelity(to_density(a), b), fidelity(a, b), 1e-14);
    }
}

TEST(Metrics, WignerParityAtOrigin) {
    GridSpec g = centered(3);  // grid points -6, 0, 6
    for (int n = 0; n < 4; ++n) {
        const auto w = wigner(fock_state(n, CutoffDim(6)), g);
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        EXPECT_NEAR(w.values(1, 1), sign * kInvTwoPi, 1e-14) << "n=" << n;
    }
}

TEST(Metrics, WignerOfVacuumIsGaussian) {
    const auto w = wigner(vacuum(1, CutoffDim(4)), centered(41));
    for (int i = 0; i < 41; i += 5) {
        for (int j = 0; j < 41; j += 7) {
            const double x = w.grid.x(i);
            const double p = w.grid.p(j);
            EXPECT_NEAR(w.values(i, j), kInvTwoPi * std::exp(-0.5 * (x * x + p * p)), 1e-14);
        }
    }
}

TEST(Metrics, WignerIntegratesToOne) {
    for (int n = 0; n < 3; ++n) {
        const auto w = wigner(fock_state(n, CutoffDim(5)));
        EXPECT_NEAR(w.integral(), 1.0, 1e-5) << "n=" << n;
    }
}

TEST(Metrics, WignerMarginalIsPositionDensity) {
    std::mt19937_64 rng(3);
    const CutoffDim c(8);
    const auto s = test::random_low_state(5, c, rng);
    GridSpec g = centered(161);
    g.p_min = -9.0;
    g.p_max = 9.0;
    const auto w = wigner(s, g);
    for (int i = 20; i < 141; i += 15) {
        const double marginal = w.values.row(i).sum() * g.dp();
        EXPECT_NEAR(marginal, std::norm(wavefunction(s, g.x(i))), 1e-6) << "x=" << g.x(i);
    }
}

TEST(Metrics, WignerMomentsOfCoherentState) {
    const CutoffDim c(30);
    const cplx alpha(0.6, -0.9);
    const auto s = apply(displace(alpha, c), vacuum(1, c));
    GridSpec g = centered(201);
    g.x_min = g.p_min = -8.0;
    g.x_max = g.p_max = 8.0;
    const auto w = wigner(s, g);
    double mx = 0.0;
    double mp = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.np; ++j) {
            mx += g.x(i) * w.values(i, j);
            mp += g.p(j) * w.values(i, j);
        }
    }
    mx *= w.cell_area();
    mp *= w.cell_area();
    // <x> = 2 Re alpha, <p> = 2 Im alpha with hbar = 2
    EXPECT_NEAR(mx, 2.0 * alpha.real(), 1e-6);
    EXPECT_NEAR(mp, 2.0 * alpha.imag(), 1e-6);
}

TEST(Metrics, WignerOverlapReproducesFidelity) {
    std::mt19937_64 rng(29);
    const CutoffDim c(6);
    GridSpec g = centered(241);
    g.x_min = g.p_min = -8.0;
    g.x_max = g.p_max = 8.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = test::random_low_state(4, c, rng);
        const auto b = test::random_low_state(4, c, rng);
        EXPECT_NEAR(wigner_overlap_fidelity(wigner(a, g), wigner(b, g)), fidelity(a, b), 1e-6);
    }
}

TEST(Metrics, NegativityOfFockStates) {
    const auto w0 = wigner(vacuum(1, CutoffDim(4)));
    const auto w1 = wigner(fock_state(1, CutoffDim(4)));
    EXPECT_EQ(negative_mass(w0), 0.0);
    EXPECT_GT(negative_mass(w1), 0.1);
    EXPECT_EQ(negative_overlap(w0, w1), 0.0);
    EXPECT_NEAR(negative_overlap(w1, w1), 1.0, 1e-12);

    const auto report = negativity_report(w1);
    EXPECT_NEAR(report.min_value, -kInvTwoPi, 1e-12);
    EXPECT_NEAR(report.min_location.first, 0.0, 1e-12);
    EXPECT_NEAR(report.min_location.second, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(report.negative_mass, negative_mass(w1));
}

TEST(Metrics, NegativeOverlapIsBoundedAndSymmetric) {
    std::mt19937_64 rng(41);
    const CutoffDim c(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = wigner(test::random_low_state(5, c, rng), centered(81));
        const auto b = wigner(test::random_low_state(5, c, rng), centered(81));
        const double ab = negative_overlap(a, b);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        EXPECT_NEAR(ab, negative_overlap(b, a), 1e-14);
    }
}

TEST(Metrics, GridMismatchIsRejected) {
    const auto a = wigner(vacuum(1, CutoffDim(4)), centered(11));
    const auto b = wigner(vacuum(1, CutoffDim(4)), centered(13));
    EXPECT_TRUE(test::throws_code([&] { wigner_overlap_fidelity(a, b); }, Errc::GridMismatch));
    EXPECT_TRUE(test::throws_code([&] { negative_overlap(a, b); }, Errc::GridMismatch));
    EXPECT_TRUE(test::throws_code([] { wigner(vacuum(2, CutoffDim(4))); }, Errc::MultiModeInput));
}

TEST(Metrics, WignerCsvHasOneRowPerPoint) {
    const auto w = wigner(vacuum(1, CutoffDim(3)), centered(4));
    std::ostringstream os;
    write_wigner_csv(os, w);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,p,W");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 16);
}

TEST(Position, HermiteFunctionsAreNormalized) {
    const auto grid = linspace(-12.0, 12.0, 2401);
    const double dx = grid[1] - grid[0];
    Eigen::VectorXd norms = Eigen::VectorXd::Zero(6);
    for (double x : grid) norms += hermite_functions(x, 6).cwiseAbs2() * dx;
    for (int n = 0; n < 6; ++n) EXPECT_NEAR(norms(n), 1.0, 1e-10) << "n=" << n;
}

TEST(Position, VacuumWavefunction) {
    const auto vac = vacuum(1, CutoffDim(5));
    for (double x : {-2.0, -0.5, 0.0, 1.3}) {
        const double expected = std::pow(2.0 * std::numbers::pi, -0.25) * std::exp(-0.25 * x * x);
        EXPECT_NEAR(std::abs(wavefunction(vac, x) - expected), 0.0, 1e-14);
    }
}

TEST(Metrics, WeakCubicWignerChecks) {
    const CutoffDim c(10);
    const auto t3 = weak_cubic_state(0.3, c);
    const auto t6 = weak_cubic_state(0.6, c);
    const auto w3 = wigner(t3);
    const auto w6 = wigner(t6);
    EXPECT_NEAR(wigner_overlap_fidelity(w3, w3), 1.0, 0.01);
    EXPECT_NEAR(wigner_overlap_fidelity(w3, w6), fidelity(t3, t6), 0.01);
    EXPECT_LT(negativity_report(w3).min_value, 0.0);
    EXPECT_NEAR(negativity_report(wigner(vacuum(1, c))).min_value, 0.0, 1e-12);
    EXPECT_NEAR(wigner_overlap_fidelity(wigner(vacuum(1, c)), wigner(fock_state(1, c))), 0.0, 1e-6);
}

TEST(Metrics, NegativeOverlapWithMomentumReflection) {
    // Conjugating Fock amplitudes maps W(x, p) to W(x, -p). At a = 0.3 the
    // reflected negative fringes miss the originals on this grid, so use 0.6.
    const CutoffDim c(10);
    EXPECT_EQ(negative_overlap(wigner(weak_cubic_state(0.3, c)),
                               wigner(StateVector(1, c, weak_cubic_state(0.3, c).amplitudes().conjugate()))),
              0.0);
    const auto t = weak_cubic_state(0.6, c);
    StateVector flipped = t;
    flipped.amplitudes() = t.amplitudes().conjugate();
    const auto w = wigner(t);
    const auto wf = wigner(flipped);

    const int n = w.grid.np;
    double na = 0.0;
    for (int i = 0; i < w.grid.nx; ++i)
        for (int j = 0; j < n; ++j) na += std::max(0.0, -w.values(i, j));
    double sum = 0.0;
    for (int i = 0; i < w.grid.nx; ++i) {
        for (int j = 0; j < n; ++j) {
            const double a = w.values(i, j);
            const double b = w.values(i, n - 1 - j);
            if (a < 0.0 && b < 0.0) sum += std::min(-a, -b) / na;
        }
    }
    const double wm = negative_overlap(w, wf);
    EXPECT_GT(wm, 0.0);
    EXPECT_LT(wm, 1.0);
    EXPECT_NEAR(wm, sum, 1e-9);
}

TEST(Metrics, FockMarginalsOnDefaultGrid) {
    const CutoffDim c(6);
    const GridSpec g;
    for (int n = 0; n <= 4; ++n) {
        const auto w = wigner(fock_state(n, c), g);
        double worst = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            const double marginal = w.values.row(i).sum() * g.dp();
            worst = std::max(worst, std::abs(marginal - std::norm(wavefunction(fock_state(n, c), g.x(i)))));
        }
        EXPECT_LT(worst, 1e-3) << "n=" << n;
    }
}
