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

#include "qgadget/channels.hpp"

#include <gtest/gtest.h>

#include <random>

#include "qgadget/gates.hpp"
#include "qgadget/metrics.hpp"
#include "test_util.hpp"

using namespace qgadget;

namespace {

DensityMatrix random_density(int modes, CutoffDim c, std::mt19937_64& rng, int rank = 3) {
    const auto d = static_cast<Eigen::Index>(ipow(c.value(), modes));
    CMatrix rho = CMatrix::Zero(d, d);
    for (int k = 0; k < rank; ++k) {
        const auto v = normalize(test::random_state(modes, c, rng)).state.amplitudes();
        rho += v * v.adjoint() / rank;
    }
    return DensityMatrix(modes, c, rho);
}

double min_eigenvalue(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.elements());
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(Channels, SinglePhotonLoss) {
    const CutoffDim c(4);
    const double eta = 0.7;
    const auto out = apply_loss(to_density(fock_state(1, c)), 0, eta);
    EXPECT_NEAR(out.elements()(0, 0).real(), 1.0 - eta, 1e-15);
    EXPECT_NEAR(out.elements()(1, 1).real(), eta, 1e-15);
    EXPECT_NEAR(out.trace(), 1.0, 1e-15);
}

TEST(Channels, TwoPhotonLossIsBinomial) {
    const CutoffDim c(5);
    const double eta = 0.6;
    const auto out = apply_loss(to_density(fock_state(2, c)), 0, eta);
    EXPECT_NEAR(out.elements()(2, 2).real(), eta * eta, 1e-15);
    EXPECT_NEAR(out.elements()(1, 1).real(), 2.0 * eta * (1.0 - eta), 1e-15);
    EXPECT_NEAR(out.elements()(0, 0).real(), (1.0 - eta) * (1.0 - eta), 1e-15);
}

TEST(Channels, EndpointsAreIdentityAndVacuum) {
    std::mt19937_64 rng(1);
    const CutoffDim c(5);
    const auto rho = random_density(1, c, rng);
    EXPECT_EQ((apply_loss(rho, 0, 1.0).elements() - rho.elements()).cwiseAbs().maxCoeff(), 0.0);
    const auto gone = apply_loss(rho, 0, 0.0);
    EXPECT_NEAR(gone.elements()(0, 0).real(), 1.0, 1e-14);
    EXPECT_NEAR(gone.elements().cwiseAbs().sum(), 1.0, 1e-14);
}

TEST(Channels, KrausOperatorsAreComplete) {
    const CutoffDim c(8);
    for (double eta : {0.1, 0.5, 0.93}) {
        CMatrix sum = CMatrix::Zero(8, 8);
        for (int k = 0; k < 8; ++k) {
            const auto a = loss_kraus(eta, k, c).elements;
            sum += a.adjoint() * a;
        }
        EXPECT_LT((sum - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-13) << "eta=" << eta;
    }
    EXPECT_TRUE(test::throws_code([&] { loss_kraus(0.0, 1, c); }, Errc::EtaZero));
    EXPECT_NO_THROW(loss_kraus(0.0, 0, c));
    EXPECT_TRUE(test::throws_code([&] { loss_kraus(1.5, 0, c); }, Errc::InvalidArgument));
}

TEST(Channels, KrausSumMatchesApplyLoss) {
    std::mt19937_64 rng(5);
    const CutoffDim c(6);
    const auto rho = random_density(1, c, rng);
    CMatrix expected = CMatrix::Zero(6, 6);
    for (int k = 0; k < 6; ++k) {
        const auto a = loss_kraus(0.45, k, c).elements;
        expected += a * rho.elements() * a.adjoint();
    }
    EXPECT_LT((apply_loss(rho, 0, 0.45).elements() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Channels, LossIsTracePreservingAndPositive) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int modes = 1 + trial % 2;
        const auto rho = random_density(modes, CutoffDim(5), rng);
        const int mode = trial % modes;
        const auto out = apply_loss(rho, mode, u(rng));
        EXPECT_NEAR(out.trace(), 1.0, 1e-12);
        EXPECT_GT(min_eigenvalue(out), -1e-12);
        EXPECT_LT((out.elements() - out.elements().adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Channels, LossComposesMultiplicatively) {
    std::mt19937_64 rng(11);
    const auto rho = random_density(1, CutoffDim(6), rng);
    const auto twice = apply_loss(apply_loss(rho, 0, 0.8), 0, 0.6);
    const auto once = apply_loss(rho, 0, 0.48);
    EXPECT_LT((twice.elements() - once.elements()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Channels, MeanPhotonNumberScalesWithEta) {
    std::mt19937_64 rng(13);
    const auto rho = random_density(1, CutoffDim(7), rng);
    for (double eta : {0.2, 0.75}) {
        EXPECT_NEAR(mean_photon(apply_loss(rho, 0, eta)), eta * mean_photon(rho), 1e-12);
    }
}

TEST(Channels, CoherentStateStaysCoherent) {
    const CutoffDim c(30);
    const cplx alpha(1.0, 0.5);
    const double eta = 0.64;
    const auto in = apply(displace(alpha, c), vacuum(1, c));
    const auto expected = apply(displace(alpha * std::sqrt(eta), c), vacuum(1, c));
    const auto out = apply_loss(to_density(in), 0, eta);
    EXPECT_NEAR(fidelity(out, expected), 1.0, 1e-12);
    EXPECT_NEAR(out.purity(), 1.0, 1e-12);
}

TEST(Channels, LossOnOneModeLeavesTheOtherMarginal) {
    std::mt19937_64 rng(19);
    const auto rho = random_density(2, CutoffDim(4), rng);
    const auto out = apply_loss(rho, 1, 0.3);
    EXPECT_LT((reduced_density(out, 0).elements() - reduced_density(rho, 0).elements()).cwiseAbs().maxCoeff(),
              1e-14);
}

TEST(Channels, KmaxTruncatesTheKrausSum) {
    const CutoffDim c(5);
    const auto rho = to_density(fock_state(3, c));
    const auto partial = apply_loss(rho, 0, 0.5, 1);
    // Only k = 0, 1 survive: weights eta^3 and 3 eta^2 (1 - eta).
    EXPECT_NEAR(partial.trace(), 0.125 + 0.375, 1e-15);
    EXPECT_EQ((LossParam{0.5, -1}.effective_kmax(5)), 4);
    EXPECT_EQ((LossParam{0.5, 9}.effective_kmax(5)), 4);
}

TEST(Channels, LossyPnrWeightsFormAPovm) {
    const int c = 9;
    const double eta = 0.85;
    Eigen::VectorXd total = Eigen::VectorXd::Zero(c);
    for (int count = 0; count < c; ++count) total += lossy_pnr_weights(eta, count, c);
    for (int n = 0; n < c; ++n) EXPECT_NEAR(total(n), 1.0, 1e-13);
    const auto w1 = lossy_pnr_weights(eta, 1, c);
    EXPECT_EQ(w1(0), 0.0);
    EXPECT_NEAR(w1(1), eta, 1e-15);
    EXPECT_NEAR(w1(2), 2.0 * eta * (1.0 - eta), 1e-15);
}

TEST(Channels, KrausExamples) {
    const CutoffDim c(6);
    EXPECT_EQ((loss_kraus(1.0, 0, c).elements - CMatrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 0.0);
    for (int k = 1; k < 4; ++k) EXPECT_EQ(loss_kraus(1.0, k, c).elements.cwiseAbs().maxCoeff(), 0.0);
    const double eta = 0.3;
    const CVector out = loss_kraus(eta, 1, c).elements * fock_state(1, c).amplitudes();
    EXPECT_NEAR(std::abs(out(0) - std::sqrt(1.0 - eta)), 0.0, 1e-15);
    EXPECT_NEAR(out.tail(5).norm(), 0.0, 1e-15);
}

TEST(Channels, VacuumIsAFixedPoint) {
    const auto vac = to_density(vacuum(2, CutoffDim(4)));
    for (double eta : {0.0, 0.4, 0.9}) {
        const auto out = apply_loss(vac, 1, eta);
        EXPECT_LT((out.elements() - vac.elements()).cwiseAbs().maxCoeff(), 1e-15);
    }
}
