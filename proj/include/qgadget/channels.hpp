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

// Pure-loss channel L(eta)[rho] = sum_k A_k rho A_k^dag with
//   A_k = ((1 - eta) / eta)^{k/2} a^k / sqrt(k!) eta^{n/2}
// so that A_k|n> = sqrt(C(n,k) eta^{n-k} (1-eta)^k) |n-k>.

#pragma once

#include <cmath>
#include <vector>

#include "qgadget/errors.hpp"
#include "qgadget/fock.hpp"
#include "qgadget/gates.hpp"

namespace qgadget {

struct LossParam {
    double eta = 1.0;
    int kmax = -1;  // -1: cutoff - 1

    int effective_kmax(int cutoff) const { return kmax < 0 ? cutoff - 1 : std::min(kmax, cutoff - 1); }
};

namespace detail {

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline void check_eta(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw Error(Errc::InvalidArgument, "eta must lie in [0, 1]");
}

}  // namespace detail

/// <n-k|A_k|n>
inline double loss_amplitude(double eta, int k, int n) {
    if (k > n) return 0.0;
    if (eta == 1.0) return k == 0 ? 1.0 : 0.0;
    if (eta == 0.0) return n == k ? 1.0 : 0.0;
    return std::exp(0.5 * (detail::log_binomial(n, k) + (n - k) * std::log(eta) + k * std::log1p(-eta)));
}

inline GateMatrix loss_kraus(double eta, int k, CutoffDim cutoff) {
    detail::check_eta(eta);
    const int c = cutoff.value();
    if (k < 0 || k >= c) throw Error(Errc::ModeOutOfRange, "Kraus index outside cutoff");
    if (eta == 0.0 && k > 0) throw Error(Errc::EtaZero, "Kraus operator is singular at eta = 0");
    CMatrix a = CMatrix::Zero(c, c);
    for (int n = k; n < c; ++n) a(n - k, n) = loss_amplitude(eta, k, n);
    return GateMatrix(1, cutoff, std::move(a));
}

/// Apply L(eta) to `mode` of a multimode density matrix. eta = 0 sends the
/// mode to vacuum.
inline DensityMatrix apply_loss(const DensityMatrix& rho, int mode, double eta, int kmax = -1) {
    detail::check_eta(eta);
    const int modes = rho.num_modes();
    const int c = rho.cutoff().value();
    if (mode < 0 || mode >= modes) throw Error(Errc::ModeOutOfRange, "loss mode out of range");
    if (eta == 1.0) return rho;
    const int kk = LossParam{eta, kmax}.effective_kmax(c);

    const std::size_t inner_size = mode_stride(modes, c, mode);
    const std::size_t outer_size = ipow(c, mode);
    const CMatrix& r = rho.elements();
    CMatrix out = CMatrix::Zero(r.rows(), r.cols());
    auto idx = [&](std::size_t o, int n, std::size_t i) {
        return static_cast<Eigen::Index>((o * c + n) * inner_size + i);
    };
    // out[(.., n-k, ..), (.., m-k, ..)] += A_k(n) A_k(m) r[(.., n, ..), (.., m, ..)]
    for (int k = 0; k <= kk; ++k) {
        for (int n = k; n < c; ++n) {
            const double an = loss_amplitude(eta, k, n);
            if (an == 0.0) continue;
            for (int m = k; m < c; ++m) {
                const double w = an * loss_amplitude(eta, k, m);
                if (w == 0.0) continue;
                for (std::size_t o1 = 0; o1 < outer_size; ++o1) {
                    for (std::size_t i1 = 0; i1 < inner_size; ++i1) {
                        const auto row_in = idx(o1, n, i1);
                        const auto row_out = idx(o1, n - k, i1);
                        for (std::size_t o2 = 0; o2 < outer_size; ++o2) {
                            for (std::size_t i2 = 0; i2 < inner_size; ++i2) {
                                out(row_out, idx(o2, m - k, i2)) += w * r(row_in, idx(o2, m, i2));
                            }
                        }
                    }
                }
            }
        }
    }
    return DensityMatrix(modes, rho.cutoff(), std::move(out));
}

/// Detector-side PNR POVM element for outcome `count` after loss eta:
/// weight(n) = C(n, count) eta^count (1-eta)^(n-count), diagonal in Fock.
inline Eigen::VectorXd lossy_pnr_weights(double eta, int count, int cutoff) {
    detail::check_eta(eta);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(cutoff);
    for (int n = count; n < cutoff; ++n) {
        const double amp = loss_amplitude(eta, n - count, n);
        w(n) = amp * amp;
    }
    return w;
}

}  // namespace qgadget
