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

// Position representation with hbar = 2, x = a + a^dagger.
//   <x|n> = (2 pi)^{-1/4} (2^n n!)^{-1/2} H_n(x / sqrt 2) exp(-x^2 / 4)

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "qgadget/fock.hpp"

namespace qgadget {

inline constexpr double kHbar = 2.0;

/// <x|n> for n = 0..levels-1, by the three-term recurrence.
inline Eigen::VectorXd hermite_functions(double x, int levels) {
    Eigen::VectorXd psi(levels);
    const double xi = x / std::numbers::sqrt2;
    psi(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    if (levels > 1) psi(1) = std::numbers::sqrt2 * xi * psi(0);
    for (int n = 1; n + 1 < levels; ++n) {
        psi(n + 1) = std::sqrt(2.0 / (n + 1)) * xi * psi(n) - std::sqrt(static_cast<double>(n) / (n + 1)) * psi(n - 1);
    }
    return psi * std::pow(2.0, -0.25);
}

/// psi(x) = <x|psi> for a single-mode state.
inline cplx wavefunction(const StateVector& state, double x) {
    if (state.num_modes() != 1) throw Error(Errc::MultiModeInput, "wavefunction expects one mode");
    const Eigen::VectorXd h = hermite_functions(x, state.cutoff().value());
    return h.cast<cplx>().dot(state.amplitudes());
}

/// Uniform grid [lo, hi] with `points` samples.
inline std::vector<double> linspace(double lo, double hi, int points) {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    }
    return out;
}

}  // namespace qgadget
