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

// Resource-farm probabilities and the sequential photon-subtraction baseline.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qgadget/errors.hpp"

namespace qgadget {

inline constexpr std::int64_t kMaxGadgets = 1'000'000'000;

/// P(F) = 1 - (1 - p)^n, evaluated as -expm1(n log1p(-p)).
inline double farm_success(double p, std::int64_t n) {
    if (!(p >= 0.0 && p <= 1.0) || n < 0) throw Error(Errc::InvalidArgument, "farm_success needs p in [0,1], n >= 0");
    if (n == 0) return 0.0;
    if (p == 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-p));
}

/// Smallest n with farm_success(p, n) >= 1 - epsilon.
inline std::int64_t min_gadgets(double p, double epsilon) {
    if (p == 0.0 || p == 1.0) throw Error(Errc::DegenerateP, "min_gadgets needs 0 < p < 1");
    if (!(p > 0.0 && p < 1.0) || !(epsilon > 0.0 && epsilon < 1.0)) {
        throw Error(Errc::InvalidArgument, "min_gadgets needs p, epsilon in (0, 1)");
    }
    const double estimate = std::ceil(std::log(epsilon) / std::log1p(-p));
    if (!(estimate <= static_cast<double>(kMaxGadgets))) {
        throw Error(Errc::Unbounded, "gadget count exceeds " + std::to_string(kMaxGadgets));
    }
    const double target = 1.0 - epsilon;
    auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(estimate));
    // The ceiling can land one off at floating-point boundaries.
    while (n > 1 && farm_success(p, n - 1) >= target) --n;
    while (farm_success(p, n) < target) {
        if (++n > kMaxGadgets) throw Error(Errc::Unbounded, "gadget count exceeds cap");
    }
    return n;
}

/// Failure probability (1 - p)^n for fixed p.
inline double farm_epsilon(double p, std::int64_t n) {
    if (p == 1.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(n) * std::log1p(-p));
}

/// Per-gadget probability 1 - epsilon^(1/n) needed to fail with probability epsilon.
inline double farm_probability(double epsilon, std::int64_t n) {
    if (n < 1) throw Error(Errc::InvalidArgument, "n must be >= 1");
    return -std::expm1(std::log(epsilon) / static_cast<double>(n));
}

struct TradeoffRow {
    std::int64_t n = 0;
    double epsilon = 0.0;
    double p = 0.0;
};

enum class TradeoffFixed { Probability, Epsilon };

inline std::vector<TradeoffRow> tradeoff_table(TradeoffFixed fixed, double value, std::int64_t n_min,
                                               std::int64_t n_max, std::int64_t n_step = 1) {
    if (!(value > 0.0 && value < 1.0)) throw Error(Errc::InvalidArgument, "fixed value must lie in (0, 1)");
    if (n_min < 1 || n_max < n_min || n_step < 1) throw Error(Errc::InvalidArgument, "bad n range");
    std::vector<TradeoffRow> rows;
    for (std::int64_t n = n_min; n <= n_max; n += n_step) {
        if (fixed == TradeoffFixed::Probability) {
            rows.push_back({n, farm_epsilon(value, n), value});
        } else {
            rows.push_back({n, value, farm_probability(value, n)});
        }
    }
    return rows;
}

/// Beamsplitter angle with transmission T = cos^2(theta).
inline double theta_from_transmission(double transmission) { return std::acos(std::sqrt(transmission)); }

enum class SubtractionReading {
    // ||theta a |psi>||^2 / N^2 = theta^2 <n> / (1 + theta^2 <n>)
    WithMeanPhoton,
    // theta^2 / (1 + theta^2 <n>)
    Bare,
};

/// Probability of one photon subtraction through a weakly reflecting
/// beamsplitter of angle theta, with N^2 = 1 + theta^2 <n>.
inline double subtraction_probability(double theta, double mean_photon,
                                      SubtractionReading reading = SubtractionReading::WithMeanPhoton) {
    if (mean_photon < 0.0) throw Error(Errc::InvalidArgument, "mean photon number must be non-negative");
    if (std::abs(theta) > 0.3) warn(Errc::TruncationRisk, "subtraction formula is first order in theta");
    const double t2 = theta * theta;
    const double n2 = 1.0 + t2 * mean_photon;
    return reading == SubtractionReading::WithMeanPhoton ? t2 * mean_photon / n2 : t2 / n2;
}

/// Net probability of `events` sequential subtractions at the same setting.
inline double sequential_subtraction_probability(double theta, double mean_photon, int events,
                                                 SubtractionReading reading = SubtractionReading::WithMeanPhoton) {
    return std::pow(subtraction_probability(theta, mean_photon, reading), events);
}

}  // namespace qgadget
