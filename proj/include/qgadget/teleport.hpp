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

// Gate teleportation of a weak cubic phase gate with a resource state
// S(r)^dag |phi> and an x-homodyne outcome m.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "qgadget/errors.hpp"
#include "qgadget/fock.hpp"
#include "qgadget/gadgets.hpp"
#include "qgadget/gates.hpp"
#include "qgadget/metrics.hpp"
#include "qgadget/position.hpp"

namespace qgadget {

/// gamma = 2 a e^{-3r} / sqrt(6)
inline double gamma_from(double a, double r) { return 2.0 * a * std::exp(-3.0 * r) / std::sqrt(6.0); }

struct TeleportSetup {
    double a = 0.0;
    double r = 0.0;
    double m = 0.0;
    CutoffDim cutoff{25};

    double gamma() const { return gamma_from(a, r); }
};

/// N(m, r) = exp[-(x + m)^2 / (4 e^{2r})]
inline GateMatrix noise_op(double m, double r, CutoffDim cutoff) {
    const double scale = 1.0 / (4.0 * std::exp(2.0 * r));
    return function_of_x([=](double x) { return cplx(std::exp(-(x + m) * (x + m) * scale), 0.0); }, cutoff);
}

/// GFF(m) = exp[-i gamma (3 m x^2 + 3 m^2 x + m^3) / 2]
inline GateMatrix gff(double m, double gamma, CutoffDim cutoff) {
    return function_of_x(
        [=](double x) { return std::polar(1.0, -0.5 * gamma * (3.0 * m * x * x + 3.0 * m * m * x + m * m * m)); },
        cutoff);
}

namespace detail {
inline void check_single(const StateVector& s, CutoffDim cutoff) {
    if (s.num_modes() != 1) throw Error(Errc::MultiModeInput, "expected a single-mode state");
    if (s.cutoff() != cutoff) throw Error(Errc::ShapeMismatch, "state cutoff differs from setup cutoff");
}
inline void warn_cutoff(CutoffDim cutoff) {
    if (cutoff.value() < 25) warn(Errc::TruncationRisk, "teleportation checks expect cutoff >= 25");
}
}  // namespace detail

/// N' exp[-(x+m)^2 / (4 e^{2r})] [1 + i gamma (x+m)^3 / 2] |psi_in>
inline StateVector gkp_output_analytic(const StateVector& psi_in, const TeleportSetup& s) {
    detail::check_single(psi_in, s.cutoff);
    detail::warn_cutoff(s.cutoff);
    const double scale = 1.0 / (4.0 * std::exp(2.0 * s.r));
    const double g = s.gamma();
    const double m = s.m;
    const GateMatrix op = function_of_x(
        [=](double x) {
            const double u = x + m;
            return std::exp(-u * u * scale) * cplx(1.0, 0.5 * g * u * u * u);
        },
        s.cutoff);
    return normalize(apply(op, psi_in)).state;
}

/// N' N(m, r) V(gamma) |psi_in>: the ideal teleported action after feed-forward.
inline StateVector gkp_ideal_output(const StateVector& psi_in, const TeleportSetup& s) {
    detail::check_single(psi_in, s.cutoff);
    const double scale = 1.0 / (4.0 * std::exp(2.0 * s.r));
    const double g = s.gamma();
    const double m = s.m;
    const GateMatrix op = function_of_x(
        [=](double x) { return std::exp(-(x + m) * (x + m) * scale) * std::polar(1.0, 0.5 * g * x * x * x); },
        s.cutoff);
    return normalize(apply(op, psi_in)).state;
}

/// <x_i|psi> on a grid.
inline std::vector<cplx> wavefunction_on_grid(const StateVector& state, const std::vector<double>& grid) {
    std::vector<cplx> out;
    out.reserve(grid.size());
    for (double x : grid) out.push_back(wavefunction(state, x));
    return out;
}

inline std::vector<double> default_x_grid() { return linspace(-8.0, 8.0, 401); }

/// Circuit simulation: S(r)^dag on the resource, the coupler, then the
/// homodyne projection <x = m| on the resource mode.
///
/// The coupler is applied as C_x^dag = exp[+i x_in p_res / 2], which maps
/// psi(x) phi~(y) to psi(x) phi~(y + x); projecting y = m leaves
/// psi(x) phi~(x + m), the (x + m) dependence of the analytic output law.
inline StateVector gkp_circuit_sim(const StateVector& psi_in, const StateVector& resource, double r, double m,
                                   CutoffDim cutoff, const std::vector<double>& x_grid = default_x_grid()) {
    detail::check_single(psi_in, cutoff);
    detail::check_single(resource, cutoff);
    detail::warn_cutoff(cutoff);
    if (x_grid.size() < 2) throw Error(Errc::GridTooCoarse, "x grid needs at least two points");
    const int c = cutoff.value();

    const StateVector squeezed = apply(squeeze(cplx(-r, 0.0), cutoff), resource);

    // The resource wavefunction must be resolved by the grid.
    const double dx = x_grid[1] - x_grid[0];
    double grid_norm = 0.0;
    for (double x : x_grid) grid_norm += std::norm(wavefunction(squeezed, x)) * dx;
    if (std::abs(squeezed.squared_norm() - grid_norm) > 1e-4) {
        throw Error(Errc::GridTooCoarse, "Hermite expansion of the resource is not resolved by the x grid");
    }

    GateMatrix cx = controlled_x(cutoff);
    cx.elements.adjointInPlace();
    const StateVector joint = apply(cx, {0, 1}, tensor(psi_in, squeezed));

    const Eigen::VectorXd bra = hermite_functions(m, c);
    CVector out = CVector::Zero(c);
    for (int n0 = 0; n0 < c; ++n0) {
        for (int n1 = 0; n1 < c; ++n1) out(n0) += bra(n1) * joint.amplitudes()(n0 * c + n1);
    }
    return normalize(StateVector(1, cutoff, std::move(out))).state;
}

struct TeleportCheck {
    double a = 0.0;
    double r = 0.0;
    double m = 0.0;
    double gamma = 0.0;
    double circuit_vs_analytic = 0.0;  // circuit vs the [1 + i gamma u^3 / 2] law
    double corrected_vs_ideal = 0.0;   // GFF(circuit) vs N' N V |psi>
};

inline TeleportCheck verify_teleport(const StateVector& psi_in, const TeleportSetup& s,
                                     const std::vector<double>& x_grid = default_x_grid()) {
    const StateVector resource = weak_cubic_state(s.a, s.cutoff);
    const StateVector sim = gkp_circuit_sim(psi_in, resource, s.r, s.m, s.cutoff, x_grid);
    const StateVector corrected = normalize(apply(gff(s.m, s.gamma(), s.cutoff), sim)).state;
    return {s.a,
            s.r,
            s.m,
            s.gamma(),
            fidelity(sim, gkp_output_analytic(psi_in, s)),
            fidelity(corrected, gkp_ideal_output(psi_in, s))};
}

}  // namespace qgadget
