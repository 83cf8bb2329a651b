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

// Fidelity and Wigner-function metrics (hbar = 2).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

#include "qgadget/errors.hpp"
#include "qgadget/fock.hpp"

namespace qgadget {

inline double fidelity(const StateVector& a, const StateVector& b) { return std::norm(inner(a, b)); }

/// <b|rho|b>
inline double fidelity(const DensityMatrix& rho, const StateVector& b) {
    if (rho.num_modes() != b.num_modes() || rho.cutoff() != b.cutoff()) {
        throw Error(Errc::ShapeMismatch, "density matrix and state differ in shape");
    }
    return b.amplitudes().dot(rho.elements() * b.amplitudes()).real();
}

struct GridSpec {
    double x_min = -6.0;
    double x_max = 6.0;
    double p_min = -6.0;
    double p_max = 6.0;
    int nx = 201;
    int np = 201;

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dp() const { return (p_max - p_min) / (np - 1); }
    double x(int i) const { return x_min + i * dx(); }
    double p(int j) const { return p_min + j * dp(); }
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct WignerGrid {
    GridSpec grid;
    Eigen::MatrixXd values;  // values(i, j) = W(x_i, p_j)

    double cell_area() const { return grid.dx() * grid.dp(); }
    double integral() const { return values.sum() * cell_area(); }
};

/// Wigner function of a single-mode density matrix on a rectangular grid.
///
/// Uses the Laguerre-polynomial recursion over Fock indices
///   W = sum_{m,n} rho_{mn} W_{mn}(x, p)
/// with the off-diagonal kernels built iteratively from A = (x + i p) / 2.
inline WignerGrid wigner(const DensityMatrix& rho, const GridSpec& spec = {}) {
    if (rho.num_modes() != 1) throw Error(Errc::MultiModeInput, "wigner expects a single-mode state");
    if (spec.nx < 2 || spec.np < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min)) {
        throw Error(Errc::InvalidArgument, "degenerate Wigner grid");
    }
    const int c = rho.cutoff().value();
    const CMatrix& r = rho.elements();
    const auto n_pts = static_cast<Eigen::Index>(spec.nx) * spec.np;

    Eigen::VectorXcd alpha(n_pts);
    for (int i = 0; i < spec.nx; ++i) {
        for (int j = 0; j < spec.np; ++j) alpha(i * spec.np + j) = cplx(spec.x(i), spec.p(j)) / 2.0;
    }
    const Eigen::VectorXcd two_alpha = 2.0 * alpha;
    const Eigen::VectorXcd two_alpha_c = two_alpha.conjugate();

    // w_list[m] holds W_{m,n} for the current n, starting at n = 0.
    std::vector<Eigen::VectorXcd> w_list(static_cast<std::size_t>(c));
    w_list[0] = (-2.0 * alpha.cwiseAbs2()).array().exp().cast<cplx>() / std::numbers::pi;
    Eigen::VectorXcd acc = r(0, 0).real() * w_list[0];
    for (int m = 1; m < c; ++m) {
        w_list[m] = (two_alpha.cwiseProduct(w_list[m - 1])) / std::sqrt(static_cast<double>(m));
        acc += 2.0 * (r(0, m) * w_list[m]).real().cast<cplx>();
    }
    for (int n = 1; n < c; ++n) {
        const double sn = std::sqrt(static_cast<double>(n));
        Eigen::VectorXcd temp = w_list[n];
        w_list[n] = (two_alpha_c.cwiseProduct(temp) - sn * w_list[n - 1]) / sn;
        acc += (r(n, n) * w_list[n]).real().cast<cplx>();
        for (int m = n + 1; m < c; ++m) {
            const double sm = std::sqrt(static_cast<double>(m));
            Eigen::VectorXcd temp2 = (two_alpha.cwiseProduct(w_list[m - 1]) - sn * temp) / sm;
            temp = w_list[m];
            w_list[m] = temp2;
            acc += 2.0 * (r(n, m) * w_list[m]).real().cast<cplx>();
        }
    }
    WignerGrid out{spec, Eigen::MatrixXd(spec.nx, spec.np)};
    for (int i = 0; i < spec.nx; ++i) {
        for (int j = 0; j < spec.np; ++j) out.values(i, j) = acc(i * spec.np + j).real() / 2.0;  // hbar
    }
    return out;
}

inline WignerGrid wigner(const StateVector& state, const GridSpec& spec = {}) {
    if (state.num_modes() != 1) throw Error(Errc::MultiModeInput, "wigner expects a single-mode state");
    return wigner(to_density(state), spec);
}

namespace detail {
inline void require_same_grid(const WignerGrid& a, const WignerGrid& b) {
    if (!(a.grid == b.grid)) throw Error(Errc::GridMismatch, "Wigner grids differ");
}
}  // namespace detail

/// 4 pi sum Wa Wb dx dp, which equals |<a|b>|^2 for pure states.
inline double wigner_overlap_fidelity(const WignerGrid& a, const WignerGrid& b) {
    detail::require_same_grid(a, b);
    return 4.0 * std::numbers::pi * a.values.cwiseProduct(b.values).sum() * a.cell_area();
}

inline double negative_mass(const WignerGrid& w) { return -w.values.cwiseMin(0.0).sum() * w.cell_area(); }

/// Overlap of the negative regions, each first rescaled to unit mass:
///   W_- = sum_{Wa<0, Wb<0} min(|Wa|/Na, |Wb|/Nb) dx dp.
inline double negative_overlap(const WignerGrid& a, const WignerGrid& b) {
    detail::require_same_grid(a, b);
    const double na = negative_mass(a);
    const double nb = negative_mass(b);
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.values.size(); ++i) {
        const double wa = a.values.data()[i];
        const double wb = b.values.data()[i];
        if (wa < 0.0 && wb < 0.0) sum += std::min(-wa / na, -wb / nb);
    }
    return std::clamp(sum * a.cell_area(), 0.0, 1.0);
}

struct NegativityReport {
    double min_value = 0.0;
    std::pair<double, double> min_location{0.0, 0.0};
    double negative_mass = 0.0;
};

inline NegativityReport negativity_report(const WignerGrid& w) {
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    const double mn = w.values.minCoeff(&i, &j);
    return {mn, {w.grid.x(static_cast<int>(i)), w.grid.p(static_cast<int>(j))}, negative_mass(w)};
}

/// CSV of (x, p, W) triples.
inline void write_wigner_csv(std::ostream& os, const WignerGrid& w) {
    const auto old = os.precision(17);
    os << "x,p,W\n";
    for (int i = 0; i < w.grid.nx; ++i) {
        for (int j = 0; j < w.grid.np; ++j) os << w.grid.x(i) << ',' << w.grid.p(j) << ',' << w.values(i, j) << '\n';
    }
    os.precision(old);
}

}  // namespace qgadget
