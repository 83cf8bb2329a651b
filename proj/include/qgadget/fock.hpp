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

// Truncated Fock-space states.
//
// A state over M modes with cutoff c is a flat complex vector of length c^M.
// The multi-index (n_0, ..., n_{M-1}) maps to
//     n_0 c^{M-1} + n_1 c^{M-2} + ... + n_{M-1}
// i.e. row-major with mode 0 slowest. Every module and the on-disk format use
// this layout.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qgadget/errors.hpp"

namespace qgadget {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kZeroNormTolerance = 1e-30;

/// Local Hilbert-space dimension of one mode (Fock levels 0..value-1).
class CutoffDim {
public:
    explicit CutoffDim(int value) : value_(value) {
        if (value < 2) {
            throw Error(Errc::CutoffTooSmall, "cutoff must be >= 2, got " + std::to_string(value));
        }
    }
    int value() const noexcept { return value_; }
    friend bool operator==(CutoffDim, CutoffDim) = default;

private:
    int value_;
};

inline constexpr int kDefaultCutoff = 15;

inline std::size_t ipow(std::size_t base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

/// Stride of `mode` in the flat index of an M-mode tensor.
inline std::size_t mode_stride(int num_modes, int cutoff, int mode) {
    return ipow(static_cast<std::size_t>(cutoff), num_modes - 1 - mode);
}

class StateVector {
public:
    StateVector(int num_modes, CutoffDim cutoff)
        : num_modes_(checked_modes(num_modes)), cutoff_(cutoff),
          amps_(CVector::Zero(static_cast<Eigen::Index>(ipow(cutoff.value(), num_modes)))) {}

    StateVector(int num_modes, CutoffDim cutoff, CVector amplitudes)
        : num_modes_(checked_modes(num_modes)), cutoff_(cutoff), amps_(std::move(amplitudes)) {
        if (static_cast<std::size_t>(amps_.size()) != ipow(cutoff.value(), num_modes)) {
            throw Error(Errc::ShapeMismatch, "amplitude count does not match cutoff^num_modes");
        }
    }

    int num_modes() const noexcept { return num_modes_; }
    CutoffDim cutoff() const noexcept { return cutoff_; }
    Eigen::Index dim() const noexcept { return amps_.size(); }

    const CVector& amplitudes() const noexcept { return amps_; }
    CVector& amplitudes() noexcept { return amps_; }

    cplx at(std::span<const int> index) const { return amps_(flat_index(index)); }
    cplx& at(std::span<const int> index) { return amps_(flat_index(index)); }
    cplx at(std::initializer_list<int> index) const {
        return at(std::span<const int>(index.begin(), index.size()));
    }
    cplx& at(std::initializer_list<int> index) {
        return at(std::span<const int>(index.begin(), index.size()));
    }

    double squared_norm() const { return amps_.squaredNorm(); }

    bool is_finite() const { return amps_.allFinite(); }

    Eigen::Index flat_index(std::span<const int> index) const {
        if (static_cast<int>(index.size()) != num_modes_) {
            throw Error(Errc::ShapeMismatch, "index rank does not match num_modes");
        }
        Eigen::Index flat = 0;
        for (int n : index) {
            if (n < 0 || n >= cutoff_.value()) {
                throw Error(Errc::ModeOutOfRange, "Fock index outside cutoff");
            }
            flat = flat * cutoff_.value() + n;
        }
        return flat;
    }

private:
    static int checked_modes(int num_modes) {
        if (num_modes < 1) throw Error(Errc::InvalidArgument, "num_modes must be >= 1");
        return num_modes;
    }

    int num_modes_;
    CutoffDim cutoff_;
    CVector amps_;
};

class DensityMatrix {
public:
    DensityMatrix(int num_modes, CutoffDim cutoff, CMatrix elements)
        : num_modes_(num_modes), cutoff_(cutoff), rho_(std::move(elements)) {
        const auto d = static_cast<Eigen::Index>(ipow(cutoff.value(), num_modes));
        if (num_modes < 1 || rho_.rows() != d || rho_.cols() != d) {
            throw Error(Errc::ShapeMismatch, "density matrix must be cutoff^num_modes square");
        }
    }

    int num_modes() const noexcept { return num_modes_; }
    CutoffDim cutoff() const noexcept { return cutoff_; }
    Eigen::Index dim() const noexcept { return rho_.rows(); }
    const CMatrix& elements() const noexcept { return rho_; }
    CMatrix& elements() noexcept { return rho_; }

    double trace() const { return rho_.trace().real(); }
    double purity() const { return (rho_ * rho_).trace().real(); }

private:
    int num_modes_;
    CutoffDim cutoff_;
    CMatrix rho_;
};

/// Post-selected photon-number-resolving detection outcome.
struct PnrOutcome {
    int mode = 0;
    int count = 0;
    friend bool operator==(const PnrOutcome&, const PnrOutcome&) = default;
};

inline StateVector vacuum(int num_modes, CutoffDim cutoff) {
    StateVector s(num_modes, cutoff);
    s.amplitudes()(0) = 1.0;
    return s;
}

/// Single-mode |n>.
inline StateVector fock_state(int n, CutoffDim cutoff) {
    StateVector s(1, cutoff);
    if (n < 0 || n >= cutoff.value()) throw Error(Errc::ModeOutOfRange, "Fock level outside cutoff");
    s.amplitudes()(n) = 1.0;
    return s;
}

/// Single-mode state from Fock coefficients; missing levels are zero.
inline StateVector single_mode(std::span<const cplx> coefficients, CutoffDim cutoff) {
    if (static_cast<int>(coefficients.size()) > cutoff.value()) {
        throw Error(Errc::ShapeMismatch, "more coefficients than cutoff levels");
    }
    StateVector s(1, cutoff);
    for (std::size_t n = 0; n < coefficients.size(); ++n) s.amplitudes()(static_cast<Eigen::Index>(n)) = coefficients[n];
    return s;
}

struct Normalized {
    StateVector state;
    double norm;
};

inline Normalized normalize(const StateVector& state) {
    if (!state.is_finite()) throw Error(Errc::InvalidArgument, "non-finite amplitudes");
    const double sq = state.squared_norm();
    if (sq < kZeroNormTolerance) {
        throw Error(Errc::ZeroNorm, "state has zero norm (impossible post-selection?)");
    }
    const double norm = std::sqrt(sq);
    return {StateVector(state.num_modes(), state.cutoff(), state.amplitudes() / norm), norm};
}

inline void require_same_shape(const StateVector& a, const StateVector& b) {
    if (a.num_modes() != b.num_modes() || a.cutoff() != b.cutoff()) {
        throw Error(Errc::ShapeMismatch, "states differ in num_modes or cutoff");
    }
}

/// <a|b>, conjugate-linear in `a`.
inline cplx inner(const StateVector& a, const StateVector& b) {
    require_same_shape(a, b);
    return a.amplitudes().dot(b.amplitudes());
}

/// Tensor product a ⊗ b (modes of `a` first).
inline StateVector tensor(const StateVector& a, const StateVector& b) {
    if (a.cutoff() != b.cutoff()) throw Error(Errc::ShapeMismatch, "cutoff mismatch in tensor product");
    CVector out(a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i) {
        out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
    }
    return StateVector(a.num_modes() + b.num_modes(), a.cutoff(), std::move(out));
}

struct PnrProjection {
    StateVector state;  // unnormalized slice
    double probability;
};

/// Slice of the tensor at Fock index `outcome.count` on `outcome.mode`.
/// The returned state is NOT normalized; its squared norm is the probability.
inline PnrProjection project_pnr(const StateVector& state, const PnrOutcome& outcome) {
    const int modes = state.num_modes();
    const int c = state.cutoff().value();
    if (modes < 2) throw Error(Errc::ShapeMismatch, "projection needs at least two modes");
    if (outcome.mode < 0 || outcome.mode >= modes) throw Error(Errc::ModeOutOfRange, "PNR mode out of range");
    if (outcome.count < 0 || outcome.count >= c) throw Error(Errc::ModeOutOfRange, "PNR count outside cutoff");

    const std::size_t inner_size = mode_stride(modes, c, outcome.mode);
    const std::size_t outer_size = ipow(c, outcome.mode);
    CVector out(static_cast<Eigen::Index>(outer_size * inner_size));
    const auto& src = state.amplitudes();
    for (std::size_t o = 0; o < outer_size; ++o) {
        const std::size_t base = (o * c + outcome.count) * inner_size;
        out.segment(static_cast<Eigen::Index>(o * inner_size), static_cast<Eigen::Index>(inner_size)) =
            src.segment(static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(inner_size));
    }
    StateVector slice(modes - 1, state.cutoff(), std::move(out));
    const double prob = slice.squared_norm();
    return {std::move(slice), prob};
}

inline DensityMatrix to_density(const StateVector& state) {
    return DensityMatrix(state.num_modes(), state.cutoff(), state.amplitudes() * state.amplitudes().adjoint());
}

/// Reduced density matrix of a single mode (all other modes traced out).
inline DensityMatrix reduced_density(const DensityMatrix& rho, int mode) {
    const int modes = rho.num_modes();
    const int c = rho.cutoff().value();
    if (mode < 0 || mode >= modes) throw Error(Errc::ModeOutOfRange, "mode out of range");
    const std::size_t inner_size = mode_stride(modes, c, mode);
    const std::size_t outer_size = ipow(c, mode);
    CMatrix out = CMatrix::Zero(c, c);
    const auto& r = rho.elements();
    for (int n = 0; n < c; ++n) {
        for (int m = 0; m < c; ++m) {
            cplx acc = 0.0;
            for (std::size_t o = 0; o < outer_size; ++o) {
                for (std::size_t i = 0; i < inner_size; ++i) {
                    const auto row = static_cast<Eigen::Index>((o * c + n) * inner_size + i);
                    const auto col = static_cast<Eigen::Index>((o * c + m) * inner_size + i);
                    acc += r(row, col);
                }
            }
            out(n, m) = acc;
        }
    }
    return DensityMatrix(1, rho.cutoff(), std::move(out));
}

inline DensityMatrix normalize(const DensityMatrix& rho) {
    const double tr = rho.trace();
    if (std::abs(tr) < kZeroNormTolerance) throw Error(Errc::ZeroNorm, "density matrix has zero trace");
    return DensityMatrix(rho.num_modes(), rho.cutoff(), rho.elements() / tr);
}

/// Photon-number distribution of a single-mode state.
inline Eigen::VectorXd photon_distribution(const StateVector& state) {
    if (state.num_modes() != 1) throw Error(Errc::MultiModeInput, "photon_distribution expects one mode");
    return state.amplitudes().cwiseAbs2();
}

inline double mean_photon(const DensityMatrix& rho) {
    if (rho.num_modes() != 1) throw Error(Errc::MultiModeInput, "mean_photon expects one mode");
    double n = 0.0;
    for (Eigen::Index k = 0; k < rho.dim(); ++k) n += static_cast<double>(k) * rho.elements()(k, k).real();
    return n;
}

// ---------------------------------------------------------------------------
// Save/load. The record is
//   {"format": "qgadget.state", "version": 1, "num_modes": M, "cutoff": c,
//    "layout": "row-major, mode 0 slowest",
//    "amplitudes": [re_0, im_0, re_1, im_1, ...]}

inline constexpr const char* kStateFormat = "qgadget.state";
inline constexpr const char* kStateLayout = "row-major, mode 0 slowest";

inline nlohmann::json state_to_json(const StateVector& state) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(2 * state.dim()));
    for (Eigen::Index i = 0; i < state.dim(); ++i) {
        flat.push_back(state.amplitudes()(i).real());
        flat.push_back(state.amplitudes()(i).imag());
    }
    return {{"format", kStateFormat},     {"version", 1},
            {"num_modes", state.num_modes()}, {"cutoff", state.cutoff().value()},
            {"layout", kStateLayout},     {"amplitudes", std::move(flat)}};
}

inline StateVector state_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != kStateFormat) {
        throw Error(Errc::InvalidArgument, "not a qgadget.state record");
    }
    const int modes = j.at("num_modes").get<int>();
    const CutoffDim cutoff(j.at("cutoff").get<int>());
    const auto flat = j.at("amplitudes").get<std::vector<double>>();
    if (flat.size() != 2 * ipow(cutoff.value(), modes)) {
        throw Error(Errc::ShapeMismatch, "amplitude array length does not match shape");
    }
    CVector amps(static_cast<Eigen::Index>(flat.size() / 2));
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps(i) = cplx(flat[2 * i], flat[2 * i + 1]);
    return StateVector(modes, cutoff, std::move(amps));
}

}  // namespace qgadget
