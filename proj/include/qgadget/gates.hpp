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

// Gate matrices in the truncated Fock basis.
//
// Two truncation policies are offered:
//
//  * Truncation::Cropped (default): the matrix elements <m|G|n> of the
//    infinite-dimensional gate for m, n < cutoff. S, D and B use exact
//    Fock-basis recurrences; functions of x and C_x are exponentiated in a
//    larger working space and cropped. These matrices are not unitary when the
//    gate moves weight above the cutoff, so norm loss measures truncation
//    leakage.
//
//  * Truncation::Closed: the matrix exponential of the generator built from
//    cutoff-truncated ladder operators. Exactly unitary, with the truncation
//    error folded back into the top Fock levels.
//
// Two-mode gate matrices index the pair (n_first, n_second) as
// n_first * cutoff + n_second, where `first` is the first entry of the mode
// list passed to apply().

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qgadget/errors.hpp"
#include "qgadget/fock.hpp"

namespace qgadget {

enum class Truncation { Cropped, Closed };

struct GateMatrix {
    int arity = 1;
    CutoffDim cutoff{2};
    CMatrix elements;

    GateMatrix(int arity_, CutoffDim cutoff_, CMatrix elements_)
        : arity(arity_), cutoff(cutoff_), elements(std::move(elements_)) {
        const auto d = static_cast<Eigen::Index>(ipow(cutoff.value(), arity));
        if ((arity != 1 && arity != 2) || elements.rows() != d || elements.cols() != d) {
            throw Error(Errc::ShapeMismatch, "gate matrix must be cutoff^arity square with arity 1 or 2");
        }
    }

    static GateMatrix identity(int arity, CutoffDim cutoff) {
        const auto d = static_cast<Eigen::Index>(ipow(cutoff.value(), arity));
        return GateMatrix(arity, cutoff, CMatrix::Identity(d, d));
    }
};

/// Squeezing in dB for magnitude r: 10 log10(e^{2r}).
inline double squeezing_db(double r) { return 10.0 * std::log10(std::exp(2.0 * r)); }
inline double squeezing_from_db(double db) { return db * std::log(10.0) / 20.0; }

// ---------------------------------------------------------------------------
// Ladder and quadrature operators (hbar = 2).

inline CMatrix annihilation(int dim) {
    CMatrix a = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline CMatrix creation(int dim) { return annihilation(dim).adjoint(); }

inline CMatrix quadrature_x(int dim) {
    const CMatrix a = annihilation(dim);
    return a + a.adjoint();
}

inline CMatrix quadrature_p(int dim) {
    const CMatrix a = annihilation(dim);
    return cplx(0.0, -1.0) * (a - a.adjoint());
}

inline CMatrix number_operator(int dim) {
    CMatrix n = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

/// Working dimension used to crop gates that have no closed recurrence.
inline int working_dim(int cutoff) { return std::max(3 * cutoff, cutoff + 60); }

/// Scaling-and-squaring matrix exponential.
inline CMatrix expm(const CMatrix& generator) { return generator.exp(); }

inline CMatrix crop(const CMatrix& m, int dim) { return m.topLeftCorner(dim, dim); }

namespace detail {

inline void check_truncation_risk(const char* gate, double magnitude, double limit, int cutoff) {
    if (magnitude > limit && cutoff < 20) {
        warn(Errc::TruncationRisk, std::string(gate) + " parameter magnitude " + std::to_string(magnitude) +
                                       " is large for cutoff " + std::to_string(cutoff));
    }
}

/// Exact <m|S(z)|n>, m, n < c, for S(z) = exp[(conj(z) a^2 - z a^dag^2) / 2].
inline CMatrix squeeze_cropped(cplx z, int c) {
    const double r = std::abs(z);
    const double phi = std::arg(z);
    CMatrix s = CMatrix::Zero(c, c);
    if (r == 0.0) return CMatrix::Identity(c, c);
    const double sech = 1.0 / std::cosh(r);
    const double t = std::tanh(r);
    const cplx ratio = -std::polar(t, phi);
    s(0, 0) = std::sqrt(sech);
    for (int m = 2; m < c; m += 2) {
        s(m, 0) = s(m - 2, 0) * ratio * std::sqrt(static_cast<double>(m - 1) / m);
    }
    const cplx conj_phase_t = std::polar(t, -phi);
    for (int n = 0; n + 1 < c; ++n) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(n + 1));
        for (int m = 0; m < c; ++m) {
            cplx v = 0.0;
            if (m > 0) v += std::sqrt(static_cast<double>(m)) * sech * s(m - 1, n);
            if (n > 0) v += conj_phase_t * std::sqrt(static_cast<double>(n)) * s(m, n - 1);
            s(m, n + 1) = v * inv;
        }
    }
    return s;
}

/// Exact <m|D(alpha)|n>, m, n < c.
inline CMatrix displace_cropped(cplx alpha, int c) {
    CMatrix d = CMatrix::Zero(c, c);
    d(0, 0) = std::exp(-0.5 * std::norm(alpha));
    for (int m = 1; m < c; ++m) d(m, 0) = d(m - 1, 0) * alpha / std::sqrt(static_cast<double>(m));
    const cplx ca = std::conj(alpha);
    for (int n = 0; n + 1 < c; ++n) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(n + 1));
        for (int m = 0; m < c; ++m) {
            cplx v = -ca * d(m, n);
            if (m > 0) v += std::sqrt(static_cast<double>(m)) * d(m - 1, n);
            d(m, n + 1) = v * inv;
        }
    }
    return d;
}

/// D(alpha)|0> truncated to c levels (the first column of displace_cropped).
inline CVector coherent_column(cplx alpha, int c) {
    CVector v(c);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int m = 1; m < c; ++m) v(m) = v(m - 1) * alpha / std::sqrt(static_cast<double>(m));
    return v;
}

/// Exact <n|S(z) D(alpha)|0>, n < c. Uses S D(alpha) = D(beta) S and the
/// three-term recurrence of the displaced squeezed vacuum,
///   psi_{n+1} sqrt(n+1) = b psi_n + A sqrt(n) psi_{n-1},
/// with A = -e^{i phi} tanh r and b = beta + conj(beta) e^{i phi} tanh r.
inline CVector squeezed_coherent_column(cplx z, cplx alpha, int c) {
    const double r = std::abs(z);
    const cplx e = std::polar(1.0, std::arg(z));
    const double t = std::tanh(r);
    const cplx beta = alpha * std::cosh(r) - std::conj(alpha) * e * std::sinh(r);
    const cplx a = -e * t;
    const cplx b = beta + std::conj(beta) * e * t;
    CVector v(c);
    v(0) = std::exp(-0.5 * std::norm(beta) - 0.5 * std::conj(beta) * std::conj(beta) * e * t) / std::sqrt(std::cosh(r));
    if (c > 1) v(1) = b * v(0);
    for (int n = 1; n + 1 < c; ++n) {
        v(n + 1) = (b * v(n) + a * std::sqrt(static_cast<double>(n)) * v(n - 1)) / std::sqrt(n + 1.0);
    }
    return v;
}

/// Real symmetric eigendecomposition of the truncated x quadrature.
struct XSpectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline XSpectrum x_spectrum(int dim) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x);
    return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace detail

/// f(x) for a scalar function f, via the spectral decomposition of x.
inline GateMatrix function_of_x(const std::function<cplx(double)>& f, CutoffDim cutoff,
                                Truncation truncation = Truncation::Cropped) {
    const int c = cutoff.value();
    const int dim = truncation == Truncation::Cropped ? working_dim(c) : c;
    const auto spec = detail::x_spectrum(dim);
    const Eigen::MatrixXd u = spec.vectors.topRows(c);
    CVector fv(dim);
    for (int j = 0; j < dim; ++j) fv(j) = f(spec.values(j));
    const CMatrix uc = u.cast<cplx>();
    return GateMatrix(1, cutoff, uc * fv.asDiagonal() * uc.transpose());
}

inline GateMatrix squeeze(cplx z, CutoffDim cutoff, Truncation truncation = Truncation::Cropped) {
    const int c = cutoff.value();
    detail::check_truncation_risk("squeeze", std::abs(z), 1.5, c);
    if (truncation == Truncation::Cropped) return GateMatrix(1, cutoff, detail::squeeze_cropped(z, c));
    const CMatrix a = annihilation(c);
    const CMatrix gen = 0.5 * (std::conj(z) * a * a - z * a.adjoint() * a.adjoint());
    return GateMatrix(1, cutoff, expm(gen));
}

inline GateMatrix displace(cplx alpha, CutoffDim cutoff, Truncation truncation = Truncation::Cropped) {
    const int c = cutoff.value();
    detail::check_truncation_risk("displace", std::abs(alpha), 2.5, c);
    if (truncation == Truncation::Cropped) return GateMatrix(1, cutoff, detail::displace_cropped(alpha, c));
    const CMatrix a = annihilation(c);
    return GateMatrix(1, cutoff, expm(alpha * a.adjoint() - std::conj(alpha) * a));
}

/// V(gamma) = exp[i gamma x^3 / hbar], hbar = 2.
inline GateMatrix cubic_phase(double gamma, CutoffDim cutoff, Truncation truncation = Truncation::Cropped) {
    return function_of_x([gamma](double x) { return std::polar(1.0, 0.5 * gamma * x * x * x); }, cutoff,
                         truncation);
}

// ---------------------------------------------------------------------------
// Beamsplitter B(theta, phi) = exp[theta (e^{i phi} a1 a2^dag - e^{-i phi} a1^dag a2)].
// It conserves total photon number, so the matrix is block diagonal over
// N = n1 + n2 and is stored that way.

struct PairBlock {
    int total = 0;
    std::vector<int> first;  // n1 of each basis state; n2 = total - n1
    CMatrix u;               // u(r, s) = <first[r], total-first[r]| B |first[s], total-first[s]>
};

struct BlockGate {
    CutoffDim cutoff{2};
    std::vector<PairBlock> blocks;

    CMatrix dense() const {
        const int c = cutoff.value();
        CMatrix out = CMatrix::Zero(c * c, c * c);
        for (const auto& b : blocks) {
            for (std::size_t r = 0; r < b.first.size(); ++r) {
                const int row = b.first[r] * c + (b.total - b.first[r]);
                for (std::size_t s = 0; s < b.first.size(); ++s) {
                    const int col = b.first[s] * c + (b.total - b.first[s]);
                    out(row, col) = b.u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
                }
            }
        }
        return out;
    }
};

namespace detail {

inline std::vector<int> block_states(int total, int c) {
    std::vector<int> first;
    for (int k1 = std::max(0, total - (c - 1)); k1 <= std::min(total, c - 1); ++k1) first.push_back(k1);
    return first;
}

/// Exact cropped beamsplitter via B|n1,n2> = u1^{n1} u2^{n2} |0,0> / sqrt(n1! n2!),
/// u1 = cos a1^dag + e^{i phi} sin a2^dag, u2 = cos a2^dag - e^{-i phi} sin a1^dag.
inline BlockGate beamsplitter_cropped(double theta, double phi, int c) {
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const cplx ep = std::polar(st, phi);
    const cplx em = std::polar(st, -phi);
    // col[(n1 * c + n2) * c + k1] = <k1, n1+n2-k1| B |n1, n2>
    const auto cu = static_cast<std::size_t>(c);
    std::vector<cplx> col(cu * cu * cu, cplx(0.0));
    auto at = [&](int n1, int n2) { return col.data() + (static_cast<std::size_t>(n1) * cu + static_cast<std::size_t>(n2)) * cu; };
    std::vector<double> sq(static_cast<std::size_t>(2 * c + 1));
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = std::sqrt(static_cast<double>(k));
    at(0, 0)[0] = 1.0;
    for (int n1 = 0; n1 < c; ++n1) {
        if (n1 > 0) {
            // raise with u1 = cos a1^dag + e^{i phi} sin a2^dag
            const cplx* prev = at(n1 - 1, 0);
            cplx* out = at(n1, 0);
            const double inv = 1.0 / sq[static_cast<std::size_t>(n1)];
            for (int k1 = std::max(0, n1 - (c - 1)); k1 <= std::min(n1, c - 1); ++k1) {
                const int k2 = n1 - k1;
                cplx v = 0.0;
                if (k1 > 0) v += ct * sq[static_cast<std::size_t>(k1)] * prev[k1 - 1];
                if (k2 > 0) v += ep * sq[static_cast<std::size_t>(k2)] * prev[k1];
                out[k1] = v * inv;
            }
        }
        for (int n2 = 1; n2 < c; ++n2) {
            // raise with u2 = cos a2^dag - e^{-i phi} sin a1^dag
            const int total = n1 + n2;
            const cplx* prev = at(n1, n2 - 1);
            cplx* out = at(n1, n2);
            const double inv = 1.0 / sq[static_cast<std::size_t>(n2)];
            for (int k1 = std::max(0, total - (c - 1)); k1 <= std::min(total, c - 1); ++k1) {
                const int k2 = total - k1;
                cplx v = 0.0;
                if (k2 > 0) v += ct * sq[static_cast<std::size_t>(k2)] * prev[k1];
                if (k1 > 0) v -= em * sq[static_cast<std::size_t>(k1)] * prev[k1 - 1];
                out[k1] = v * inv;
            }
        }
    }
    BlockGate gate{CutoffDim(c), {}};
    gate.blocks.reserve(static_cast<std::size_t>(2 * c - 1));
    for (int total = 0; total <= 2 * (c - 1); ++total) {
        PairBlock b;
        b.total = total;
        b.first = block_states(total, c);
        const auto k = static_cast<Eigen::Index>(b.first.size());
        b.u.resize(k, k);
        for (Eigen::Index s = 0; s < k; ++s) {
            const int n1 = b.first[static_cast<std::size_t>(s)];
            const cplx* v = at(n1, total - n1);
            for (Eigen::Index r = 0; r < k; ++r) b.u(r, s) = v[b.first[static_cast<std::size_t>(r)]];
        }
        gate.blocks.push_back(std::move(b));
    }
    return gate;
}

inline BlockGate beamsplitter_closed(double theta, double phi, int c) {
    BlockGate gate{CutoffDim(c), {}};
    const cplx ep = std::polar(theta, phi);
    const cplx em = std::polar(theta, -phi);
    for (int total = 0; total <= 2 * (c - 1); ++total) {
        PairBlock b;
        b.total = total;
        b.first = block_states(total, c);
        const auto k = static_cast<Eigen::Index>(b.first.size());
        CMatrix gen = CMatrix::Zero(k, k);
        // basis index s <-> (k1 = first[s], k2 = total - k1); first[] is increasing
        for (Eigen::Index s = 0; s < k; ++s) {
            const int k1 = b.first[static_cast<std::size_t>(s)];
            const int k2 = total - k1;
            if (s > 0) gen(s - 1, s) += ep * std::sqrt(static_cast<double>(k1) * (k2 + 1));  // a1 a2^dag
            if (s + 1 < k) gen(s + 1, s) -= em * std::sqrt(static_cast<double>(k1 + 1) * k2);  // a1^dag a2
        }
        b.u = expm(gen);
        gate.blocks.push_back(std::move(b));
    }
    return gate;
}

}  // namespace detail

inline BlockGate beamsplitter_blocks(double theta, double phi, CutoffDim cutoff,
                                     Truncation truncation = Truncation::Cropped) {
    return truncation == Truncation::Cropped ? detail::beamsplitter_cropped(theta, phi, cutoff.value())
                                             : detail::beamsplitter_closed(theta, phi, cutoff.value());
}

inline GateMatrix beamsplitter(double theta, double phi, CutoffDim cutoff,
                               Truncation truncation = Truncation::Cropped) {
    return GateMatrix(2, cutoff, beamsplitter_blocks(theta, phi, cutoff, truncation).dense());
}

/// C_x = exp[-i x_1 p_2 / 2]: shifts x_2 by x_1.
inline GateMatrix controlled_x(CutoffDim cutoff, Truncation truncation = Truncation::Cropped) {
    const int c = cutoff.value();
    const int dim = truncation == Truncation::Cropped ? working_dim(c) : c;
    const auto xs = detail::x_spectrum(dim);
    // p = F x F^dag with F = exp(i pi n / 2), so its eigenvectors are F U.
    CMatrix vp(c, dim);
    for (int n = 0; n < c; ++n) {
        const cplx phase = std::polar(1.0, 0.5 * std::numbers::pi * n);
        for (int k = 0; k < dim; ++k) vp(n, k) = phase * xs.vectors(n, k);
    }
    const Eigen::MatrixXd ux = xs.vectors.topRows(c);
    const Eigen::VectorXd& lam = xs.values;  // spectrum of x and of p coincide

    // bx((m1,n1), j) = U[m1,j] U[n1,j];  bp((m2,n2), k) = V[m2,k] conj(V[n2,k])
    CMatrix bx(c * c, dim);
    CMatrix bp(c * c, dim);
    for (int m = 0; m < c; ++m) {
        for (int n = 0; n < c; ++n) {
            for (int j = 0; j < dim; ++j) {
                bx(m * c + n, j) = ux(m, j) * ux(n, j);
                bp(m * c + n, j) = vp(m, j) * std::conj(vp(n, j));
            }
        }
    }
    CMatrix phases(dim, dim);
    for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) phases(j, k) = std::polar(1.0, -0.5 * lam(j) * lam(k));
    }
    const CMatrix t = phases * bp.transpose();  // (j, (m2,n2))
    const CMatrix g = bx * t;                   // ((m1,n1), (m2,n2))
    CMatrix out(c * c, c * c);
    for (int m1 = 0; m1 < c; ++m1) {
        for (int n1 = 0; n1 < c; ++n1) {
            for (int m2 = 0; m2 < c; ++m2) {
                for (int n2 = 0; n2 < c; ++n2) out(m1 * c + m2, n1 * c + n2) = g(m1 * c + n1, m2 * c + n2);
            }
        }
    }
    return GateMatrix(2, cutoff, std::move(out));
}

// ---------------------------------------------------------------------------
// Application to states.

namespace detail {

inline void check_modes(std::span<const int> modes, int num_modes) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] < 0 || modes[i] >= num_modes) throw Error(Errc::ModeOutOfRange, "gate mode out of range");
        for (std::size_t j = 0; j < i; ++j) {
            if (modes[i] == modes[j]) throw Error(Errc::ModeOutOfRange, "gate modes must be distinct");
        }
    }
}

/// Offsets of every multi-index over the modes not in `skip`.
inline std::vector<std::size_t> spectator_offsets(int num_modes, int c, std::span<const int> skip) {
    std::vector<std::size_t> offsets{0};
    for (int mode = 0; mode < num_modes; ++mode) {
        if (std::find(skip.begin(), skip.end(), mode) != skip.end()) continue;
        const std::size_t stride = mode_stride(num_modes, c, mode);
        std::vector<std::size_t> next;
        next.reserve(offsets.size() * static_cast<std::size_t>(c));
        for (std::size_t base : offsets) {
            for (int n = 0; n < c; ++n) next.push_back(base + static_cast<std::size_t>(n) * stride);
        }
        offsets = std::move(next);
    }
    return offsets;
}

inline void apply_single_inplace(const CMatrix& g, int mode, StateVector& state) {
    const int c = state.cutoff().value();
    const std::size_t inner = mode_stride(state.num_modes(), c, mode);
    const std::size_t outer = ipow(c, mode);
    using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    CVector& amps = state.amplitudes();
    RowMajor tmp(c, static_cast<Eigen::Index>(inner));
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<RowMajor> block(amps.data() + o * c * inner, c, static_cast<Eigen::Index>(inner));
        tmp.noalias() = g * block;
        block = tmp;
    }
}

}  // namespace detail

/// Apply a block-diagonal pair gate to modes (first, second).
inline StateVector apply(const BlockGate& gate, int first, int second, const StateVector& state) {
    if (gate.cutoff != state.cutoff()) throw Error(Errc::ShapeMismatch, "gate cutoff differs from state cutoff");
    const int modes_arr[2] = {first, second};
    detail::check_modes(modes_arr, state.num_modes());
    const int m = state.num_modes();
    const int c = state.cutoff().value();
    const std::size_t s1 = mode_stride(m, c, first);
    const std::size_t s2 = mode_stride(m, c, second);
    const auto spectators = detail::spectator_offsets(m, c, modes_arr);
    const auto ns = static_cast<Eigen::Index>(spectators.size());
    const CVector& in = state.amplitudes();
    CVector out(in.size());
    CMatrix gathered(c, ns);
    CMatrix moved(c, ns);
    std::vector<std::size_t> base(static_cast<std::size_t>(c));
    for (const auto& b : gate.blocks) {
        const auto k = static_cast<Eigen::Index>(b.first.size());
        for (Eigen::Index r = 0; r < k; ++r) {
            const int n1 = b.first[static_cast<std::size_t>(r)];
            base[static_cast<std::size_t>(r)] = static_cast<std::size_t>(n1) * s1 + static_cast<std::size_t>(b.total - n1) * s2;
            for (Eigen::Index s = 0; s < ns; ++s) gathered(r, s) = in(static_cast<Eigen::Index>(base[static_cast<std::size_t>(r)] + spectators[static_cast<std::size_t>(s)]));
        }
        moved.topRows(k).noalias() = b.u * gathered.topRows(k);
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index s = 0; s < ns; ++s) out(static_cast<Eigen::Index>(base[static_cast<std::size_t>(r)] + spectators[static_cast<std::size_t>(s)])) = moved(r, s);
        }
    }
    return StateVector(m, state.cutoff(), std::move(out));
}

inline StateVector apply(const GateMatrix& gate, std::span<const int> modes, const StateVector& state) {
    if (static_cast<int>(modes.size()) != gate.arity) throw Error(Errc::ShapeMismatch, "mode list length != gate arity");
    if (gate.cutoff != state.cutoff()) throw Error(Errc::ShapeMismatch, "gate cutoff differs from state cutoff");
    detail::check_modes(modes, state.num_modes());
    if (gate.arity == 1) {
        StateVector out = state;
        detail::apply_single_inplace(gate.elements, modes[0], out);
        return out;
    }
    const int m = state.num_modes();
    const int c = state.cutoff().value();
    const std::size_t s1 = mode_stride(m, c, modes[0]);
    const std::size_t s2 = mode_stride(m, c, modes[1]);
    const auto spectators = detail::spectator_offsets(m, c, modes);
    std::vector<std::size_t> pair(static_cast<std::size_t>(c * c));
    for (int a = 0; a < c; ++a) {
        for (int b = 0; b < c; ++b) pair[static_cast<std::size_t>(a * c + b)] = a * s1 + b * s2;
    }
    const CVector& in = state.amplitudes();
    CVector out(in.size());
    CVector gathered(c * c);
    for (std::size_t off : spectators) {
        for (std::size_t p = 0; p < pair.size(); ++p) gathered(static_cast<Eigen::Index>(p)) = in(static_cast<Eigen::Index>(off + pair[p]));
        const CVector moved = gate.elements * gathered;
        for (std::size_t p = 0; p < pair.size(); ++p) out(static_cast<Eigen::Index>(off + pair[p])) = moved(static_cast<Eigen::Index>(p));
    }
    return StateVector(m, state.cutoff(), std::move(out));
}

inline StateVector apply(const GateMatrix& gate, std::initializer_list<int> modes, const StateVector& state) {
    return apply(gate, std::span<const int>(modes.begin(), modes.size()), state);
}

/// G applied to a single-mode state.
inline StateVector apply(const GateMatrix& gate, const StateVector& state) { return apply(gate, {0}, state); }

}  // namespace qgadget
