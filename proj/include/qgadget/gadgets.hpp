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

// Two- and three-mode state-preparation gadgets.
//
// Each input mode starts in vacuum and receives D(alpha_i) then S(z_i).
// TwoMode:   BS(0,1), PNR on mode 1, output mode 0.
// ThreeMode: BS(0,1), BS(1,2), BS(0,1), PNR on modes 1 and 2, output mode 0.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgadget/channels.hpp"
#include "qgadget/errors.hpp"
#include "qgadget/fock.hpp"
#include "qgadget/gates.hpp"

namespace qgadget {

enum class Architecture { TwoMode, ThreeMode };

inline int num_modes(Architecture arch) { return arch == Architecture::TwoMode ? 2 : 3; }
inline int num_beamsplitters(Architecture arch) { return arch == Architecture::TwoMode ? 1 : 3; }
inline bool complex_displacements(Architecture arch) { return arch == Architecture::TwoMode; }

inline std::size_t param_count(Architecture arch) {
    const std::size_t m = static_cast<std::size_t>(num_modes(arch));
    const std::size_t b = static_cast<std::size_t>(num_beamsplitters(arch));
    return 2 * m + (complex_displacements(arch) ? 2 * m : m) + 2 * b;
}

inline const char* architecture_name(Architecture arch) {
    return arch == Architecture::TwoMode ? "TwoMode" : "ThreeMode";
}

inline Architecture parse_architecture(const std::string& s) {
    if (s == "TwoMode" || s == "two-mode" || s == "2") return Architecture::TwoMode;
    if (s == "ThreeMode" || s == "three-mode" || s == "3") return Architecture::ThreeMode;
    throw Error(Errc::ConfigError, "unknown architecture '" + s + "'");
}

/// (first, second) mode pairs of the beamsplitter array, in order.
inline std::vector<std::pair<int, int>> beamsplitter_layout(Architecture arch) {
    if (arch == Architecture::TwoMode) return {{0, 1}};
    return {{0, 1}, {1, 2}, {0, 1}};
}

inline std::vector<PnrOutcome> default_pnr_pattern(Architecture arch) {
    if (arch == Architecture::TwoMode) return {{1, 2}};
    return {{1, 1}, {2, 2}};
}

/// Builds a PNR pattern on modes 1.. from counts.
inline std::vector<PnrOutcome> pnr_pattern(std::initializer_list<int> counts) {
    std::vector<PnrOutcome> out;
    int mode = 1;
    for (int c : counts) out.push_back({mode++, c});
    return out;
}

struct CircuitParams {
    Architecture architecture = Architecture::ThreeMode;
    std::vector<double> squeeze_r;
    std::vector<double> squeeze_phase;
    std::vector<double> disp_mag;    // may be negative
    std::vector<double> disp_phase;  // all zero for ThreeMode
    std::vector<double> bs_theta;
    std::vector<double> bs_phi;
    std::vector<PnrOutcome> pnr;

    static CircuitParams zeros(Architecture arch) {
        const auto m = static_cast<std::size_t>(num_modes(arch));
        const auto b = static_cast<std::size_t>(num_beamsplitters(arch));
        return {arch,
                std::vector<double>(m, 0.0),
                std::vector<double>(m, 0.0),
                std::vector<double>(m, 0.0),
                std::vector<double>(m, 0.0),
                std::vector<double>(b, 0.0),
                std::vector<double>(b, 0.0),
                default_pnr_pattern(arch)};
    }

    cplx squeezing(int i) const { return std::polar(1.0, squeeze_phase[static_cast<std::size_t>(i)]) * squeeze_r[static_cast<std::size_t>(i)]; }
    cplx displacement(int i) const { return std::polar(1.0, disp_phase[static_cast<std::size_t>(i)]) * disp_mag[static_cast<std::size_t>(i)]; }

    void validate() const {
        const auto m = static_cast<std::size_t>(num_modes(architecture));
        const auto b = static_cast<std::size_t>(num_beamsplitters(architecture));
        if (squeeze_r.size() != m || squeeze_phase.size() != m || disp_mag.size() != m || disp_phase.size() != m ||
            bs_theta.size() != b || bs_phi.size() != b) {
            throw Error(Errc::LengthMismatch, "parameter arrays do not match the architecture");
        }
        if (pnr.size() != m - 1) throw Error(Errc::LengthMismatch, "PNR pattern must cover every non-output mode");
        for (std::size_t i = 0; i < pnr.size(); ++i) {
            if (pnr[i].mode < 1 || pnr[i].mode >= static_cast<int>(m)) throw Error(Errc::ModeOutOfRange, "PNR on the output mode");
            for (std::size_t j = 0; j < i; ++j) {
                if (pnr[i].mode == pnr[j].mode) throw Error(Errc::ModeOutOfRange, "duplicate PNR mode");
            }
        }
    }

    friend bool operator==(const CircuitParams&, const CircuitParams&) = default;
};

/// Flat vector: squeezing magnitudes, squeezing phases, displacements
/// (TwoMode: magnitudes then phases), beamsplitter angles, beamsplitter phases.
inline std::vector<double> pack_params(const CircuitParams& p) {
    p.validate();
    std::vector<double> x;
    x.reserve(param_count(p.architecture));
    x.insert(x.end(), p.squeeze_r.begin(), p.squeeze_r.end());
    x.insert(x.end(), p.squeeze_phase.begin(), p.squeeze_phase.end());
    x.insert(x.end(), p.disp_mag.begin(), p.disp_mag.end());
    if (complex_displacements(p.architecture)) x.insert(x.end(), p.disp_phase.begin(), p.disp_phase.end());
    x.insert(x.end(), p.bs_theta.begin(), p.bs_theta.end());
    x.insert(x.end(), p.bs_phi.begin(), p.bs_phi.end());
    return x;
}

inline CircuitParams unpack_params(std::span<const double> x, Architecture arch,
                                   std::optional<std::vector<PnrOutcome>> pnr = std::nullopt) {
    if (x.size() != param_count(arch)) {
        throw Error(Errc::LengthMismatch, "expected " + std::to_string(param_count(arch)) + " parameters, got " +
                                              std::to_string(x.size()));
    }
    CircuitParams p = CircuitParams::zeros(arch);
    if (pnr) p.pnr = *pnr;
    const auto m = static_cast<std::size_t>(num_modes(arch));
    const auto b = static_cast<std::size_t>(num_beamsplitters(arch));
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) p.squeeze_r[i] = x[k++];
    for (std::size_t i = 0; i < m; ++i) p.squeeze_phase[i] = x[k++];
    for (std::size_t i = 0; i < m; ++i) p.disp_mag[i] = x[k++];
    if (complex_displacements(arch)) {
        for (std::size_t i = 0; i < m; ++i) p.disp_phase[i] = x[k++];
    }
    for (std::size_t i = 0; i < b; ++i) p.bs_theta[i] = x[k++];
    for (std::size_t i = 0; i < b; ++i) p.bs_phi[i] = x[k++];
    return p;
}

namespace detail {
inline double wrap_2pi(double phase) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phase, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}
}  // namespace detail

/// Same circuit with r >= 0, phases in [0, 2pi), TwoMode displacement
/// magnitudes >= 0 and beamsplitter angles in [0, pi].
inline CircuitParams canonicalize(CircuitParams p) {
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < p.squeeze_r.size(); ++i) {
        if (p.squeeze_r[i] < 0.0) {
            p.squeeze_r[i] = -p.squeeze_r[i];
            p.squeeze_phase[i] += pi;
        }
        p.squeeze_phase[i] = detail::wrap_2pi(p.squeeze_phase[i]);
    }
    if (complex_displacements(p.architecture)) {
        for (std::size_t i = 0; i < p.disp_mag.size(); ++i) {
            if (p.disp_mag[i] < 0.0) {
                p.disp_mag[i] = -p.disp_mag[i];
                p.disp_phase[i] += pi;
            }
            p.disp_phase[i] = detail::wrap_2pi(p.disp_phase[i]);
        }
    }
    for (std::size_t i = 0; i < p.bs_theta.size(); ++i) {
        // B(theta + 2pi) = B(theta) and B(-theta, phi) = B(theta, phi + pi).
        double t = detail::wrap_2pi(p.bs_theta[i]);
        if (t > pi) {
            t = 2.0 * pi - t;
            p.bs_phi[i] += pi;
        }
        p.bs_theta[i] = t;
        p.bs_phi[i] = detail::wrap_2pi(p.bs_phi[i]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Targets.

/// (|0> + i a sqrt(3/2) |1> + i a |3>) / sqrt(1 + 5 a^2 / 2)
inline StateVector weak_cubic_state(double a, CutoffDim cutoff) {
    if (cutoff.value() < 4) throw Error(Errc::CutoffTooSmall, "weak cubic state needs cutoff >= 4");
    StateVector s(1, cutoff);
    const double n = 1.0 / std::sqrt(1.0 + 2.5 * a * a);
    s.amplitudes()(0) = n;
    s.amplitudes()(1) = cplx(0.0, a * std::sqrt(1.5) * n);
    s.amplitudes()(3) = cplx(0.0, a * n);
    return s;
}

/// Normalized complex-Gaussian coefficients on Fock levels 0..n_c.
inline StateVector random_target(int n_c, std::uint64_t seed, CutoffDim cutoff) {
    if (n_c < 0 || n_c >= cutoff.value()) throw Error(Errc::InvalidArgument, "n_c must satisfy 0 <= n_c < cutoff");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    StateVector s(1, cutoff);
    for (int n = 0; n <= n_c; ++n) {
        const double re = g(rng);
        const double im = g(rng);
        s.amplitudes()(n) = cplx(re, im);
    }
    return normalize(s).state;
}

// ---------------------------------------------------------------------------
// Evaluation.

struct GadgetResult {
    std::optional<StateVector> state;     // pure case, normalized
    std::optional<DensityMatrix> density; // noisy case, normalized
    double probability = 0.0;
    double norm_in = 1.0;   // product of squared input norms
    double norm_out = 1.0;  // squared norm after the beamsplitter array
};

/// Raw evaluation without exceptions: used in the optimizer's inner loop.
struct GadgetEvaluation {
    CVector output;  // unnormalized slice on the output mode
    double probability = 0.0;
    double norm_in = 1.0;
    double norm_out = 1.0;
};

namespace detail {

/// S(z) D(alpha)|0>, exact on the first c levels.
inline CVector input_mode(cplx z, cplx alpha, int c) {
    return squeezed_coherent_column(z, alpha, c);
}

inline StateVector product_state(const std::vector<CVector>& modes, CutoffDim cutoff) {
    StateVector s(1, cutoff, modes[0]);
    for (std::size_t i = 1; i < modes.size(); ++i) s = tensor(s, StateVector(1, cutoff, modes[i]));
    return s;
}

/// Finite-difference gradients move one parameter at a time, so most
/// evaluations reuse the previous beamsplitter blocks. Small per-thread
/// cache keyed on the exact angles.
inline const BlockGate& cached_beamsplitter(double theta, double phi, int c) {
    struct Entry {
        double theta;
        double phi;
        int c;
        BlockGate gate;
    };
    constexpr std::size_t kSlots = 8;
    thread_local std::vector<Entry> cache;
    thread_local std::size_t next = 0;
    if (cache.capacity() < kSlots) cache.reserve(kSlots);
    for (const auto& e : cache) {
        if (e.theta == theta && e.phi == phi && e.c == c) return e.gate;
    }
    Entry fresh{theta, phi, c, beamsplitter_cropped(theta, phi, c)};
    if (cache.size() < kSlots) {
        cache.push_back(std::move(fresh));
        return cache.back().gate;
    }
    Entry& slot = cache[next];
    next = (next + 1) % kSlots;
    slot = std::move(fresh);
    return slot.gate;
}

inline StateVector apply_array(const CircuitParams& p, StateVector s) {
    const auto layout = beamsplitter_layout(p.architecture);
    const int c = s.cutoff().value();
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const BlockGate& b = cached_beamsplitter(p.bs_theta[i], p.bs_phi[i], c);
        s = apply(b, layout[i].first, layout[i].second, s);
    }
    return s;
}

/// Slice at the PNR pattern, leaving the output mode (mode 0).
inline CVector output_slice(const StateVector& s, const std::vector<PnrOutcome>& pnr) {
    const int m = s.num_modes();
    const int c = s.cutoff().value();
    std::size_t offset = 0;
    for (const auto& o : pnr) {
        if (o.count < 0 || o.count >= c) throw Error(Errc::ModeOutOfRange, "PNR count outside cutoff");
        offset += static_cast<std::size_t>(o.count) * mode_stride(m, c, o.mode);
    }
    const std::size_t stride = mode_stride(m, c, 0);
    CVector out(c);
    for (int n = 0; n < c; ++n) out(n) = s.amplitudes()(static_cast<Eigen::Index>(n * stride + offset));
    return out;
}

}  // namespace detail

/// Pre-measurement state: beamsplitter array applied to the displaced squeezed inputs.
inline StateVector pre_measurement_state(const CircuitParams& p, CutoffDim cutoff) {
    p.validate();
    const int m = num_modes(p.architecture);
    std::vector<CVector> modes;
    for (int i = 0; i < m; ++i) modes.push_back(detail::input_mode(p.squeezing(i), p.displacement(i), cutoff.value()));
    return detail::apply_array(p, detail::product_state(modes, cutoff));
}

inline GadgetEvaluation evaluate_gadget(const CircuitParams& p, CutoffDim cutoff) {
    const int m = num_modes(p.architecture);
    const int c = cutoff.value();
    GadgetEvaluation ev;
    std::vector<CVector> modes;
    modes.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        modes.push_back(detail::input_mode(p.squeezing(i), p.displacement(i), c));
        ev.norm_in *= modes.back().squaredNorm();
    }
    const StateVector out = detail::apply_array(p, detail::product_state(modes, cutoff));
    ev.norm_out = out.squared_norm();
    ev.output = detail::output_slice(out, p.pnr);
    ev.probability = ev.output.squaredNorm();
    return ev;
}

namespace detail {
inline void warn_parameters(const CircuitParams& p, int c) {
    for (int i = 0; i < num_modes(p.architecture); ++i) {
        check_truncation_risk("squeeze", std::abs(p.squeezing(i)), 1.5, c);
        check_truncation_risk("displace", std::abs(p.displacement(i)), 2.5, c);
    }
}
}  // namespace detail

inline GadgetResult run_gadget(const CircuitParams& p, CutoffDim cutoff) {
    p.validate();
    detail::warn_parameters(p, cutoff.value());
    GadgetEvaluation ev = evaluate_gadget(p, cutoff);
    GadgetResult r;
    r.state = normalize(StateVector(1, cutoff, std::move(ev.output))).state;
    r.probability = ev.probability;
    r.norm_in = ev.norm_in;
    r.norm_out = ev.norm_out;
    return r;
}

/// Gadget with identical source loss on every input mode and detector loss
/// in front of each PNR detector. The lossy inputs are decomposed into their
/// eigen-ensembles, each product term is propagated through the (unitary)
/// beamsplitter array, and the lossy PNR detection acts as the diagonal POVM
/// sum_n C(n, m) eta^m (1 - eta)^(n - m) |n><n|.
inline GadgetResult run_gadget_noisy(const CircuitParams& p, double eta_src, double eta_det, int kmax,
                                     CutoffDim cutoff) {
    p.validate();
    if (!(eta_src > 0.0 && eta_src <= 1.0) || !(eta_det > 0.0 && eta_det <= 1.0)) {
        throw Error(Errc::InvalidArgument, "eta_src and eta_det must lie in (0, 1]");
    }
    detail::warn_parameters(p, cutoff.value());
    const int m = num_modes(p.architecture);
    const int c = cutoff.value();

    struct Component {
        double weight;
        CVector vec;
    };
    std::vector<std::vector<Component>> ensembles(static_cast<std::size_t>(m));
    double norm_in = 1.0;
    for (int i = 0; i < m; ++i) {
        const CVector psi = detail::input_mode(p.squeezing(i), p.displacement(i), c);
        norm_in *= psi.squaredNorm();
        const DensityMatrix rho = apply_loss(DensityMatrix(1, cutoff, psi * psi.adjoint()), 0, eta_src, kmax);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.elements());
        const double top = es.eigenvalues().maxCoeff();
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
            const double w = es.eigenvalues()(k);
            if (w > 1e-14 * top) ensembles[static_cast<std::size_t>(i)].push_back({w, es.eigenvectors().col(k)});
        }
    }

    std::vector<Eigen::VectorXd> povm;
    for (const auto& o : p.pnr) {
        if (o.count < 0 || o.count >= c) throw Error(Errc::ModeOutOfRange, "PNR count outside cutoff");
        povm.push_back(lossy_pnr_weights(eta_det, o.count, c));
    }

    // Enumerate every (k_0, ..., k_{m-1}) combination of ensemble members.
    CMatrix rho_out = CMatrix::Zero(c, c);
    double norm_out = 0.0;
    std::vector<std::size_t> pick(static_cast<std::size_t>(m), 0);
    const std::size_t stride0 = mode_stride(m, c, 0);
    while (true) {
        double weight = 1.0;
        std::vector<CVector> vecs;
        for (int i = 0; i < m; ++i) {
            const auto& comp = ensembles[static_cast<std::size_t>(i)][pick[static_cast<std::size_t>(i)]];
            weight *= comp.weight;
            vecs.push_back(comp.vec);
        }
        const StateVector out = detail::apply_array(p, detail::product_state(vecs, cutoff));
        norm_out += weight * out.squared_norm();
        // Sum over detector photon numbers of the lossy POVM weight.
        const std::size_t pairs = ipow(c, m - 1);
        for (std::size_t rest = 0; rest < pairs; ++rest) {
            double w = weight;
            std::size_t tmp = rest;
            for (int mode = m - 1; mode >= 1; --mode) {
                const int n = static_cast<int>(tmp % static_cast<std::size_t>(c));
                tmp /= static_cast<std::size_t>(c);
                for (std::size_t q = 0; q < p.pnr.size(); ++q) {
                    if (p.pnr[q].mode == mode) w *= povm[q](n);
                }
            }
            if (w == 0.0) continue;
            CVector slice(c);
            for (int n = 0; n < c; ++n) slice(n) = out.amplitudes()(static_cast<Eigen::Index>(n * stride0 + rest));
            rho_out.noalias() += w * slice * slice.adjoint();
        }
        int i = m - 1;
        while (i >= 0 && ++pick[static_cast<std::size_t>(i)] == ensembles[static_cast<std::size_t>(i)].size()) {
            pick[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) break;
    }
    const double prob = rho_out.trace().real();
    if (prob < kZeroNormTolerance) throw Error(Errc::ZeroNorm, "post-selected outcome has zero probability");
    GadgetResult r;
    r.density = DensityMatrix(1, cutoff, rho_out / prob);
    r.probability = prob;
    r.norm_in = norm_in;
    r.norm_out = norm_out;
    return r;
}

// ---------------------------------------------------------------------------
// Serialization.

/// CSV header for the parameter columns, e.g. "r0,r1,phi_r0,phi_r1,d0,d1,phi_d0,phi_d1,theta0,phi0".
inline std::string params_csv_header(Architecture arch) {
    const int m = num_modes(arch);
    const int b = num_beamsplitters(arch);
    std::string h;
    auto add = [&](const std::string& name) { h += (h.empty() ? "" : ",") + name; };
    for (int i = 0; i < m; ++i) add("r" + std::to_string(i));
    for (int i = 0; i < m; ++i) add("phi_r" + std::to_string(i));
    for (int i = 0; i < m; ++i) add("d" + std::to_string(i));
    if (complex_displacements(arch)) {
        for (int i = 0; i < m; ++i) add("phi_d" + std::to_string(i));
    }
    for (int i = 0; i < b; ++i) add("theta" + std::to_string(i));
    for (int i = 0; i < b; ++i) add("phi" + std::to_string(i));
    return h;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string params_csv_row(const CircuitParams& p) {
    std::string row;
    for (double v : pack_params(p)) row += (row.empty() ? "" : ",") + format_double(v);
    return row;
}

inline nlohmann::json params_to_json(const CircuitParams& p) {
    nlohmann::json pnr = nlohmann::json::array();
    for (const auto& o : p.pnr) pnr.push_back({{"mode", o.mode}, {"count", o.count}});
    return {{"architecture", architecture_name(p.architecture)},
            {"squeeze_r", p.squeeze_r},
            {"squeeze_phase", p.squeeze_phase},
            {"disp_mag", p.disp_mag},
            {"disp_phase", p.disp_phase},
            {"bs_theta", p.bs_theta},
            {"bs_phi", p.bs_phi},
            {"pnr", pnr}};
}

inline CircuitParams params_from_json(const nlohmann::json& j) {
    CircuitParams p;
    p.architecture = parse_architecture(j.at("architecture").get<std::string>());
    p.squeeze_r = j.at("squeeze_r").get<std::vector<double>>();
    p.squeeze_phase = j.at("squeeze_phase").get<std::vector<double>>();
    p.disp_mag = j.at("disp_mag").get<std::vector<double>>();
    p.disp_phase = j.at("disp_phase").get<std::vector<double>>();
    p.bs_theta = j.at("bs_theta").get<std::vector<double>>();
    p.bs_phi = j.at("bs_phi").get<std::vector<double>>();
    for (const auto& o : j.at("pnr")) p.pnr.push_back({o.at("mode").get<int>(), o.at("count").get<int>()});
    p.validate();
    return p;
}

}  // namespace qgadget
