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

// Training stack: penalized loss, BFGS local search with finite-difference
// gradients, basinhopping, two-stage training and the probability sweep.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "qgadget/errors.hpp"
#include "qgadget/fock.hpp"
#include "qgadget/gadgets.hpp"
#include "qgadget/metrics.hpp"
#include "qgadget/parallel.hpp"

namespace qgadget {

enum class LossHandle { FidOnly, FidProb };

struct LossConfig {
    Architecture architecture = Architecture::ThreeMode;
    StateVector target = vacuum(1, CutoffDim(kDefaultCutoff));
    std::vector<PnrOutcome> pnr = default_pnr_pattern(Architecture::ThreeMode);
    CutoffDim cutoff{kDefaultCutoff};
    LossHandle handle = LossHandle::FidOnly;
    double penalty_weight = 100.0;
};

struct LossTerms {
    double value = 0.0;
    double fidelity = 0.0;
    double probability = 0.0;
    double penalty = 0.0;
    bool zero_norm = false;
};

/// FidOnly: -fid + penalty.  FidProb: -fid - prob + penalty, i.e. the
/// probability is rewarded. penalty = w (|1 - normIn| + |1 - normOut|).
/// An impossible post-selection returns +w so the function stays finite.
inline LossTerms loss_terms(std::span<const double> x, const LossConfig& cfg) {
    const CircuitParams p = unpack_params(x, cfg.architecture, cfg.pnr);
    const GadgetEvaluation ev = evaluate_gadget(p, cfg.cutoff);
    LossTerms t;
    t.penalty = cfg.penalty_weight * (std::abs(1.0 - ev.norm_in) + std::abs(1.0 - ev.norm_out));
    t.probability = ev.probability;
    if (!(ev.probability >= kZeroNormTolerance) || !std::isfinite(t.penalty)) {
        t.zero_norm = true;
        t.value = cfg.penalty_weight;
        return t;
    }
    t.fidelity = std::norm(ev.output.dot(cfg.target.amplitudes())) / ev.probability;
    t.value = -t.fidelity + t.penalty;
    if (cfg.handle == LossHandle::FidProb) t.value -= t.probability;
    if (!std::isfinite(t.value)) t.value = cfg.penalty_weight;
    return t;
}

inline double loss(std::span<const double> x, const LossConfig& cfg) { return loss_terms(x, cfg).value; }

// ---------------------------------------------------------------------------
// Local search.

using Objective = std::function<double(const std::vector<double>&)>;

struct LocalOptions {
    double tol = 1e-9;    // relative change in f between iterations
    double gtol = 1e-6;   // infinity norm of the gradient
    int max_iters = 200;
};

struct LocalResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

inline double checked(const Objective& f, const std::vector<double>& x, long& evals) {
    ++evals;
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteLoss, "objective returned a non-finite value");
    return v;
}

inline Eigen::VectorXd fd_gradient(const Objective& f, std::vector<double> x, long& evals) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double h = 1e-6 * std::max(1.0, std::abs(xi));
        x[i] = xi + h;
        const double fp = checked(f, x, evals);
        x[i] = xi - h;
        const double fm = checked(f, x, evals);
        x[i] = xi;
        g(static_cast<Eigen::Index>(i)) = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

/// BFGS with central finite-difference gradients and Armijo backtracking.
/// Never returns a point worse than x0.
inline LocalResult local_minimize(const Objective& f, const std::vector<double>& x0, const LocalOptions& opt = {}) {
    LocalResult res;
    const auto n = static_cast<Eigen::Index>(x0.size());
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
    double fx = detail::checked(f, x0, res.evaluations);
    if (n == 0) return {x0, fx, 0, res.evaluations, true};
    Eigen::VectorXd g = detail::fd_gradient(f, x0, res.evaluations);
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    bool first = true;

    for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
        if (g.lpNorm<Eigen::Infinity>() <= opt.gtol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd d = -h * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            h.setIdentity();
            d = -g;
            slope = -g.squaredNorm();
        }
        // Armijo backtracking.
        double step = 1.0;
        if (first) step = std::min(1.0, 1.0 / std::max(1e-12, d.lpNorm<Eigen::Infinity>()));
        Eigen::VectorXd x_new;
        double f_new = fx;
        bool found = false;
        for (int k = 0; k < 50; ++k) {
            x_new = x + step * d;
            f_new = detail::checked(f, detail::to_std(x_new), res.evaluations);
            if (f_new <= fx + 1e-4 * step * slope) {
                found = true;
                break;
            }
            step *= 0.5;
        }
        if (!found) {
            if (!first) {
                // Retry once along steepest descent with a fresh metric.
                h.setIdentity();
                first = true;
                continue;
            }
            res.converged = true;  // no descent direction at this resolution
            break;
        }
        const Eigen::VectorXd g_new = detail::fd_gradient(f, detail::to_std(x_new), res.evaluations);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (first) h *= sy / y.squaredNorm();
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h * y;
            h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
            first = false;
        }
        const double df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if (df <= opt.tol * std::max(1.0, std::abs(fx))) {
            res.converged = true;
            ++res.iterations;
            break;
        }
    }
    res.x = detail::to_std(x);
    res.f = fx;
    return res;
}

// ---------------------------------------------------------------------------
// Basinhopping.

struct HopperConfig {
    int niter = 40;
    double step_size = 1.0;
    double temperature = 1.0;
    std::uint64_t seed = 0;
    double local_tol = 1e-9;
    double local_gtol = 1e-6;
    int max_local_iters = 200;
    // Stop hopping once the best loss drops below this value.
    double stop_below = -std::numeric_limits<double>::infinity();
};

struct HopResult {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> trace;  // best-ever loss after the initial search and after each hop
    int accepted = 0;
};

/// Optional extra acceptance rule applied to every local minimum, in
/// addition to Metropolis. Rejected minima never become the incumbent or the
/// best-ever point.
using AcceptTest = std::function<bool(const std::vector<double>& x, double f)>;

inline HopResult basinhopping(const Objective& f, const std::vector<double>& x0, const HopperConfig& cfg,
                              std::mt19937_64& rng, const AcceptTest& accept_test = {}) {
    if (cfg.niter < 0 || !(cfg.step_size > 0.0) || !(cfg.temperature > 0.0)) {
        throw Error(Errc::InvalidArgument, "basinhopping needs niter >= 0, step_size > 0, temperature > 0");
    }
    const LocalOptions lo{cfg.local_tol, cfg.local_gtol, cfg.max_local_iters};
    auto passes = [&](const LocalResult& r) { return !accept_test || accept_test(r.x, r.f); };
    LocalResult cur = local_minimize(f, x0, lo);
    // An initial minimum that fails the test is kept as the walker position
    // (so hops start from it) but only replaces the best point as a last resort.
    bool have_best = passes(cur);
    HopResult out{cur.x, cur.f, {}, 0};
    if (have_best) out.trace.push_back(out.f);
    std::uniform_real_distribution<double> jump(-cfg.step_size, cfg.step_size);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int it = 0; it < cfg.niter && !(have_best && out.f < cfg.stop_below); ++it) {
        std::vector<double> trial = cur.x;
        for (double& v : trial) v += jump(rng);
        LocalResult cand = local_minimize(f, trial, lo);
        // Metropolis: always accept downhill, uphill with exp(-(f_new - f_old) / T).
        const double u = unit(rng);
        const bool metropolis = cand.f < cur.f || u < std::exp(-(cand.f - cur.f) / cfg.temperature);
        if (metropolis && passes(cand)) {
            cur = std::move(cand);
            ++out.accepted;
            if (!have_best || cur.f < out.f) {
                out.f = cur.f;
                out.x = cur.x;
                have_best = true;
            }
        }
        if (have_best) out.trace.push_back(out.f);
    }
    if (out.trace.empty()) out.trace.push_back(out.f);
    return out;
}

inline HopResult basinhopping(const Objective& f, const std::vector<double>& x0, const HopperConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return basinhopping(f, x0, cfg, rng);
}

// ---------------------------------------------------------------------------
// Gadget training.

struct TrainConfig {
    std::vector<PnrOutcome> pnr;  // empty: architecture default
    CutoffDim cutoff{kDefaultCutoff};
    HopperConfig hopper;
    double penalty_weight = 100.0;
    std::uint64_t run_index = 0;
    int stage2 = -1;  // -1: ThreeMode only, 0: never, 1: always
    // Stage 1 stops early once the fidelity reaches this value (1 disables).
    double stop_fidelity = 1.0;
    // Stage-1 minima heralded with lower probability are rejected. This keeps
    // the search away from the vanishing-squeezing limit, where the heralded
    // state tends to the target while the probability tends to zero.
    double min_probability = 1e-5;
    // Stage 2 may lower the fidelity by at most this much below stage 1
    // (quadratic barrier); infinity gives the plain -fid - prob local search.
    double stage2_fidelity_drop = 3e-3;
};

struct TrainedResult {
    CircuitParams params;
    double fidelity = 0.0;
    double probability = 0.0;
    double loss_value = 0.0;
    double norm_in = 1.0;
    double norm_out = 1.0;
    double stage1_fidelity = 0.0;
    double stage1_probability = 0.0;
    std::vector<double> trace;
};

/// Random starting point: r in [0, 0.8], phases in [0, 2pi),
/// displacements in [-1.5, 1.5], theta in [0, pi/2].
inline std::vector<double> random_initial_point(Architecture arch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> r(0.0, 0.8);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> disp(-1.5, 1.5);
    std::uniform_real_distribution<double> theta(0.0, 0.5 * std::numbers::pi);
    CircuitParams p = CircuitParams::zeros(arch);
    for (auto& v : p.squeeze_r) v = r(rng);
    for (auto& v : p.squeeze_phase) v = phase(rng);
    for (auto& v : p.disp_mag) v = disp(rng);
    if (complex_displacements(arch)) {
        for (auto& v : p.disp_phase) v = phase(rng);
    }
    for (auto& v : p.bs_theta) v = theta(rng);
    for (auto& v : p.bs_phi) v = phase(rng);
    return pack_params(p);
}

/// RNG stream owned by one run, derived from (seed, run index).
inline std::mt19937_64 run_rng(std::uint64_t seed, std::uint64_t run_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run_index), static_cast<std::uint32_t>(run_index >> 32)};
    return std::mt19937_64(seq);
}

inline LossConfig make_loss_config(Architecture arch, const StateVector& target, const TrainConfig& cfg,
                                   LossHandle handle) {
    if (target.num_modes() != 1 || target.cutoff() != cfg.cutoff) {
        throw Error(Errc::ShapeMismatch, "target must be single-mode at the training cutoff");
    }
    LossConfig lc;
    lc.architecture = arch;
    lc.target = target;
    lc.pnr = cfg.pnr.empty() ? default_pnr_pattern(arch) : cfg.pnr;
    lc.cutoff = cfg.cutoff;
    lc.handle = handle;
    lc.penalty_weight = cfg.penalty_weight;
    if (!(lc.penalty_weight > 0.0)) throw Error(Errc::InvalidArgument, "penalty_weight must be positive");
    unpack_params(std::vector<double>(param_count(arch), 0.0), arch, lc.pnr).validate();
    return lc;
}

inline TrainedResult summarize(const std::vector<double>& x, const LossConfig& lc, double loss_value,
                               std::vector<double> trace) {
    const CircuitParams p = unpack_params(x, lc.architecture, lc.pnr);
    const GadgetEvaluation ev = evaluate_gadget(p, lc.cutoff);
    TrainedResult r;
    r.params = canonicalize(p);
    r.probability = ev.probability;
    r.fidelity = ev.probability >= kZeroNormTolerance
                     ? std::min(1.0, std::norm(ev.output.dot(lc.target.amplitudes())) / ev.probability)
                     : 0.0;
    r.loss_value = loss_value;
    r.norm_in = ev.norm_in;
    r.norm_out = ev.norm_out;
    r.trace = std::move(trace);
    return r;
}

/// Stage 1: basinhopping on -fid + penalty from a random start.
/// Stage 2 (ThreeMode by default): local search on -fid - prob + penalty.
inline TrainedResult train_gadget(Architecture arch, const StateVector& target, const TrainConfig& cfg) {
    LossConfig lc = make_loss_config(arch, target, cfg, LossHandle::FidOnly);
    std::mt19937_64 rng = run_rng(cfg.hopper.seed, cfg.run_index);
    const std::vector<double> x0 = random_initial_point(arch, rng);

    HopperConfig hc = cfg.hopper;
    if (cfg.stop_fidelity < 1.0) hc.stop_below = std::min(hc.stop_below, -cfg.stop_fidelity);
    const Objective f1 = [&lc](const std::vector<double>& x) { return loss(x, lc); };
    AcceptTest feasible;
    if (cfg.min_probability > 0.0) {
        feasible = [&lc, floor = cfg.min_probability](const std::vector<double>& x, double) {
            return loss_terms(x, lc).probability >= floor;
        };
    }
    HopResult hop = basinhopping(f1, x0, hc, rng, feasible);

    TrainedResult stage1 = summarize(hop.x, lc, hop.f, hop.trace);
    const bool run_stage2 = cfg.stage2 == 1 || (cfg.stage2 < 0 && arch == Architecture::ThreeMode);
    if (!run_stage2) {
        stage1.stage1_fidelity = stage1.fidelity;
        stage1.stage1_probability = stage1.probability;
        return stage1;
    }
    LossConfig lc2 = lc;
    lc2.handle = LossHandle::FidProb;
    const double floor = stage1.fidelity - cfg.stage2_fidelity_drop;
    const Objective f2 = [&lc2, floor](const std::vector<double>& x) {
        const LossTerms t = loss_terms(x, lc2);
        if (t.zero_norm) return t.value;
        const double gap = std::max(0.0, floor - t.fidelity);
        return t.value + 1e4 * gap * gap;
    };
    const LocalResult loc = local_minimize(f2, hop.x, {hc.local_tol, hc.local_gtol, hc.max_local_iters});
    TrainedResult out = summarize(loc.x, lc2, loc.f, hop.trace);
    out.stage1_fidelity = stage1.fidelity;
    out.stage1_probability = stage1.probability;
    return out;
}

struct ProbOptConfig {
    int nbh = 20;
    // Candidates must lie within this distance of the best fidelity.
    // Infinity picks the highest probability among all runs.
    double fidelity_band = 1e-3;
    int workers = 1;
};

/// nbh independent fidelity-only trainings (run indices 0..nbh-1); returns
/// the highest-probability run inside the fidelity band of the best run.
inline TrainedResult prob_opt(Architecture arch, const StateVector& target, TrainConfig cfg, const ProbOptConfig& po) {
    if (po.nbh < 1) throw Error(Errc::InvalidArgument, "nbh must be >= 1");
    cfg.stage2 = 0;
    const std::uint64_t base = cfg.run_index;
    const auto runs = parallel_map(static_cast<std::size_t>(po.nbh), po.workers, [&](std::size_t i) {
        TrainConfig c = cfg;
        c.run_index = base + i;
        return train_gadget(arch, target, c);
    });
    double best_fid = 0.0;
    for (const auto& r : runs) best_fid = std::max(best_fid, r.fidelity);
    std::size_t pick = 0;
    bool have = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].fidelity < best_fid - po.fidelity_band) continue;
        if (!have || runs[i].probability > runs[pick].probability) {
            pick = i;
            have = true;
        }
    }
    return runs[pick];
}

struct SweepRow {
    std::vector<PnrOutcome> pattern;
    TrainedResult result;
};

/// One training per PNR pattern; rows sorted by pattern counts.
inline std::vector<SweepRow> pnr_sweep(Architecture arch, const StateVector& target,
                                       std::vector<std::vector<PnrOutcome>> patterns, const TrainConfig& cfg,
                                       int workers = 1) {
    auto key = [](const std::vector<PnrOutcome>& p) {
        std::vector<std::pair<int, int>> k;
        for (const auto& o : p) k.emplace_back(o.mode, o.count);
        std::sort(k.begin(), k.end());
        std::vector<int> counts;
        for (const auto& [m, c] : k) counts.push_back(c);
        return counts;
    };
    std::sort(patterns.begin(), patterns.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    auto results = parallel_map(patterns.size(), workers, [&](std::size_t i) {
        TrainConfig c = cfg;
        c.pnr = patterns[i];
        return train_gadget(arch, target, c);
    });
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < patterns.size(); ++i) rows.push_back({patterns[i], std::move(results[i])});
    return rows;
}

// ---------------------------------------------------------------------------
// Persistence.

inline nlohmann::json trained_to_json(const TrainedResult& r) {
    return {{"params", params_to_json(r.params)},
            {"params_csv_header", params_csv_header(r.params.architecture)},
            {"params_csv_row", params_csv_row(r.params)},
            {"fidelity", r.fidelity},
            {"probability", r.probability},
            {"loss_value", r.loss_value},
            {"norm_in", r.norm_in},
            {"norm_out", r.norm_out},
            {"stage1_fidelity", r.stage1_fidelity},
            {"stage1_probability", r.stage1_probability},
            {"trace", r.trace}};
}

inline TrainedResult trained_from_json(const nlohmann::json& j) {
    TrainedResult r;
    r.params = params_from_json(j.at("params"));
    r.fidelity = j.at("fidelity").get<double>();
    r.probability = j.at("probability").get<double>();
    r.loss_value = j.at("loss_value").get<double>();
    r.norm_in = j.value("norm_in", 1.0);
    r.norm_out = j.value("norm_out", 1.0);
    r.stage1_fidelity = j.value("stage1_fidelity", r.fidelity);
    r.stage1_probability = j.value("stage1_probability", r.probability);
    r.trace = j.at("trace").get<std::vector<double>>();
    return r;
}

}  // namespace qgadget
