#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "brm/objective.hpp"

namespace brm {

/// Harmonic stepsize c1/(c2+t), clamped at cap.
double harmonic_stepsize(int t, double c1, double c2,
                         double cap = std::numeric_limits<double>::infinity());

/// Minibatch stochastic gradient descent-ascent configuration.
///
/// Indices are drawn from the counter stream (seed, minibatch+index_stream),
/// so two runs configured alike consume identical index sequences. stepsize_cap
/// should be min{1/(4L), 1/rho} when constant estimates are available; the
/// default leaves the schedule uncapped. clip_radius = 0 disables projection
/// (the default: no projection). record_every = 0 records the final point only.
struct SgdaRunConfig {
    int T = 0;
    int B = 1;
    double c1 = 1.0;
    double c2 = 1.0;
    bool with_replacement = true;
    std::uint64_t seed = 0;
    std::uint64_t index_stream = 0;
    int record_every = 10;
    double clip_radius = 0.0;
    double stepsize_cap = std::numeric_limits<double>::infinity();

    /// Throws DomainError on nonsensical settings, including eta_0 > cap and
    /// B > n for without-replacement sampling.
    void validate(int n) const;
};

/// Everything a run leaves behind. iterates_* hold the recorded points
/// (step t is record_ts[k]); index_log is the full T x B draw, row-major,
/// and replaying it through run_sgda reproduces `final` bit for bit.
struct RunTrace {
    int T = 0;
    int B = 1;
    std::vector<int> record_ts;
    std::vector<Eigen::VectorXd> iterates_w;
    std::vector<Eigen::VectorXd> iterates_v;
    std::vector<double> f_log;    // F_D at recorded iterates
    std::vector<double> phi_log;  // Phi_D at recorded iterates
    std::vector<double> eta_log;  // stepsize applied at recorded steps
    std::vector<std::int32_t> index_log;
    ParamPoint final;
};

/// Runs Algorithm-style descent-ascent: at step t draw I_t, average the
/// per-sample gradients, then w -= eta_t * g_w and v += eta_t * g_v.
/// index_override, when given, replaces sampling entirely (size must be T*B).
/// Throws DivergenceError naming the step if an iterate goes non-finite.
RunTrace run_sgda(const Parameterization& param, double beta, const TransitionDataset& data,
                  const SgdaRunConfig& cfg, const ParamPoint& init,
                  const std::vector<std::int32_t>* index_override = nullptr);

/// Default start: w = 0 and v = dual_argmax(w=0), so the dual begins at its
/// inner optimum and Gamma(w0,v0) = 0.
ParamPoint default_init(const Parameterization& param, const TransitionDataset& data);

/// Phi_D(w_t) - phi_star for each recorded iterate. phi_star should come from
/// solve_saddle on the same data.
std::vector<double> suboptimality_curve(const RunTrace& trace, const Parameterization& param,
                                        double beta, const TransitionDataset& data,
                                        double phi_star);

} // namespace brm
