#pragma once

#include "brm/constants.hpp"
#include "brm/stability.hpp"

namespace brm {

/// One checked inequality: how many probes, how many violations, and the
/// worst slack = max over probes of (lhs - rhs). Negative slack means the
/// inequality held with room.
struct CheckLine {
    std::string name;
    int probes = 0;
    int violations = 0;
    double worst_slack = 0.0;
};

struct LemmaCheckReport {
    std::vector<CheckLine> lines;
    bool all_ok() const;
    std::string summary() const;
};

struct LemmaCheckOptions {
    int probes = 100;
    double ball_radius = 1.0;
    std::uint64_t seed = 0;
    int neighbor_pairs = 20;  // probes for the saddle-shift inequality
};

/// Property checks for the structural inequalities behind the stability
/// analysis, all evaluated with the measured constants:
///   gradient-gap:    ||grad_w F(w,v) - grad Phi(w)|| <= L ||v - v*(w)||
///   dual-distance:   ||v - v*(w)||^2 <= (2/rho) Gamma(w,v)
///   argmax-lipschitz:||v*(w) - v*(u)|| <= (L/rho) ||w - u||
///   phi-smoothness:  ||grad Phi(w) - grad Phi(u)|| <= L(1+L/rho) ||w - u||
///   distance-potential: ||w - x*|| + ||v - v*|| <= C_dist sqrt(Psi)
///   saddle-shift:    replace-one saddle movement <= (2G/n)((1+L/rho)^2 /
///                    sqrt(mu_pl mu_qg) + 1/rho)
///   ascent-contraction: Gamma after one dual ascent step at stepsize eta
///                    <= (1 - 2 rho eta + rho L eta^2) Gamma
LemmaCheckReport check_lemmas(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                              const Parameterization& param, const TransitionDataset& data,
                              const SaddleSolution& saddle, const ConstantsEstimate& k,
                              const LemmaCheckOptions& opt);

/// The ascent-contraction factor specializes to (1 - rho*eta)^2 when the dual
/// curvature is uniform (all group weights equal, so L_vv = rho). Returns the
/// largest |Gamma(v+)/Gamma(v) - (1-rho*eta)^2| over probes; the caller
/// asserts it is ~0 on an equal-count dataset.
double ascent_contraction_equality_gap(const Parameterization& param, double beta,
                                       const TransitionDataset& data, double eta, int probes,
                                       std::uint64_t seed);

} // namespace brm
