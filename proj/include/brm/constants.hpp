#pragma once

#include <cstdint>
#include <string>

#include "brm/saddle.hpp"

namespace brm {

/// Problem constants measured on a dataset, around its saddle point.
///
/// rho_hat is exact (the dual Hessian is diagonal). The rest are probe-set
/// estimates inside the stated ball: L_hat a max of gradient difference
/// quotients, G_hat a max of per-sample gradient norms, mu_pl_hat and
/// mu_qg_hat minima of the Polyak-Lojasiewicz and quadratic-growth ratios
/// of Phi. alpha = 4*L_hat^2/rho_hat^2 and c_hat = min{mu_pl_hat/2,
/// rho_hat/2} are the derived quantities the bounds consume.
struct ConstantsEstimate {
    double L_hat = 0.0;
    double G_hat = 0.0;
    double rho_hat = 0.0;
    double mu_pl_hat = 0.0;
    double mu_qg_hat = 0.0;
    double alpha = 0.0;
    double c_hat = 0.0;
    double ball_radius = 0.0;
    int probe_budget = 0;
    std::uint64_t seed = 0;
    std::string method_notes;
};

/// Probes mix isotropic Gaussian directions at radii spread over
/// (0, ball_radius] with per-coordinate axis probes, all centered at the
/// saddle. Axis probes make the PL/QG minima exact for diagonal quadratics.
ConstantsEstimate estimate_constants(const Parameterization& param, double beta,
                                     const TransitionDataset& data,
                                     const SaddleSolution& saddle, double ball_radius,
                                     int probe_budget, std::uint64_t seed);

} // namespace brm
