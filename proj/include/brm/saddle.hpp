#pragma once

#include "brm/objective.hpp"

namespace brm {

/// Saddle point of F: x_star minimizes Phi, v_star = dual_argmax(x_star),
/// phi_star = Phi(x_star). grad_norm is ||grad Phi(x_star)|| at exit.
struct SaddleSolution {
    Eigen::VectorXd x_star;
    Eigen::VectorXd v_star;
    double phi_star = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

/// Deterministic full-batch minimization of Phi: gradient descent with Armijo
/// backtracking, dual always at its closed form. Stops when ||grad Phi|| <=
/// tol; throws ConvergenceError past max_iter. For tabular parameterizations
/// whose dataset visits every pair, the iteration is warm-started at the
/// soft fixed point of the empirical MDP, which is that case's exact
/// minimizer up to the logged transition frequencies.
SaddleSolution solve_saddle(const Parameterization& param, double beta,
                            const WeightedBatch& batch, double tol = 1e-10,
                            int max_iter = 200000);
SaddleSolution solve_saddle(const Parameterization& param, double beta,
                            const TransitionDataset& data, double tol = 1e-10,
                            int max_iter = 200000);

/// Same solver applied to w -> F(w, v) at a fixed dual; used by the
/// primal-dual gap, where the outer player best-responds to a frozen v.
///
/// Caution: F(., v) is coercive only for beta < 1/2. Above that, shifting all
/// tabular coordinates by a constant c changes the objective by roughly
/// (1 - 2 beta) c^2, so the unconstrained minimum does not exist and descent
/// from an arbitrary start rides that direction forever (ConvergenceError once
/// the value falls through a floor). Pass radius > 0 to minimize over the
/// centered ball of that radius instead, the bounded parameter set the risk
/// definitions assume; projected descent then stops at a point whose unit-step
/// gradient mapping is below tol. radius = 0 means unconstrained.
Eigen::VectorXd minimize_fixed_dual(const Parameterization& param, double beta,
                                    const WeightedBatch& batch, const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& w0, double tol = 1e-9,
                                    int max_iter = 200000, double radius = 0.0);

/// Lyapunov potential Psi_alpha(w,v) = (Phi(w) - phi_star) + alpha*Gamma(w,v).
/// Nonnegative up to the saddle solver's tolerance.
double lyapunov_potential(const Parameterization& param, double beta, const ParamPoint& p,
                          const WeightedBatch& batch, const SaddleSolution& saddle,
                          double alpha);
double lyapunov_potential(const Parameterization& param, double beta, const ParamPoint& p,
                          const TransitionDataset& data, const SaddleSolution& saddle,
                          double alpha);

} // namespace brm
