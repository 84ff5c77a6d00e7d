#pragma once

#include <Eigen/Dense>
#include <vector>

#include "brm/parameterization.hpp"

namespace brm {

/// Value and exact gradients of the saddle objective at one point.
struct ObjectiveEval {
    double value = 0.0;
    Eigen::VectorXd grad_w;
    Eigen::VectorXd grad_v;
};

/// Samples with probability weights. A dataset is the special case of
/// uniform weights 1/n; the exact population objective enumerates every
/// (s,a,s') with weight d(s,a)*P(s'|s,a). All saddle-objective evaluations
/// reduce to this form, so empirical and population quantities share one
/// code path.
struct WeightedBatch {
    std::vector<Sample> samples;
    std::vector<double> weights;  // nonnegative, sum to 1

    static WeightedBatch from_dataset(const TransitionDataset& data);

    /// Exact enumeration of the law weight(s,a)*P(s'|s,a). Throws
    /// CoverageError if some weighted pair has no dual coordinate.
    static WeightedBatch population(const TabularMdp& mdp, const Eigen::MatrixXd& weight,
                                    const Parameterization& param);

    /// Dual-group total weights, indexed by dual coordinate.
    std::vector<double> group_weights(const Parameterization& param) const;
};

/// Temporal-difference error delta = r + beta*V_w(s') - q_w(s,a) with
/// V_w(s) = logsumexp_a q_w(s,a).
double td_error(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                const Sample& z);

/// Per-sample saddle integrand
///   f(w,v;z) = delta^2 - beta^2*(V_w(s') - v[g(s,a)])^2,
/// with analytic gradients in w and v. Throws CoverageError when (s,a) has no
/// dual coordinate.
ObjectiveEval per_sample_objective(const Parameterization& param, double beta,
                                   const ParamPoint& p, const Sample& z);

/// Weighted-mean objective F(w,v) with gradients; summation order is the
/// sample order with compensated accumulation, so results are deterministic.
ObjectiveEval full_batch(const Parameterization& param, double beta, const ParamPoint& p,
                         const WeightedBatch& batch);

ObjectiveEval full_batch(const Parameterization& param, double beta, const ParamPoint& p,
                         const TransitionDataset& data);

/// Closed-form inner maximizer: per visited (s,a), the weighted mean of
/// V_w(s') over that pair's samples.
Eigen::VectorXd dual_argmax(const Parameterization& param, const Eigen::VectorXd& w,
                            const WeightedBatch& batch);
Eigen::VectorXd dual_argmax(const Parameterization& param, const Eigen::VectorXd& w,
                            const TransitionDataset& data);

/// Primal objective Phi(w) = max_v F(w,v) = F(w, dual_argmax(w)).
double phi_value(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                 const WeightedBatch& batch);
double phi_value(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                 const TransitionDataset& data);

/// Gradient of Phi at w (Danskin: the w-gradient of F at the inner maximizer).
Eigen::VectorXd phi_grad(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                         const WeightedBatch& batch);

/// Duality gap Gamma(w,v) = Phi(w) - F(w,v), evaluated in closed form as
/// beta^2 * sum_g W_g (v_g - v*_g)^2, which is nonnegative by construction.
double gamma_value(const Parameterization& param, double beta, const ParamPoint& p,
                   const WeightedBatch& batch);
double gamma_value(const Parameterization& param, double beta, const ParamPoint& p,
                   const TransitionDataset& data);

/// Exact strong-concavity modulus of F(w, .): 2*beta^2*min_g W_g over dual
/// groups (the dual Hessian is diagonal with entries -2*beta^2*W_g).
double dual_strong_concavity(const Parameterization& param, double beta,
                             const WeightedBatch& batch);

/// Population mean-squared Bellman error under a state-action weighting:
/// sum_{s,a} weight(s,a) * ((Tq_w)(s,a) - q_w(s,a))^2 with the exact kernel.
double msbe_exact(const TabularMdp& mdp, const Parameterization& param,
                  const Eigen::VectorXd& w, const Eigen::MatrixXd& weight);

/// Population mean-squared TD error: sum_{s,a} weight(s,a) *
/// E_{s'~P(.|s,a)}[delta(w; s,a,s')^2].
double mstde_exact(const TabularMdp& mdp, const Parameterization& param,
                   const Eigen::VectorXd& w, const Eigen::MatrixXd& weight);

/// Weighted mean of Var_{s'~P(.|s,a)}[V_w(s')]; the exact gap between the
/// two quantities above is beta^2 times this.
double next_value_variance(const TabularMdp& mdp, const Parameterization& param,
                           const Eigen::VectorXd& w, const Eigen::MatrixXd& weight);

/// Verifies max_h (2 m h - h^2) = m^2 per visited pair, where m is the
/// pair's mean TD error and the grid spans [m-pad, m+pad] plus the exact
/// maximizer h = m. Returns the largest |grid max - m^2| over pairs.
double biconjugate_check(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                         const TransitionDataset& data, int grid_points = 201,
                         double pad = 1.0);

} // namespace brm
