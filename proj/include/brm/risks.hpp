#pragma once

#include "brm/saddle.hpp"

namespace brm {

/// Population-vs-empirical objective gaps at a trained point.
///
/// r_pop is the population risk R(w) = max_v F_pop(w,v), which closes to the
/// exact weighted mean-squared Bellman error (per-pair population dual
/// optimum E_{s'~P}[V_w(s')]). r_emp is Phi_D(w). pd_* are the primal-dual
/// gap Delta(w,v) = max_v' F(w,v') - min_w' F(w',v) under the population and
/// empirical objectives; the inner minimizations run the deterministic
/// fixed-dual solver over one shared ball around the evaluation point, since
/// the fixed-dual objective is not coercive for beta > 1/2 and the risk
/// definitions assume a bounded parameter set.
struct GapReport {
    double r_pop = 0.0;
    double r_emp = 0.0;
    double primal_gap = 0.0;  // r_pop - r_emp
    double pd_pop = 0.0;
    double pd_emp = 0.0;
    double pd_gap = 0.0;      // pd_pop - pd_emp
};

GapReport generalization_gap(const TabularMdp& mdp, const Parameterization& param,
                             const TransitionDataset& data, const ParamPoint& at,
                             const Eigen::MatrixXd& weight, bool with_pd_gap = true);

/// Excess population risk R(w) - R(theta*), theta* the population minimizer
/// (solved on the exact weighted law; for tabular parameterizations this is
/// the soft optimal q, where the population risk vanishes).
double excess_risk(const TabularMdp& mdp, const Parameterization& param,
                   const Eigen::VectorXd& w, const Eigen::MatrixXd& weight);

/// Population risk R(w) alone (equals msbe_exact; kept as the named entry
/// point so callers do not care about the identity).
double population_risk(const TabularMdp& mdp, const Parameterization& param,
                       const Eigen::VectorXd& w, const Eigen::MatrixXd& weight);

} // namespace brm
