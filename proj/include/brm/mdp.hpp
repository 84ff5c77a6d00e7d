#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace brm {

/// Finite MDP with entropy-regularized (soft) control in mind. The discount
/// beta lives here because the soft operator, dataset generation, and the
/// saddle objective all share it.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    double beta = 0.0;
    std::vector<std::vector<double>> reward;                   // [s][a]
    std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s']
    std::vector<double> init_dist;                             // over states

    /// Throws DomainError unless shapes match, beta is in [0,1), every
    /// transition row and init_dist are distributions (within 1e-12), and all
    /// rewards are finite.
    void validate() const;

    double r_max() const;  // max |reward|
};

/// Soft optimal solution: fixed point of the logsumexp Bellman operator,
/// state values v*(s) = logsumexp_a q*(s,a), and the softmax policy.
struct SoftSolution {
    Eigen::MatrixXd q_star;   // S x A
    Eigen::VectorXd v_star;   // S
    Eigen::MatrixXd pi_star;  // S x A, rows sum to 1
    int iterations = 0;
    double residual = 0.0;    // ||T q_star - q_star||_inf, recomputed at exit
};

/// One application of the soft Bellman optimality operator:
/// (Tq)(s,a) = r(s,a) + beta * sum_s' P(s'|s,a) logsumexp_a' q(s',a').
Eigen::MatrixXd soft_bellman_apply(const TabularMdp& mdp, const Eigen::MatrixXd& q);

/// Value iteration from q = 0 until the sup-norm step is at most
/// tol*(1-beta)/beta, which bounds ||q - q*||_inf by tol through the
/// contraction modulus beta. Throws ConvergenceError past max_iter.
SoftSolution solve_soft_optimal(const TabularMdp& mdp, double tol = 1e-12,
                                int max_iter = 1000000);

/// Uniform behavior policy, the default data-collection policy.
Eigen::MatrixXd uniform_policy(const TabularMdp& mdp);

/// Normalized discounted state occupancy of a stationary policy:
/// solves (I - beta * Ppi^T) d = (1-beta) * init_dist.
Eigen::VectorXd occupancy_distribution(const TabularMdp& mdp, const Eigen::MatrixXd& policy);

/// State-action weighting d(s)*pi(a|s) induced by the discounted occupancy;
/// this is the marginal law of the (s,a) pairs emitted in iid_pairs mode.
Eigen::MatrixXd occupancy_weight(const TabularMdp& mdp, const Eigen::MatrixXd& policy);

/// Random instance: Dirichlet(alpha) transition rows, rewards uniform on
/// [0, r_max], uniform initial distribution.
TabularMdp make_random_mdp(int n_states, int n_actions, double beta, std::uint64_t seed,
                           double dirichlet_alpha = 1.0, double r_max = 1.0);

} // namespace brm
