#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "brm/dataset.hpp"

namespace brm {

enum class ParamKind { tabular, linear };

/// How the action-value surrogate q_w and the dual variable are laid out.
///
/// Primal: tabular uses one weight per (s,a) (dim_primal = S*A, flat index
/// s*A+a); linear uses q_w(s,a) = <features(s*A+a,:), w> with full-column-rank
/// features. The dual is always (s,a)-indexed over the pairs visited in the
/// reference dataset, because the inner maximizer is a per-pair group mean
/// regardless of how the primal is parameterized.
struct Parameterization {
    ParamKind kind = ParamKind::tabular;
    int n_states = 0;
    int n_actions = 0;
    int dim_primal = 0;
    int dim_dual = 0;
    Eigen::MatrixXd features;      // (S*A) x dim_primal, empty when tabular
    std::vector<int> dual_index;   // flat (s,a) -> dual coordinate, -1 if unvisited
    std::vector<int> dual_pairs;   // dual coordinate -> flat (s,a)

    static Parameterization tabular(const TabularMdp& mdp, const TransitionDataset& ref);

    /// Throws DomainError unless features has S*A rows and full column rank
    /// (rank-revealing QR).
    static Parameterization linear(const TabularMdp& mdp, const Eigen::MatrixXd& features,
                                   const TransitionDataset& ref);

    /// Random Gaussian feature matrix for linear experiments; includes a
    /// rank retry so the construction above never rejects it.
    static Eigen::MatrixXd gaussian_features(int n_states, int n_actions, int dim,
                                             std::uint64_t seed);

    int flat(int s, int a) const { return s * n_actions + a; }
    int dual_of(int s, int a) const { return dual_index[static_cast<std::size_t>(flat(s, a))]; }

    double q_value(const Eigen::VectorXd& w, int s, int a) const;

    /// Action values at state s written into out (size n_actions).
    void q_row(const Eigen::VectorXd& w, int s, double* out) const;
};

/// Joint primal/dual iterate.
struct ParamPoint {
    Eigen::VectorXd w;
    Eigen::VectorXd v;
};

} // namespace brm
