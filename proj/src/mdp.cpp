#include "brm/mdp.hpp"

#include <cmath>
#include <sstream>

#include "brm/errors.hpp"
#include "brm/numerics.hpp"
#include "brm/rng.hpp"

namespace brm {

namespace {
constexpr double kDistTol = 1e-12;

void check_distribution(const double* p, int n, const std::string& what) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(p[i] >= 0.0)) throw DomainError(what + ": negative or NaN probability");
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > kDistTol)
        throw DomainError(what + ": probabilities sum to " + std::to_string(sum));
}
} // namespace

void TabularMdp::validate() const {
    if (n_states < 1 || n_actions < 1)
        throw DomainError("mdp: n_states and n_actions must be positive");
    if (!(beta >= 0.0 && beta < 1.0))
        throw DomainError("mdp: beta must lie in [0,1), got " + std::to_string(beta));
    if (static_cast<int>(reward.size()) != n_states ||
        static_cast<int>(transition.size()) != n_states ||
        static_cast<int>(init_dist.size()) != n_states)
        throw DomainError("mdp: outer dimensions disagree with n_states");
    for (int s = 0; s < n_states; ++s) {
        if (static_cast<int>(reward[s].size()) != n_actions ||
            static_cast<int>(transition[s].size()) != n_actions)
            throw DomainError("mdp: row " + std::to_string(s) + " disagrees with n_actions");
        for (int a = 0; a < n_actions; ++a) {
            if (!std::isfinite(reward[s][a]))
                throw DomainError("mdp: non-finite reward at (" + std::to_string(s) + "," +
                                  std::to_string(a) + ")");
            if (static_cast<int>(transition[s][a].size()) != n_states)
                throw DomainError("mdp: transition row length mismatch");
            std::ostringstream tag;
            tag << "mdp: transition(" << s << "," << a << ")";
            check_distribution(transition[s][a].data(), n_states, tag.str());
        }
    }
    check_distribution(init_dist.data(), n_states, "mdp: init_dist");
}

double TabularMdp::r_max() const {
    double m = 0.0;
    for (const auto& row : reward)
        for (double r : row) m = std::max(m, std::abs(r));
    return m;
}

Eigen::MatrixXd soft_bellman_apply(const TabularMdp& mdp, const Eigen::MatrixXd& q) {
    const int S = mdp.n_states, A = mdp.n_actions;
    if (q.rows() != S || q.cols() != A) throw DomainError("soft_bellman_apply: q shape mismatch");
    Eigen::VectorXd value(S);
    std::vector<double> row(static_cast<std::size_t>(A));
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) row[static_cast<std::size_t>(a)] = q(s, a);
        value(s) = logsumexp(row.data(), A);
    }
    Eigen::MatrixXd out(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double acc = 0.0;
            const auto& p = mdp.transition[s][a];
            for (int sn = 0; sn < S; ++sn) acc += p[sn] * value(sn);
            out(s, a) = mdp.reward[s][a] + mdp.beta * acc;
        }
    }
    return out;
}

SoftSolution solve_soft_optimal(const TabularMdp& mdp, double tol, int max_iter) {
    mdp.validate();
    if (!(tol > 0.0)) throw DomainError("solve_soft_optimal: tol must be positive");
    const int S = mdp.n_states, A = mdp.n_actions;
    // With contraction modulus beta, a sup-norm step of tol*(1-beta)/beta
    // certifies ||q - q*||_inf <= tol. beta = 0 converges in one sweep.
    const double stop =
        mdp.beta > 0.0 ? tol * (1.0 - mdp.beta) / mdp.beta : std::numeric_limits<double>::max();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(S, A);
    SoftSolution sol;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::MatrixXd next = soft_bellman_apply(mdp, q);
        const double step = (next - q).lpNorm<Eigen::Infinity>();
        q = std::move(next);
        sol.iterations = it;
        if (step <= stop) break;
        if (it == max_iter)
            throw ConvergenceError("solve_soft_optimal: no convergence in " +
                                   std::to_string(max_iter) + " iterations");
    }
    sol.q_star = q;
    sol.residual = (soft_bellman_apply(mdp, q) - q).lpNorm<Eigen::Infinity>();
    sol.v_star.resize(S);
    sol.pi_star.resize(S, A);
    std::vector<double> row(static_cast<std::size_t>(A)), soft(static_cast<std::size_t>(A));
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) row[static_cast<std::size_t>(a)] = q(s, a);
        sol.v_star(s) = logsumexp_softmax(row.data(), A, soft.data());
        for (int a = 0; a < A; ++a) sol.pi_star(s, a) = soft[static_cast<std::size_t>(a)];
    }
    return sol;
}

Eigen::MatrixXd uniform_policy(const TabularMdp& mdp) {
    return Eigen::MatrixXd::Constant(mdp.n_states, mdp.n_actions, 1.0 / mdp.n_actions);
}

Eigen::VectorXd occupancy_distribution(const TabularMdp& mdp, const Eigen::MatrixXd& policy) {
    mdp.validate();
    const int S = mdp.n_states, A = mdp.n_actions;
    if (policy.rows() != S || policy.cols() != A)
        throw DomainError("occupancy_distribution: policy shape mismatch");
    Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double pa = policy(s, a);
            for (int sn = 0; sn < S; ++sn) p_pi(s, sn) += pa * mdp.transition[s][a][sn];
        }
    Eigen::VectorXd nu0(S);
    for (int s = 0; s < S; ++s) nu0(s) = mdp.init_dist[s];
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(S, S) - mdp.beta * p_pi.transpose();
    Eigen::VectorXd d = system.partialPivLu().solve((1.0 - mdp.beta) * nu0);
    // The solution of the occupancy equation is a distribution; renormalize
    // away solver round-off only.
    return d / d.sum();
}

Eigen::MatrixXd occupancy_weight(const TabularMdp& mdp, const Eigen::MatrixXd& policy) {
    const Eigen::VectorXd d = occupancy_distribution(mdp, policy);
    Eigen::MatrixXd weight(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) weight(s, a) = d(s) * policy(s, a);
    return weight;
}

TabularMdp make_random_mdp(int n_states, int n_actions, double beta, std::uint64_t seed,
                           double dirichlet_alpha, double r_max) {
    if (n_states < 1 || n_actions < 1)
        throw DomainError("make_random_mdp: dimensions must be positive");
    if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("make_random_mdp: beta must lie in [0,1)");
    if (!(dirichlet_alpha > 0.0)) throw DomainError("make_random_mdp: alpha must be positive");
    CounterRng rng(seed, streams::mdp_gen);
    TabularMdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.beta = beta;
    mdp.reward.assign(n_states, std::vector<double>(n_actions));
    mdp.transition.assign(
        n_states, std::vector<std::vector<double>>(n_actions, std::vector<double>(n_states)));
    mdp.init_dist.assign(n_states, 1.0 / n_states);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            mdp.reward[s][a] = r_max * rng.uniform();
            double sum = 0.0;
            for (int sn = 0; sn < n_states; ++sn) {
                mdp.transition[s][a][sn] = rng.gamma(dirichlet_alpha);
                sum += mdp.transition[s][a][sn];
            }
            for (int sn = 0; sn < n_states; ++sn) mdp.transition[s][a][sn] /= sum;
        }
    mdp.validate();
    return mdp;
}

} // namespace brm
