#include "brm/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "brm/errors.hpp"
#include "brm/mdp.hpp"

namespace brm {

namespace {

/// Spectral (Barzilai-Borwein) gradient descent with a nonmonotone Armijo
/// safeguard. The BB step (s's)/(s'y) adapts to the local curvature, which
/// matters here: the primal Hessian mixes group weights of order 1/n with the
/// squared residual map, so plain 1/L steps crawl on ill-conditioned
/// instances. Deterministic: no randomness anywhere.
///
/// radius > 0 turns this into spectral projected descent over the centered
/// ball of that radius; stationarity is then measured by the unit-step
/// gradient mapping ||w - P(w - g)||, which reduces to ||g|| in the interior.
template <typename ValueFn, typename GradFn>
Eigen::VectorXd descend(const Eigen::VectorXd& w0, ValueFn value_at, GradFn grad_at, double tol,
                        int max_iter, const char* who, int* iters_out, double* grad_norm_out,
                        double radius = 0.0) {
    constexpr std::size_t kMemory = 10;       // Grippo-style reference window
    constexpr double kArmijo = 1e-4;  // sufficient-decrease fraction
    const auto project = [radius](Eigen::VectorXd x) {
        if (radius > 0.0) {
            const double nrm = x.norm();
            if (nrm > radius) x *= radius / nrm;
        }
        return x;
    };
    Eigen::VectorXd w = project(w0);
    double value = value_at(w);
    // A genuinely unbounded objective (the fixed-dual primal can lose
    // coercivity once beta exceeds 1/2) sends the value to -inf instead of
    // flattening out; detect that and fail loudly rather than spin.
    const double floor = -1e12 * (1.0 + std::abs(value));
    std::vector<double> recent(1, value);
    Eigen::VectorXd w_prev, g_prev;
    double step = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd grad = grad_at(w);
        const double crit =
            radius > 0.0 ? (w - project(w - grad)).norm() : grad.norm();
        if (crit <= tol) {
            if (iters_out != nullptr) *iters_out = it;
            if (grad_norm_out != nullptr) *grad_norm_out = crit;
            return w;
        }
        if (it > 0) {
            const Eigen::VectorXd s = w - w_prev;
            const Eigen::VectorXd y = grad - g_prev;
            const double sty = s.dot(y);
            if (sty > 0.0) step = s.squaredNorm() / sty;
            else step *= 2.0;  // negative curvature along s: probe further
        }
        step = std::min(std::max(step, 1e-12), 1e8);
        const double reference = *std::max_element(recent.begin(), recent.end());
        w_prev = w;
        g_prev = grad;
        for (;;) {
            const Eigen::VectorXd trial = project(w - step * grad);
            const double trial_value = value_at(trial);
            // Displacement form of sufficient decrease; identical to the
            // classical step*|g|^2 condition when no projection occurs.
            const double decrease = (trial - w).squaredNorm() / step;
            if (trial_value <= reference - kArmijo * decrease) {
                w = trial;
                value = trial_value;
                break;
            }
            step *= 0.5;
            if (step < 1e-18)
                throw ConvergenceError(std::string(who) +
                                       ": line search collapsed (stationarity measure " +
                                       std::to_string(crit) + ")");
        }
        if (value < floor)
            throw ConvergenceError(std::string(who) +
                                   ": objective is unbounded below along the descent path");
        recent.push_back(value);
        if (recent.size() > kMemory) recent.erase(recent.begin());
    }
    throw ConvergenceError(std::string(who) + ": exceeded " + std::to_string(max_iter) +
                           " iterations");
}

/// The empirical-frequency MDP of a fully covering tabular dataset. Phi for
/// the tabular parameterization equals the squared Bellman residual under
/// these frequencies, so the soft fixed point of this MDP minimizes Phi with
/// value zero; it is the natural warm start.
bool empirical_mdp_start(const Parameterization& param, double beta, const WeightedBatch& batch,
                         Eigen::VectorXd& w_out) {
    if (param.kind != ParamKind::tabular || param.dim_dual != param.dim_primal) return false;
    const int S = param.n_states, A = param.n_actions;
    TabularMdp emp;
    emp.n_states = S;
    emp.n_actions = A;
    emp.beta = beta;
    emp.reward.assign(static_cast<std::size_t>(S), std::vector<double>(static_cast<std::size_t>(A), 0.0));
    emp.transition.assign(static_cast<std::size_t>(S),
                          std::vector<std::vector<double>>(
                              static_cast<std::size_t>(A),
                              std::vector<double>(static_cast<std::size_t>(S), 0.0)));
    emp.init_dist.assign(static_cast<std::size_t>(S), 1.0 / S);
    std::vector<double> mass(static_cast<std::size_t>(S) * A, 0.0);
    for (std::size_t j = 0; j < batch.samples.size(); ++j) {
        const Sample& z = batch.samples[j];
        const auto flat = static_cast<std::size_t>(z.s) * A + z.a;
        mass[flat] += batch.weights[j];
        emp.transition[static_cast<std::size_t>(z.s)][static_cast<std::size_t>(z.a)]
                      [static_cast<std::size_t>(z.s_next)] += batch.weights[j];
        emp.reward[static_cast<std::size_t>(z.s)][static_cast<std::size_t>(z.a)] +=
            batch.weights[j] * z.r;
    }
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double m = mass[static_cast<std::size_t>(s) * A + a];
            if (m <= 0.0) return false;  // not fully covering: no clean fixed point
            emp.reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] /= m;
            for (int sn = 0; sn < S; ++sn)
                emp.transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]
                              [static_cast<std::size_t>(sn)] /= m;
        }
    const SoftSolution sol = solve_soft_optimal(emp, 1e-13);
    w_out.resize(param.dim_primal);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) w_out(s * A + a) = sol.q_star(s, a);
    return true;
}

} // namespace

SaddleSolution solve_saddle(const Parameterization& param, double beta,
                            const WeightedBatch& batch, double tol, int max_iter) {
    if (!(tol > 0.0)) throw DomainError("solve_saddle: tol must be positive");
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(param.dim_primal);
    Eigen::VectorXd warm;
    if (empirical_mdp_start(param, beta, batch, warm)) w0 = std::move(warm);
    SaddleSolution sol;
    sol.x_star = descend(
        w0, [&](const Eigen::VectorXd& w) { return phi_value(param, beta, w, batch); },
        [&](const Eigen::VectorXd& w) { return phi_grad(param, beta, w, batch); }, tol, max_iter,
        "solve_saddle", &sol.iterations, &sol.grad_norm);
    sol.v_star = dual_argmax(param, sol.x_star, batch);
    sol.phi_star = phi_value(param, beta, sol.x_star, batch);
    return sol;
}

SaddleSolution solve_saddle(const Parameterization& param, double beta,
                            const TransitionDataset& data, double tol, int max_iter) {
    return solve_saddle(param, beta, WeightedBatch::from_dataset(data), tol, max_iter);
}

Eigen::VectorXd minimize_fixed_dual(const Parameterization& param, double beta,
                                    const WeightedBatch& batch, const Eigen::VectorXd& v,
                                    const Eigen::VectorXd& w0, double tol, int max_iter,
                                    double radius) {
    if (v.size() != param.dim_dual) throw DomainError("minimize_fixed_dual: v has wrong size");
    if (radius < 0.0) throw DomainError("minimize_fixed_dual: radius must be nonnegative");
    return descend(
        w0,
        [&](const Eigen::VectorXd& w) {
            return full_batch(param, beta, ParamPoint{w, v}, batch).value;
        },
        [&](const Eigen::VectorXd& w) {
            ObjectiveEval ev = full_batch(param, beta, ParamPoint{w, v}, batch);
            return ev.grad_w;
        },
        tol, max_iter, "minimize_fixed_dual", nullptr, nullptr, radius);
}

double lyapunov_potential(const Parameterization& param, double beta, const ParamPoint& p,
                          const WeightedBatch& batch, const SaddleSolution& saddle,
                          double alpha) {
    if (!(alpha >= 0.0)) throw DomainError("lyapunov_potential: alpha must be nonnegative");
    return (phi_value(param, beta, p.w, batch) - saddle.phi_star) +
           alpha * gamma_value(param, beta, p, batch);
}

double lyapunov_potential(const Parameterization& param, double beta, const ParamPoint& p,
                          const TransitionDataset& data, const SaddleSolution& saddle,
                          double alpha) {
    return lyapunov_potential(param, beta, p, WeightedBatch::from_dataset(data), saddle, alpha);
}

} // namespace brm
