#include "brm/objective.hpp"

#include <cmath>

#include "brm/detail/eval.hpp"
#include "brm/errors.hpp"
#include "brm/numerics.hpp"

namespace brm {

namespace {

void check_point(const Parameterization& param, const Eigen::VectorXd& w,
                 const Eigen::VectorXd* v) {
    if (w.size() != param.dim_primal)
        throw DomainError("objective: w has size " + std::to_string(w.size()) + ", expected " +
                          std::to_string(param.dim_primal));
    if (v != nullptr && v->size() != param.dim_dual)
        throw DomainError("objective: v has size " + std::to_string(v->size()) + ", expected " +
                          std::to_string(param.dim_dual));
}

void check_batch(const WeightedBatch& batch) {
    if (batch.samples.empty()) throw DomainError("objective: empty batch");
    if (batch.samples.size() != batch.weights.size())
        throw DomainError("objective: samples/weights size mismatch");
}

void check_weight(const TabularMdp& mdp, const Eigen::MatrixXd& weight) {
    if (weight.rows() != mdp.n_states || weight.cols() != mdp.n_actions)
        throw DomainError("objective: weight shape mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < weight.size(); ++i) {
        if (!(weight(i) >= 0.0)) throw DomainError("objective: negative weight entry");
        sum += weight(i);
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw DomainError("objective: weights sum to " + std::to_string(sum) + ", expected 1");
}

/// All state values V_w(s) at once; O(S*A).
Eigen::VectorXd state_values(const TabularMdp& mdp, const Parameterization& param,
                             const Eigen::VectorXd& w) {
    Eigen::VectorXd value(mdp.n_states);
    std::vector<double> row(static_cast<std::size_t>(param.n_actions));
    for (int s = 0; s < mdp.n_states; ++s) {
        param.q_row(w, s, row.data());
        value(s) = logsumexp(row.data(), param.n_actions);
    }
    return value;
}

} // namespace

WeightedBatch WeightedBatch::from_dataset(const TransitionDataset& data) {
    if (data.n() < 1) throw DomainError("objective: empty dataset");
    WeightedBatch batch;
    batch.samples = data.samples;
    batch.weights.assign(static_cast<std::size_t>(data.n()), 1.0 / data.n());
    return batch;
}

WeightedBatch WeightedBatch::population(const TabularMdp& mdp, const Eigen::MatrixXd& weight,
                                        const Parameterization& param) {
    check_weight(mdp, weight);
    WeightedBatch batch;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (weight(s, a) <= 0.0) continue;
            detail::dual_or_throw(param, s, a);
            for (int sn = 0; sn < mdp.n_states; ++sn) {
                const double p = mdp.transition[s][a][sn];
                if (p <= 0.0) continue;
                Sample z;
                z.s = s;
                z.a = a;
                z.r = mdp.reward[s][a];
                z.s_next = sn;
                batch.samples.push_back(z);
                batch.weights.push_back(weight(s, a) * p);
            }
        }
    if (batch.samples.empty()) throw DomainError("objective: population weight has no support");
    return batch;
}

std::vector<double> WeightedBatch::group_weights(const Parameterization& param) const {
    std::vector<double> gw(static_cast<std::size_t>(param.dim_dual), 0.0);
    for (std::size_t j = 0; j < samples.size(); ++j)
        gw[static_cast<std::size_t>(detail::dual_or_throw(param, samples[j].s, samples[j].a))] +=
            weights[j];
    return gw;
}

double td_error(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                const Sample& z) {
    check_point(param, w, nullptr);
    detail::EvalScratch scratch;
    scratch.ensure(param.n_actions);
    param.q_row(w, z.s_next, scratch.row.data());
    const double v_next = logsumexp(scratch.row.data(), param.n_actions);
    return z.r + beta * v_next - param.q_value(w, z.s, z.a);
}

ObjectiveEval per_sample_objective(const Parameterization& param, double beta,
                                   const ParamPoint& p, const Sample& z) {
    check_point(param, p.w, &p.v);
    ObjectiveEval out;
    out.grad_w = Eigen::VectorXd::Zero(param.dim_primal);
    out.grad_v = Eigen::VectorXd::Zero(param.dim_dual);
    detail::EvalScratch scratch;
    out.value =
        detail::eval_sample(param, beta, p.w, p.v, z, scratch, 1.0, &out.grad_w, &out.grad_v)
            .value;
    return out;
}

ObjectiveEval full_batch(const Parameterization& param, double beta, const ParamPoint& p,
                         const WeightedBatch& batch) {
    check_point(param, p.w, &p.v);
    check_batch(batch);
    ObjectiveEval out;
    out.grad_w = Eigen::VectorXd::Zero(param.dim_primal);
    out.grad_v = Eigen::VectorXd::Zero(param.dim_dual);
    detail::EvalScratch scratch;
    KahanSum value;
    for (std::size_t j = 0; j < batch.samples.size(); ++j) {
        const auto ev = detail::eval_sample(param, beta, p.w, p.v, batch.samples[j], scratch,
                                            batch.weights[j], &out.grad_w, &out.grad_v);
        value.add(batch.weights[j] * ev.value);
    }
    out.value = value.value();
    return out;
}

ObjectiveEval full_batch(const Parameterization& param, double beta, const ParamPoint& p,
                         const TransitionDataset& data) {
    return full_batch(param, beta, p, WeightedBatch::from_dataset(data));
}

Eigen::VectorXd dual_argmax(const Parameterization& param, const Eigen::VectorXd& w,
                            const WeightedBatch& batch) {
    check_point(param, w, nullptr);
    check_batch(batch);
    Eigen::VectorXd num = Eigen::VectorXd::Zero(param.dim_dual);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(param.dim_dual);
    detail::EvalScratch scratch;
    for (std::size_t j = 0; j < batch.samples.size(); ++j) {
        const Sample& z = batch.samples[j];
        const int g = detail::dual_or_throw(param, z.s, z.a);
        num(g) += batch.weights[j] * detail::next_value(param, 0.0, w, z, scratch);
        den(g) += batch.weights[j];
    }
    // Groups the batch never weights keep v* = 0; they carry no objective
    // mass, so the choice is inert.
    Eigen::VectorXd v_star(param.dim_dual);
    for (int g = 0; g < param.dim_dual; ++g) v_star(g) = den(g) > 0.0 ? num(g) / den(g) : 0.0;
    return v_star;
}

Eigen::VectorXd dual_argmax(const Parameterization& param, const Eigen::VectorXd& w,
                            const TransitionDataset& data) {
    return dual_argmax(param, w, WeightedBatch::from_dataset(data));
}

double phi_value(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                 const WeightedBatch& batch) {
    const ParamPoint at{w, dual_argmax(param, w, batch)};
    return full_batch(param, beta, at, batch).value;
}

double phi_value(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                 const TransitionDataset& data) {
    return phi_value(param, beta, w, WeightedBatch::from_dataset(data));
}

Eigen::VectorXd phi_grad(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                         const WeightedBatch& batch) {
    // Danskin: at the inner maximizer the v-sensitivity vanishes, so the
    // gradient of Phi is the w-gradient of F evaluated at (w, v*(w)).
    const ParamPoint at{w, dual_argmax(param, w, batch)};
    check_batch(batch);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(param.dim_primal);
    detail::EvalScratch scratch;
    for (std::size_t j = 0; j < batch.samples.size(); ++j)
        detail::eval_sample(param, beta, at.w, at.v, batch.samples[j], scratch, batch.weights[j],
                            &grad, nullptr);
    return grad;
}

double gamma_value(const Parameterization& param, double beta, const ParamPoint& p,
                   const WeightedBatch& batch) {
    check_point(param, p.w, &p.v);
    // Phi(w) - F(w,v) telescopes to beta^2 sum_g W_g (v_g - v*_g)^2 because
    // v*_g is the weighted group mean; this form is nonnegative by sight.
    const Eigen::VectorXd v_star = dual_argmax(param, p.w, batch);
    const std::vector<double> gw = batch.group_weights(param);
    KahanSum acc;
    for (int g = 0; g < param.dim_dual; ++g) {
        const double d = p.v(g) - v_star(g);
        acc.add(gw[static_cast<std::size_t>(g)] * d * d);
    }
    return beta * beta * acc.value();
}

double gamma_value(const Parameterization& param, double beta, const ParamPoint& p,
                   const TransitionDataset& data) {
    return gamma_value(param, beta, p, WeightedBatch::from_dataset(data));
}

double dual_strong_concavity(const Parameterization& param, double beta,
                             const WeightedBatch& batch) {
    const std::vector<double> gw = batch.group_weights(param);
    double min_w = gw.empty() ? 0.0 : gw[0];
    for (double x : gw) min_w = std::min(min_w, x);
    return 2.0 * beta * beta * min_w;
}

double msbe_exact(const TabularMdp& mdp, const Parameterization& param,
                  const Eigen::VectorXd& w, const Eigen::MatrixXd& weight) {
    check_point(param, w, nullptr);
    check_weight(mdp, weight);
    const Eigen::VectorXd value = state_values(mdp, param, w);
    KahanSum acc;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (weight(s, a) <= 0.0) continue;
            double mean_next = 0.0;
            for (int sn = 0; sn < mdp.n_states; ++sn)
                mean_next += mdp.transition[s][a][sn] * value(sn);
            const double residual =
                mdp.reward[s][a] + mdp.beta * mean_next - param.q_value(w, s, a);
            acc.add(weight(s, a) * residual * residual);
        }
    return acc.value();
}

double mstde_exact(const TabularMdp& mdp, const Parameterization& param,
                   const Eigen::VectorXd& w, const Eigen::MatrixXd& weight) {
    check_point(param, w, nullptr);
    check_weight(mdp, weight);
    const Eigen::VectorXd value = state_values(mdp, param, w);
    KahanSum acc;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (weight(s, a) <= 0.0) continue;
            const double q_sa = param.q_value(w, s, a);
            double mean_sq = 0.0;
            for (int sn = 0; sn < mdp.n_states; ++sn) {
                const double delta = mdp.reward[s][a] + mdp.beta * value(sn) - q_sa;
                mean_sq += mdp.transition[s][a][sn] * delta * delta;
            }
            acc.add(weight(s, a) * mean_sq);
        }
    return acc.value();
}

double next_value_variance(const TabularMdp& mdp, const Parameterization& param,
                           const Eigen::VectorXd& w, const Eigen::MatrixXd& weight) {
    check_point(param, w, nullptr);
    check_weight(mdp, weight);
    const Eigen::VectorXd value = state_values(mdp, param, w);
    KahanSum acc;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (weight(s, a) <= 0.0) continue;
            double mean = 0.0, mean_sq = 0.0;
            for (int sn = 0; sn < mdp.n_states; ++sn) {
                mean += mdp.transition[s][a][sn] * value(sn);
                mean_sq += mdp.transition[s][a][sn] * value(sn) * value(sn);
            }
            acc.add(weight(s, a) * std::max(mean_sq - mean * mean, 0.0));
        }
    return acc.value();
}

double biconjugate_check(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                         const TransitionDataset& data, int grid_points, double pad) {
    check_point(param, w, nullptr);
    if (grid_points < 2) throw DomainError("biconjugate_check: need at least 2 grid points");
    if (!(pad > 0.0)) throw DomainError("biconjugate_check: pad must be positive");
    // Mean TD error per visited pair.
    std::vector<double> sum(static_cast<std::size_t>(param.dim_dual), 0.0);
    std::vector<int> count(static_cast<std::size_t>(param.dim_dual), 0);
    for (const Sample& z : data.samples) {
        const int g = detail::dual_or_throw(param, z.s, z.a);
        sum[static_cast<std::size_t>(g)] += td_error(param, beta, w, z);
        ++count[static_cast<std::size_t>(g)];
    }
    double worst = 0.0;
    for (int g = 0; g < param.dim_dual; ++g) {
        if (count[static_cast<std::size_t>(g)] == 0) continue;
        const double m = sum[static_cast<std::size_t>(g)] / count[static_cast<std::size_t>(g)];
        // max_h 2mh - h^2 over the grid; the exact maximizer h = m is a grid
        // member so the max must hit m*m on the nose.
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < grid_points; ++k) {
            const double h = m - pad + 2.0 * pad * k / (grid_points - 1);
            best = std::max(best, 2.0 * m * h - h * h);
        }
        best = std::max(best, 2.0 * m * m - m * m);
        worst = std::max(worst, std::abs(best - m * m));
    }
    return worst;
}

} // namespace brm
