#pragma once

// Per-sample evaluation shared by the batch objective and the SGDA inner
// loop. Kept out of the public surface: callers go through objective.hpp.

#include <vector>

#include "brm/errors.hpp"
#include "brm/numerics.hpp"
#include "brm/parameterization.hpp"

namespace brm::detail {

/// Reusable buffers sized to n_actions; the hot loop owns one instance so
/// per-step evaluation allocates nothing.
struct EvalScratch {
    std::vector<double> row;
    std::vector<double> soft;
    void ensure(int n_actions) {
        if (static_cast<int>(row.size()) != n_actions) {
            row.assign(static_cast<std::size_t>(n_actions), 0.0);
            soft.assign(static_cast<std::size_t>(n_actions), 0.0);
        }
    }
};

struct SampleEval {
    double value = 0.0;   // f(w,v;z)
    double delta = 0.0;   // TD error
    double v_next = 0.0;  // V_w(s')
    int g = -1;           // dual coordinate of (s,a)
};

inline int dual_or_throw(const Parameterization& param, int s, int a) {
    const int g = param.dual_of(s, a);
    if (g < 0)
        throw CoverageError("objective: pair (" + std::to_string(s) + "," + std::to_string(a) +
                            ") has no dual coordinate (not visited in the reference dataset)");
    return g;
}

/// Evaluates f(w,v;z) = delta^2 - beta^2 (V_w(s') - v_g)^2 and, when grad_w /
/// grad_v are non-null, accumulates coef times its gradient into them.
///
/// With V = logsumexp_a q_w(s',a) and sigma its softmax:
///   grad_w f = (2 delta beta - 2 beta^2 e) grad_w V - 2 delta grad_w q(s,a),
///   grad_w V = sum_a sigma_a grad_w q(s',a),  e = V - v_g,
///   grad_v f = 2 beta^2 e on coordinate g.
inline SampleEval eval_sample(const Parameterization& param, double beta,
                              const Eigen::VectorXd& w, const Eigen::VectorXd& v,
                              const Sample& z, EvalScratch& scratch, double coef = 0.0,
                              Eigen::VectorXd* grad_w = nullptr,
                              Eigen::VectorXd* grad_v = nullptr) {
    scratch.ensure(param.n_actions);
    param.q_row(w, z.s_next, scratch.row.data());
    SampleEval out;
    out.v_next = logsumexp_softmax(scratch.row.data(), param.n_actions, scratch.soft.data());
    const double q_sa = param.q_value(w, z.s, z.a);
    out.delta = z.r + beta * out.v_next - q_sa;
    out.g = dual_or_throw(param, z.s, z.a);
    const double e = out.v_next - v(out.g);
    out.value = out.delta * out.delta - beta * beta * e * e;
    if (grad_w != nullptr) {
        const double on_value_grad = coef * (2.0 * out.delta * beta - 2.0 * beta * beta * e);
        const double on_q_sa = coef * (-2.0 * out.delta);
        if (param.kind == ParamKind::tabular) {
            const int base_next = z.s_next * param.n_actions;
            for (int a = 0; a < param.n_actions; ++a)
                (*grad_w)(base_next + a) += on_value_grad * scratch.soft[static_cast<std::size_t>(a)];
            (*grad_w)(param.flat(z.s, z.a)) += on_q_sa;
        } else {
            for (int a = 0; a < param.n_actions; ++a)
                grad_w->noalias() += (on_value_grad * scratch.soft[static_cast<std::size_t>(a)]) *
                                     param.features.row(param.flat(z.s_next, a)).transpose();
            grad_w->noalias() += on_q_sa * param.features.row(param.flat(z.s, z.a)).transpose();
        }
    }
    if (grad_v != nullptr) (*grad_v)(out.g) += coef * 2.0 * beta * beta * e;
    return out;
}

/// V_w(s') alone (no dual lookup); used by the closed-form dual argmax.
inline double next_value(const Parameterization& param, double beta, const Eigen::VectorXd& w,
                         const Sample& z, EvalScratch& scratch) {
    (void)beta;
    scratch.ensure(param.n_actions);
    param.q_row(w, z.s_next, scratch.row.data());
    return logsumexp(scratch.row.data(), param.n_actions);
}

} // namespace brm::detail
