#include "brm/sgda.hpp"

#include <cmath>

#include "brm/detail/eval.hpp"
#include "brm/errors.hpp"
#include "brm/rng.hpp"

namespace brm {

double harmonic_stepsize(int t, double c1, double c2, double cap) {
    if (t < 0) throw DomainError("harmonic_stepsize: t must be nonnegative");
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw DomainError("harmonic_stepsize: c1 and c2 must be positive");
    return std::min(c1 / (c2 + t), cap);
}

void SgdaRunConfig::validate(int n) const {
    if (T < 0) throw DomainError("sgda: T must be nonnegative");
    if (B < 1) throw DomainError("sgda: B must be at least 1");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw DomainError("sgda: c1 and c2 must be positive");
    if (!with_replacement && B > n)
        throw DomainError("sgda: B = " + std::to_string(B) + " exceeds n = " + std::to_string(n) +
                          " for without-replacement sampling");
    if (record_every < 0) throw DomainError("sgda: record_every must be nonnegative");
    if (clip_radius < 0.0) throw DomainError("sgda: clip_radius must be nonnegative");
    if (c1 / c2 > stepsize_cap)
        throw DomainError("sgda: initial stepsize c1/c2 = " + std::to_string(c1 / c2) +
                          " exceeds the cap " + std::to_string(stepsize_cap));
}

ParamPoint default_init(const Parameterization& param, const TransitionDataset& data) {
    ParamPoint p;
    p.w = Eigen::VectorXd::Zero(param.dim_primal);
    p.v = dual_argmax(param, p.w, data);
    return p;
}

namespace {

void record_point(const Parameterization& param, double beta, const WeightedBatch& batch,
                  const ParamPoint& p, int t, double eta, RunTrace& trace) {
    trace.record_ts.push_back(t);
    trace.iterates_w.push_back(p.w);
    trace.iterates_v.push_back(p.v);
    trace.eta_log.push_back(eta);
    trace.f_log.push_back(full_batch(param, beta, p, batch).value);
    trace.phi_log.push_back(phi_value(param, beta, p.w, batch));
}

} // namespace

RunTrace run_sgda(const Parameterization& param, double beta, const TransitionDataset& data,
                  const SgdaRunConfig& cfg, const ParamPoint& init,
                  const std::vector<std::int32_t>* index_override) {
    const int n = data.n();
    cfg.validate(n);
    if (init.w.size() != param.dim_primal || init.v.size() != param.dim_dual)
        throw DomainError("sgda: init has wrong dimensions");
    if (index_override != nullptr &&
        static_cast<long long>(index_override->size()) != 1LL * cfg.T * cfg.B)
        throw DomainError("sgda: index override must have T*B entries");

    const WeightedBatch batch = WeightedBatch::from_dataset(data);
    RunTrace trace;
    trace.T = cfg.T;
    trace.B = cfg.B;
    trace.index_log.reserve(static_cast<std::size_t>(cfg.T) * cfg.B);

    ParamPoint p = init;
    CounterRng rng(cfg.seed, streams::minibatch + cfg.index_stream);
    detail::EvalScratch scratch;
    Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(param.dim_primal);
    Eigen::VectorXd grad_v = Eigen::VectorXd::Zero(param.dim_dual);
    std::vector<std::int32_t> batch_idx(static_cast<std::size_t>(cfg.B));
    // Partial Fisher-Yates pool for without-replacement draws.
    std::vector<std::int32_t> pool;
    if (!cfg.with_replacement) {
        pool.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) pool[static_cast<std::size_t>(j)] = j;
    }

    const double inv_b = 1.0 / cfg.B;
    for (int t = 0; t < cfg.T; ++t) {
        const double eta = harmonic_stepsize(t, cfg.c1, cfg.c2, cfg.stepsize_cap);
        if (cfg.record_every > 0 && t % cfg.record_every == 0)
            record_point(param, beta, batch, p, t, eta, trace);

        if (index_override != nullptr) {
            const std::size_t base = static_cast<std::size_t>(t) * cfg.B;
            for (int b = 0; b < cfg.B; ++b)
                batch_idx[static_cast<std::size_t>(b)] = (*index_override)[base + b];
        } else if (cfg.with_replacement) {
            for (int b = 0; b < cfg.B; ++b)
                batch_idx[static_cast<std::size_t>(b)] =
                    static_cast<std::int32_t>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        } else {
            for (int b = 0; b < cfg.B; ++b) {
                const auto j = static_cast<std::size_t>(
                    b + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - b))));
                std::swap(pool[static_cast<std::size_t>(b)], pool[j]);
                batch_idx[static_cast<std::size_t>(b)] = pool[static_cast<std::size_t>(b)];
            }
        }
        trace.index_log.insert(trace.index_log.end(), batch_idx.begin(), batch_idx.end());

        grad_w.setZero();
        grad_v.setZero();
        for (int b = 0; b < cfg.B; ++b) {
            const auto i = static_cast<std::size_t>(batch_idx[static_cast<std::size_t>(b)]);
            if (i >= batch.samples.size()) throw DomainError("sgda: index out of range");
            detail::eval_sample(param, beta, p.w, p.v, batch.samples[i], scratch, inv_b, &grad_w,
                                &grad_v);
        }
        p.w.noalias() -= eta * grad_w;
        p.v.noalias() += eta * grad_v;
        if (cfg.clip_radius > 0.0) {
            const double norm =
                std::sqrt(p.w.squaredNorm() + p.v.squaredNorm());
            if (norm > cfg.clip_radius) {
                const double scale = cfg.clip_radius / norm;
                p.w *= scale;
                p.v *= scale;
            }
        }
        if (!p.w.allFinite() || !p.v.allFinite())
            throw DivergenceError("sgda: non-finite iterate after step t = " + std::to_string(t) +
                                  " (eta = " + std::to_string(eta) + ")");
    }
    record_point(param, beta, batch, p, cfg.T,
                 harmonic_stepsize(cfg.T, cfg.c1, cfg.c2, cfg.stepsize_cap), trace);
    trace.final = std::move(p);
    return trace;
}

std::vector<double> suboptimality_curve(const RunTrace& trace, const Parameterization& param,
                                        double beta, const TransitionDataset& data,
                                        double phi_star) {
    // Recomputed from the recorded iterates rather than read off phi_log, so
    // the curve stays available when objective logging was off and doubles as
    // a consistency check on the log when it was on.
    const WeightedBatch batch = WeightedBatch::from_dataset(data);
    std::vector<double> curve;
    curve.reserve(trace.iterates_w.size());
    for (const Eigen::VectorXd& w : trace.iterates_w)
        curve.push_back(phi_value(param, beta, w, batch) - phi_star);
    return curve;
}

} // namespace brm
