#include "brm/checkers.hpp"

#include <cmath>
#include <sstream>

#include "brm/bounds.hpp"
#include "brm/errors.hpp"
#include "brm/rng.hpp"

namespace brm {

bool LemmaCheckReport::all_ok() const {
    for (const CheckLine& line : lines)
        if (line.violations > 0) return false;
    return true;
}

std::string LemmaCheckReport::summary() const {
    std::ostringstream out;
    for (const CheckLine& line : lines)
        out << line.name << ": " << (line.violations == 0 ? "ok" : "VIOLATED") << " ("
            << line.violations << "/" << line.probes << " violations, worst slack "
            << line.worst_slack << ")\n";
    return out.str();
}

namespace {

struct LineAcc {
    CheckLine line;
    explicit LineAcc(std::string name) { line.name = std::move(name); }
    void observe(double lhs, double rhs) {
        ++line.probes;
        const double slack = lhs - rhs;
        if (line.probes == 1 || slack > line.worst_slack) line.worst_slack = slack;
        if (slack > 0.0) ++line.violations;
    }
};

} // namespace

LemmaCheckReport check_lemmas(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                              const Parameterization& param, const TransitionDataset& data,
                              const SaddleSolution& saddle, const ConstantsEstimate& k,
                              const LemmaCheckOptions& opt) {
    if (opt.probes < 2) throw DomainError("check_lemmas: need at least 2 probes");
    const WeightedBatch batch = WeightedBatch::from_dataset(data);
    const double beta = mdp.beta;
    const int dw = param.dim_primal, dv = param.dim_dual, dim = dw + dv;
    const double cond = 1.0 + k.L_hat / k.rho_hat;

    // Probes in the same ball the constants were measured in.
    CounterRng rng(opt.seed, streams::probes + 7);
    std::vector<ParamPoint> probes;
    probes.reserve(static_cast<std::size_t>(opt.probes));
    for (int j = 0; j < opt.probes; ++j) {
        Eigen::VectorXd dir(dim);
        for (int i = 0; i < dim; ++i) dir(i) = rng.normal();
        dir.normalize();
        const double radius = opt.ball_radius * std::pow(10.0, -2.0 * rng.uniform());
        ParamPoint p;
        p.w = saddle.x_star + radius * dir.head(dw);
        p.v = saddle.v_star + radius * dir.tail(dv);
        probes.push_back(std::move(p));
    }

    LineAcc grad_gap("gradient-gap");
    LineAcc dual_dist("dual-distance");
    LineAcc argmax_lip("argmax-lipschitz");
    LineAcc phi_smooth("phi-smoothness");
    LineAcc dist_pot("distance-potential");
    LineAcc shift("saddle-shift");
    LineAcc ascent("ascent-contraction");

    std::vector<Eigen::VectorXd> phi_grads(probes.size());
    std::vector<Eigen::VectorXd> dual_stars(probes.size());
    for (std::size_t j = 0; j < probes.size(); ++j) {
        const ParamPoint& p = probes[j];
        phi_grads[j] = phi_grad(param, beta, p.w, batch);
        dual_stars[j] = dual_argmax(param, p.w, batch);
        const ObjectiveEval ev = full_batch(param, beta, p, batch);
        const double gamma = gamma_value(param, beta, p, batch);

        grad_gap.observe((ev.grad_w - phi_grads[j]).norm(),
                         k.L_hat * (p.v - dual_stars[j]).norm());
        dual_dist.observe((p.v - dual_stars[j]).squaredNorm(), 2.0 / k.rho_hat * gamma);

        const double lhs_dist = (p.w - saddle.x_star).norm() + (p.v - saddle.v_star).norm();
        const double psi = lyapunov_potential(param, beta, p, batch, saddle, k.alpha);
        dist_pot.observe(lhs_dist, c_dist_constant(k) * std::sqrt(std::max(psi, 0.0)));

        // One dual ascent step at a random admissible stepsize.
        if (gamma > 1e-14 * std::max(1.0, std::abs(saddle.phi_star))) {
            const double eta = rng.uniform_pos() / k.L_hat;
            ParamPoint stepped{p.w, p.v + eta * ev.grad_v};
            ascent.observe(
                gamma_value(param, beta, stepped, batch),
                (1.0 - 2.0 * k.rho_hat * eta + k.rho_hat * k.L_hat * eta * eta) * gamma);
        }
    }
    for (std::size_t j = 0; j + 1 < probes.size(); ++j) {
        const double dist = (probes[j].w - probes[j + 1].w).norm();
        if (dist < 1e-12) continue;
        argmax_lip.observe((dual_stars[j] - dual_stars[j + 1]).norm(),
                           k.L_hat / k.rho_hat * dist);
        phi_smooth.observe((phi_grads[j] - phi_grads[j + 1]).norm(),
                           k.L_hat * cond * dist);
    }

    // Replace-one saddle movement, solved exactly on both sides.
    for (int j = 0; j < opt.neighbor_pairs; ++j) {
        CounterRng pick(opt.seed, streams::neighbor + 31 + static_cast<std::uint64_t>(j));
        const int i = static_cast<int>(pick.uniform_int(static_cast<std::uint64_t>(data.n())));
        const NeighborPair pair =
            make_neighbor(mdp, policy, data, i, CounterRng::mix(opt.seed + 1013904223ULL * j));
        const SaddleSolution other = solve_saddle(param, beta, pair.neighbor, 1e-11);
        shift.observe((saddle.x_star - other.x_star).norm() +
                          (saddle.v_star - other.v_star).norm(),
                      saddle_shift_bound(k, data.n()));
    }

    LemmaCheckReport report;
    report.lines = {grad_gap.line, dual_dist.line, argmax_lip.line, phi_smooth.line,
                    dist_pot.line, shift.line,     ascent.line};
    return report;
}

double ascent_contraction_equality_gap(const Parameterization& param, double beta,
                                       const TransitionDataset& data, double eta, int probes,
                                       std::uint64_t seed) {
    if (!(eta > 0.0)) throw DomainError("ascent_contraction_equality_gap: eta must be positive");
    const WeightedBatch batch = WeightedBatch::from_dataset(data);
    const double rho = dual_strong_concavity(param, beta, batch);
    const double factor = (1.0 - rho * eta) * (1.0 - rho * eta);
    CounterRng rng(seed, streams::probes + 13);
    double worst = 0.0;
    for (int j = 0; j < probes; ++j) {
        ParamPoint p;
        p.w = Eigen::VectorXd::NullaryExpr(param.dim_primal, [&](Eigen::Index) { return rng.normal(); });
        p.v = dual_argmax(param, p.w, batch) +
              Eigen::VectorXd::NullaryExpr(param.dim_dual, [&](Eigen::Index) { return rng.normal(); });
        const double before = gamma_value(param, beta, p, batch);
        if (before <= 0.0) continue;
        const ObjectiveEval ev = full_batch(param, beta, p, batch);
        ParamPoint stepped{p.w, p.v + eta * ev.grad_v};
        const double after = gamma_value(param, beta, stepped, batch);
        worst = std::max(worst, std::abs(after / before - factor));
    }
    return worst;
}

} // namespace brm
