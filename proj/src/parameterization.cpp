#include "brm/parameterization.hpp"

#include "brm/errors.hpp"
#include "brm/rng.hpp"

namespace brm {

namespace {
std::vector<int> build_dual_index(const TabularMdp& mdp, const TransitionDataset& ref,
                                  std::vector<int>& pairs_out) {
    if (ref.n() < 1) throw DomainError("parameterization: reference dataset is empty");
    if (ref.n_states != mdp.n_states || ref.n_actions != mdp.n_actions)
        throw DomainError("parameterization: dataset dimensions disagree with the MDP");
    const std::vector<int> counts = visit_counts(ref);
    std::vector<int> index(counts.size(), -1);
    pairs_out.clear();
    // Visited pairs in flat order, so the dual layout is deterministic.
    for (std::size_t flat = 0; flat < counts.size(); ++flat)
        if (counts[flat] > 0) {
            index[flat] = static_cast<int>(pairs_out.size());
            pairs_out.push_back(static_cast<int>(flat));
        }
    return index;
}
} // namespace

Parameterization Parameterization::tabular(const TabularMdp& mdp, const TransitionDataset& ref) {
    Parameterization p;
    p.kind = ParamKind::tabular;
    p.n_states = mdp.n_states;
    p.n_actions = mdp.n_actions;
    p.dim_primal = mdp.n_states * mdp.n_actions;
    p.dual_index = build_dual_index(mdp, ref, p.dual_pairs);
    p.dim_dual = static_cast<int>(p.dual_pairs.size());
    return p;
}

Parameterization Parameterization::linear(const TabularMdp& mdp, const Eigen::MatrixXd& features,
                                          const TransitionDataset& ref) {
    Parameterization p;
    p.kind = ParamKind::linear;
    p.n_states = mdp.n_states;
    p.n_actions = mdp.n_actions;
    const Eigen::Index rows = static_cast<Eigen::Index>(mdp.n_states) * mdp.n_actions;
    if (features.rows() != rows)
        throw DomainError("parameterization: features must have one row per (s,a)");
    if (features.cols() < 1 || features.cols() > rows)
        throw DomainError("parameterization: feature dimension out of range");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(features);
    if (qr.rank() < features.cols())
        throw DomainError("parameterization: features are column-rank-deficient (rank " +
                          std::to_string(qr.rank()) + " < " + std::to_string(features.cols()) +
                          ")");
    p.features = features;
    p.dim_primal = static_cast<int>(features.cols());
    p.dual_index = build_dual_index(mdp, ref, p.dual_pairs);
    p.dim_dual = static_cast<int>(p.dual_pairs.size());
    return p;
}

Eigen::MatrixXd Parameterization::gaussian_features(int n_states, int n_actions, int dim,
                                                    std::uint64_t seed) {
    const int rows = n_states * n_actions;
    if (dim < 1 || dim > rows) throw DomainError("gaussian_features: dim out of range");
    for (int attempt = 0; attempt < 16; ++attempt) {
        CounterRng rng(seed, streams::features + static_cast<std::uint64_t>(attempt));
        Eigen::MatrixXd f(rows, dim);
        for (int i = 0; i < rows; ++i)
            for (int d = 0; d < dim; ++d) f(i, d) = rng.normal();
        if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(f).rank() == dim) return f;
    }
    throw ConvergenceError("gaussian_features: could not draw a full-rank matrix");
}

double Parameterization::q_value(const Eigen::VectorXd& w, int s, int a) const {
    const int idx = flat(s, a);
    if (kind == ParamKind::tabular) return w(idx);
    return features.row(idx).dot(w);
}

void Parameterization::q_row(const Eigen::VectorXd& w, int s, double* out) const {
    if (kind == ParamKind::tabular) {
        const int base = s * n_actions;
        for (int a = 0; a < n_actions; ++a) out[a] = w(base + a);
        return;
    }
    for (int a = 0; a < n_actions; ++a) out[a] = features.row(flat(s, a)).dot(w);
}

} // namespace brm
