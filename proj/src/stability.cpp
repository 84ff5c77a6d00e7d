#include "brm/stability.hpp"

#include <cmath>

#include "brm/errors.hpp"
#include "brm/rng.hpp"

namespace brm {

NeighborPair make_neighbor(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                           const TransitionDataset& data, int i, std::uint64_t seed,
                           int max_draws) {
    if (i < 0 || i >= data.n()) throw DomainError("make_neighbor: index out of range");
    const std::vector<int> counts = visit_counts(data);
    const Sample old = data.samples[static_cast<std::size_t>(i)];
    const int old_flat = old.s * data.n_actions + old.a;
    const bool old_is_lone = counts[static_cast<std::size_t>(old_flat)] == 1;

    CounterRng rng(seed, streams::neighbor);
    NeighborPair pair;
    pair.index = i;
    for (int k = 0; k < max_draws; ++k) {
        const Sample cand = draw_iid_sample(mdp, policy, rng);
        ++pair.draws_used;
        const int cand_flat = cand.s * data.n_actions + cand.a;
        // Keep the visited set identical: the replacement must land on an
        // already-visited pair, and when sample i is its pair's only visit it
        // must land on that very pair or the pair would drop out.
        if (counts[static_cast<std::size_t>(cand_flat)] == 0) continue;
        if (old_is_lone && cand_flat != old_flat) continue;
        pair.replacement = cand;
        pair.neighbor = data;
        pair.neighbor.samples[static_cast<std::size_t>(i)] = cand;
        return pair;
    }
    throw CoverageError("make_neighbor: no admissible replacement in " +
                        std::to_string(max_draws) + " draws for index " + std::to_string(i));
}

CoupledResult coupled_stability(const Parameterization& param, double beta,
                                const TransitionDataset& base, const NeighborPair& pair,
                                const SgdaRunConfig& cfg, const ParamPoint& init) {
    SgdaRunConfig lean = cfg;
    lean.record_every = 0;  // distances need the finals only
    const RunTrace base_run = run_sgda(param, beta, base, lean, init);
    const RunTrace neigh_run = run_sgda(param, beta, pair.neighbor, lean, init, &base_run.index_log);
    CoupledResult out;
    out.dist_w = (base_run.final.w - neigh_run.final.w).norm();
    out.dist_v = (base_run.final.v - neigh_run.final.v).norm();
    for (std::int32_t idx : base_run.index_log)
        if (idx == pair.index) ++out.hits;
    return out;
}

StabilityReport estimate_eps_T(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                               ParamKind kind, const DataLawSpec& law,
                               const SgdaRunConfig& cfg, int replicates, int i_subsample) {
    if (replicates < 1) throw DomainError("estimate_eps_T: need at least one replicate");
    if (law.n < 1) throw DomainError("estimate_eps_T: n must be positive");
    StabilityReport rep;
    rep.n = law.n;
    rep.T = cfg.T;
    rep.B = cfg.B;
    rep.replicates = replicates;
    const int i_count = (i_subsample <= 0 || i_subsample >= law.n) ? law.n : i_subsample;
    rep.i_count = i_count;

    double sum_w = 0.0, sum_v = 0.0, sum_hits = 0.0;
    for (int r = 0; r < replicates; ++r) {
        const std::uint64_t rep_seed = CounterRng::mix(law.seed + 0x5851f42d4c957f2dULL * r);
        const TransitionDataset data =
            generate_dataset(mdp, policy, law.n, law.mode, rep_seed, law.min_visits);
        const Parameterization param =
            kind == ParamKind::tabular
                ? Parameterization::tabular(mdp, data)
                : Parameterization::linear(
                      mdp,
                      Parameterization::gaussian_features(
                          mdp.n_states, mdp.n_actions,
                          std::max(1, mdp.n_states * mdp.n_actions / 2), rep_seed),
                      data);
        const ParamPoint init = default_init(param, data);
        SgdaRunConfig run_cfg = cfg;
        run_cfg.seed = rep_seed;
        run_cfg.index_stream = cfg.index_stream + static_cast<std::uint64_t>(r);

        // Uniform without-replacement choice of which indices to couple.
        std::vector<int> indices(static_cast<std::size_t>(law.n));
        for (int j = 0; j < law.n; ++j) indices[static_cast<std::size_t>(j)] = j;
        if (i_count < law.n) {
            CounterRng pick(rep_seed, streams::subsample);
            for (int j = 0; j < i_count; ++j) {
                const auto k = static_cast<std::size_t>(
                    j + static_cast<int>(pick.uniform_int(static_cast<std::uint64_t>(law.n - j))));
                std::swap(indices[static_cast<std::size_t>(j)], indices[k]);
            }
            indices.resize(static_cast<std::size_t>(i_count));
        }

        double rep_sum = 0.0;
        for (int j = 0; j < i_count; ++j) {
            const int i = indices[static_cast<std::size_t>(j)];
            const std::uint64_t pair_seed =
                CounterRng::mix(rep_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1)));
            const NeighborPair pair = make_neighbor(mdp, policy, data, i, pair_seed);
            const CoupledResult res = coupled_stability(param, mdp.beta, data, pair, run_cfg, init);
            rep_sum += res.total();
            sum_w += res.dist_w;
            sum_v += res.dist_v;
            sum_hits += res.hits;
            if (res.hits == 0) {
                ++rep.zero_hit_pairs;
                if (res.total() != 0.0) ++rep.zero_hit_nonzero;
            }
        }
        rep.replicate_means.push_back(rep_sum / i_count);
    }
    const double total_pairs = static_cast<double>(replicates) * i_count;
    rep.mean_dist_w = sum_w / total_pairs;
    rep.mean_dist_v = sum_v / total_pairs;
    rep.mean_hits = sum_hits / total_pairs;
    double mean = 0.0;
    for (double m : rep.replicate_means) mean += m;
    mean /= replicates;
    rep.eps_mean = mean;
    if (replicates > 1) {
        double ss = 0.0;
        for (double m : rep.replicate_means) ss += (m - mean) * (m - mean);
        rep.eps_stderr = std::sqrt(ss / (replicates - 1.0) / replicates);
    }
    return rep;
}

} // namespace brm
