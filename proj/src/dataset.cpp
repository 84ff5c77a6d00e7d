#include "brm/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "brm/errors.hpp"

namespace brm {

const char* to_string(SampleMode mode) {
    return mode == SampleMode::iid_pairs ? "iid_pairs" : "single_trajectory";
}

SampleMode sample_mode_from_string(const std::string& text) {
    if (text == "iid_pairs") return SampleMode::iid_pairs;
    if (text == "single_trajectory") return SampleMode::single_trajectory;
    throw DomainError("unknown sample mode '" + text + "'");
}

std::vector<int> visit_counts(const TransitionDataset& data) {
    std::vector<int> counts(static_cast<std::size_t>(data.n_states) * data.n_actions, 0);
    for (const Sample& z : data.samples)
        ++counts[static_cast<std::size_t>(z.s) * data.n_actions + z.a];
    return counts;
}

std::uint64_t policy_hash(const Eigen::MatrixXd& policy) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[40];
    for (Eigen::Index s = 0; s < policy.rows(); ++s)
        for (Eigen::Index a = 0; a < policy.cols(); ++a) {
            const int len = std::snprintf(buf, sizeof buf, "%.17g,", policy(s, a));
            for (int i = 0; i < len; ++i) {
                h ^= static_cast<unsigned char>(buf[i]);
                h *= 0x100000001b3ULL;
            }
        }
    return h;
}

namespace {

int sample_categorical_row(CounterRng& rng, const std::vector<double>& p) {
    return rng.categorical(p.data(), static_cast<int>(p.size()));
}

// (s,a) from the discounted occupancy: run the chain a Geometric(1-beta)
// number of steps from init_dist, then emit the pair reached.
Sample one_iid_sample(const TabularMdp& mdp,
                      const std::vector<std::vector<double>>& policy_rows, CounterRng& rng) {
    int horizon = 0;
    if (mdp.beta > 0.0) {
        const double u = rng.uniform_pos();
        horizon = static_cast<int>(std::floor(std::log(u) / std::log(mdp.beta)));
    }
    int s = sample_categorical_row(rng, mdp.init_dist);
    int a = sample_categorical_row(rng, policy_rows[static_cast<std::size_t>(s)]);
    for (int h = 0; h < horizon; ++h) {
        s = sample_categorical_row(rng, mdp.transition[s][a]);
        a = sample_categorical_row(rng, policy_rows[static_cast<std::size_t>(s)]);
    }
    Sample z;
    z.s = s;
    z.a = a;
    z.r = mdp.reward[s][a];
    z.s_next = sample_categorical_row(rng, mdp.transition[s][a]);
    return z;
}

std::vector<std::vector<double>> policy_as_rows(const TabularMdp& mdp,
                                                const Eigen::MatrixXd& policy) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(mdp.n_states),
                                          std::vector<double>(mdp.n_actions));
    for (int s = 0; s < mdp.n_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (!(policy(s, a) >= 0.0)) throw DomainError("policy: negative entry");
            rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = policy(s, a);
            sum += policy(s, a);
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw DomainError("policy: row " + std::to_string(s) + " sums to " +
                              std::to_string(sum));
    }
    return rows;
}

} // namespace

Sample draw_iid_sample(const TabularMdp& mdp, const Eigen::MatrixXd& policy, CounterRng& rng) {
    return one_iid_sample(mdp, policy_as_rows(mdp, policy), rng);
}

TransitionDataset generate_dataset(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                                   int n, SampleMode mode, std::uint64_t seed, int min_visits,
                                   int retry_budget) {
    mdp.validate();
    if (n < 1) throw DomainError("generate_dataset: n must be at least 1");
    if (min_visits < 0) throw DomainError("generate_dataset: min_visits must be nonnegative");
    if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions)
        throw DomainError("generate_dataset: policy shape mismatch");
    const auto policy_rows = policy_as_rows(mdp, policy);

    TransitionDataset data;
    data.n_states = mdp.n_states;
    data.n_actions = mdp.n_actions;
    data.seed = seed;
    data.mode = mode;
    data.policy_hash = policy_hash(policy);
    data.min_visits = min_visits;

    std::vector<std::pair<int, int>> missing;
    for (int attempt = 0; attempt <= retry_budget; ++attempt) {
        CounterRng rng(seed, streams::dataset + static_cast<std::uint64_t>(attempt));
        data.samples.clear();
        data.samples.reserve(static_cast<std::size_t>(n));
        if (mode == SampleMode::iid_pairs) {
            for (int j = 0; j < n; ++j)
                data.samples.push_back(one_iid_sample(mdp, policy_rows, rng));
        } else {
            int s = sample_categorical_row(rng, mdp.init_dist);
            for (int j = 0; j < n; ++j) {
                Sample z;
                z.s = s;
                z.a = sample_categorical_row(rng, policy_rows[static_cast<std::size_t>(s)]);
                z.r = mdp.reward[s][z.a];
                z.s_next = sample_categorical_row(rng, mdp.transition[s][z.a]);
                data.samples.push_back(z);
                s = z.s_next;
            }
        }
        // Coverage: every pair the policy can emit needs min_visits visits.
        const std::vector<int> counts = visit_counts(data);
        missing.clear();
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                if (policy(s, a) > 0.0 &&
                    counts[static_cast<std::size_t>(s) * mdp.n_actions + a] < min_visits)
                    missing.emplace_back(s, a);
        if (missing.empty()) return data;
    }
    std::ostringstream msg;
    msg << "generate_dataset: coverage failed after " << (retry_budget + 1)
        << " attempts (n = " << n << ", min_visits = " << min_visits << "); under-visited pairs:";
    for (const auto& [s, a] : missing) msg << " (" << s << "," << a << ")";
    throw CoverageError(msg.str());
}

} // namespace brm
