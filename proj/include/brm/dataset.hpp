#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brm/mdp.hpp"
#include "brm/rng.hpp"

namespace brm {

/// One logged transition. The reward column is the exact r(s,a) of the
/// generating MDP (rewards are logged deterministically).
struct Sample {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int s_next = 0;
};

enum class SampleMode { iid_pairs, single_trajectory };

const char* to_string(SampleMode mode);
SampleMode sample_mode_from_string(const std::string& text);

/// Offline dataset plus the provenance needed to regenerate or audit it.
struct TransitionDataset {
    std::vector<Sample> samples;
    int n_states = 0;
    int n_actions = 0;
    std::uint64_t seed = 0;
    SampleMode mode = SampleMode::iid_pairs;
    std::uint64_t policy_hash = 0;
    int min_visits = 0;

    int n() const { return static_cast<int>(samples.size()); }
};

/// Per-pair visit counts, flat index s*n_actions + a.
std::vector<int> visit_counts(const TransitionDataset& data);

/// FNV-1a over the 17-significant-digit text of the policy matrix, so the
/// hash is stable across runs on the same platform.
std::uint64_t policy_hash(const Eigen::MatrixXd& policy);

/// Draws n transitions under the behavior policy.
///
/// iid_pairs: each sample independently draws (s,a) from the policy's
/// discounted occupancy (geometric restart with probability 1-beta), then
/// s' ~ P(.|s,a). single_trajectory: one rollout from init_dist, so
/// consecutive samples are dependent.
///
/// Every (s,a) with policy mass must appear at least min_visits times;
/// generation retries with fresh substreams up to retry_budget attempts and
/// then throws CoverageError naming the missing pairs. Same arguments give a
/// bit-identical dataset.
TransitionDataset generate_dataset(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                                   int n, SampleMode mode, std::uint64_t seed,
                                   int min_visits = 1, int retry_budget = 64);

/// One fresh draw from the iid_pairs law; used for neighbor replacements.
Sample draw_iid_sample(const TabularMdp& mdp, const Eigen::MatrixXd& policy, CounterRng& rng);

} // namespace brm
