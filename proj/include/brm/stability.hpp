#pragma once

#include "brm/saddle.hpp"
#include "brm/sgda.hpp"

namespace brm {

/// Replace-one neighbor of a dataset: same size, same samples except index i.
struct NeighborPair {
    TransitionDataset neighbor;
    int index = 0;
    Sample replacement;
    int draws_used = 0;  // rejection draws before an admissible replacement
};

/// Draws the replacement from the same generation law as the data (the
/// policy's discounted-occupancy sample law on the given MDP), rejecting
/// candidates until the neighbor's visited set equals the base's: the
/// replacement pair must already be visited, and if sample i is its pair's
/// only visit the replacement must land on that same pair. This keeps the
/// dual dimension and the strong-concavity modulus shared across the pair.
NeighborPair make_neighbor(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                           const TransitionDataset& data, int i, std::uint64_t seed,
                           int max_draws = 100000);

/// Final-iterate distances between runs on data and on its neighbor under a
/// shared index stream and shared init.
struct CoupledResult {
    double dist_w = 0.0;
    double dist_v = 0.0;
    int hits = 0;  // steps whose minibatch contained the replaced index
    double total() const { return dist_w + dist_v; }
};

/// Runs SGDA on base and neighbor with the identical index sequence (the
/// neighbor replays the base run's index_log) from the same init. If the
/// replaced index is never drawn the two runs are bitwise identical and the
/// distances are exactly zero.
CoupledResult coupled_stability(const Parameterization& param, double beta,
                                const TransitionDataset& base, const NeighborPair& pair,
                                const SgdaRunConfig& cfg, const ParamPoint& init);

/// How stability datasets are generated inside estimate_eps_T.
struct DataLawSpec {
    int n = 0;
    SampleMode mode = SampleMode::iid_pairs;
    int min_visits = 2;  // >= 2 so removing one sample cannot empty a pair
    std::uint64_t seed = 0;
};

/// On-average argument stability estimate at horizon T plus the pieces
/// needed to audit it.
struct StabilityReport {
    int n = 0;
    int T = 0;
    int B = 1;
    int replicates = 0;
    int i_count = 0;           // indices i per replicate (subsampled)
    double eps_mean = 0.0;     // mean over replicates and i of ||dw|| + ||dv||
    double eps_stderr = 0.0;   // stderr across replicate means
    double mean_dist_w = 0.0;
    double mean_dist_v = 0.0;
    double mean_hits = 0.0;
    int zero_hit_pairs = 0;    // coupled pairs whose replaced index was never drawn
    int zero_hit_nonzero = 0;  // of those, how many had nonzero distance (must be 0)
    std::vector<double> replicate_means;
    double bound = 0.0;        // filled by the caller when a bound is evaluated
};

/// Monte Carlo estimate of the on-average argument stability
/// (1/n) sum_i E ||w_T(D) - w_T(D^(i))|| + ||v_T(D) - v_T(D^(i))||.
/// Each replicate draws a fresh dataset from the law, subsamples i_subsample
/// indices uniformly without replacement (0 or >= n means all of them), and
/// averages coupled distances over replacement draws. Everything is keyed off
/// law.seed and cfg.seed, so reports are reproducible.
StabilityReport estimate_eps_T(const TabularMdp& mdp, const Eigen::MatrixXd& policy,
                               ParamKind kind, const DataLawSpec& law,
                               const SgdaRunConfig& cfg, int replicates, int i_subsample);

} // namespace brm
