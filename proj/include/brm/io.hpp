#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brm/bounds.hpp"
#include "brm/checkers.hpp"
#include "brm/dataset.hpp"
#include "brm/sgda.hpp"
#include "brm/stability.hpp"

namespace brm {

/// %.17g rendering: enough digits to round-trip an IEEE double exactly.
std::string fmt17(double x);

/// FNV-1a 64-bit content digest, hex-encoded; used in run manifests.
std::string fnv1a64_hex(const std::string& bytes);

/// Writes to a temporary sibling then renames, so readers never observe a
/// partial file. Creates parent directories as needed.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// MDP artifact: {n_states, n_actions, beta, reward, transition, init_dist}.
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);
void write_mdp(const std::filesystem::path& path, const TabularMdp& mdp);
TabularMdp read_mdp(const std::filesystem::path& path);

// Dataset artifact: CSV with header idx,s,a,r,s_next plus a JSON sidecar
// carrying provenance (seed, mode, policy hash, dims, min_visits).
std::string dataset_to_csv(const TransitionDataset& data);
std::string dataset_sidecar_json(const TransitionDataset& data);
void write_dataset(const std::filesystem::path& csv_path, const TransitionDataset& data);

/// Reads CSV + sidecar; validates header, dims, ranges, and row indices.
TransitionDataset read_dataset(const std::filesystem::path& csv_path);

// Run trace artifacts.
std::string trace_to_csv(const RunTrace& trace, const std::vector<double>& phi_gap);
std::string index_log_to_csv(const RunTrace& trace);
std::vector<std::int32_t> index_log_from_csv(const std::string& text, int T, int B);

// Reports.
std::string solution_to_json(const SoftSolution& sol);
std::string constants_to_json(const ConstantsEstimate& k);
ConstantsEstimate constants_from_json(const std::string& text);
std::string stability_report_to_json(const StabilityReport& rep);
std::string bound_to_json(const BoundBreakdown& b, KernelVariant kv, HitVariant hv);
std::string lemma_report_to_json(const LemmaCheckReport& rep);

/// One sweep row per n: n,T,replicates,eps_mean,eps_stderr,bound,slope_window.
std::string sweep_to_csv(const std::vector<StabilityReport>& rows, double slope_lo,
                         double slope_hi);

/// Run manifest: command line, inputs and outputs with digests, seed, and the
/// only place a timestamp is allowed to appear (data artifacts must be
/// byte-identical across reruns).
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
    std::string started_utc;
    std::string finished_utc;
    std::string status = "ok";  // or a failure description (divergence step etc.)

    void add_input(const std::filesystem::path& p);
    void add_output(const std::filesystem::path& p);
    std::string to_json() const;
    void write(const std::filesystem::path& path) const;
};

} // namespace brm
