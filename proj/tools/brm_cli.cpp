// brm: deterministic experiment driver for Bellman-residual minimax training.
//
// Subcommands: gen-mdp, gen-data, solve, train, verify, stability-sweep,
// constants, bound. Every command honors --seed (env BRM_SEED as default),
// --output-dir, and an optional --config file (INI-style key=value with
// [subcommand] sections; command-line flags win). Exit codes: 0 ok, 2 usage
// or malformed input, 3 divergence or failed numerical solve, 4 verification
// failure.

#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "brm/bounds.hpp"
#include "brm/checkers.hpp"
#include "brm/constants.hpp"
#include "brm/errors.hpp"
#include "brm/io.hpp"
#include "brm/numerics.hpp"
#include "brm/risks.hpp"
#include "brm/rng.hpp"
#include "brm/saddle.hpp"
#include "brm/sgda.hpp"
#include "brm/stability.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

brm::RunManifest make_manifest(const std::string& command, std::uint64_t seed) {
    brm::RunManifest m;
    m.command = command;
    m.seed = seed;
    m.started_utc = now_utc();
    return m;
}

void finish_manifest(brm::RunManifest& m, const fs::path& dir, const std::string& name) {
    m.finished_utc = now_utc();
    m.write(dir / name);
}

/// Shared flags: seed, output dir, optional config echo into the manifest.
struct CommonOpts {
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    int format_version = 1;

    fs::path dir() const { return fs::path(output_dir); }
    void check() const {
        if (format_version != 1)
            throw brm::DomainError("format_version must be 1, got " +
                                   std::to_string(format_version));
    }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--seed", c.seed, "master seed for this command")
        ->envname("BRM_SEED")
        ->capture_default_str();
    cmd->add_option("--output-dir", c.output_dir, "directory for all artifacts")
        ->capture_default_str();
    cmd->add_option("--format-version", c.format_version,
                    "config schema version (must be 1)")
        ->capture_default_str();
}

/// Primal parameterization selection shared by train/verify/constants.
struct ParamOpts {
    std::string kind = "tabular";
    int features = 0;  // 0 means S*A/2 when kind = linear

    brm::Parameterization build(const brm::TabularMdp& mdp, const brm::TransitionDataset& data,
                                std::uint64_t seed) const {
        if (kind == "tabular") return brm::Parameterization::tabular(mdp, data);
        if (kind == "linear") {
            int dim = features;
            if (dim <= 0) dim = std::max(1, mdp.n_states * mdp.n_actions / 2);
            const Eigen::MatrixXd feat = brm::Parameterization::gaussian_features(
                mdp.n_states, mdp.n_actions, dim, seed);
            return brm::Parameterization::linear(mdp, feat, data);
        }
        throw brm::DomainError("--param must be 'tabular' or 'linear', got '" + kind + "'");
    }
};

void add_param(CLI::App* cmd, ParamOpts& p) {
    cmd->add_option("--param", p.kind, "primal parameterization: tabular or linear")
        ->capture_default_str();
    cmd->add_option("--features", p.features,
                    "feature count for --param linear (0 = S*A/2); the matrix is a "
                    "fixed Gaussian draw keyed off --seed")
        ->capture_default_str();
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

brm::SampleMode parse_mode(const std::string& text) { return brm::sample_mode_from_string(text); }

// ---------------------------------------------------------------- gen-mdp

struct GenMdpOpts {
    CommonOpts common;
    int states = 3;
    int actions = 2;
    double beta = 0.9;
    double dirichlet_alpha = 1.0;
    double r_max = 1.0;
    std::string name = "mdp.json";
};

int run_gen_mdp(const GenMdpOpts& o, const std::string& command) {
    o.common.check();
    if (o.states < 1) throw brm::DomainError("--states must be >= 1, got " +
                                             std::to_string(o.states));
    if (o.actions < 1) throw brm::DomainError("--actions must be >= 1, got " +
                                              std::to_string(o.actions));
    if (!(o.beta > 0.0 && o.beta < 1.0))
        throw brm::DomainError("--beta must lie in the open interval (0,1), got " +
                               brm::fmt17(o.beta));
    const brm::TabularMdp mdp = brm::make_random_mdp(o.states, o.actions, o.beta, o.common.seed,
                                                     o.dirichlet_alpha, o.r_max);
    brm::RunManifest m = make_manifest(command, o.common.seed);
    const fs::path out = o.common.dir() / o.name;
    brm::write_mdp(out, mdp);
    m.add_output(out);
    finish_manifest(m, o.common.dir(), "manifest_gen_mdp.json");
    std::cout << "wrote " << out.string() << " (" << o.states << "x" << o.actions
              << ", beta=" << o.beta << ")\n";
    return 0;
}

// ---------------------------------------------------------------- gen-data

struct GenDataOpts {
    CommonOpts common;
    std::string mdp_path;
    int n = 500;
    std::string mode = "iid_pairs";
    int min_visits = 1;
    int retry_budget = 64;
    std::string name = "dataset.csv";
};

int run_gen_data(const GenDataOpts& o, const std::string& command) {
    o.common.check();
    const brm::TabularMdp mdp = brm::read_mdp(o.mdp_path);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const brm::TransitionDataset data = brm::generate_dataset(
        mdp, policy, o.n, parse_mode(o.mode), o.common.seed, o.min_visits, o.retry_budget);
    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.mdp_path);
    const fs::path csv = o.common.dir() / o.name;
    brm::write_dataset(csv, data);
    fs::path sidecar = csv;
    sidecar.replace_extension(".json");
    m.add_output(csv);
    m.add_output(sidecar);
    finish_manifest(m, o.common.dir(), "manifest_gen_data.json");
    int visited = 0;
    for (int c : brm::visit_counts(data))
        if (c > 0) ++visited;
    std::cout << "wrote " << csv.string() << " (n=" << data.n() << ", visited pairs=" << visited
              << "/" << mdp.n_states * mdp.n_actions << ")\n";
    return 0;
}

// ---------------------------------------------------------------- solve

struct SolveOpts {
    CommonOpts common;
    std::string mdp_path;
    double tol = 1e-12;
    std::string name = "solution.json";
};

int run_solve(const SolveOpts& o, const std::string& command) {
    o.common.check();
    const brm::TabularMdp mdp = brm::read_mdp(o.mdp_path);
    const brm::SoftSolution sol = brm::solve_soft_optimal(mdp, o.tol);
    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.mdp_path);
    const fs::path out = o.common.dir() / o.name;
    brm::atomic_write(out, brm::solution_to_json(sol));
    m.add_output(out);
    finish_manifest(m, o.common.dir(), "manifest_solve.json");
    std::cout << "wrote " << out.string() << " (iterations=" << sol.iterations
              << ", residual=" << brm::fmt17(sol.residual) << ")\n";
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainOpts {
    CommonOpts common;
    ParamOpts param;
    std::string mdp_path;
    std::string data_path;
    int T = 10000;
    int B = 32;
    double c1 = 1.0;
    double c2 = 1.0;
    bool without_replacement = false;
    int record_every = 10;
    std::uint64_t index_stream = 0;
    double clip_radius = 0.0;
    double stepsize_cap = std::numeric_limits<double>::infinity();
    double saddle_tol = 1e-10;
    bool log_indices = false;
};

int run_train(const TrainOpts& o, const std::string& command) {
    o.common.check();
    const brm::TabularMdp mdp = brm::read_mdp(o.mdp_path);
    const brm::TransitionDataset data = brm::read_dataset(o.data_path);
    const brm::Parameterization param = o.param.build(mdp, data, o.common.seed);

    brm::SgdaRunConfig cfg;
    cfg.T = o.T;
    cfg.B = o.B;
    cfg.c1 = o.c1;
    cfg.c2 = o.c2;
    cfg.with_replacement = !o.without_replacement;
    cfg.seed = o.common.seed;
    cfg.index_stream = o.index_stream;
    cfg.record_every = o.record_every;
    cfg.clip_radius = o.clip_radius;
    cfg.stepsize_cap = o.stepsize_cap;

    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.mdp_path);
    m.add_input(o.data_path);

    const brm::SaddleSolution saddle = brm::solve_saddle(param, mdp.beta, data, o.saddle_tol);
    const brm::ParamPoint init = brm::default_init(param, data);

    brm::RunTrace trace;
    try {
        trace = brm::run_sgda(param, mdp.beta, data, cfg, init);
    } catch (const brm::DivergenceError& e) {
        m.status = e.what();
        finish_manifest(m, o.common.dir(), "manifest_train.json");
        throw;
    }

    const std::vector<double> curve =
        brm::suboptimality_curve(trace, param, mdp.beta, data, saddle.phi_star);
    const fs::path trace_path = o.common.dir() / "trace.csv";
    brm::atomic_write(trace_path, brm::trace_to_csv(trace, curve));
    m.add_output(trace_path);

    json fin;
    fin["w"] = vec_json(trace.final.w);
    fin["v"] = vec_json(trace.final.v);
    fin["phi_star"] = saddle.phi_star;
    fin["gap_initial"] = curve.empty() ? 0.0 : curve.front();
    fin["gap_final"] = curve.empty() ? 0.0 : curve.back();
    fin["T"] = o.T;
    fin["B"] = o.B;
    fin["c1"] = o.c1;
    fin["c2"] = o.c2;
    fin["param"] = o.param.kind;
    const fs::path final_path = o.common.dir() / "final.json";
    brm::atomic_write(final_path, fin.dump(2) + "\n");
    m.add_output(final_path);

    if (o.log_indices) {
        const fs::path idx_path = o.common.dir() / "index_log.csv";
        brm::atomic_write(idx_path, brm::index_log_to_csv(trace));
        m.add_output(idx_path);
    }
    finish_manifest(m, o.common.dir(), "manifest_train.json");
    std::cout << "trained T=" << o.T << " B=" << o.B << ": gap "
              << brm::fmt17(curve.empty() ? 0.0 : curve.front()) << " -> "
              << brm::fmt17(curve.empty() ? 0.0 : curve.back()) << "\n";
    return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyOpts {
    CommonOpts common;
    ParamOpts param;
    std::string mdp_path;
    std::string data_path;
    int probes = 100;
    int directions = 20;
    double radius = 1.0;
    int neighbor_pairs = 20;
    std::string name = "verify.json";
};

int run_verify(const VerifyOpts& o, const std::string& command) {
    o.common.check();
    const brm::TabularMdp mdp = brm::read_mdp(o.mdp_path);
    const brm::TransitionDataset data = brm::read_dataset(o.data_path);
    const brm::Parameterization param = o.param.build(mdp, data, o.common.seed);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const Eigen::MatrixXd weight = brm::occupancy_weight(mdp, policy);

    brm::CounterRng rng(o.common.seed, brm::streams::probes + 11);
    auto random_w = [&]() {
        Eigen::VectorXd w(param.dim_primal);
        for (int i = 0; i < param.dim_primal; ++i) w(i) = o.radius * rng.normal();
        return w;
    };

    json checks = json::array();
    bool all_pass = true;
    auto push = [&](const std::string& name, double worst, double tol) {
        const bool pass = worst <= tol;
        all_pass = all_pass && pass;
        json c;
        c["name"] = name;
        c["worst"] = worst;
        c["tol"] = tol;
        c["pass"] = pass;
        checks.push_back(std::move(c));
        std::cout << (pass ? "[ok]   " : "[FAIL] ") << name << " worst=" << brm::fmt17(worst)
                  << " tol=" << brm::fmt17(tol) << "\n";
    };

    // Unbiasedness: the exact-next-state expectation of the TD error matches
    // the Bellman residual of q_w at every pair.
    {
        double worst = 0.0;
        for (int k = 0; k < o.directions; ++k) {
            const Eigen::VectorXd w = random_w();
            Eigen::MatrixXd q(mdp.n_states, mdp.n_actions);
            std::vector<double> row(static_cast<std::size_t>(mdp.n_actions));
            for (int s = 0; s < mdp.n_states; ++s) {
                param.q_row(w, s, row.data());
                for (int a = 0; a < mdp.n_actions; ++a) q(s, a) = row[a];
            }
            const Eigen::MatrixXd residual = brm::soft_bellman_apply(mdp, q) - q;
            for (int s = 0; s < mdp.n_states; ++s)
                for (int a = 0; a < mdp.n_actions; ++a) {
                    brm::KahanSum acc;
                    for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                        const double p = mdp.transition[s][a][s2];
                        if (p == 0.0) continue;
                        brm::Sample z{s, a, mdp.reward[s][a], s2};
                        acc.add(p * brm::td_error(param, mdp.beta, w, z));
                    }
                    worst = std::max(worst, std::abs(acc.value() - residual(s, a)));
                }
        }
        push("unbiasedness_expected_td_equals_bellman", worst, 1e-12);
    }

    // Double-sampling identity: MSBE = MSTDE - beta^2 * E Var(V_w(s')).
    {
        double worst = 0.0;
        for (int k = 0; k < o.directions; ++k) {
            const Eigen::VectorXd w = random_w();
            const double msbe = brm::msbe_exact(mdp, param, w, weight);
            const double mstde = brm::mstde_exact(mdp, param, w, weight);
            const double var = brm::next_value_variance(mdp, param, w, weight);
            worst = std::max(worst, std::abs(msbe - (mstde - mdp.beta * mdp.beta * var)));
        }
        push("double_sampling_bias_identity", worst, 1e-10);
    }

    // Bi-conjugate closure: the population minimax objective at the inner
    // optimum equals the exact MSBE.
    {
        const brm::WeightedBatch pop = brm::WeightedBatch::population(mdp, weight, param);
        double worst = 0.0;
        for (int k = 0; k < o.directions; ++k) {
            const Eigen::VectorXd w = random_w();
            worst = std::max(worst, std::abs(brm::phi_value(param, mdp.beta, w, pop) -
                                             brm::msbe_exact(mdp, param, w, weight)));
        }
        push("biconjugate_population_phi_equals_msbe", worst, 1e-10);
    }

    // Per-pair inner maximization on a grid around the closed form.
    {
        double worst = 0.0;
        for (int k = 0; k < o.directions; ++k)
            worst = std::max(worst, brm::biconjugate_check(param, mdp.beta, random_w(), data));
        push("biconjugate_grid_inner_max", worst, 1e-10);
    }

    // Analytic per-sample gradients against central finite differences.
    {
        double worst = 0.0;
        const double h = 1e-5;
        for (int k = 0; k < o.probes; ++k) {
            brm::ParamPoint p;
            p.w = random_w();
            p.v = Eigen::VectorXd(param.dim_dual);
            for (int i = 0; i < param.dim_dual; ++i) p.v(i) = o.radius * rng.normal();
            const brm::Sample z =
                data.samples[rng.uniform_int(static_cast<std::uint64_t>(data.n()))];
            const brm::ObjectiveEval eval = brm::per_sample_objective(param, mdp.beta, p, z);
            Eigen::VectorXd fd(param.dim_primal + param.dim_dual);
            for (int i = 0; i < param.dim_primal + param.dim_dual; ++i) {
                brm::ParamPoint lo = p, hi = p;
                double& lo_x = i < param.dim_primal ? lo.w(i) : lo.v(i - param.dim_primal);
                double& hi_x = i < param.dim_primal ? hi.w(i) : hi.v(i - param.dim_primal);
                lo_x -= h;
                hi_x += h;
                fd(i) = (brm::per_sample_objective(param, mdp.beta, hi, z).value -
                         brm::per_sample_objective(param, mdp.beta, lo, z).value) /
                        (2 * h);
            }
            Eigen::VectorXd analytic(param.dim_primal + param.dim_dual);
            analytic << eval.grad_w, eval.grad_v;
            const double denom = std::max(1.0, analytic.norm());
            worst = std::max(worst, (analytic - fd).norm() / denom);
        }
        push("per_sample_gradient_vs_central_fd", worst, 1e-6);
    }

    // Structural inequalities with measured constants.
    const brm::SaddleSolution saddle = brm::solve_saddle(param, mdp.beta, data, 1e-11);
    const brm::ConstantsEstimate k = brm::estimate_constants(param, mdp.beta, data, saddle,
                                                             o.radius, o.probes, o.common.seed);
    brm::LemmaCheckOptions lopt;
    lopt.probes = o.probes;
    lopt.ball_radius = o.radius;
    lopt.seed = o.common.seed;
    lopt.neighbor_pairs = o.neighbor_pairs;
    const brm::LemmaCheckReport lemmas =
        brm::check_lemmas(mdp, policy, param, data, saddle, k, lopt);
    json lemma_lines = json::array();
    for (const brm::CheckLine& line : lemmas.lines) {
        const bool pass = line.violations == 0;
        all_pass = all_pass && pass;
        json l;
        l["name"] = line.name;
        l["probes"] = line.probes;
        l["violations"] = line.violations;
        l["worst_slack"] = line.worst_slack;
        l["pass"] = pass;
        lemma_lines.push_back(std::move(l));
        std::cout << (pass ? "[ok]   " : "[FAIL] ") << "lemma " << line.name
                  << " violations=" << line.violations
                  << " worst_slack=" << brm::fmt17(line.worst_slack) << "\n";
    }

    json rep;
    rep["all_pass"] = all_pass;
    rep["checks"] = std::move(checks);
    rep["lemma_lines"] = std::move(lemma_lines);

    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.mdp_path);
    m.add_input(o.data_path);
    m.status = all_pass ? "ok" : "verification failed";
    const fs::path out = o.common.dir() / o.name;
    brm::atomic_write(out, rep.dump(2) + "\n");
    m.add_output(out);
    finish_manifest(m, o.common.dir(), "manifest_verify.json");
    std::cout << (all_pass ? "all checks passed\n" : "VERIFICATION FAILED\n");
    return all_pass ? 0 : 4;
}

// ---------------------------------------------------------------- constants

struct ConstantsOpts {
    CommonOpts common;
    ParamOpts param;
    std::string mdp_path;
    std::string data_path;
    double radius = 1.0;
    int probes = 200;
    std::string name = "constants.json";
};

int run_constants(const ConstantsOpts& o, const std::string& command) {
    o.common.check();
    const brm::TabularMdp mdp = brm::read_mdp(o.mdp_path);
    const brm::TransitionDataset data = brm::read_dataset(o.data_path);
    const brm::Parameterization param = o.param.build(mdp, data, o.common.seed);
    const brm::SaddleSolution saddle = brm::solve_saddle(param, mdp.beta, data, 1e-11);
    const brm::ConstantsEstimate k = brm::estimate_constants(param, mdp.beta, data, saddle,
                                                             o.radius, o.probes, o.common.seed);
    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.mdp_path);
    m.add_input(o.data_path);
    const fs::path out = o.common.dir() / o.name;
    brm::atomic_write(out, brm::constants_to_json(k));
    m.add_output(out);
    finish_manifest(m, o.common.dir(), "manifest_constants.json");
    std::cout << "wrote " << out.string() << " (L=" << brm::fmt17(k.L_hat)
              << ", rho=" << brm::fmt17(k.rho_hat) << ", mu_pl=" << brm::fmt17(k.mu_pl_hat)
              << ")\n";
    return 0;
}

// ---------------------------------------------------------------- bound

struct BoundOpts {
    CommonOpts common;
    std::string constants_path;
    int n = 0;
    int T = 0;
    double c1 = 1.0;
    double c2 = 1.0;
    double psi0 = 1.0;
    double c_var = 1.0;
    std::string kernel = "statement";
    std::string hit = "statement";
    std::string form = "corollary";
    std::string name = "bound.json";
};

int run_bound(const BoundOpts& o, const std::string& command) {
    o.common.check();
    brm::BoundInputs in;
    in.k = brm::constants_from_json(brm::read_file(o.constants_path));
    in.psi0 = o.psi0;
    in.c_var = o.c_var;
    in.n = o.n;
    in.T = o.T;
    in.c1 = o.c1;
    in.c2 = o.c2;
    brm::KernelVariant kv;
    if (o.kernel == "statement") kv = brm::KernelVariant::statement;
    else if (o.kernel == "proof") kv = brm::KernelVariant::proof;
    else throw brm::DomainError("--kernel must be 'statement' or 'proof'");
    brm::HitVariant hv;
    if (o.hit == "statement") hv = brm::HitVariant::statement;
    else if (o.hit == "proof") hv = brm::HitVariant::proof;
    else throw brm::DomainError("--hit must be 'statement' or 'proof'");

    brm::BoundBreakdown b;
    if (o.form == "corollary") b = brm::corollary_bound(in, kv, hv);
    else if (o.form == "theorem") b = brm::theorem1_bound(in, kv, hv);
    else throw brm::DomainError("--form must be 'corollary' or 'theorem'");

    json j = json::parse(brm::bound_to_json(b, kv, hv));
    json out_j;
    out_j["form"] = o.form;
    out_j["inputs"] = {{"constants", o.constants_path}, {"n", o.n},     {"T", o.T},
                       {"c1", o.c1},                    {"c2", o.c2},   {"psi0", o.psi0},
                       {"c_var", o.c_var}};
    out_j["bound"] = std::move(j);

    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.constants_path);
    const fs::path out = o.common.dir() / o.name;
    brm::atomic_write(out, out_j.dump(2) + "\n");
    m.add_output(out);
    finish_manifest(m, o.common.dir(), "manifest_bound.json");
    std::cout << "wrote " << out.string() << " (total=" << brm::fmt17(b.total) << ")\n";
    return 0;
}

// ---------------------------------------------------------------- stability-sweep

struct SweepOpts {
    CommonOpts common;
    ParamOpts param;
    std::string mdp_path;
    std::vector<int> n_grid{50, 100, 200, 400, 800};
    int T = 20000;
    int B = 1;
    double c1 = 1.0;
    double c2 = 1.0;
    int replicates = 20;
    int i_subsample = 25;
    std::string mode = "iid_pairs";
    int min_visits = 2;
    double radius = 1.0;
    int probes = 200;
    bool enforce = false;
    double slope_lo = -1.3;
    double slope_hi = -0.7;
    int jobs = 1;
};

int run_sweep(const SweepOpts& o, const std::string& command) {
    o.common.check();
    if (o.n_grid.empty()) throw brm::DomainError("--n-grid must be nonempty");
    if (o.jobs < 1) throw brm::DomainError("--jobs must be >= 1");
    const brm::TabularMdp mdp = brm::read_mdp(o.mdp_path);
    const Eigen::MatrixXd policy = brm::uniform_policy(mdp);
    const brm::ParamKind kind =
        o.param.kind == "linear" ? brm::ParamKind::linear : brm::ParamKind::tabular;
    const brm::SampleMode mode = parse_mode(o.mode);

    brm::RunManifest m = make_manifest(command, o.common.seed);
    m.add_input(o.mdp_path);

    // Constants measured once on a reference dataset at the largest grid n.
    // The bound column rescales their n-dependent terms per cell.
    const int n_ref = *std::max_element(o.n_grid.begin(), o.n_grid.end());
    const std::uint64_t ref_seed = brm::CounterRng::mix(o.common.seed ^ 0xa5a5a5a5a5a5a5a5ULL);
    const brm::TransitionDataset ref_data =
        brm::generate_dataset(mdp, policy, n_ref, mode, ref_seed, o.min_visits);
    const brm::Parameterization ref_param = o.param.build(mdp, ref_data, o.common.seed);
    const brm::SaddleSolution ref_saddle = brm::solve_saddle(ref_param, mdp.beta, ref_data, 1e-11);
    const brm::ConstantsEstimate k = brm::estimate_constants(
        ref_param, mdp.beta, ref_data, ref_saddle, o.radius, o.probes, o.common.seed);
    const brm::ParamPoint ref_init = brm::default_init(ref_param, ref_data);
    const double psi0 = brm::lyapunov_potential(ref_param, mdp.beta, ref_init, ref_data,
                                                ref_saddle, k.alpha);

    std::vector<brm::StabilityReport> rows;
    json cells = json::array();
    bool complete = true;
    for (std::size_t idx = 0; idx < o.n_grid.size(); ++idx) {
        const int n = o.n_grid[idx];
        brm::DataLawSpec law;
        law.n = n;
        law.mode = mode;
        law.min_visits = o.min_visits;
        law.seed = brm::CounterRng::mix(o.common.seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1)));
        brm::SgdaRunConfig cfg;
        cfg.T = o.T;
        cfg.B = o.B;
        cfg.c1 = o.c1;
        cfg.c2 = o.c2;
        cfg.seed = brm::CounterRng::mix(law.seed + 17);
        json cell;
        cell["n"] = n;
        try {
            brm::StabilityReport rep =
                brm::estimate_eps_T(mdp, policy, kind, law, cfg, o.replicates, o.i_subsample);
            brm::BoundInputs in;
            in.k = k;
            in.psi0 = psi0;
            in.c_var = 1.0;
            in.n = n;
            in.T = o.T;
            in.c1 = o.c1;
            in.c2 = o.c2;
            brm::BoundBreakdown bb;
            try {
                bb = brm::corollary_bound(in);
            } catch (const brm::ScheduleError&) {
                bb = brm::theorem1_bound(in);
            }
            rep.bound = bb.total;
            const fs::path cell_path =
                o.common.dir() / ("stability_n" + std::to_string(n) + ".json");
            brm::atomic_write(cell_path, brm::stability_report_to_json(rep));
            m.add_output(cell_path);
            cell["status"] = "ok";
            cell["eps_mean"] = rep.eps_mean;
            cell["bound"] = rep.bound;
            std::cout << "n=" << n << " eps=" << brm::fmt17(rep.eps_mean)
                      << " stderr=" << brm::fmt17(rep.eps_stderr)
                      << " bound=" << brm::fmt17(rep.bound)
                      << " zero-hit nonzero=" << rep.zero_hit_nonzero << "\n";
            rows.push_back(std::move(rep));
        } catch (const std::exception& e) {
            complete = false;
            cell["status"] = std::string("failed: ") + e.what();
            std::cout << "n=" << n << " FAILED: " << e.what() << "\n";
        }
        cells.push_back(std::move(cell));
    }

    const fs::path sweep_path = o.common.dir() / "sweep.csv";
    brm::atomic_write(sweep_path, brm::sweep_to_csv(rows, o.slope_lo, o.slope_hi));
    m.add_output(sweep_path);

    std::vector<double> lx, ly;
    for (const brm::StabilityReport& rep : rows)
        if (rep.eps_mean > 0.0) {
            lx.push_back(std::log(static_cast<double>(rep.n)));
            ly.push_back(std::log(rep.eps_mean));
        }
    brm::LineFit fit;
    const bool fit_ok = lx.size() >= 2;
    if (fit_ok) fit = brm::fit_line(lx, ly);
    const bool slope_ok = fit_ok && fit.slope >= o.slope_lo && fit.slope <= o.slope_hi;

    json summary;
    summary["slope"] = fit_ok ? fit.slope : std::numeric_limits<double>::quiet_NaN();
    summary["intercept"] = fit_ok ? fit.intercept : std::numeric_limits<double>::quiet_NaN();
    summary["slope_window"] = {o.slope_lo, o.slope_hi};
    summary["slope_in_window"] = slope_ok;
    summary["complete"] = complete;
    summary["enforced"] = o.enforce;
    summary["cells"] = std::move(cells);
    const fs::path summary_path = o.common.dir() / "sweep_summary.json";
    brm::atomic_write(summary_path, summary.dump(2) + "\n");
    m.add_output(summary_path);

    m.status = complete ? (slope_ok ? "ok" : "slope outside window") : "incomplete";
    finish_manifest(m, o.common.dir(), "manifest_stability_sweep.json");
    if (fit_ok)
        std::cout << "slope=" << brm::fmt17(fit.slope) << " window=[" << o.slope_lo << ","
                  << o.slope_hi << "]" << (slope_ok ? " (in window)" : " (OUTSIDE window)")
                  << "\n";
    else
        std::cout << "slope unavailable (fewer than 2 positive cells)\n";
    if (o.enforce && (!complete || !slope_ok)) return 4;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bellman-residual minimax training and stability experiments"};
    app.set_version_flag("--version", "brm 1.0.0");
    app.set_config("--config", "",
                   "config file (INI-style key=value with [subcommand] sections; "
                   "command-line flags win)");
    app.require_subcommand(1);

    int rc = 0;
    const std::string command = join_args(argc, argv);

    GenMdpOpts gm;
    CLI::App* c_gm = app.add_subcommand("gen-mdp", "generate a random tabular MDP");
    add_common(c_gm, gm.common);
    c_gm->add_option("--states", gm.states, "number of states (>= 1)")->capture_default_str();
    c_gm->add_option("--actions", gm.actions, "number of actions (>= 1)")->capture_default_str();
    c_gm->add_option("--beta", gm.beta, "discount factor, open interval (0,1)")
        ->capture_default_str();
    c_gm->add_option("--dirichlet-alpha", gm.dirichlet_alpha, "transition row concentration")
        ->capture_default_str();
    c_gm->add_option("--r-max", gm.r_max, "rewards are uniform on [0, r_max]")
        ->capture_default_str();
    c_gm->add_option("--name", gm.name, "output file name")->capture_default_str();
    c_gm->callback([&] { rc = run_gen_mdp(gm, command); });

    GenDataOpts gd;
    CLI::App* c_gd = app.add_subcommand("gen-data", "sample an offline transition dataset");
    add_common(c_gd, gd.common);
    c_gd->add_option("--mdp", gd.mdp_path, "MDP JSON file")->required();
    c_gd->add_option("--n", gd.n, "number of transitions")->capture_default_str();
    c_gd->add_option("--mode", gd.mode, "iid_pairs or single_trajectory")
        ->capture_default_str();
    c_gd->add_option("--min-visits", gd.min_visits, "minimum visits per policy-supported pair")
        ->capture_default_str();
    c_gd->add_option("--retry-budget", gd.retry_budget, "coverage regeneration attempts")
        ->capture_default_str();
    c_gd->add_option("--name", gd.name, "output CSV name (JSON sidecar alongside)")
        ->capture_default_str();
    c_gd->callback([&] { rc = run_gen_data(gd, command); });

    SolveOpts so;
    CLI::App* c_so = app.add_subcommand("solve", "solve the soft Bellman fixed point exactly");
    add_common(c_so, so.common);
    c_so->add_option("--mdp", so.mdp_path, "MDP JSON file")->required();
    c_so->add_option("--tol", so.tol, "sup-norm tolerance on q*")->capture_default_str();
    c_so->add_option("--name", so.name, "output file name")->capture_default_str();
    c_so->callback([&] { rc = run_solve(so, command); });

    TrainOpts tr;
    CLI::App* c_tr = app.add_subcommand("train", "run minibatch SGDA on the saddle objective");
    add_common(c_tr, tr.common);
    add_param(c_tr, tr.param);
    c_tr->add_option("--mdp", tr.mdp_path, "MDP JSON file")->required();
    c_tr->add_option("--data", tr.data_path, "dataset CSV (sidecar JSON alongside)")->required();
    c_tr->add_option("--T", tr.T, "number of steps")->capture_default_str();
    c_tr->add_option("--B", tr.B, "minibatch size")->capture_default_str();
    c_tr->add_option("--c1", tr.c1, "stepsize numerator: eta_t = c1/(c2+t)")
        ->capture_default_str();
    c_tr->add_option("--c2", tr.c2, "stepsize offset")->capture_default_str();
    c_tr->add_flag("--without-replacement", tr.without_replacement,
                   "draw minibatches without replacement");
    c_tr->add_option("--record-every", tr.record_every,
                     "record cadence in steps (0 = final point only)")
        ->capture_default_str();
    c_tr->add_option("--index-stream", tr.index_stream, "minibatch stream id")
        ->capture_default_str();
    c_tr->add_option("--clip-radius", tr.clip_radius, "joint-norm projection (0 = off)")
        ->capture_default_str();
    c_tr->add_option("--stepsize-cap", tr.stepsize_cap, "upper bound on eta_t")
        ->capture_default_str();
    c_tr->add_option("--saddle-tol", tr.saddle_tol, "tolerance for the Phi* reference solve")
        ->capture_default_str();
    c_tr->add_flag("--log-indices", tr.log_indices, "also write index_log.csv");
    c_tr->callback([&] { rc = run_train(tr, command); });

    VerifyOpts ve;
    CLI::App* c_ve = app.add_subcommand(
        "verify", "run unbiasedness, bias-identity, bi-conjugate, gradient, and lemma checks");
    add_common(c_ve, ve.common);
    add_param(c_ve, ve.param);
    c_ve->add_option("--mdp", ve.mdp_path, "MDP JSON file")->required();
    c_ve->add_option("--data", ve.data_path, "dataset CSV")->required();
    c_ve->add_option("--probes", ve.probes, "probe count per check")->capture_default_str();
    c_ve->add_option("--directions", ve.directions, "random w draws for identity checks")
        ->capture_default_str();
    c_ve->add_option("--radius", ve.radius, "probe ball radius")->capture_default_str();
    c_ve->add_option("--neighbor-pairs", ve.neighbor_pairs,
                     "replace-one draws for the saddle-shift check")
        ->capture_default_str();
    c_ve->add_option("--name", ve.name, "report file name")->capture_default_str();
    c_ve->callback([&] { rc = run_verify(ve, command); });

    ConstantsOpts co;
    CLI::App* c_co = app.add_subcommand("constants", "estimate problem constants around the saddle");
    add_common(c_co, co.common);
    add_param(c_co, co.param);
    c_co->add_option("--mdp", co.mdp_path, "MDP JSON file")->required();
    c_co->add_option("--data", co.data_path, "dataset CSV")->required();
    c_co->add_option("--radius", co.radius, "probe ball radius")->capture_default_str();
    c_co->add_option("--probes", co.probes, "probe budget")->capture_default_str();
    c_co->add_option("--name", co.name, "output file name")->capture_default_str();
    c_co->callback([&] { rc = run_constants(co, command); });

    BoundOpts bo;
    CLI::App* c_bo = app.add_subcommand("bound", "evaluate the stability bound from constants");
    add_common(c_bo, bo.common);
    c_bo->add_option("--constants", bo.constants_path, "constants JSON file")->required();
    c_bo->add_option("--n", bo.n, "dataset size")->required();
    c_bo->add_option("--T", bo.T, "step count")->required();
    c_bo->add_option("--c1", bo.c1, "stepsize numerator")->capture_default_str();
    c_bo->add_option("--c2", bo.c2, "stepsize offset")->capture_default_str();
    c_bo->add_option("--psi0", bo.psi0, "Lyapunov potential at initialization")
        ->capture_default_str();
    c_bo->add_option("--c-var", bo.c_var, "variance-term constant (unspecified upstream; "
                     "default 1)")
        ->capture_default_str();
    c_bo->add_option("--kernel", bo.kernel, "kernel rate variant: statement (3c/4) or proof (c/2)")
        ->capture_default_str();
    c_bo->add_option("--hit", bo.hit, "per-hit constant variant: statement or proof")
        ->capture_default_str();
    c_bo->add_option("--form", bo.form, "corollary (closed form) or theorem (numeric kernel sums)")
        ->capture_default_str();
    c_bo->add_option("--name", bo.name, "output file name")->capture_default_str();
    c_bo->callback([&] { rc = run_bound(bo, command); });

    SweepOpts sw;
    CLI::App* c_sw = app.add_subcommand("stability-sweep",
                                        "estimate eps_T over an n grid and fit the log-log slope");
    add_common(c_sw, sw.common);
    add_param(c_sw, sw.param);
    c_sw->add_option("--mdp", sw.mdp_path, "MDP JSON file")->required();
    c_sw->add_option("--n-grid", sw.n_grid, "dataset sizes")->capture_default_str();
    c_sw->add_option("--T", sw.T, "steps per run")->capture_default_str();
    c_sw->add_option("--B", sw.B, "minibatch size")->capture_default_str();
    c_sw->add_option("--c1", sw.c1, "stepsize numerator")->capture_default_str();
    c_sw->add_option("--c2", sw.c2, "stepsize offset")->capture_default_str();
    c_sw->add_option("--replicates", sw.replicates, "dataset draws per cell")
        ->capture_default_str();
    c_sw->add_option("--i-subsample", sw.i_subsample, "replaced indices sampled per replicate")
        ->capture_default_str();
    c_sw->add_option("--mode", sw.mode, "iid_pairs or single_trajectory")->capture_default_str();
    c_sw->add_option("--min-visits", sw.min_visits, "coverage floor per dataset")
        ->capture_default_str();
    c_sw->add_option("--radius", sw.radius, "constants probe radius")->capture_default_str();
    c_sw->add_option("--probes", sw.probes, "constants probe budget")->capture_default_str();
    c_sw->add_flag("--enforce", sw.enforce, "exit nonzero if the slope leaves the window");
    c_sw->add_option("--slope-lo", sw.slope_lo, "slope window lower edge")->capture_default_str();
    c_sw->add_option("--slope-hi", sw.slope_hi, "slope window upper edge")->capture_default_str();
    c_sw->add_option("--jobs", sw.jobs,
                     "upper limit on concurrent grid cells (this build evaluates sequentially)")
        ->capture_default_str();
    c_sw->callback([&] { rc = run_sweep(sw, command); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const brm::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const brm::ConvergenceError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {  // DomainError and kin
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {  // FormatError, CoverageError, ScheduleError
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
