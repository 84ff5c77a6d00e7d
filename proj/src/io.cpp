#include "brm/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "brm/errors.hpp"

namespace brm {

using json = nlohmann::ordered_json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw FormatError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

std::string hex_u64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw FormatError(std::string(what) + ": invalid JSON");
    return j;
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
    if (!j.contains(key))
        throw FormatError(std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

} // namespace

std::string mdp_to_json(const TabularMdp& mdp) {
    json j;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["beta"] = mdp.beta;
    j["reward"] = mdp.reward;
    j["transition"] = mdp.transition;
    j["init_dist"] = mdp.init_dist;
    return j.dump(2) + "\n";
}

TabularMdp mdp_from_json(const std::string& text) {
    const json j = parse(text, "mdp");
    TabularMdp mdp;
    mdp.n_states = field<int>(j, "n_states", "mdp");
    mdp.n_actions = field<int>(j, "n_actions", "mdp");
    mdp.beta = field<double>(j, "beta", "mdp");
    mdp.reward = field<std::vector<std::vector<double>>>(j, "reward", "mdp");
    mdp.transition = field<std::vector<std::vector<std::vector<double>>>>(j, "transition", "mdp");
    mdp.init_dist = field<std::vector<double>>(j, "init_dist", "mdp");
    mdp.validate();
    return mdp;
}

void write_mdp(const std::filesystem::path& path, const TabularMdp& mdp) {
    atomic_write(path, mdp_to_json(mdp));
}

TabularMdp read_mdp(const std::filesystem::path& path) { return mdp_from_json(read_file(path)); }

std::string dataset_to_csv(const TransitionDataset& data) {
    std::string out = "idx,s,a,r,s_next\n";
    for (int i = 0; i < data.n(); ++i) {
        const Sample& z = data.samples[static_cast<std::size_t>(i)];
        out += std::to_string(i);
        out += ',';
        out += std::to_string(z.s);
        out += ',';
        out += std::to_string(z.a);
        out += ',';
        out += fmt17(z.r);
        out += ',';
        out += std::to_string(z.s_next);
        out += '\n';
    }
    return out;
}

std::string dataset_sidecar_json(const TransitionDataset& data) {
    json j;
    j["seed"] = data.seed;
    j["mode"] = to_string(data.mode);
    j["policy_hash"] = hex_u64(data.policy_hash);
    j["n"] = data.n();
    j["n_states"] = data.n_states;
    j["n_actions"] = data.n_actions;
    j["min_visits"] = data.min_visits;
    return j.dump(2) + "\n";
}

void write_dataset(const std::filesystem::path& csv_path, const TransitionDataset& data) {
    atomic_write(csv_path, dataset_to_csv(data));
    std::filesystem::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    atomic_write(sidecar, dataset_sidecar_json(data));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

long parse_long(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string(what) + ": bad integer '" + s + "'");
    }
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(std::string(what) + ": bad number '" + s + "'");
    }
}

} // namespace

TransitionDataset read_dataset(const std::filesystem::path& csv_path) {
    std::filesystem::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    const json meta = parse(read_file(sidecar), "dataset sidecar");
    TransitionDataset data;
    data.seed = field<std::uint64_t>(meta, "seed", "dataset sidecar");
    data.mode = sample_mode_from_string(field<std::string>(meta, "mode", "dataset sidecar"));
    data.n_states = field<int>(meta, "n_states", "dataset sidecar");
    data.n_actions = field<int>(meta, "n_actions", "dataset sidecar");
    data.min_visits = field<int>(meta, "min_visits", "dataset sidecar");
    const std::string hash_text = field<std::string>(meta, "policy_hash", "dataset sidecar");
    try {
        data.policy_hash = std::stoull(hash_text, nullptr, 16);
    } catch (const std::exception&) {
        throw FormatError("dataset sidecar: bad policy_hash '" + hash_text + "'");
    }
    const int n_meta = field<int>(meta, "n", "dataset sidecar");
    if (data.n_states < 1 || data.n_actions < 1)
        throw FormatError("dataset sidecar: bad dimensions");

    std::istringstream in(read_file(csv_path));
    std::string line;
    if (!std::getline(in, line) || line != "idx,s,a,r,s_next")
        throw FormatError("dataset csv: bad header (expected idx,s,a,r,s_next)");
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) throw FormatError("dataset csv: row with wrong arity");
        if (parse_long(fields[0], "dataset csv") != row)
            throw FormatError("dataset csv: idx out of order at row " + std::to_string(row));
        Sample z;
        z.s = static_cast<int>(parse_long(fields[1], "dataset csv"));
        z.a = static_cast<int>(parse_long(fields[2], "dataset csv"));
        z.r = parse_double(fields[3], "dataset csv");
        z.s_next = static_cast<int>(parse_long(fields[4], "dataset csv"));
        if (z.s < 0 || z.s >= data.n_states || z.s_next < 0 || z.s_next >= data.n_states ||
            z.a < 0 || z.a >= data.n_actions || !std::isfinite(z.r))
            throw FormatError("dataset csv: out-of-range values at row " + std::to_string(row));
        data.samples.push_back(z);
        ++row;
    }
    if (row != n_meta)
        throw FormatError("dataset csv: " + std::to_string(row) + " rows but sidecar says " +
                          std::to_string(n_meta));
    return data;
}

std::string trace_to_csv(const RunTrace& trace, const std::vector<double>& phi_gap) {
    if (phi_gap.size() != trace.record_ts.size())
        throw DomainError("trace_to_csv: phi_gap length mismatch");
    std::string out = "t,phi_gap,f_value,eta\n";
    for (std::size_t i = 0; i < trace.record_ts.size(); ++i) {
        out += std::to_string(trace.record_ts[i]);
        out += ',';
        out += fmt17(phi_gap[i]);
        out += ',';
        out += fmt17(trace.f_log[i]);
        out += ',';
        out += fmt17(trace.eta_log[i]);
        out += '\n';
    }
    return out;
}

std::string index_log_to_csv(const RunTrace& trace) {
    std::string header = "t";
    for (int b = 1; b <= trace.B; ++b) header += ",i_" + std::to_string(b);
    std::string out = header + "\n";
    for (int t = 0; t < trace.T; ++t) {
        out += std::to_string(t);
        for (int b = 0; b < trace.B; ++b) {
            out += ',';
            out += std::to_string(trace.index_log[static_cast<std::size_t>(t) * trace.B + b]);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::int32_t> index_log_from_csv(const std::string& text, int T, int B) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,i_1", 0) != 0)
        throw FormatError("index log: bad header");
    std::vector<std::int32_t> log;
    log.reserve(static_cast<std::size_t>(T) * B);
    int t = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != B + 1)
            throw FormatError("index log: row arity mismatch");
        if (parse_long(fields[0], "index log") != t)
            throw FormatError("index log: t out of order");
        for (int b = 1; b <= B; ++b)
            log.push_back(static_cast<std::int32_t>(parse_long(fields[static_cast<std::size_t>(b)],
                                                               "index log")));
        ++t;
    }
    if (t != T) throw FormatError("index log: expected " + std::to_string(T) + " rows");
    return log;
}

namespace {
json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}
json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}
} // namespace

std::string solution_to_json(const SoftSolution& sol) {
    json j;
    j["q_star"] = matrix_to_json(sol.q_star);
    j["v_star"] = vector_to_json(sol.v_star);
    j["pi_star"] = matrix_to_json(sol.pi_star);
    j["iterations"] = sol.iterations;
    j["residual"] = sol.residual;
    return j.dump(2) + "\n";
}

std::string constants_to_json(const ConstantsEstimate& k) {
    json j;
    j["L_hat"] = k.L_hat;
    j["G_hat"] = k.G_hat;
    j["rho_hat"] = k.rho_hat;
    j["mu_pl_hat"] = k.mu_pl_hat;
    j["mu_qg_hat"] = k.mu_qg_hat;
    j["alpha"] = k.alpha;
    j["c_hat"] = k.c_hat;
    j["ball_radius"] = k.ball_radius;
    j["probe_budget"] = k.probe_budget;
    j["seed"] = k.seed;
    j["method_notes"] = k.method_notes;
    return j.dump(2) + "\n";
}

ConstantsEstimate constants_from_json(const std::string& text) {
    const json j = parse(text, "constants");
    ConstantsEstimate k;
    k.L_hat = field<double>(j, "L_hat", "constants");
    k.G_hat = field<double>(j, "G_hat", "constants");
    k.rho_hat = field<double>(j, "rho_hat", "constants");
    k.mu_pl_hat = field<double>(j, "mu_pl_hat", "constants");
    k.mu_qg_hat = field<double>(j, "mu_qg_hat", "constants");
    k.alpha = field<double>(j, "alpha", "constants");
    k.c_hat = field<double>(j, "c_hat", "constants");
    k.ball_radius = field<double>(j, "ball_radius", "constants");
    k.probe_budget = field<int>(j, "probe_budget", "constants");
    k.seed = field<std::uint64_t>(j, "seed", "constants");
    k.method_notes = field<std::string>(j, "method_notes", "constants");
    return k;
}

std::string stability_report_to_json(const StabilityReport& rep) {
    json j;
    j["n"] = rep.n;
    j["T"] = rep.T;
    j["B"] = rep.B;
    j["replicates"] = rep.replicates;
    j["i_count"] = rep.i_count;
    j["eps_mean"] = rep.eps_mean;
    j["eps_stderr"] = rep.eps_stderr;
    j["mean_dist_w"] = rep.mean_dist_w;
    j["mean_dist_v"] = rep.mean_dist_v;
    j["mean_hits"] = rep.mean_hits;
    j["zero_hit_pairs"] = rep.zero_hit_pairs;
    j["zero_hit_nonzero"] = rep.zero_hit_nonzero;
    j["replicate_means"] = rep.replicate_means;
    j["bound"] = rep.bound;
    return j.dump(2) + "\n";
}

std::string bound_to_json(const BoundBreakdown& b, KernelVariant kv, HitVariant hv) {
    json j;
    j["kernel_variant"] = to_string(kv);
    j["hit_variant"] = to_string(hv);
    j["optimization"] = b.optimization;
    j["sampling"] = b.sampling;
    j["hit"] = b.hit;
    j["total"] = b.total;
    j["c_dist"] = b.c_dist;
    j["c_hit"] = b.c_hit;
    j["rate"] = b.rate;
    return j.dump(2) + "\n";
}

std::string lemma_report_to_json(const LemmaCheckReport& rep) {
    json lines = json::array();
    for (const CheckLine& line : rep.lines) {
        json l;
        l["name"] = line.name;
        l["probes"] = line.probes;
        l["violations"] = line.violations;
        l["worst_slack"] = line.worst_slack;
        lines.push_back(std::move(l));
    }
    json j;
    j["all_ok"] = rep.all_ok();
    j["lines"] = std::move(lines);
    return j.dump(2) + "\n";
}

std::string sweep_to_csv(const std::vector<StabilityReport>& rows, double slope_lo,
                         double slope_hi) {
    std::string out = "n,T,replicates,eps_mean,eps_stderr,bound,slope_window\n";
    const std::string window = "\"[" + fmt17(slope_lo) + ";" + fmt17(slope_hi) + "]\"";
    for (const StabilityReport& rep : rows) {
        out += std::to_string(rep.n);
        out += ',';
        out += std::to_string(rep.T);
        out += ',';
        out += std::to_string(rep.replicates);
        out += ',';
        out += fmt17(rep.eps_mean);
        out += ',';
        out += fmt17(rep.eps_stderr);
        out += ',';
        out += fmt17(rep.bound);
        out += ',';
        out += window;
        out += '\n';
    }
    return out;
}

void RunManifest::add_input(const std::filesystem::path& p) {
    inputs.emplace_back(p.string(), fnv1a64_hex(read_file(p)));
}

void RunManifest::add_output(const std::filesystem::path& p) {
    outputs.emplace_back(p.string(), fnv1a64_hex(read_file(p)));
}

std::string RunManifest::to_json() const {
    json j;
    j["tool"] = "brm 1.0.0";
    j["command"] = command;
    j["seed"] = seed;
    j["status"] = status;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    json in = json::array();
    for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"digest", digest}});
    json out = json::array();
    for (const auto& [path, digest] : outputs) out.push_back({{"path", path}, {"digest", digest}});
    j["inputs"] = std::move(in);
    j["outputs"] = std::move(out);
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& path) const {
    atomic_write(path, to_json());
}

} // namespace brm
