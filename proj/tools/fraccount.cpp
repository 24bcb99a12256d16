// fraccount: command line front end for the tempered space-fractional
// counting library. Every run reads a strict JSON config, computes, and
// writes a deterministic report.json (plus CSV grids) into --out; wall-clock
// metadata goes to a separate metadata.json so reports are byte-identical
// for identical (config, seed).
//
// Exit codes: 0 ok, 2 config error, 3 numeric check failure, 4 I/O error.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fraccount/counting.hpp"
#include "fraccount/risk.hpp"
#include "fraccount/rng.hpp"
#include "fraccount/specfun.hpp"
#include "fraccount/stats.hpp"
#include "fraccount/subordinators.hpp"
#include "fraccount/verify.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fraccount;

constexpr const char* kSchema = "frac-count/1";

// ---------------------------------------------------------------------------
// Errors carrying the process exit code
// ---------------------------------------------------------------------------

struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

[[noreturn]] void config_fail(const std::string& msg) { throw CliError(2, "config error: " + msg); }
[[noreturn]] void numeric_fail(const std::string& msg) {
    throw CliError(3, "numeric failure: " + msg);
}
[[noreturn]] void io_fail(const std::string& msg) { throw CliError(4, "i/o error: " + msg); }

// ---------------------------------------------------------------------------
// SHA-1, used for git-style blob hashes of the input config
// ---------------------------------------------------------------------------

class Sha1 {
public:
    void update(const unsigned char* data, std::size_t len) {
        total_ += len;
        while (len > 0) {
            const std::size_t take = std::min(len, std::size_t{64} - fill_);
            std::copy(data, data + take, buf_.begin() + static_cast<std::ptrdiff_t>(fill_));
            fill_ += take;
            data += take;
            len -= take;
            if (fill_ == 64) {
                block();
                fill_ = 0;
            }
        }
    }

    std::string hex() {
        const std::uint64_t bits = total_ * 8;
        const unsigned char one = 0x80;
        update(&one, 1);
        const unsigned char zero = 0x00;
        while (fill_ != 56) update(&zero, 1);
        std::array<unsigned char, 8> len{};
        for (int i = 0; i < 8; ++i) len[static_cast<std::size_t>(i)] =
            static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len.data(), len.size());
        std::string out;
        for (std::uint32_t w : h_) {
            char hexbuf[9];
            std::snprintf(hexbuf, sizeof hexbuf, "%08x", w);
            out += hexbuf;
        }
        return out;
    }

private:
    static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

    void block() {
        std::array<std::uint32_t, 80> w{};
        for (int i = 0; i < 16; ++i) {
            const std::size_t j = static_cast<std::size_t>(4 * i);
            w[static_cast<std::size_t>(i)] =
                (std::uint32_t(buf_[j]) << 24) | (std::uint32_t(buf_[j + 1]) << 16) |
                (std::uint32_t(buf_[j + 2]) << 8) | std::uint32_t(buf_[j + 3]);
        }
        for (std::size_t i = 16; i < 80; ++i)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (std::size_t i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5a827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ed9eba1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8f1bbcdcu;
            } else {
                f = b ^ c ^ d;
                k = 0xca62c1d6u;
            }
            const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }

    std::array<std::uint32_t, 5> h_{0x67452301u, 0xefcdab89u, 0x98badcfeu, 0x10325476u,
                                    0xc3d2e1f0u};
    std::array<unsigned char, 64> buf_{};
    std::size_t fill_ = 0;
    std::uint64_t total_ = 0;
};

std::string git_blob_hash(const std::string& content) {
    Sha1 h;
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    h.update(reinterpret_cast<const unsigned char*>(header.data()), header.size());
    h.update(reinterpret_cast<const unsigned char*>(content.data()), content.size());
    return h.hex();
}

// ---------------------------------------------------------------------------
// CSV helpers: shortest decimal that round-trips the double exactly
// ---------------------------------------------------------------------------

std::string num(double v) {
    std::array<char, 40> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// Strict JSON config access with field-path diagnostics
// ---------------------------------------------------------------------------

json parse_config_text(const std::string& raw, const std::string& label) {
    try {
        return json::parse(raw);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min(raw.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < stop; ++i) {
            if (raw[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        config_fail(label + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                    e.what());
    }
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) config_fail("field '" + where + "' must be an object");
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) ok = true;
        if (!ok) config_fail("unknown key '" + item.key() + "' in " + where);
    }
}

const json& need(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) config_fail("missing required field '" + where + "." + key + "'");
    return *it;
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) config_fail("field '" + where + "' must be a number");
    return v.get<double>();
}

std::uint64_t as_uint(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        config_fail("field '" + where + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) config_fail("field '" + where + "' must be a string");
    return v.get<std::string>();
}

double need_double(const json& obj, const char* key, const std::string& where) {
    return as_double(need(obj, key, where), where + "." + key);
}

double opt_double(const json& obj, const char* key, const std::string& where, double fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : as_double(*it, where + "." + key);
}

std::vector<double> as_double_array(const json& v, const std::string& where) {
    if (!v.is_array()) config_fail("field '" + where + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    std::size_t i = 0;
    for (const auto& x : v) {
        out.push_back(as_double(x, where + "[" + std::to_string(i) + "]"));
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config -> domain objects, and resolved-config echoes
// ---------------------------------------------------------------------------

// {"lambdas": [..], "alpha": a, "theta": th, "mu": m, "rho": r}
// mu and rho are either both present (gamma-mixed process) or both absent.
ProcessParams parse_process(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"lambdas", "alpha", "theta", "mu", "rho"});
    ProcessParams p;
    p.lambdas = as_double_array(need(j, "lambdas", where), where + ".lambdas");
    p.tss.alpha = need_double(j, "alpha", where);
    p.tss.theta = need_double(j, "theta", where);
    const bool has_mu = j.contains("mu"), has_rho = j.contains("rho");
    if (has_mu != has_rho)
        config_fail("fields '" + where + ".mu' and '" + where + ".rho' must come together");
    if (has_mu) p.gamma = GammaParams{need_double(j, "mu", where), need_double(j, "rho", where)};
    try {
        p.validate();
    } catch (const domain_error& e) {
        config_fail(where + ": " + e.what());
    }
    return p;
}

json process_json(const ProcessParams& p) {
    json j;
    j["lambdas"] = p.lambdas;
    j["alpha"] = p.tss.alpha;
    j["theta"] = p.tss.theta;
    if (p.gamma) {
        j["mu"] = p.gamma->mu;
        j["rho"] = p.gamma->rho;
    }
    return j;
}

// {"kind": "exponential", "mean": 1.0}
// {"kind": "deterministic", "value": 1.5}
// {"kind": "uniform", "lower": 0.0, "upper": 2.0}
// {"kind": "empirical", "atoms": [..]}
ClaimDistribution parse_claim(const json& j, const std::string& where) {
    require_object(j, where);
    const std::string kind = as_string(need(j, "kind", where), where + ".kind");
    try {
        if (kind == "exponential") {
            reject_unknown(j, where, {"kind", "mean"});
            return ClaimDistribution::exponential(need_double(j, "mean", where));
        }
        if (kind == "deterministic") {
            reject_unknown(j, where, {"kind", "value"});
            return ClaimDistribution::deterministic(need_double(j, "value", where));
        }
        if (kind == "uniform") {
            reject_unknown(j, where, {"kind", "lower", "upper"});
            return ClaimDistribution::uniform(need_double(j, "lower", where),
                                              need_double(j, "upper", where));
        }
        if (kind == "empirical") {
            reject_unknown(j, where, {"kind", "atoms"});
            return ClaimDistribution::empirical(
                as_double_array(need(j, "atoms", where), where + ".atoms"));
        }
    } catch (const domain_error& e) {
        config_fail(where + ": " + e.what());
    }
    config_fail("field '" + where +
                ".kind' must be one of exponential, deterministic, uniform, empirical");
}

json claim_json(const ClaimDistribution& c) {
    json j;
    switch (c.kind()) {
        case ClaimDistribution::Kind::exponential:
            j["kind"] = "exponential";
            j["mean"] = c.mean();
            break;
        case ClaimDistribution::Kind::deterministic:
            j["kind"] = "deterministic";
            j["value"] = c.mean();
            break;
        case ClaimDistribution::Kind::uniform: {
            j["kind"] = "uniform";
            const double m = c.mean();
            const double half = std::sqrt(3.0 * c.variance());
            j["lower"] = m - half;
            j["upper"] = m + half;
            break;
        }
        case ClaimDistribution::Kind::empirical:
            j["kind"] = "empirical";
            j["atoms"] = c.samples();
            break;
    }
    return j;
}

// {"lambda0": .., "lambda1": .., "lambda2": .., "alpha": .., "theta": ..,
//  "mu": .., "rho": .., "omega": .., "nu": .. (default 0),
//  "claims": {"xi1": {..}, .., "xi4": {..}} (each optional, default exp mean 1)}
ShockModelConfig parse_shock(const json& j, const std::string& where) {
    require_object(j, where);
    reject_unknown(j, where, {"lambda0", "lambda1", "lambda2", "alpha", "theta", "mu", "rho",
                              "omega", "nu", "claims"});
    ShockModelConfig cfg;
    cfg.lambda0 = need_double(j, "lambda0", where);
    cfg.lambda1 = need_double(j, "lambda1", where);
    cfg.lambda2 = need_double(j, "lambda2", where);
    cfg.tss.alpha = need_double(j, "alpha", where);
    cfg.tss.theta = need_double(j, "theta", where);
    cfg.gamma.mu = need_double(j, "mu", where);
    cfg.gamma.rho = need_double(j, "rho", where);
    cfg.omega = need_double(j, "omega", where);
    cfg.nu = opt_double(j, "nu", where, 0.0);
    if (j.contains("claims")) {
        const json& cl = j.at("claims");
        require_object(cl, where + ".claims");
        reject_unknown(cl, where + ".claims", {"xi1", "xi2", "xi3", "xi4"});
        if (cl.contains("xi1")) cfg.xi1 = parse_claim(cl.at("xi1"), where + ".claims.xi1");
        if (cl.contains("xi2")) cfg.xi2 = parse_claim(cl.at("xi2"), where + ".claims.xi2");
        if (cl.contains("xi3")) cfg.xi3 = parse_claim(cl.at("xi3"), where + ".claims.xi3");
        if (cl.contains("xi4")) cfg.xi4 = parse_claim(cl.at("xi4"), where + ".claims.xi4");
    }
    try {
        cfg.validate();
    } catch (const domain_error& e) {
        config_fail(where + ": " + e.what());
    }
    return cfg;
}

json shock_json(const ShockModelConfig& cfg) {
    json j;
    j["lambda0"] = cfg.lambda0;
    j["lambda1"] = cfg.lambda1;
    j["lambda2"] = cfg.lambda2;
    j["alpha"] = cfg.tss.alpha;
    j["theta"] = cfg.tss.theta;
    j["mu"] = cfg.gamma.mu;
    j["rho"] = cfg.gamma.rho;
    j["omega"] = cfg.omega;
    j["nu"] = cfg.nu;
    j["claims"] = json{{"xi1", claim_json(cfg.xi1)},
                       {"xi2", claim_json(cfg.xi2)},
                       {"xi3", claim_json(cfg.xi3)},
                       {"xi4", claim_json(cfg.xi4)}};
    return j;
}

json eval_json(const EvalResult& r) {
    return json{{"value", r.value},
                {"abs_error_bound", r.abs_error_bound},
                {"terms_used", r.terms_used},
                {"method", r.method}};
}

// Both readings of the composed exponent at the argument u. The log(mu) form
// is the one every closed-form identity in the library satisfies; the log(alpha)
// variant circulates in some statements of the same model and is reported
// alongside so the discrepancy is visible rather than silent.
json composed_exponent_json(double u, const TssParams& tss, const GammaParams& g) {
    const double inner = g.mu - std::pow(tss.theta, tss.alpha) + std::pow(tss.theta + u, tss.alpha);
    return json{{"u", u},
                {"log_mu_form", laplace_exponent_composed(u, tss, g)},
                {"log_alpha_variant", g.rho * (std::log(inner) - std::log(tss.alpha))}};
}

// ---------------------------------------------------------------------------
// Run context and report output
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::size_t paths = 100000;
    double grid_dt = 0.02;
    std::vector<std::string> methods;
    unsigned threads = 0;
};

void add_output_options(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--out", o.out_dir, "directory for report.json, metadata.json and CSV output")
        ->capture_default_str();
    sub->add_option("--seed", o.seed, "base RNG seed; identical (config, seed) reproduce reports")
        ->capture_default_str();
    sub->add_option("--threads", o.threads,
                    "worker threads for Monte Carlo (0 = machine parallelism); results do not "
                    "depend on it")
        ->capture_default_str();
}

void add_config_positional(CLI::App* sub, CommonOpts& o) {
    sub->add_option("config", o.config_path, "JSON config file")->required();
}

struct RunContext {
    std::string command;
    CommonOpts opts;
    fs::path out;
    std::string config_raw;
    json resolved;
    json options;
    std::vector<std::string> stdout_lines;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

RunContext open_run(const std::string& command, const CommonOpts& o, bool needs_config) {
    RunContext ctx;
    ctx.command = command;
    ctx.opts = o;
    ctx.out = fs::path(o.out_dir);
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) io_fail("cannot create output directory '" + o.out_dir + "': " + ec.message());
    if (needs_config) {
        std::ifstream in(o.config_path, std::ios::binary);
        if (!in) io_fail("cannot read config file '" + o.config_path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        ctx.config_raw = buf.str();
    }
    return ctx;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) io_fail("short write to '" + path.string() + "'");
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// report.json carries everything that determines the numbers; metadata.json
// carries everything that varies run to run (timestamps, timing, threads).
void finish_run(RunContext& ctx, json results) {
    json report;
    report["schema"] = kSchema;
    report["command"] = ctx.command;
    report["seed"] = ctx.opts.seed;
    report["inputs_hash"] = git_blob_hash(ctx.config_raw);
    report["config"] = ctx.resolved;
    if (!ctx.options.is_null()) report["options"] = ctx.options;
    report["results"] = std::move(results);
    write_file(ctx.out / "report.json", report.dump(2) + "\n");

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started).count();
    json meta;
    meta["created_utc"] = utc_now();
    meta["elapsed_seconds"] = elapsed;
    meta["threads_requested"] = ctx.opts.threads;
    write_file(ctx.out / "metadata.json", meta.dump(2) + "\n");

    for (const std::string& line : ctx.stdout_lines) std::printf("%s\n", line.c_str());
    std::printf("report: %s\n", (ctx.out / "report.json").string().c_str());
}

void check_methods(const std::vector<std::string>& methods,
                   std::initializer_list<const char*> allowed, const std::string& command) {
    for (const std::string& m : methods) {
        bool ok = false;
        for (const char* a : allowed)
            if (m == a) ok = true;
        if (!ok)
            config_fail("--method '" + m + "' is not valid for '" + command + "'");
    }
}

// ---------------------------------------------------------------------------
// pmf
// ---------------------------------------------------------------------------

void enumerate_counts(std::size_t m, std::uint64_t k_max, CountVector& scratch,
                      std::vector<CountVector>& out) {
    if (scratch.size() == m) {
        out.push_back(scratch);
        return;
    }
    std::uint64_t used = 0;
    for (std::uint64_t v : scratch) used += v;
    for (std::uint64_t v = 0; v + used <= k_max; ++v) {
        scratch.push_back(v);
        enumerate_counts(m, k_max, scratch, out);
        scratch.pop_back();
    }
}

json pmf_one_method(const std::string& method, const CountVector& k, double t,
                    const ProcessParams& p, std::size_t grid_m, std::size_t nodes) {
    const bool nb = p.gamma.has_value();
    if (method == "auto" || method == "series") {
        const EvalResult r = nb ? pmf_mtsfnbp(k, t, p) : pmf_mtsfpp(k, t, p);
        if (method == "series" && r.method != "series")
            numeric_fail("pmf: series route unavailable (fell back to " + r.method +
                         ") at k index " + std::to_string(k.empty() ? 0 : k[0]));
        return eval_json(r);
    }
    if (method == "inversion") {
        const PgfHandle pgf = nb ? make_pgf_mtsfnbp(p) : make_pgf_mtsfpp(p);
        // theta = 0 pmfs have power tails; the doubling budget must match the
        // grid's aliasing level instead of the tempered default.
        const double budget = (p.tss.theta == 0.0) ? 1e-6 : 1e-10;
        const InversionDiagnostics d = pmf_by_inversion_diagnostic(k, t, pgf, grid_m, budget);
        return json{{"value", d.value},
                    {"abs_error_bound", d.imag_residue + d.doubling_diff},
                    {"terms_used", d.evaluations},
                    {"method", "inversion"}};
    }
    if (method == "quadrature") {
        if (!nb) config_fail("--method quadrature needs a gamma layer (mu, rho)");
        GammaMixtureQuadrature quad(p, t, nodes, grid_m);
        return json{{"value", quad.pmf(k)},
                    {"abs_error_bound", quad.imag_residue()},
                    {"terms_used", quad.nodes_used()},
                    {"method", "quadrature"}};
    }
    config_fail("--method '" + method + "' is not valid for 'pmf'");
}

void run_pmf(const CommonOpts& opts) {
    RunContext ctx = open_run("pmf", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    reject_unknown(cfg, "config", {"process", "t", "k_max", "grid_m", "nodes"});
    const ProcessParams p = parse_process(need(cfg, "process", "config"), "config.process");
    const double t = need_double(cfg, "t", "config");
    const std::uint64_t k_max = as_uint(need(cfg, "k_max", "config"), "config.k_max");
    const std::size_t grid_m = cfg.contains("grid_m")
                                   ? static_cast<std::size_t>(as_uint(cfg.at("grid_m"),
                                                                      "config.grid_m"))
                                   : 256;
    const std::size_t nodes =
        cfg.contains("nodes") ? static_cast<std::size_t>(as_uint(cfg.at("nodes"), "config.nodes"))
                              : 32;
    if (k_max > 64) config_fail("config.k_max is capped at 64");

    std::vector<std::string> methods = opts.methods;
    if (methods.empty()) methods = {"auto"};
    check_methods(methods, {"auto", "series", "inversion", "quadrature"}, "pmf");

    ctx.resolved = json{{"process", process_json(p)}, {"t", t}, {"k_max", k_max},
                        {"grid_m", grid_m}, {"nodes", nodes}};
    ctx.options = json{{"methods", methods}};

    std::vector<CountVector> ks;
    CountVector scratch;
    enumerate_counts(p.dimension(), k_max, scratch, ks);

    json entries = json::array();
    double total = 0.0;
    double max_gap = 0.0;
    std::string csv;
    for (std::size_t i = 0; i < p.dimension(); ++i) csv += "k" + std::to_string(i + 1) + ",";
    csv += "value,abs_error_bound,terms_used,method\n";

    for (const CountVector& k : ks) {
        json entry;
        entry["k"] = k;
        std::vector<double> vals;
        for (const std::string& m : methods) {
            const json r = pmf_one_method(m, k, t, p, grid_m, nodes);
            entry[m] = r;
            vals.push_back(r.at("value").get<double>());
        }
        for (double a : vals)
            for (double b : vals) max_gap = std::max(max_gap, std::abs(a - b));
        entry["value"] = vals.front();
        total += vals.front();
        entries.push_back(entry);

        const json& first = entry.at(methods.front());
        std::string row;
        for (std::uint64_t kv : k) row += std::to_string(kv) + ",";
        row += num(first.at("value").get<double>()) + "," +
               num(first.at("abs_error_bound").get<double>()) + "," +
               std::to_string(first.at("terms_used").get<std::uint64_t>()) + "," +
               first.at("method").get<std::string>();
        csv += row + "\n";
    }
    if (total > 1.0 + 1e-9)
        numeric_fail("pmf: probabilities over the enumerated set sum to " + num(total) +
                     " > 1 (check 'pmf-total-below-one')");
    write_file(ctx.out / "pmf.csv", csv);

    json results;
    results["entries"] = std::move(entries);
    results["enumerated_total_probability"] = total;
    if (methods.size() > 1) results["max_method_gap"] = max_gap;
    if (p.gamma) results["composed_exponent_at_total_rate"] =
        composed_exponent_json(p.total_rate(), p.tss, *p.gamma);
    ctx.stdout_lines.push_back("pmf: " + std::to_string(ks.size()) + " entries, enumerated mass " +
                               num(total));
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// pgf
// ---------------------------------------------------------------------------

void run_pgf(const CommonOpts& opts) {
    RunContext ctx = open_run("pgf", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    reject_unknown(cfg, "config", {"process", "t", "points"});
    const ProcessParams p = parse_process(need(cfg, "process", "config"), "config.process");
    const double t = need_double(cfg, "t", "config");
    const json& pts = need(cfg, "points", "config");
    if (!pts.is_array() || pts.empty())
        config_fail("field 'config.points' must be a nonempty array of argument vectors");
    check_methods(opts.methods, {}, "pgf");

    ctx.resolved = json{{"process", process_json(p)}, {"t", t}, {"points", pts}};

    const bool nb = p.gamma.has_value();
    auto eval = [&](const std::vector<double>& u) {
        return nb ? pgf_mtsfnbp(u, t, p) : pgf_mtsfpp(u, t, p);
    };

    json entries = json::array();
    std::size_t idx = 0;
    for (const json& pt : pts) {
        const std::string where = "config.points[" + std::to_string(idx) + "]";
        const std::vector<double> u = as_double_array(pt, where);
        if (u.size() != p.dimension())
            config_fail("field '" + where + "' must have one entry per component");
        for (double x : u)
            if (!(x >= 0.0) || !(x <= 1.0))
                config_fail("field '" + where + "' entries must lie in [0, 1]");
        const double v = eval(u);
        if (!(v >= -1e-12) || !(v <= 1.0 + 1e-12))
            numeric_fail("pgf value " + num(v) + " escapes [0, 1] (check 'pgf-in-unit-interval')");
        entries.push_back(json{{"u", u}, {"value", v}});
        ++idx;
    }

    const std::vector<double> ones(p.dimension(), 1.0);
    const double at_one = eval(ones);
    if (std::abs(at_one - 1.0) > 1e-10)
        numeric_fail("pgf(1) = " + num(at_one) + " deviates from 1 (check 'pgf-normalization')");

    json results;
    results["entries"] = std::move(entries);
    results["pgf_at_one"] = at_one;
    if (p.gamma) results["composed_exponent_at_total_rate"] =
        composed_exponent_json(p.total_rate(), p.tss, *p.gamma);
    ctx.stdout_lines.push_back("pgf: " + std::to_string(idx) + " points, pgf(1) = " + num(at_one));
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// levy
// ---------------------------------------------------------------------------

void run_levy(const CommonOpts& opts) {
    RunContext ctx = open_run("levy", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    reject_unknown(cfg, "config", {"process", "k_max"});
    const ProcessParams p = parse_process(need(cfg, "process", "config"), "config.process");
    if (!p.gamma)
        config_fail("config.process: levy masses need the gamma layer (mu, rho)");
    const std::uint64_t k_max = as_uint(need(cfg, "k_max", "config"), "config.k_max");
    if (k_max < 1 || k_max > 64) config_fail("config.k_max must be in [1, 64]");
    check_methods(opts.methods, {}, "levy");

    ctx.resolved = json{{"process", process_json(p)}, {"k_max", k_max}};

    std::vector<CountVector> ks;
    CountVector scratch;
    enumerate_counts(p.dimension(), k_max, scratch, ks);

    const double rate = laplace_exponent_composed(p.total_rate(), p.tss, *p.gamma);
    json entries = json::array();
    double partial = 0.0;
    std::string csv;
    for (std::size_t i = 0; i < p.dimension(); ++i) csv += "k" + std::to_string(i + 1) + ",";
    csv += "mass\n";

    for (const CountVector& k : ks) {
        if (total_count(k) == 0) continue;
        EvalResult r;
        try {
            r = levy_mass(k, p);
        } catch (const convergence_error& e) {
            numeric_fail(std::string("levy: ") + e.what());
        }
        if (r.value < -1e-15)
            numeric_fail("levy mass " + num(r.value) + " is negative (check 'levy-nonnegative')");
        partial += r.value;
        json entry;
        entry["k"] = k;
        entry["mass"] = eval_json(r);
        entries.push_back(entry);
        std::string row;
        for (std::uint64_t kv : k) row += std::to_string(kv) + ",";
        csv += row + num(r.value) + "\n";
    }
    if (partial > rate + 1e-9)
        numeric_fail("levy partial mass " + num(partial) + " exceeds the event rate " + num(rate) +
                     " (check 'levy-partial-below-rate')");
    write_file(ctx.out / "levy.csv", csv);

    json results;
    results["entries"] = std::move(entries);
    results["event_rate"] = rate;
    results["partial_mass"] = partial;
    results["coverage"] = partial / rate;
    results["composed_exponent_at_total_rate"] =
        composed_exponent_json(p.total_rate(), p.tss, *p.gamma);
    ctx.stdout_lines.push_back("levy: mass " + num(partial) + " of event rate " + num(rate) +
                               " covered up to |k| = " + std::to_string(k_max));
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void run_simulate(const CommonOpts& opts) {
    RunContext ctx = open_run("simulate", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    reject_unknown(cfg, "config", {"process", "t", "mode"});
    const ProcessParams p = parse_process(need(cfg, "process", "config"), "config.process");
    const double t = need_double(cfg, "t", "config");
    const std::string mode = as_string(need(cfg, "mode", "config"), "config.mode");
    if (mode != "terminal" && mode != "path")
        config_fail("field 'config.mode' must be 'terminal' or 'path'");
    if (opts.paths < 1) config_fail("--paths must be at least 1");
    check_methods(opts.methods, {}, "simulate");

    ctx.resolved = json{{"process", process_json(p)}, {"t", t}, {"mode", mode}};
    ctx.options = json{{"paths", opts.paths}, {"grid_dt", opts.grid_dt}};

    const std::size_t m = p.dimension();
    const bool nb = p.gamma.has_value();
    const RngStream base{opts.seed, 0};
    json results;
    results["mode"] = mode;
    results["n_paths"] = opts.paths;

    if (mode == "terminal") {
        struct Rows {
            std::vector<CountVector> rows;
            void merge(Rows o) {
                rows.insert(rows.end(), std::make_move_iterator(o.rows.begin()),
                            std::make_move_iterator(o.rows.end()));
            }
        };
        const Rows all = run_mc<Rows>(
            base, opts.paths,
            [&](Rng& rng, Rows& acc) {
                acc.rows.push_back(nb ? sample_mtsfnbp_terminal(t, p, rng)
                                      : sample_mtsfpp_terminal(t, p, rng));
            },
            opts.threads);

        std::string csv;
        for (std::size_t i = 0; i < m; ++i)
            csv += "k" + std::to_string(i + 1) + (i + 1 < m ? "," : "\n");
        std::vector<MomentAccumulator> acc(m);
        for (const CountVector& row : all.rows) {
            std::string line;
            for (std::size_t i = 0; i < m; ++i) {
                acc[i].add(static_cast<double>(row[i]));
                line += std::to_string(row[i]) + (i + 1 < m ? "," : "\n");
            }
            csv += line;
        }
        write_file(ctx.out / "samples.csv", csv);

        json comps = json::array();
        for (std::size_t i = 0; i < m; ++i) {
            json c;
            c["component"] = i + 1;
            c["mean"] = acc[i].mean;
            c["variance"] = acc[i].variance();
            c["std_error"] = acc[i].std_error();
            comps.push_back(c);
        }
        results["components"] = std::move(comps);
        // The terminal mean is lambda_i E[Y(t)]; it is finite only when the
        // clock has a first moment (gamma layer, or tempering theta > 0).
        if (nb) {
            const double ym = composed_clock_mean(p.tss, *p.gamma, t);
            json theory = json::array();
            for (double l : p.lambdas) theory.push_back(l * ym);
            results["mean_theory"] = std::move(theory);
        } else if (p.tss.theta > 0.0) {
            const double ym = p.tss.alpha * std::pow(p.tss.theta, p.tss.alpha - 1.0) * t;
            json theory = json::array();
            for (double l : p.lambdas) theory.push_back(l * ym);
            results["mean_theory"] = std::move(theory);
        }
        ctx.stdout_lines.push_back("simulate: " + std::to_string(opts.paths) +
                                   " terminal samples, component 1 mean " + num(acc[0].mean));
    } else {
        if (!(opts.grid_dt > 0.0)) config_fail("--grid-dt must be positive");
        std::string csv = "path,time,component,size\n";
        std::uint64_t events = 0;
        std::vector<MomentAccumulator> acc(m);
        double resolution = 0.0;
        for (std::size_t i = 0; i < opts.paths; ++i) {
            Rng rng(base.substream(i));
            const PathSample sample = sample_path(t, p, opts.grid_dt, rng);
            resolution = sample.time_resolution;
            for (const PathEvent& e : sample.events) {
                csv += std::to_string(i) + "," + num(e.time) + "," +
                       std::to_string(e.component + 1) + "," + std::to_string(e.size) + "\n";
                ++events;
            }
            for (std::size_t c = 0; c < m; ++c)
                acc[c].add(static_cast<double>(sample.terminal[c]));
        }
        write_file(ctx.out / "events.csv", csv);
        results["events"] = events;
        results["time_resolution"] = resolution;
        json comps = json::array();
        for (std::size_t i = 0; i < m; ++i) {
            json c;
            c["component"] = i + 1;
            c["terminal_mean"] = acc[i].mean;
            comps.push_back(c);
        }
        results["components"] = std::move(comps);
        ctx.stdout_lines.push_back("simulate: " + std::to_string(opts.paths) + " paths, " +
                                   std::to_string(events) + " events");
    }
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// ruin
// ---------------------------------------------------------------------------

json ruin_estimate_json(const RuinEstimate& est, const std::string& convention) {
    json j;
    j["estimate"] = est.ruin_prob;
    j["ci_halfwidth"] = est.ci_halfwidth;
    j["n_paths"] = est.n_paths;
    j["horizon"] = est.horizon;
    j["convention"] = convention;
    j["jump_tail_mass"] = est.jump_tail_mass;
    j["net_profit"] = est.net_profit;
    if (std::isfinite(est.mean_ruin_time_given_ruin))
        j["mean_ruin_time_given_ruin"] = est.mean_ruin_time_given_ruin;
    if (!est.deficit_quantiles.empty()) {
        json q;
        for (std::size_t i = 0; i < est.deficit_quantiles.size(); ++i)
            q[num(est.deficit_quantile_probs[i])] = est.deficit_quantiles[i];
        j["deficit_quantiles"] = std::move(q);
    }
    return j;
}

void run_ruin(const CommonOpts& opts) {
    RunContext ctx = open_run("ruin", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    reject_unknown(cfg, "config",
                   {"risk", "u_max", "horizon", "deficit_y", "mc_convention"});
    const ShockModelConfig risk = parse_shock(need(cfg, "risk", "config"), "config.risk");
    const double u_max = opt_double(cfg, "u_max", "config", 40.0);
    if (!(u_max > 0.0)) config_fail("config.u_max must be positive");
    const double horizon = cfg.contains("horizon")
                               ? as_double(cfg.at("horizon"), "config.horizon")
                               : default_ruin_horizon(risk);
    std::string convention = "batch";
    if (cfg.contains("mc_convention")) {
        convention = as_string(cfg.at("mc_convention"), "config.mc_convention");
        if (convention != "batch" && convention != "single_claim")
            config_fail("config.mc_convention must be 'batch' or 'single_claim'");
    }
    std::optional<double> deficit_y;
    if (cfg.contains("deficit_y")) {
        deficit_y = as_double(cfg.at("deficit_y"), "config.deficit_y");
        if (!(*deficit_y >= 0.0)) config_fail("config.deficit_y must be >= 0");
    }
    if (risk.nu > u_max) config_fail("config.risk.nu must not exceed config.u_max");
    if (!(opts.grid_dt > 0.0)) config_fail("--grid-dt must be positive");

    std::vector<std::string> methods = opts.methods;
    if (methods.empty()) methods = {"ode"};
    check_methods(methods, {"mc", "ode"}, "ruin");
    const bool want_mc = std::find(methods.begin(), methods.end(), "mc") != methods.end();
    const bool want_ode = std::find(methods.begin(), methods.end(), "ode") != methods.end();

    ctx.resolved = json{{"risk", shock_json(risk)},
                        {"u_max", u_max},
                        {"horizon", horizon},
                        {"mc_convention", convention}};
    if (deficit_y) ctx.resolved["deficit_y"] = *deficit_y;
    ctx.options = json{{"methods", methods}, {"paths", opts.paths}, {"grid_dt", opts.grid_dt}};

    json results;
    results["methods"] = methods;
    double ode_at_nu = std::numeric_limits<double>::quiet_NaN();

    if (want_ode) {
        RuinGrid grid;
        try {
            grid = solve_ruin_ode(risk, u_max, opts.grid_dt);
        } catch (const convergence_error& e) {
            numeric_fail(std::string("ruin ode: ") + e.what());
        }
        std::string csv = "u,value\n";
        for (std::size_t i = 0; i < grid.u.size(); ++i)
            csv += num(grid.u[i]) + "," + num(grid.value[i]) + "\n";
        write_file(ctx.out / "ruin_grid.csv", csv);

        const double pos = risk.nu / grid.h;
        const std::size_t lo =
            std::min(static_cast<std::size_t>(pos), grid.value.size() - 2);
        const double w = pos - static_cast<double>(lo);
        ode_at_nu = grid.value[lo] + w * (grid.value[lo + 1] - grid.value[lo]);

        json g;
        g["estimate"] = ode_at_nu;
        g["at_capital"] = risk.nu;
        g["zero_capital"] = grid.value.front();
        g["tail"] = grid.tail;
        g["psi_rate"] = grid.psi_rate;
        g["h"] = grid.h;
        g["u_max"] = u_max;
        g["grid_points"] = grid.u.size();
        g["csv"] = "ruin_grid.csv";
        const RuinFormResiduals res = ruin_form_residuals(risk, u_max, opts.grid_dt);
        g["form_residuals"] =
            json{{"survival_form", res.survival_form}, {"literal_form", res.literal_form}};
        results["ode"] = std::move(g);
        ctx.stdout_lines.push_back("ruin ode: P(" + num(risk.nu) + ") = " + num(ode_at_nu) +
                                   ", tail at u_max " + num(grid.tail));

        if (deficit_y) {
            const JointRuinGrid jg = solve_joint_ruin_ode(risk, *deficit_y, u_max, opts.grid_dt);
            std::string jcsv = "u,value\n";
            for (std::size_t i = 0; i < jg.u.size(); ++i)
                jcsv += num(jg.u[i]) + "," + num(jg.value[i]) + "\n";
            write_file(ctx.out / "deficit_grid.csv", jcsv);
            results["deficit"] = json{{"y", jg.y},
                                      {"zero_capital", jg.value.front()},
                                      {"h", jg.h},
                                      {"csv", "deficit_grid.csv"}};
        }
    }

    if (want_mc) {
        const RuinSimMode mode =
            (convention == "batch") ? RuinSimMode::batch : RuinSimMode::single_claim;
        RuinEstimate est;
        try {
            est = estimate_ruin_mc(risk, horizon, opts.paths, opts.grid_dt,
                                   RngStream{opts.seed, 0}, mode, opts.threads);
        } catch (const convergence_error& e) {
            numeric_fail(std::string("ruin mc: ") + e.what());
        }
        results["mc"] = ruin_estimate_json(est, convention);
        ctx.stdout_lines.push_back("ruin mc (" + convention + "): " + num(est.ruin_prob) +
                                   " +- " + num(est.ci_halfwidth));
        if (want_ode) {
            const double gap = std::abs(est.ruin_prob - ode_at_nu);
            results["gap"] = json{{"mc_estimate", est.ruin_prob},
                                  {"ode_value", ode_at_nu},
                                  {"abs_gap", gap},
                                  {"within_mc_ci", gap <= est.ci_halfwidth}};
            ctx.stdout_lines.push_back("ruin gap |mc - ode| = " + num(gap));
        }
    }

    const PremiumReport prem = premium_loading(risk, 1.0);
    results["premium"] = json{{"loading", prem.loading},
                              {"net_profit", prem.net_profit},
                              {"fair_premium", prem.fair_premium},
                              {"mean_claim", prem.mean_claim},
                              {"claim_rate", prem.claim_rate}};
    results["composed_exponent_at_total_rate"] =
        composed_exponent_json(risk.total_rate(), risk.tss, risk.gamma);
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// lrd
// ---------------------------------------------------------------------------

void run_lrd(const CommonOpts& opts) {
    RunContext ctx = open_run("lrd", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    reject_unknown(cfg, "config", {"risk", "s", "times"});
    const ShockModelConfig risk = parse_shock(need(cfg, "risk", "config"), "config.risk");
    const double s = need_double(cfg, "s", "config");
    const std::vector<double> times = as_double_array(need(cfg, "times", "config"),
                                                      "config.times");
    check_methods(opts.methods, {}, "lrd");

    ctx.resolved = json{{"risk", shock_json(risk)}, {"s", s}, {"times", times}};

    LrdResult lrd;
    try {
        lrd = lrd_check(risk, s, times);
    } catch (const domain_error& e) {
        config_fail(std::string("lrd: ") + e.what());
    }

    std::string csv = "t,correlation\n";
    json entries = json::array();
    for (double t : times) {
        const double c = risk_correlation(s, t, risk);
        entries.push_back(json{{"t", t}, {"correlation", c}});
        csv += num(t) + "," + num(c) + "\n";
    }
    write_file(ctx.out / "lrd.csv", csv);

    json results;
    results["entries"] = std::move(entries);
    results["slope"] = lrd.slope;
    results["d"] = lrd.d;
    results["lrd"] = lrd.lrd;
    results["composed_exponent_at_total_rate"] =
        composed_exponent_json(risk.total_rate(), risk.tss, risk.gamma);
    ctx.stdout_lines.push_back("lrd: slope " + num(lrd.slope) + ", d = " + num(lrd.d) +
                               (lrd.lrd ? ", long-range dependent" : ", short-range"));
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// specfun eval
// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> as_pair_array(const json& v, const std::string& where) {
    if (!v.is_array()) config_fail("field '" + where + "' must be an array of [a, A] pairs");
    std::vector<std::pair<double, double>> out;
    std::size_t i = 0;
    for (const json& row : v) {
        const std::string rw = where + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != 2) config_fail("field '" + rw + "' must be [a, A]");
        out.emplace_back(as_double(row.at(0), rw + "[0]"), as_double(row.at(1), rw + "[1]"));
        ++i;
    }
    return out;
}

void run_specfun_eval(const CommonOpts& opts) {
    RunContext ctx = open_run("specfun eval", opts, true);
    const json cfg = parse_config_text(ctx.config_raw, opts.config_path);
    require_object(cfg, "config");
    const std::string fn = as_string(need(cfg, "function", "config"), "config.function");
    check_methods(opts.methods, {}, "specfun eval");

    json result;
    try {
        if (fn == "mittag_leffler") {
            reject_unknown(cfg, "config", {"function", "a", "b", "g", "z"});
            result = eval_json(mittag_leffler_3p(need_double(cfg, "a", "config"),
                                                 need_double(cfg, "b", "config"),
                                                 need_double(cfg, "g", "config"),
                                                 need_double(cfg, "z", "config")));
        } else if (fn == "wright") {
            reject_unknown(cfg, "config", {"function", "upper", "lower", "z", "first_term"});
            WrightSpec spec;
            spec.upper = as_pair_array(need(cfg, "upper", "config"), "config.upper");
            spec.lower = as_pair_array(need(cfg, "lower", "config"), "config.lower");
            const std::size_t first =
                cfg.contains("first_term")
                    ? static_cast<std::size_t>(as_uint(cfg.at("first_term"), "config.first_term"))
                    : 0;
            result = eval_json(wright_pq(spec, need_double(cfg, "z", "config"), {}, first));
        } else if (fn == "digamma") {
            reject_unknown(cfg, "config", {"function", "x"});
            result = json{{"value", digamma(need_double(cfg, "x", "config"))},
                          {"method", "closed_form"}};
        } else if (fn == "gen_binomial") {
            reject_unknown(cfg, "config", {"function", "alpha", "k"});
            result = json{{"value", gen_binomial(need_double(cfg, "alpha", "config"),
                                                 static_cast<std::uint32_t>(as_uint(
                                                     need(cfg, "k", "config"), "config.k")))},
                          {"method", "closed_form"}};
        } else if (fn == "igamma_q" || fn == "igamma_p") {
            reject_unknown(cfg, "config", {"function", "shape", "x"});
            const double a = need_double(cfg, "shape", "config");
            const double x = need_double(cfg, "x", "config");
            result = json{{"value", fn == "igamma_q" ? igamma_q(a, x) : igamma_p(a, x)},
                          {"method", "continued_fraction_series"}};
        } else if (fn == "gamma_cdf") {
            reject_unknown(cfg, "config", {"function", "x", "shape", "rate"});
            result = json{{"value", gamma_cdf(need_double(cfg, "x", "config"),
                                              need_double(cfg, "shape", "config"),
                                              need_double(cfg, "rate", "config"))},
                          {"method", "continued_fraction_series"}};
        } else {
            config_fail("config.function must be one of mittag_leffler, wright, digamma, "
                        "gen_binomial, igamma_q, igamma_p, gamma_cdf");
        }
    } catch (const domain_error& e) {
        config_fail(std::string("specfun eval: ") + e.what());
    }

    ctx.resolved = cfg;
    json results;
    results["function"] = fn;
    results["result"] = result;
    ctx.stdout_lines.push_back("specfun eval " + fn + ": " +
                               num(result.at("value").get<double>()));
    finish_run(ctx, std::move(results));
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int run_verify(const std::string& suite, const CommonOpts& opts) {
    RunContext ctx = open_run("verify", opts, false);
    ctx.config_raw = "verify " + suite + " seed=" + std::to_string(opts.seed) + "\n";
    VerifyResult res;
    try {
        res = run_verify_suite(suite, opts.seed, opts.threads);
    } catch (const domain_error& e) {
        config_fail(e.what());
    }
    std::fputs(res.report.c_str(), stdout);
    write_file(ctx.out / "verify_report.txt", res.report);

    ctx.resolved = json{{"suite", suite}};
    json results;
    results["ok"] = res.ok;
    json checks = json::array();
    for (const VerifyCheck& c : res.checks)
        checks.push_back(
            json{{"name", c.name}, {"pass", c.pass}, {"error", c.error}, {"tol", c.tol}});
    results["checks"] = std::move(checks);
    if (!res.ok) results["first_failure"] = res.first_failure;
    finish_run(ctx, std::move(results));

    if (!res.ok) {
        std::fprintf(stderr, "numeric failure: verify check '%s' failed\n",
                     res.first_failure.c_str());
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tempered space-fractional counting processes and common-shock ruin models"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string verify_suite;

    CLI::App* pmf = app.add_subcommand("pmf", "joint pmf table by series, inversion or quadrature");
    add_config_positional(pmf, opts);
    pmf->add_option("--method", opts.methods,
                    "evaluation route: series, inversion, quadrature (repeatable)");
    add_output_options(pmf, opts);

    CLI::App* pgf = app.add_subcommand("pgf", "probability generating function values");
    add_config_positional(pgf, opts);
    add_output_options(pgf, opts);

    CLI::App* levy = app.add_subcommand("levy", "jump measure masses and the event rate");
    add_config_positional(levy, opts);
    add_output_options(levy, opts);

    CLI::App* simulate = app.add_subcommand("simulate", "terminal samples or event paths");
    add_config_positional(simulate, opts);
    simulate->add_option("--paths", opts.paths, "number of Monte Carlo paths")
        ->capture_default_str();
    simulate->add_option("--grid-dt", opts.grid_dt, "path simulation grid step")
        ->capture_default_str();
    add_output_options(simulate, opts);

    CLI::App* ruin = app.add_subcommand("ruin", "ruin probabilities by Volterra grid or Monte Carlo");
    add_config_positional(ruin, opts);
    ruin->add_option("--method", opts.methods, "mc, ode, or both (repeatable)");
    ruin->add_option("--paths", opts.paths, "Monte Carlo paths")->capture_default_str();
    ruin->add_option("--grid-dt", opts.grid_dt, "Volterra grid step in capital")
        ->capture_default_str();
    add_output_options(ruin, opts);

    CLI::App* lrd = app.add_subcommand("lrd", "increment correlation decay and the dependence exponent");
    add_config_positional(lrd, opts);
    add_output_options(lrd, opts);

    CLI::App* specfun = app.add_subcommand("specfun", "special function evaluation");
    specfun->require_subcommand(1);
    CLI::App* specfun_eval = specfun->add_subcommand("eval", "evaluate one special function");
    add_config_positional(specfun_eval, opts);
    add_output_options(specfun_eval, opts);

    CLI::App* verify = app.add_subcommand("verify", "cross-validation matrix for one module or all");
    verify->add_option("suite", verify_suite, "specfun, subordinators, counting, risk, or all")
        ->required();
    add_output_options(verify, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (pmf->parsed()) run_pmf(opts);
        else if (pgf->parsed()) run_pgf(opts);
        else if (levy->parsed()) run_levy(opts);
        else if (simulate->parsed()) run_simulate(opts);
        else if (ruin->parsed()) run_ruin(opts);
        else if (lrd->parsed()) run_lrd(opts);
        else if (specfun->parsed() && specfun_eval->parsed()) run_specfun_eval(opts);
        else if (verify->parsed()) return run_verify(verify_suite, opts);
    } catch (const CliError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return e.code;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const convergence_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const consistency_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
