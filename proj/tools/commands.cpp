#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "glmamp/kernels.hpp"
#include "glmamp/priors.hpp"
#include "glmamp/spec_parse.hpp"
#include "glmamp/trace_io.hpp"
#include "glmamp/verify.hpp"

namespace glmamp::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// settings access

class Settings {
public:
    explicit Settings(const KeyValues& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    std::optional<std::string> opt(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        return it->second;
    }

    double real(const std::string& key, double fallback) const {
        const auto v = opt(key);
        return v ? to_real(key, *v) : fallback;
    }

    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
        const auto v = opt(key);
        if (!v) return fallback;
        std::uint64_t out = 0;
        const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc() || end != v->data() + v->size()) {
            throw UsageError(key + ": expected a non-negative integer, got '" + *v + "'");
        }
        return out;
    }

    int integer(const std::string& key, int fallback, int min_value) const {
        const auto v = opt(key);
        if (!v) return fallback;
        int out = 0;
        const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc() || end != v->data() + v->size() || out < min_value) {
            throw UsageError(key + ": expected an integer >= " + std::to_string(min_value) + ", got '" +
                             *v + "'");
        }
        return out;
    }

    static double to_real(const std::string& key, const std::string& v) {
        double out = 0.0;
        const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out)) {
            throw UsageError(key + ": expected a number, got '" + v + "'");
        }
        return out;
    }

private:
    const KeyValues& kv_;
};

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Rethrows library validation errors as usage errors; I/O errors pass through.
template <class F>
auto as_usage(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const SpecParseError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

GenSpec gen_spec(const Settings& s) {
    GenSpec spec;
    spec.n = static_cast<std::size_t>(s.integer("n", static_cast<int>(spec.n), 1));
    spec.m = static_cast<std::size_t>(s.integer("m", static_cast<int>(spec.m), 1));
    spec.prior = s.str("prior", spec.prior);
    spec.channel = s.str("channel", spec.channel);
    if (const auto kind = s.opt("matrix")) spec.matrix = as_usage([&] { return parse_matrix_kind(*kind); });
    if (s.has("snr")) spec.snr_db = s.real("snr", 0.0);
    spec.seed = s.u64("seed", spec.seed);
    // Validate the grammar strings before any computation.
    parse_prior(spec.prior);
    parse_channel(spec.channel);
    return spec;
}

SolverConfig solver_config(const Settings& s, const std::string& engine) {
    SolverConfig c = engine == "modular" ? SolverConfig::modular_defaults() : SolverConfig::gamp_defaults();
    c.max_iter = s.integer("max-iter", c.max_iter, 1);
    c.tol = s.real("tol", c.tol);
    c.damping = s.real("damping", c.damping);
    c.variance_floor = s.real("variance-floor", c.variance_floor);
    c.seed = s.u64("seed", c.seed);
    if (const auto im = s.opt("input-mode")) c.input_mode = as_usage([&] { return parse_mode(*im); });
    if (const auto slm = s.opt("slm")) c.slm_backend = as_usage([&] { return parse_slm_backend(*slm); });
    as_usage([&] {
        c.validate();
        return 0;
    });
    return c;
}

std::string require_engine(const std::string& engine) {
    if (engine != "gamp" && engine != "modular") {
        throw UsageError("engine: expected gamp or modular, got '" + engine + "'");
    }
    return engine;
}

SolveResult dispatch(const std::string& engine, const ProblemInstance& problem, Mode mode,
                     const SolverConfig& config) {
    return engine == "modular" ? run_modular(problem, mode, config) : run_gamp(problem, mode, config);
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

// ---------------------------------------------------------------------------
// keys

namespace {

const KeyHelp kConfig{"config", "key = value settings file; flags override it"};
const KeyHelp kSeed{"seed", "64-bit seed"};

const std::vector<KeyHelp> kProblemKeys = {
    {"n", "number of unknowns (default 64)"},
    {"m", "number of measurements (default 128)"},
    {"prior", "prior spec: gaussian(mean=,var=) | bg(rho=,mean=,var=) | laplace(lambda=)"},
    {"channel", "channel spec: awgn(var=) | probit(scale=) | poisson() | logistic(scale=)"},
    {"matrix", "sensing matrix entries: gaussian | uniform (default by channel)"},
    {"snr", "target SNR in dB; replaces the channel noise parameter"},
};

const std::vector<KeyHelp> kSolverKeys = {
    {"engine", "gamp | modular (default gamp)"},
    {"mode", "mmse | map (default mmse)"},
    {"input-mode", "input denoiser mode when it differs from --mode (nonstandard)"},
    {"slm", "modular module A: exact | amp (default exact)"},
    {"max-iter", "iteration cap (default 100)"},
    {"tol", "stop when the relative change of x_hat and tau_x is below this (default 1e-8)"},
    {"damping", "damping in (0, 1] (default 1 for gamp, 0.7 for modular)"},
    {"variance-floor", "variance floor (default 1e-11)"},
};

std::vector<KeyHelp> concat(std::initializer_list<std::vector<KeyHelp>> parts) {
    std::vector<KeyHelp> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<KeyHelp> without(std::vector<KeyHelp> keys, const std::string& key) {
    std::erase_if(keys, [&](const KeyHelp& k) { return k.key == key; });
    return keys;
}

}  // namespace

const std::vector<KeyHelp>& gen_keys() {
    static const auto keys = concat({{kConfig, {"out", "output directory (required)"}}, kProblemKeys, {kSeed}});
    return keys;
}

const std::vector<KeyHelp>& solve_keys() {
    static const auto keys = concat({{kConfig,
                                      {"problem", "problem directory or problem.cfg (else generated inline)"},
                                      {"out", "output directory (default glmamp_out)"}},
                                     kProblemKeys,
                                     kSolverKeys,
                                     {kSeed}});
    return keys;
}

const std::vector<KeyHelp>& verify_keys() {
    static const std::vector<KeyHelp> keys = {
        kConfig,
        {"samples", "samples per sampled check (default 10000)"},
        {"seed", "sampling seed (default 1)"},
        {"check", "comma list of laplace, bridge, equivalence, derivatives (default all)"},
        {"channel", "awgn | probit | poisson | logistic, or a channel spec (default all)"},
        {"mode", "mmse | map | both (default both)"},
        {"report", "report path (default verify_report.json)"},
    };
    return keys;
}

const std::vector<KeyHelp>& sweep_keys() {
    static const auto keys = concat({{kConfig,
                                      {"snr", "SNR axis in dB: a:step:b or comma list"},
                                      {"rho", "sparsity axis (bg prior): a:step:b or comma list"},
                                      {"ratio", "m/n axis: a:step:b or comma list"},
                                      {"reps", "repetitions per cell (default 1)"},
                                      {"engines", "comma list of gamp, modular (default both)"},
                                      {"modes", "comma list of mmse, map (default mmse)"},
                                      {"out", "CSV path (default sweep.csv)"}},
                                     without(kProblemKeys, "snr"),
                                     {{"slm", "modular module A: exact | amp (default exact)"},
                                      {"max-iter", "iteration cap (default 100)"},
                                      {"tol", "convergence tolerance (default 1e-8)"}},
                                     {kSeed}});
    return keys;
}

KeyValues merge_settings(const std::vector<KeyHelp>& keys, const KeyValues& flags) {
    std::set<std::string> known;
    for (const auto& k : keys) known.insert(k.key);
    const auto check = [&](const KeyValues& kv, const std::string& where) {
        for (const auto& [key, value] : kv) {
            if (!known.count(key)) throw UsageError(where + ": unknown key '" + key + "'");
        }
    };
    check(flags, "flags");
    KeyValues merged;
    if (const auto it = flags.find("config"); it != flags.end()) {
        merged = read_key_values(it->second);
        merged.erase("config");
        check(merged, it->second);
    }
    for (const auto& [key, value] : flags) {
        if (key != "config") merged[key] = value;
    }
    return merged;
}

std::vector<double> parse_axis(const std::string& text) {
    if (text.find_first_not_of(" \t") == std::string::npos) throw UsageError("empty axis list");
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::istringstream is(text);
        std::string item;
        while (std::getline(is, item, ':')) parts.push_back(Settings::to_real("axis", item));
        if (parts.size() != 3) throw UsageError("axis '" + text + "': expected start:step:stop");
        const double start = parts[0], step = parts[1], stop = parts[2];
        if (!(step > 0.0) || stop < start) throw UsageError("axis '" + text + "': need step > 0 and stop >= start");
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
    } else {
        for (const auto& item : split_list(text)) out.push_back(Settings::to_real("axis", item));
    }
    if (out.empty()) throw UsageError("empty axis list");
    return out;
}

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const KeyValues& kv, std::ostream& out, std::ostream& /*err*/) {
    const Settings s(kv);
    const auto dir = s.opt("out");
    if (!dir) throw UsageError("gen: --out is required");
    const GenSpec spec = gen_spec(s);
    const ProblemInstance problem = as_usage([&] { return generate_problem(spec); });
    write_problem(*dir, problem, spec);
    out << "wrote " << (fs::path(*dir) / "problem.cfg").string() << " (n=" << problem.n()
        << ", m=" << problem.m() << ", channel=" << problem.channel->spec() << ")\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const KeyValues& kv, std::ostream& out, std::ostream& err) {
    const Settings s(kv);
    const std::string engine = require_engine(s.str("engine", "gamp"));
    const Mode mode = as_usage([&] { return parse_mode(s.str("mode", "mmse")); });
    const SolverConfig config = solver_config(s, engine);
    const fs::path out_dir = s.str("out", "glmamp_out");

    // Everything is read and computed before the first byte is written.
    const ProblemInstance problem = s.has("problem") ? load_problem(*s.opt("problem"))
                                                     : as_usage([&] { return generate_problem(gen_spec(s)); });

    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult result = dispatch(engine, problem, mode, config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream trace;
    write_trace_jsonl(trace, result.trace);

    nlohmann::json summary;
    summary["engine"] = engine;
    summary["mode"] = to_string(mode);
    if (config.input_mode) summary["input_mode"] = to_string(*config.input_mode);
    if (engine == "modular") summary["slm"] = to_string(config.slm_backend);
    summary["n"] = problem.n();
    summary["m"] = problem.m();
    summary["channel"] = problem.channel->spec();
    summary["prior"] = problem.prior->spec();
    summary["iterations"] = result.iterations;
    summary["converged"] = result.converged;
    summary["diverged"] = result.diverged;
    summary["floor_events"] = result.floor_events;
    summary["nmse"] = result.nmse ? nlohmann::json(*result.nmse) : nlohmann::json(nullptr);
    summary["wall_time_s"] = wall;
    if (!result.message.empty()) summary["message"] = result.message;

    std::ostringstream x_hat;
    for (const auto& st : result.solution) x_hat << shortest(st.point) << '\n';

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    write_text_atomic(out_dir / "trace.jsonl", trace.str());
    write_text_atomic(out_dir / "x_hat.csv", x_hat.str());
    write_text_atomic(out_dir / "summary.json", summary.dump(2) + "\n");

    out << engine << '/' << to_string(mode) << ": iterations=" << result.iterations
        << " converged=" << (result.converged ? "yes" : "no");
    if (result.nmse) out << " nmse=" << shortest(*result.nmse);
    out << '\n';
    if (result.diverged) {
        err << "solve: diverged: " << result.message << '\n';
        return kCheckFailed;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const KeyValues& kv, std::ostream& out, std::ostream& /*err*/) {
    const Settings s(kv);
    const auto samples = static_cast<std::size_t>(s.integer("samples", 10000, 1));
    const std::uint64_t seed = s.u64("seed", 1);
    const fs::path report_path = s.str("report", "verify_report.json");

    std::set<std::string> checks;
    for (const auto& c : split_list(s.str("check", "all"))) {
        if (c == "all") {
            checks.insert({"laplace", "bridge", "equivalence", "derivatives"});
        } else if (c == "laplace" || c == "bridge" || c == "equivalence" || c == "derivatives") {
            checks.insert(c);
        } else {
            throw UsageError("check: unknown check '" + c + "'");
        }
    }
    if (checks.empty()) throw UsageError("check: empty list");

    std::vector<Mode> modes;
    const std::string mode_text = s.str("mode", "both");
    if (mode_text == "both") {
        modes = {Mode::SumProduct, Mode::MaxSum};
    } else {
        modes = {as_usage([&] { return parse_mode(mode_text); })};
    }

    std::vector<ChannelPtr> channels = shipped_channels();
    const std::string channel_text = s.str("channel", "all");
    if (channel_text.find('(') != std::string::npos) {
        channels = {parse_channel(channel_text)};
    } else if (channel_text != "all") {
        std::erase_if(channels, [&](const ChannelPtr& c) { return c->family() != channel_text; });
        if (channels.empty()) throw UsageError("channel: unknown channel '" + channel_text + "'");
    }

    // Jobs are listed in a fixed order and written back by index, so the
    // report does not depend on scheduling.
    std::vector<std::function<CheckReport()>> jobs;
    for (const auto& ch : channels) {
        if (checks.count("laplace")) jobs.emplace_back([=] { return check_laplace_identity(*ch, samples, seed); });
        if (checks.count("bridge")) {
            for (const Mode m : modes) jobs.emplace_back([=] { return check_ep_bridge(*ch, m, samples, seed); });
        }
        if (checks.count("derivatives")) jobs.emplace_back([=] { return check_derivatives(*ch, samples, seed); });
    }
    if (checks.count("equivalence")) {
        std::set<std::string> families;
        for (const auto& ch : channels) families.insert(ch->family());
        for (const auto& c : equivalence_suite()) {
            const std::string family = c.gen.channel.substr(0, c.gen.channel.find('('));
            if (!families.count(family)) continue;
            if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) continue;
            jobs.emplace_back([c] { return check_equivalence(generate_problem(c.gen), c.mode, c.config, c.name); });
        }
    }
    if (jobs.empty()) throw UsageError("verify: the filters select no checks");

    std::vector<CheckReport> reports(jobs.size());
    kernels::parallel::for_each_index(jobs.size(), [&](std::size_t k) { reports[k] = jobs[k](); });

    bool all_pass = true;
    nlohmann::json report = nlohmann::json::array();
    for (const auto& r : reports) {
        all_pass = all_pass && r.pass;
        report.push_back(to_json(r));
        out << (r.pass ? "PASS " : "FAIL ") << r.check << " max_rel_residual=" << shortest(r.max_rel_residual)
            << " threshold=" << shortest(r.threshold) << " skipped=" << r.skipped_floored << '\n';
    }
    write_text_atomic(report_path, report.dump(2) + "\n");
    return all_pass ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

struct Cell {
    std::optional<double> snr;
    std::optional<double> rho;
    std::optional<double> ratio;
};

std::string cell_prior(const std::string& base, std::optional<double> rho) {
    if (!rho) return base;
    const PriorPtr p = parse_prior(base);
    const auto* bg = dynamic_cast<const BernoulliGaussianPrior*>(p.get());
    if (!bg) throw UsageError("rho axis needs a bg(...) prior, got " + base);
    return "bg(rho=" + shortest(*rho) + ",mean=" + shortest(bg->slab_mean()) +
           ",var=" + shortest(bg->slab_variance()) + ")";
}

std::string opt_field(std::optional<double> v) { return v ? shortest(*v) : std::string(); }

}  // namespace

int cmd_sweep(const KeyValues& kv, std::ostream& out, std::ostream& /*err*/) {
    const Settings s(kv);
    const auto axis = [&](const std::string& key) -> std::vector<std::optional<double>> {
        const auto text = s.opt(key);
        if (!text) return {std::nullopt};
        std::vector<std::optional<double>> values;
        for (double v : parse_axis(*text)) values.emplace_back(v);
        return values;
    };
    const auto snrs = axis("snr");
    const auto rhos = axis("rho");
    const auto ratios = axis("ratio");
    for (const auto& r : rhos) {
        if (r && !(*r >= 0.0 && *r <= 1.0)) throw UsageError("rho axis: values must lie in [0,1]");
    }
    for (const auto& r : ratios) {
        if (r && !(*r > 0.0)) throw UsageError("ratio axis: values must be positive");
    }
    const int reps = s.integer("reps", 1, 1);

    std::vector<std::string> engines = split_list(s.str("engines", "gamp,modular"));
    for (const auto& e : engines) require_engine(e);
    std::vector<Mode> modes;
    for (const auto& m : split_list(s.str("modes", "mmse"))) modes.push_back(as_usage([&] { return parse_mode(m); }));
    if (engines.empty() || modes.empty()) throw UsageError("sweep: engines and modes must be non-empty");

    KeyValues base_kv = kv;
    base_kv.erase("snr");  // the axis, not a scalar
    const GenSpec base = gen_spec(Settings(base_kv));
    std::vector<Cell> cells;
    for (const auto& snr : snrs) {
        for (const auto& rho : rhos) {
            for (const auto& ratio : ratios) cells.push_back({snr, rho, ratio});
        }
    }
    // Priors are validated up front so a bad prior is a usage error, not a
    // column of failed rows.
    for (const auto& c : cells) cell_prior(base.prior, c.rho);

    std::map<std::string, SolverConfig> configs;
    for (const auto& e : engines) configs[e] = solver_config(s, e);

    const std::size_t per_task = engines.size() * modes.size();
    const std::size_t tasks = cells.size() * static_cast<std::size_t>(reps);
    std::vector<std::string> rows(tasks * per_task);

    kernels::parallel::for_each_index(tasks, [&](std::size_t t) {
        const Cell& cell = cells[t / static_cast<std::size_t>(reps)];
        const auto rep = static_cast<int>(t % static_cast<std::size_t>(reps));
        GenSpec spec = base;
        spec.seed = base.seed + static_cast<std::uint64_t>(rep);
        spec.prior = cell_prior(base.prior, cell.rho);
        if (cell.snr) spec.snr_db = cell.snr;
        if (cell.ratio) spec.m = static_cast<std::size_t>(std::max(1.0, std::round(*cell.ratio * spec.n)));

        std::optional<ProblemInstance> problem;
        std::string gen_error;
        try {
            problem = generate_problem(spec);
        } catch (const std::exception& e) {
            gen_error = e.what();
        }
        std::size_t slot = t * per_task;
        for (const auto& engine : engines) {
            for (const Mode mode : modes) {
                std::ostringstream row;
                row << opt_field(cell.snr) << ',' << opt_field(cell.rho) << ',' << opt_field(cell.ratio) << ','
                    << spec.n << ',' << spec.m << ',' << rep << ',' << spec.seed << ',' << engine << ','
                    << to_string(mode) << ',';
                if (!problem) {
                    row << csv_escape("error: " + gen_error) << ",,,";
                } else {
                    try {
                        SolverConfig config = configs.at(engine);
                        config.record_trace = false;
                        const SolveResult r = dispatch(engine, *problem, mode, config);
                        const std::string status =
                            r.diverged ? "diverged: " + r.message : (r.converged ? "ok" : "max_iter");
                        row << csv_escape(status) << ',' << (r.nmse ? shortest(*r.nmse) : "") << ','
                            << r.iterations << ',' << r.floor_events;
                    } catch (const std::exception& e) {
                        row << csv_escape(std::string("error: ") + e.what()) << ",,,";
                    }
                }
                rows[slot++] = row.str();
            }
        }
    });

    std::ostringstream csv;
    csv << "snr_db,rho,ratio,n,m,rep,seed,engine,mode,status,nmse,iterations,floor_events\n";
    for (const auto& r : rows) csv << r << '\n';
    const fs::path path = s.str("out", "sweep.csv");
    write_text_atomic(path, csv.str());
    out << "wrote " << rows.size() << " rows to " << path.string() << '\n';
    return kOk;
}

}  // namespace glmamp::cli
