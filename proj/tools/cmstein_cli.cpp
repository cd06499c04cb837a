// cmstein: command-line front end for configuration-model sampling,
// truncated exploration, Stein couplings, bounds and CLT experiments.
//
// Exit codes: 0 success, 1 usage error, 2 validation/precondition error,
// 3 runtime failure. Errors are printed as one JSON object on stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmstein/cmstein.hpp"
#include "cmstein/io.hpp"

namespace {

using cmstein::io::json;
namespace io = cmstein::io;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::size_t threads = cmstein::default_threads();
    std::vector<std::string> overrides;
};

void print_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

/// Dotted-path override: a.b.c=value. The value is parsed as JSON when it
/// parses, otherwise taken as a string.
void apply_override(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &cfg;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (part.empty()) throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "empty key in '" + key + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

json resolve_config(const Options& opt) {
    json cfg = json::object();
    if (!opt.config_path.empty()) cfg = io::parse_json(io::read_file(opt.config_path), opt.config_path);
    if (!cfg.is_object()) throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "config must be a JSON object");
    for (const auto& o : opt.overrides) apply_override(cfg, o);
    if (opt.seed) {
        cfg["seed"] = *opt.seed;
    } else if (!cfg.contains("seed")) {
        const char* env = std::getenv("CMSTEIN_SEED");
        std::uint64_t seed = 1;
        if (env && *env) {
            try {
                seed = std::stoull(env);
            } catch (const std::exception&) {
                throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "CMSTEIN_SEED is not an unsigned integer");
            }
        }
        cfg["seed"] = seed;
    }
    if (!cfg["seed"].is_number_unsigned())
        throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "seed must be an unsigned integer");
    return cfg;
}

cmstein::Seed seed_of(const json& cfg) { return cfg.at("seed").get<cmstein::Seed>(); }

cmstein::DegreeSequence degrees_from_config(const json& cfg) {
    if (cfg.contains("degrees")) return io::degrees_from_json(cfg.at("degrees"));
    if (cfg.contains("degrees_file")) return io::parse_degrees(io::read_file(cfg.at("degrees_file").get<std::string>()));
    if (cfg.contains("distribution")) {
        const auto pi = io::distribution_from_json(cfg.at("distribution"));
        const auto n = io::get_or<std::size_t>(cfg, "n", 0);
        const auto cap = io::get_or<cmstein::Degree>(cfg, "cap", std::numeric_limits<cmstein::Degree>::max());
        return cmstein::sample_degree_sequence(pi, n, cap, seed_of(cfg));
    }
    throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "config needs 'degrees', 'degrees_file' or 'distribution'");
}

cmstein::Configuration configuration_from_config(const json& cfg) {
    if (cfg.contains("configuration")) return io::configuration_from_json(cfg.at("configuration"));
    if (cfg.contains("configuration_file"))
        return io::configuration_from_json(
            io::parse_json(io::read_file(cfg.at("configuration_file").get<std::string>()), "configuration_file"));
    return cmstein::sample_configuration(degrees_from_config(cfg), seed_of(cfg));
}

cmstein::Colour vertex_from_config(const json& cfg, std::size_t n) {
    const auto v = io::get_or<std::int64_t>(cfg, "vertex", 1);
    if (v < 1 || static_cast<std::size_t>(v) > n)
        throw cmstein::Error(cmstein::ErrorCode::InvalidVertex, "vertex " + std::to_string(v) + " not in 1.." + std::to_string(n));
    return static_cast<cmstein::Colour>(v - 1);
}

class Output {
public:
    explicit Output(const std::string& path) : path_(path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }

private:
    std::string path_;
    std::ofstream file_;
};

json envelope(const std::string& command, const json& cfg, json result) {
    return {{"command", command}, {"config", cfg}, {"seed", cfg.at("seed")}, {"result", std::move(result)}};
}

void emit(const Options& opt, const json& doc) {
    Output out(opt.out_path);
    out.stream() << doc.dump(2) << '\n';
}

// --- subcommands ----------------------------------------------------------------

void run_sample(const Options& opt, const json& cfg) {
    const auto g = configuration_from_config(cfg);
    json doc = io::to_json(g);
    doc["command"] = "sample";
    doc["config"] = cfg;
    doc["seed"] = cfg.at("seed");
    emit(opt, doc);
}

void run_explore(const Options& opt, const json& cfg) {
    const auto g = configuration_from_config(cfg);
    const auto ell = io::get_or<std::size_t>(cfg, "ell", 12);
    json result = io::to_json(cmstein::explore_truncated(g, vertex_from_config(cfg, g.num_colours()), ell));
    emit(opt, envelope("explore", cfg, result));
}

void run_stat(const Options& opt, const json& cfg) {
    const auto g = configuration_from_config(cfg);
    const auto h = io::statistic_from_json(cfg);
    emit(opt, envelope("stat", cfg, io::to_json(cmstein::evaluate_statistic(g, h))));
}

double sigma_from(const json& section) {
    if (section.contains("sigma")) return section.at("sigma").get<double>();
    if (section.contains("sigma2")) return std::sqrt(section.at("sigma2").get<double>());
    throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "need 'sigma' or 'sigma2'");
}

void run_couple(const Options& opt, const json& cfg) {
    const auto h = io::statistic_from_json(cfg);
    const double sigma = sigma_from(cfg);
    const json& mc = cfg.contains("mc") ? cfg.at("mc") : cfg;
    const auto replications = io::get_or<std::size_t>(mc, "replications", 1);
    const auto seed = seed_of(cfg);
    const bool explicit_config = cfg.contains("configuration") || cfg.contains("configuration_file");
    const auto fixed = explicit_config ? std::optional(configuration_from_config(cfg)) : std::nullopt;
    const auto d = fixed ? fixed->degrees() : degrees_from_config(cfg);
    const auto layout = std::make_shared<const cmstein::BallLayout>(d);

    std::vector<cmstein::Colour> vertices;
    if (cfg.contains("vertices")) {
        for (const auto& v : cfg.at("vertices")) {
            const auto x = v.get<std::int64_t>();
            if (x < 1 || static_cast<std::size_t>(x) > d.size())
                throw cmstein::Error(cmstein::ErrorCode::InvalidVertex, "vertex " + std::to_string(x) + " out of range");
            vertices.push_back(static_cast<cmstein::Colour>(x - 1));
        }
    } else {
        for (cmstein::Colour v = 0; v < d.size(); ++v) vertices.push_back(v);
    }

    std::vector<std::vector<std::string>> lines(replications);
    cmstein::parallel_for(replications, opt.threads, [&](std::size_t r) {
        cmstein::RandomStream config_rng(seed, {cmstein::tag(cmstein::StreamTag::Configuration), r});
        const auto g = fixed ? *fixed : cmstein::sample_configuration(layout, config_rng);
        auto summary = cmstein::evaluate_statistic(g, h);
        if (cfg.contains("mu")) summary.mean_hint = cfg.at("mu").get<double>();
        for (auto v : vertices) {
            cmstein::RandomStream rng(seed, {cmstein::tag(cmstein::StreamTag::Coupling), r, v});
            json rec = io::to_json(cmstein::coupling_draw(g, v, h, summary, sigma, rng));
            rec["replication"] = r;
            lines[r].push_back(rec.dump());
        }
    });
    Output out(opt.out_path);
    out.stream() << json{{"command", "couple"}, {"config", cfg}, {"seed", cfg.at("seed")}}.dump() << '\n';
    for (const auto& rep : lines)
        for (const auto& line : rep) out.stream() << line << '\n';
}

void run_bound(const Options& opt, const json& cfg) {
    const json& b = cfg.contains("bound") ? cfg.at("bound") : cfg;
    cmstein::BoundInputs in;
    in.sup_norm = io::get_or<double>(b, "sup_norm", 1.0);
    in.d_max = io::get_or<std::uint64_t>(b, "d_max", 2);
    in.ell = io::get_or<std::uint64_t>(b, "ell", 12);
    in.n = io::get_or<std::uint64_t>(b, "n", 1);
    in.m = io::get_or<std::uint64_t>(b, "m", in.n);
    in.sigma = sigma_from(b);
    json result = io::to_json(cmstein::wasserstein_bound(in));
    json tails = json::array();
    for (auto k : io::get_or<std::vector<std::uint64_t>>(b, "tail_k", {1, 2, 3, 8})) {
        try {
            const auto t = cmstein::internal_pair_tail_bound(in.d_max, in.ell, in.m, k, in.n);
            tails.push_back({{"k", k}, {"single", t.single}, {"union", t.union_}});
        } catch (const cmstein::Error& e) {
            tails.push_back({{"k", k}, {"error", e.what()}});
        }
    }
    result["internal_pair_tail"] = tails;
    try {
        result["gamma"] = cmstein::any_vertex_tail_bound(in.d_max, in.ell, in.m, in.n);
    } catch (const cmstein::Error&) {
        result["gamma"] = nullptr;
    }
    emit(opt, envelope("bound", cfg, result));
}

void run_variance(const Options& opt, const json& cfg) {
    const auto d = degrees_from_config(cfg);
    const auto h = io::statistic_from_json(cfg);
    const json& mc = cfg.contains("mc") ? cfg.at("mc") : cfg;
    const auto replications = io::get_or<std::size_t>(mc, "replications", 1000);
    const auto seed = seed_of(cfg);
    const auto est = cmstein::estimate_variance_identity(d, h, replications, seed, opt.threads);
    json result{{"n", d.size()}, {"m", d.total()}, {"estimate", est.estimate}, {"std_error", est.std_error}};
    if (io::get_or<bool>(cfg, "direct", true)) {
        const auto values = cmstein::sample_statistic_values(d, h, replications, seed ^ 0x5DEECE66DULL, opt.threads);
        const auto mom = cmstein::sample_moments(values);
        const double combined = std::hypot(est.std_error, mom.variance_se);
        result["direct_variance"] = mom.variance;
        result["direct_std_error"] = mom.variance_se;
        result["z_score"] = combined > 0 ? (est.estimate - mom.variance) / combined : 0.0;
    }
    emit(opt, envelope("variance", cfg, result));
}

std::string csv_path_for(const std::string& out) {
    std::filesystem::path p(out);
    p.replace_extension(".csv");
    if (p == std::filesystem::path(out)) p += ".samples.csv";
    return p.string();
}

void run_clt(const Options& opt, const json& cfg) {
    auto ecfg = io::experiment_from_json(cfg);
    ecfg.threads = opt.threads;
    const auto result = cmstein::run_clt_experiment(ecfg);
    for (const auto& p : result.per_n)
        std::clog << "n=" << p.n << " ell=" << p.ell << " var/n=" << p.var_over_n << " d_W=" << p.wasserstein << '\n';
    json res = io::to_json(result);
    if (ecfg.mode == cmstein::ExperimentMode::GiantComponent) {
        json scaling = json::array();
        for (const auto& s : cmstein::variance_scaling(result))
            scaling.push_back({{"n", s.n}, {"var_over_n", s.var_over_n}, {"std_error", s.std_error},
                               {"condition1_holds", s.supercritical}});
        res["variance_scaling"] = scaling;
    }
    emit(opt, envelope("clt", cfg, res));
    if (!opt.out_path.empty()) {
        std::ofstream csv(csv_path_for(opt.out_path), std::ios::binary | std::ios::trunc);
        csv << "# seed=" << cfg.at("seed").get<std::uint64_t>() << " config=" << cfg.dump() << '\n';
        io::write_samples_csv(csv, result);
    }
}

void run_conditions(const Options& opt, const json& cfg) {
    if (!cfg.contains("distribution"))
        throw cmstein::Error(cmstein::ErrorCode::InvalidArgument, "conditions needs 'distribution'");
    const auto pi = io::distribution_from_json(cfg.at("distribution"));
    const auto ns = io::get_or<std::vector<std::size_t>>(cfg, "family_n", {1000, 10000, 100000});
    const auto cap = io::get_or<cmstein::Degree>(cfg, "cap", std::numeric_limits<cmstein::Degree>::max());
    std::vector<cmstein::DegreeSequence> family;
    for (auto n : ns) {
        cmstein::RandomStream rng(seed_of(cfg), {cmstein::tag(cmstein::StreamTag::Family), n});
        family.push_back(cmstein::sample_degree_sequence(pi, n, cap, rng));
    }
    emit(opt, envelope("conditions", cfg, io::to_json(cmstein::check_conditions(pi, std::move(family)))));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Configuration-model local statistics: sampling, Stein couplings, bounds and CLT experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    std::uint64_t seed = 0;
    app.add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", opt.out_path, "output file (default: stdout)");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides CMSTEIN_SEED)");
    app.add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--set", opt.overrides, "dotted-path override key=value (repeatable)");

    using Handler = void (*)(const Options&, const json&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"sample", "sample a configuration", run_sample},
        {"explore", "truncated exploration from one vertex", run_explore},
        {"stat", "evaluate a local statistic", run_stat},
        {"couple", "Stein coupling draws as JSON lines", run_couple},
        {"bound", "normal-approximation and tail bounds", run_bound},
        {"variance", "coupling variance identity vs direct variance", run_variance},
        {"clt", "Monte Carlo CLT experiment", run_clt},
        {"conditions", "check degree-sequence conditions", run_conditions},
    };
    for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("UsageError", e.what());
        return kExitUsage;
    }
    if (seed_opt->count() > 0) opt.seed = seed;

    try {
        const json cfg = resolve_config(opt);
        for (const auto& [name, help, fn] : commands)
            if (app.got_subcommand(name)) fn(opt, cfg);
        return kExitOk;
    } catch (const cmstein::Error& e) {
        print_error(std::string(cmstein::to_string(e.code())), e.what());
        return cmstein::is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const json::exception& e) {
        print_error("InvalidArgument", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        print_error("RuntimeError", e.what());
        return kExitRuntime;
    }
}
