#ifndef IMPGEN_CLI_HPP
#define IMPGEN_CLI_HPP

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "impgen/abducibles.hpp"
#include "impgen/engine.hpp"
#include "impgen/oracle.hpp"
#include "impgen/problem.hpp"
#include "impgen/propositional.hpp"
#include "impgen/smt_process.hpp"
#include "impgen/store.hpp"

namespace impgen::cli {

enum ExitCode { exit_complete = 0, exit_incomplete = 1, exit_error = 2 };

/// Everything one search needs besides the problem text.
struct RunConfig {
    /// `internal`, or a solver command line. Empty: $IMPGEN_SOLVER, then z3.
    std::string backend;
    std::optional<std::string> logic;
    std::optional<std::string> abducible_file;
    unsigned abduce_depth = 1;
    bool abduce_ineq = false;
    std::vector<std::string> abduce_constants;
    std::vector<std::string> abduce_terms;
    std::optional<std::size_t> size_limit;
    Algorithm algorithm = Algorithm::imp;
    bool model_pruning = true;
    FixMode fix = FixMode::complement;
    UnitMode units = UnitMode::hypotheses;
    std::optional<double> timeout; ///< seconds
    std::chrono::milliseconds query_timeout{5000};
    std::optional<std::size_t> max_implicates;
    std::optional<std::string> dump_store;
};

inline std::string resolve_backend(const std::string& requested) {
    if (!requested.empty()) return requested;
    if (const char* env = std::getenv("IMPGEN_SOLVER"); env && *env) return env;
    return "z3";
}

inline std::unique_ptr<Backend> make_backend(const RunConfig& cfg) {
    std::string cmd = resolve_backend(cfg.backend);
    if (cmd == "internal") return std::make_unique<PropositionalBackend>();
    auto sc = SolverConfig::from_command(cmd);
    sc.logic = cfg.logic;
    sc.query_timeout = cfg.query_timeout;
    return std::make_unique<SmtBackend>(std::move(sc));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Receives the store's view of the search as it progresses.
struct Listener {
    std::function<void(const Clause&)> accepted;
    std::function<void(const Clause&)> retracted;
};

struct Outcome {
    SearchResult search;
    std::vector<Clause> stored;
    std::string dump;
};

/// Parses, builds abducibles, searches with results streamed into a store.
/// Throws Error (ParseError, BackendError) on failure.
inline Outcome solve(const std::string& text, const RunConfig& cfg, LiteralTable& table,
                     const Listener& listener = {}) {
    Problem problem = parse_problem(text);
    if (cfg.logic) problem.signature.logic = *cfg.logic;
    auto backend = make_backend(cfg);
    auto session = backend->open(problem, table);
    auto bare = backend->open_bare(problem, table);

    AbducibleSet abducibles;
    if (cfg.abducible_file) {
        abducibles = load_abducibles(read_file(*cfg.abducible_file), table, bare.get());
    } else {
        GenerationOptions gen;
        gen.depth = cfg.abduce_depth;
        gen.seeds = cfg.abduce_constants;
        gen.extra_terms = cfg.abduce_terms;
        gen.inequalities = cfg.abduce_ineq;
        abducibles = filter_satisfiable(generate_abducibles(problem.signature, table, gen), *bare);
    }

    EngineConfig ec;
    ec.algorithm = cfg.algorithm;
    if (cfg.size_limit) ec.predicate = ResultPredicate::size_limit(*cfg.size_limit);
    ec.model_pruning = cfg.model_pruning;
    ec.fix = cfg.fix;
    ec.units = cfg.units;
    if (cfg.timeout) ec.time_limit = std::chrono::duration<double>(*cfg.timeout);
    ec.max_implicates = cfg.max_implicates;

    ImplicateSearch search(abducibles, *session, *bare, ec);
    if (cfg.units == UnitMode::propagate) search.set_clausal_view(clausal_view(problem, table));

    ImplicateStore store(LiteralOrder::for_implicates(abducibles), *bare);
    auto sink = [&](const Clause& c) {
        // The basic algorithm takes no predicate; its output is filtered here.
        if (cfg.algorithm == Algorithm::bp && cfg.size_limit && c.size() > *cfg.size_limit) return;
        auto r = store.add(c);
        if (!r.accepted) return;
        if (listener.retracted)
            for (const auto& d : r.removed) listener.retracted(d);
        if (listener.accepted) listener.accepted(c);
    };
    Outcome out;
    out.search = search.run(sink);
    if (store.stats().uncertain && out.search.incomplete == Incompleteness::none)
        out.search.incomplete = Incompleteness::unknown;
    out.stored = store.clauses();
    out.dump = store.dump(table);
    return out;
}

inline std::string format_seconds(double s) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(3) << s;
    return ss.str();
}

/// One search over `problem_path`. Implicates go to `out` as they are
/// accepted by the store; the summary follows as comment lines.
inline int run(const std::string& problem_path, const RunConfig& cfg, std::ostream& out,
               std::ostream& err) {
    std::string text;
    try {
        text = read_file(problem_path);
    } catch (const Error& e) {
        err << "error: missing input: " << e.what() << "\n";
        return exit_error;
    }
    LiteralTable table;
    Listener listener;
    listener.accepted = [&](const Clause& c) {
        out << format_clause(table, c);
        if (!c.empty()) out << " ; assume " << format_conjunction(table, hypotheses_of_clause(c));
        out << "\n" << std::flush;
    };
    listener.retracted = [&](const Clause& c) {
        out << "; retract " << format_clause(table, c) << "\n";
    };
    Outcome o;
    try {
        o = solve(text, cfg, table, listener);
    } catch (const ParseError& e) {
        err << "error: parse failure: " << e.what() << "\n";
        return exit_error;
    } catch (const BackendError& e) {
        err << "error: backend failure: " << e.what() << "\n";
        return exit_error;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
    const auto& st = o.search.stats;
    out << "; implicates: " << o.stored.size() << "\n";
    out << "; time_to_first: " << (st.time_to_first ? format_seconds(*st.time_to_first) : "none")
        << "\n";
    out << "; total_time: " << format_seconds(st.total_time) << "\n";
    out << "; oracle_calls: " << st.oracle_calls << "\n";
    out << "; incomplete: " << to_string(o.search.incomplete) << "\n";
    if (cfg.dump_store) {
        std::ofstream f(*cfg.dump_store);
        if (!f) {
            err << "error: cannot write '" << *cfg.dump_store << "'\n";
            return exit_error;
        }
        f << o.dump;
    }
    return o.search.complete() ? exit_complete : exit_incomplete;
}

// ---------------------------------------------------------------------------
// Benchmark harness

/// Time-to-first-implicate buckets, in seconds.
inline std::string time_bucket(std::optional<double> t) {
    static constexpr struct {
        double upper;
        const char* label;
    } buckets[] = {{0.5, "[0,0.5)"}, {1, "[0.5,1)"}, {1.5, "[1,1.5)"}, {2, "[1.5,2)"},
                   {5, "[2,5)"},     {10, "[5,10)"}, {35, "[10,35)"}};
    if (!t) return "none";
    for (const auto& b : buckets)
        if (*t < b.upper) return b.label;
    return "none";
}

inline const std::vector<std::string>& bucket_labels() {
    static const std::vector<std::string> labels{"[0,0.5)", "[0.5,1)", "[1,1.5)", "[1.5,2)",
                                                 "[2,5)",   "[5,10)",  "[10,35)", "none"};
    return labels;
}

/// Manifest keys: `problems` (paths, or objects with `path` and optional
/// per-problem `abducibles`), `size_limits` (list; null = unbounded),
/// `timeout` (s, default 35), `backend`, `abduce_depth`, `abduce_ineq`.
/// Relative paths are resolved against the manifest's directory.
inline nlohmann::json bench(const nlohmann::json& manifest, const std::filesystem::path& base,
                            const RunConfig& defaults = {}) {
    using nlohmann::json;
    RunConfig cfg = defaults;
    cfg.timeout = manifest.value("timeout", 35.0);
    if (manifest.contains("backend")) cfg.backend = manifest["backend"].get<std::string>();
    if (manifest.contains("abduce_depth")) cfg.abduce_depth = manifest["abduce_depth"].get<unsigned>();
    if (manifest.contains("abduce_ineq")) cfg.abduce_ineq = manifest["abduce_ineq"].get<bool>();
    cfg.max_implicates = 1;

    std::vector<std::optional<std::size_t>> limits;
    if (manifest.contains("size_limits")) {
        for (const auto& k : manifest["size_limits"])
            limits.push_back(k.is_null() ? std::nullopt : std::optional<std::size_t>(k.get<std::size_t>()));
    }
    if (limits.empty()) limits.push_back(std::nullopt);

    json rows = json::array();
    json histogram = json::object();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base / path;
    };
    for (const auto& entry : manifest.value("problems", json::array())) {
        std::string path = entry.is_string() ? entry.get<std::string>() : entry.value("path", "");
        RunConfig pcfg = cfg;
        if (entry.is_object() && entry.contains("abducibles"))
            pcfg.abducible_file = resolve(entry["abducibles"].get<std::string>()).string();
        for (const auto& k : limits) {
            json row{{"problem", path}, {"size_limit", k ? json(*k) : json(nullptr)}};
            pcfg.size_limit = k;
            try {
                std::string text = read_file(resolve(path).string());
                LiteralTable table;
                auto o = solve(text, pcfg, table);
                const auto& ttf = o.search.stats.time_to_first;
                row["status"] = o.stored.empty() ? "none" : "ok";
                row["time_to_first"] = ttf ? json(*ttf) : json(nullptr);
                row["bucket"] = time_bucket(o.stored.empty() ? std::nullopt : ttf);
                row["implicate"] = o.stored.empty() ? json(nullptr) : json(format_clause(table, o.stored.front()));
                std::string key = k ? std::to_string(*k) : "unbounded";
                if (!histogram.contains(key)) {
                    histogram[key] = json::object();
                    for (const auto& b : bucket_labels()) histogram[key][b] = 0;
                }
                histogram[key][row["bucket"].get<std::string>()] =
                    histogram[key][row["bucket"].get<std::string>()].get<int>() + 1;
            } catch (const std::exception& e) {
                row["status"] = "error";
                row["error"] = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return json{{"rows", rows}, {"histogram", histogram}};
}

inline int bench(const std::string& manifest_path, const RunConfig& defaults,
                 const std::optional<std::string>& output, std::ostream& out, std::ostream& err) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const std::exception& e) {
        err << "error: cannot load manifest: " << e.what() << "\n";
        return exit_error;
    }
    auto report = bench(manifest, std::filesystem::path(manifest_path).parent_path(), defaults);
    if (output) {
        std::ofstream f(*output);
        if (!f) {
            err << "error: cannot write '" << *output << "'\n";
            return exit_error;
        }
        f << report.dump(2) << "\n";
    } else {
        out << report.dump(2) << "\n";
    }
    return exit_complete;
}

// ---------------------------------------------------------------------------
// Argument parsing

inline int main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Prime implicate generation modulo theories"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string problem_path, manifest_path, algorithm = "imp", fix = "complement",
                                             units = "hypotheses";
    std::optional<std::string> report_path;
    double query_timeout = 5;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--backend", cfg.backend,
                        "solver command, or 'internal' (default: $IMPGEN_SOLVER, then z3)");
        sub->add_option("--query-timeout", query_timeout, "per-query solver limit in seconds");
        sub->add_option("--abduce-depth", cfg.abduce_depth, "maximal term height for generated abducibles");
        sub->add_flag("--abduce-ineq", cfg.abduce_ineq, "also generate <= and >= atoms on Int/Real terms");
    };

    auto* run_cmd = app.add_subcommand("run", "enumerate implicates of one problem");
    run_cmd->add_option("problem", problem_path, "SMT-LIB problem file")->required();
    add_common(run_cmd);
    run_cmd->add_option("--logic", cfg.logic, "logic tag sent to the solver");
    run_cmd->add_option("--abducibles", cfg.abducible_file, "abducible file, one literal per line");
    run_cmd->add_option("--abduce-constants", cfg.abduce_constants,
                        "height-0 terms for generation (default: all free constants)")
        ->delimiter(',');
    run_cmd->add_option("--abduce-terms", cfg.abduce_terms, "extra height-0 terms")->delimiter(',');
    run_cmd->add_option("--size-limit", cfg.size_limit, "maximal implicate size");
    run_cmd->add_option("--algorithm", algorithm, "bp or imp")->check(CLI::IsMember({"bp", "imp"}));
    run_cmd->add_flag("--no-model-pruning", [&](std::int64_t) { cfg.model_pruning = false; },
                      "try every candidate hypothesis");
    run_cmd->add_option("--fix", fix, "complement or entailment")
        ->check(CLI::IsMember({"complement", "entailment"}));
    run_cmd->add_option("--units", units, "hypotheses or propagate")
        ->check(CLI::IsMember({"hypotheses", "propagate"}));
    run_cmd->add_option("--timeout", cfg.timeout, "search time budget in seconds");
    run_cmd->add_option("--max-implicates", cfg.max_implicates, "stop after this many implicates");
    run_cmd->add_option("--dump-store", cfg.dump_store, "write the final store to this file");

    auto* bench_cmd = app.add_subcommand("bench", "time-to-first-implicate report over a manifest");
    bench_cmd->add_option("manifest", manifest_path, "JSON manifest")->required();
    add_common(bench_cmd);
    bench_cmd->add_option("--output", report_path, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_complete : exit_error;
    }
    cfg.algorithm = algorithm == "bp" ? Algorithm::bp : Algorithm::imp;
    cfg.fix = fix == "entailment" ? FixMode::entailment : FixMode::complement;
    cfg.units = units == "propagate" ? UnitMode::propagate : UnitMode::hypotheses;
    cfg.query_timeout = std::chrono::milliseconds(static_cast<long long>(query_timeout * 1000));

    if (*run_cmd) return run(problem_path, cfg, out, err);
    return bench(manifest_path, cfg, report_path, out, err);
}

} // namespace impgen::cli

#endif // IMPGEN_CLI_HPP
