// xopt: run scenarios, the built-in suite, the adversary search, and the
// transfer-time model.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "xopt/analytics.hpp"
#include "xopt/builtin.hpp"
#include "xopt/config_io.hpp"
#include "xopt/contracts.hpp"
#include "xopt/search.hpp"

namespace fs = std::filesystem;
using namespace xopt;

namespace {

struct Options {
    std::string target;  // built-in name or file, positional
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<Tick> delta;
    std::string out;
    std::uint64_t budget = 1'000'000;
    std::uint64_t trials = 0;
    std::vector<double> p;
    std::string mutation = "all";
    bool json = false;
};

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

ScenarioConfig resolve(const Options& o) {
    const std::string& what = o.scenario.empty() ? o.target : o.scenario;
    if (what.empty()) throw std::invalid_argument("no scenario given (name or --scenario PATH)");
    ScenarioConfig cfg;
    const auto names = builtin_names();
    if (o.scenario.empty() && std::find(names.begin(), names.end(), what) != names.end()) {
        cfg = builtin(what, o.seed.value_or(7));
    } else {
        cfg = load_config(what);
        if (o.seed) cfg.seed = *o.seed;
    }
    if (o.delta) cfg = with_delta(cfg, *o.delta);
    validate(cfg);
    return cfg;
}

void print_checks(const Verdict& v) {
    for (const auto& [name, c] : v.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << v.scenario << " " << name;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
    }
}

void save_run(const fs::path& dir, const Verdict& v) {
    write_file(dir / "trace.txt", format_trace(v.result.trace));
    write_file(dir / "state.txt", format_trace(v.result.final_state));
    write_file(dir / "report.json", report_json(v.result.report) + "\n");
}

int cmd_run(const Options& o) {
    const Verdict v = evaluate(resolve(o));
    if (o.out.empty()) {
        std::cout << format_trace(v.result.trace);
        if (o.json) std::cout << report_json(v.result.report) << "\n";
    } else {
        save_run(o.out, v);
    }
    print_checks(v);
    return v.pass() ? 0 : 1;
}

int cmd_suite(const Options& o) {
    bool ok = true;
    double total = 0.0;
    for (const auto& name : builtin_names()) {
        ScenarioConfig cfg = builtin(name, o.seed.value_or(7));
        if (o.delta) cfg = with_delta(cfg, *o.delta);
        const Verdict v = evaluate(cfg);
        total += v.elapsed.count();
        print_checks(v);
        if (!o.out.empty()) save_run(fs::path(o.out) / name, v);
        ok = ok && v.pass();
    }
    std::cout << (ok ? "suite passed" : "suite FAILED") << " in " << total << " s\n";
    return ok ? 0 : 1;
}

int cmd_search(const Options& o) {
    std::vector<std::pair<std::string, ContractRules>> variants = {{"none", {}},
                                                                   {"no-delay", {false, true, true}},
                                                                   {"no-window", {true, false, true}},
                                                                   {"no-extract", {true, true, false}}};
    if (o.mutation != "all") {
        auto it = std::find_if(variants.begin(), variants.end(), [&](const auto& v) { return v.first == o.mutation; });
        if (it == variants.end()) throw std::invalid_argument("unknown mutation: " + o.mutation);
        variants = {*it};
    }
    ScenarioConfig base = o.scenario.empty() ? search_template({}, o.seed.value_or(7)) : resolve(o);
    if (o.scenario.empty() && o.delta) base = with_delta(base, *o.delta);
    nlohmann::json report = nlohmann::json::object();
    bool ok = true;
    for (const auto& [name, rules] : variants) {
        ScenarioConfig cfg = base;
        cfg.rules = rules;
        SearchOptions opts;
        opts.budget = o.budget;
        const SearchResult r = exhaustive_search(cfg, opts);
        // Unmodified rules must be clean; each mutation must be caught.
        const bool pass = name == "none" ? r.complete && r.violation_count == 0 : r.violation_count > 0;
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << "search mutation=" << name << " states=" << r.states
                  << " terminals=" << r.terminals << " violations=" << r.violation_count
                  << (r.complete ? "" : " (budget exhausted, partial coverage)") << " " << r.seconds << " s\n";
        if (!r.violations.empty()) {
            const Violation& v = r.violations.front();
            std::cout << "  first: " << v.check << ": " << v.detail << "\n";
            for (const auto& s : v.schedule) std::cout << "    " << s << "\n";
        }
        report[name] = nlohmann::json::parse(search_json(r));
    }
    if (!o.out.empty()) write_file(o.out, report.dump(2) + "\n");
    return ok ? 0 : 1;
}

int cmd_analyze(const Options& o) {
    std::vector<double> ps = o.p.empty() ? std::vector<double>{0.1, 0.3, 0.5, 0.9, 1.0} : o.p;
    const std::uint64_t seed = o.seed.value_or(7);
    bool ok = true;
    std::vector<TimeRow> rows = time_table(ps, 0, seed);
    std::vector<TimeRow> mc;
    if (o.trials > 0) {
        mc = time_table(ps, o.trials, seed);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const bool close = std::abs(mc[i].ours - rows[i].ours) <= 0.01 * rows[i].ours &&
                               std::abs(mc[i].baseline - rows[i].baseline) <= 0.01 * rows[i].baseline;
            ok = ok && close;
        }
        std::cout << "Monte Carlo, " << o.trials << " trials:\n" << table_text(mc);
        std::cout << (ok ? "PASS" : "FAIL") << " Monte Carlo within 1% of closed form\n";
        std::cout << "closed form:\n";
    }
    std::cout << table_text(rows);
    std::cout << "baseline retry cost 5Δ per failed attempt; retry component at p=0.1: "
              << retry_component(baseline_model(0.1)) << "Δ\n";
    if (!o.scenario.empty() || !o.target.empty()) {
        const RunResult r = run(resolve(o));
        std::cout << "transactions per party and phase:\n" << cost_report_text(cost_report(r.trace));
    }
    // Sampled rows when trials were asked for, the closed form otherwise.
    const std::string table = table_json(mc.empty() ? rows : mc);
    if (o.json) std::cout << table << "\n";
    if (!o.out.empty()) write_file(o.out, table + "\n");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for transferable cross-chain options"};
    app.require_subcommand(1, 1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "seed for all secret material");
        sub->add_option("--delta", o.delta, "re-express the scenario with this many ticks per Δ");
        sub->add_option("--out", o.out, "output path");
    };

    CLI::App* run = app.add_subcommand("run", "run one scenario, print its trace and checks");
    run->add_option("name", o.target, "built-in scenario name or config file");
    run->add_option("--scenario", o.scenario, "scenario config file (JSON)");
    run->add_flag("--json", o.json, "also print the payoff report");
    common(run);

    CLI::App* suite = app.add_subcommand("suite", "run every built-in scenario");
    common(suite);

    CLI::App* search = app.add_subcommand("search", "exhaustive adversary search on the holder-transfer template");
    search->add_option("--scenario", o.scenario, "template config file instead of the built-in one");
    search->add_option("--budget", o.budget, "state budget");
    search->add_option("--mutation", o.mutation, "none, no-delay, no-window, no-extract or all");
    common(search);

    CLI::App* analyze = app.add_subcommand("analyze", "expected transfer time table");
    analyze->add_option("--p", o.p, "finalization probabilities")->check(CLI::Range(0.0, 1.0));
    analyze->add_option("--trials", o.trials, "Monte Carlo trials (0: closed form only)");
    analyze->add_option("--scenario", o.scenario, "also count transactions for this scenario file");
    analyze->add_option("name", o.target, "also count transactions for this built-in scenario");
    analyze->add_flag("--json", o.json, "print the table as JSON too");
    common(analyze);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(o);
        if (*suite) return cmd_suite(o);
        if (*search) return cmd_search(o);
        return cmd_analyze(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
