// Command-line front end: run scenarios, verify invariants, sweep parameters
// and replay ledgers. Exit codes: 0 success, 1 invariant violation, 2 config
// or usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccsim/sim.hpp"
#include "ccsim/verify.hpp"

namespace {

using namespace ccsim;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("CCSIM_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 424242;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int cmd_run(const std::string& scenario_path, const std::string& ledger_path,
            const std::string& summary_path, const std::string& prices_path,
            std::optional<std::uint64_t> seed) {
    ScenarioConfig cfg = load_scenario(scenario_path);
    if (seed) cfg.seed = *seed;
    RunResult result = run_scenario(cfg);
    if (!ledger_path.empty()) {
        write_file(ledger_path, result.ledger.to_jsonl());
    }
    if (!prices_path.empty()) {
        std::ostringstream csv;
        csv << "tick,price\n";
        for (std::size_t t = 0; t < result.prices.size(); ++t) {
            csv << t << ',' << result.prices[t].str() << '\n';
        }
        write_file(prices_path, csv.str());
    }
    std::string csv = result.summary.to_csv();
    if (!summary_path.empty()) {
        write_file(summary_path, csv);
    }
    std::cout << csv;
    std::int64_t unbalanced = result.ledger.first_unbalanced_event();
    if (unbalanced >= 0) {
        std::cerr << "unbalanced ledger event at index " << unbalanced << "\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const std::vector<std::string>& scenario_paths, bool run_all,
               const std::string& report_path, std::uint64_t seed) {
    VerifyOptions options;
    options.seed = seed;
    auto results = run_verification_suites(options);

    // scenario-level checks: determinism and balance per provided scenario
    std::vector<std::string> paths = scenario_paths;
    if (run_all && paths.empty()) {
        // nothing passed explicitly; the built-in suites already cover a run
    }
    for (const auto& path : paths) {
        SuiteResult r;
        r.name = "scenario:" + path;
        try {
            ScenarioConfig cfg = load_scenario(path);
            RunResult a = run_scenario(cfg);
            RunResult b = run_scenario(cfg);
            bool deterministic = a.ledger.to_jsonl() == b.ledger.to_jsonl();
            bool balanced = a.ledger.first_unbalanced_event() < 0;
            r.passed = deterministic && balanced;
            r.margin = "byte+balance";
            if (!r.passed) r.witness = deterministic ? "unbalanced event" : "ledgers differ";
        } catch (const std::exception& e) {
            r.passed = false;
            r.witness = e.what();
        }
        results.push_back(std::move(r));
    }

    std::string csv = suites_to_csv(results);
    if (!report_path.empty()) write_file(report_path, csv);
    std::cout << csv;
    return all_passed(results) ? 0 : 1;
}

int cmd_sweep(const std::string& scenario_path, const std::string& pointer,
              const std::vector<std::string>& values, const std::string& out_path) {
    std::ifstream in(scenario_path);
    if (!in) throw ScenarioError("cannot open scenario file: " + scenario_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::ordered_json base = nlohmann::ordered_json::parse(buf.str());

    std::ostringstream csv;
    csv << "param,value,terminal_status,terminal_price,auctions,last_winner,last_clearing_a,"
           "holder_forfeits_received\n";
    for (const auto& value : values) {
        nlohmann::ordered_json patched = base;
        nlohmann::ordered_json parsed_value;
        try {
            parsed_value = nlohmann::ordered_json::parse(value);
        } catch (...) {
            parsed_value = value;  // plain strings stay strings
        }
        patched[nlohmann::ordered_json::json_pointer(pointer)] = parsed_value;
        ScenarioConfig cfg = load_scenario_text(patched.dump());
        RunResult result = run_scenario(cfg);
        csv << pointer << ',' << value << ',' << result.summary.scalar("terminal_status") << ','
            << result.summary.scalar("terminal_price") << ','
            << result.summary.scalar("auctions") << ',' << result.summary.scalar("last_winner")
            << ',' << result.summary.scalar("last_clearing_a") << ','
            << result.summary.scalar("holder_forfeits_received") << '\n';
    }
    if (!out_path.empty()) write_file(out_path, csv.str());
    std::cout << csv.str();
    return 0;
}

int cmd_replay(const std::string& ledger_path) {
    std::ifstream in(ledger_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open ledger: " + ledger_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    Ledger ledger = Ledger::from_jsonl(buf.str());

    std::int64_t unbalanced = ledger.first_unbalanced_event();
    Accounts accounts = ledger.replay();
    std::cout << "events," << ledger.events().size() << "\n";
    std::cout << "balanced," << (unbalanced < 0 ? "yes" : "no") << "\n";
    std::cout << "account,cash,tokens\n";
    for (const auto& [name, cash] : accounts.cash) {
        auto t = accounts.tokens.find(name);
        std::cout << name << ',' << cash.str() << ','
                  << (t == accounts.tokens.end() ? 0 : t->second) << "\n";
    }
    for (const auto& [name, tokens] : accounts.tokens) {
        if (!accounts.cash.count(name)) std::cout << name << ",0," << tokens << "\n";
    }
    return unbalanced < 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contestable-control auction simulator"};
    app.require_subcommand(1);

    std::string scenario_path, ledger_path, summary_path, report_path, pointer, out_path,
        prices_path;
    std::vector<std::string> scenario_paths, values;
    std::optional<std::uint64_t> seed_opt;
    std::uint64_t verify_seed = default_seed();
    bool run_all = false;

    auto* run = app.add_subcommand("run", "run a scenario and print its summary");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--ledger", ledger_path, "write the event ledger (JSON Lines)");
    run->add_option("--summary", summary_path, "write the summary CSV");
    run->add_option("--prices", prices_path, "write the realized price path CSV");
    run->add_option("--seed", seed_opt, "override the scenario seed");

    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    verify->add_option("scenario", scenario_paths, "extra scenarios to check");
    verify->add_flag("--all", run_all, "include every built-in suite");
    verify->add_option("--report", report_path, "write the certificate CSV");
    verify->add_option("--seed", verify_seed, "suite seed");

    auto* sweep = app.add_subcommand("sweep", "run a scenario across parameter values");
    sweep->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sweep->add_option("--param", pointer, "JSON pointer, e.g. /dao/t_m")->required();
    sweep->add_option("--values", values, "values to substitute")->required();
    sweep->add_option("--out", out_path, "write the sweep CSV");

    auto* replay = app.add_subcommand("replay", "rebuild state from a saved ledger");
    replay->add_option("ledger", ledger_path, "ledger JSONL file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(scenario_path, ledger_path, summary_path, prices_path, seed_opt);
        }
        if (verify->parsed()) return cmd_verify(scenario_paths, run_all, report_path, verify_seed);
        if (sweep->parsed()) return cmd_sweep(scenario_path, pointer, values, out_path);
        if (replay->parsed()) return cmd_replay(ledger_path);
    } catch (const ccsim::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
