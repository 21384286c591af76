// SPDX-License-Identifier: Apache-2.0
// evsched: simulate, sweep, verify, gen and price import.
#include "evsched/aggregation.hpp"
#include "evsched/csv_io.hpp"
#include "evsched/disaggregation.hpp"
#include "evsched/error.hpp"
#include "evsched/harness.hpp"
#include "evsched/policies.hpp"
#include "evsched/queues.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

namespace {

using namespace evsched;

struct Overrides {
    std::string config;
    std::string policy;
    int w = 0;
    double V = 0.0;
    std::vector<std::string> Vg;
    double alpha = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    int trials = 0;
    bool tune_V = false;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "TOML experiment config")->check(CLI::ExistingFile);
    app->add_option("--policy", o.policy, "greedy | mpc | dpp | dpp_hetero | offline");
    app->add_option("--w", o.w, "lookahead window (slots)")->check(CLI::PositiveNumber);
    app->add_option("--V", o.V, "penalty weight")->check(CLI::NonNegativeNumber);
    app->add_option("--Vg", o.Vg, "per-group penalty weight GROUP=FLOAT (repeatable)");
    app->add_option("--alpha", o.alpha, "delay weight alpha")->check(CLI::PositiveNumber);
    app->add_option("--sigma", o.sigma, "price forecast noise")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", o.seed, "rng seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--trials", o.trials, "independent seeds")->check(CLI::PositiveNumber);
    app->add_flag("--tune-V", o.tune_V, "bisect for the largest V that serves all demand");
}

ExperimentConfig resolve_config(const CLI::App* app, const Overrides& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    const auto given = [&](const char* name) { return app->get_option(name)->count() > 0; };
    if (given("--policy")) cfg.policy = parse_policy(o.policy);
    if (given("--w")) cfg.w = o.w;
    if (given("--V")) cfg.V = o.V;
    for (const auto& kv : o.Vg) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--Vg expects GROUP=FLOAT, got '" + kv + "'");
        try {
            cfg.V_per_group[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("--Vg expects GROUP=FLOAT, got '" + kv + "'");
        }
    }
    if (given("--alpha")) cfg.alpha = o.alpha;
    if (given("--sigma")) cfg.sigma = o.sigma;
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--out")) cfg.out_dir = o.out;
    if (given("--trials")) cfg.trials = o.trials;
    if (o.tune_V) cfg.tune_V = true;
    return cfg;
}

int report_runs(const ExperimentResult& res) {
    write_summary_header(std::cout);
    std::size_t violations = 0;
    for (const auto& r : res.reports) {
        write_summary_row(std::cout, r);
        violations += r.audit_violations.size();
        for (const auto& v : r.audit_violations) std::cerr << "audit: " << r.policy << ": " << v << '\n';
    }
    return violations ? 2 : 0;
}

int cmd_simulate(const CLI::App* app, const Overrides& o) {
    ExperimentConfig cfg = resolve_config(app, o);
    cfg.sweep_policies.clear();
    cfg.sweep_w.clear();
    cfg.sweep_V.clear();
    cfg.sweep_alpha.clear();
    const ExperimentResult res = run_experiment(cfg);
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
        const auto path = cfg.out_dir / "runs" / ("queues_" + std::to_string(i) + ".csv");
        std::ofstream f(path);
        write_queue_trace_csv(f, res.reports[i].queues);
    }
    return report_runs(res);
}

int cmd_sweep(const CLI::App* app, const Overrides& o) { return report_runs(run_experiment(resolve_config(app, o))); }

int cmd_gen(const CLI::App* app, const Overrides& o) {
    const ExperimentConfig cfg = resolve_config(app, o);
    const Scenario s = build_scenario(cfg, 0);
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream fleet(cfg.out_dir / "fleet.csv");
    csv::write_fleet(fleet, s.fleet);
    std::ofstream prices(cfg.out_dir / "prices.csv");
    csv::write_prices(prices, s.prices.values());
    std::cout << "wrote " << s.fleet.size() << " vehicles in " << s.groups.size() << " groups, " << s.num_slots()
              << " slots to " << cfg.out_dir.string() << '\n';
    return 0;
}

int cmd_verify(const CLI::App* app, const Overrides& o) {
    ExperimentConfig cfg = resolve_config(app, o);
    const Scenario s = build_scenario(cfg, 0);
    std::size_t violations = 0;
    const auto note = [&](const std::string& what) {
        ++violations;
        std::cerr << "verify: " << what << '\n';
    };

    SimParams sp;
    sp.policy = cfg.policy == PolicyKind::dpp_hetero ? PolicyKind::dpp_hetero : PolicyKind::dpp;
    sp.w = cfg.w;
    sp.V = cfg.V;
    for (const Group& g : s.groups) {
        const auto it = cfg.V_per_group.find(g.id);
        sp.V_per_group.push_back(it == cfg.V_per_group.end() ? cfg.V : it->second);
    }
    const RunReport r = simulate(s, sp);
    for (const auto& v : r.audit_violations) note("queue/delay audit: " + v);
    std::cout << "simulation audits: " << r.audit_violations.size() << " violations\n";

    // The offline aggregate is a relaxation: failing the window check here is
    // informative (it is the relaxation gap), not an error. A disagreement
    // between the window check and the flow is.
    const OfflineSchedule off = offline_p2(s);
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const P3Verdict p3 = check_p3_feasible(s, g, off.x[g], {});
        const CirculationResult c = circulation_disaggregate(s, g, off.x[g]);
        if (p3.feasible != c.feasible && c.feasible)
            note("group " + s.groups[g].id + ": window check rejects a disaggregable schedule");
        std::cout << "group " << s.groups[g].id << " offline aggregate: window checks " << p3.windows_checked
                  << (p3.feasible ? " pass" : " fail") << ", circulation " << (c.feasible ? "feasible" : "infeasible")
                  << '\n';
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::size_t queue_issues = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 1 + trial % 8;
        std::vector<double> a(240), x(240);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = u(rng);
            x[i] = u(rng);
        }
        const auto q = backlog_recursion(a, x, w, QueueDiscipline::net_clamped);
        for (int t = 0; t < w; ++t) {
            for (int n = 1; t + n * w <= 240; ++n) {
                if (std::abs(closed_form_backlog(a, x, w, t, n, QueueDiscipline::net_clamped) - q[t + n * w]) > 1e-9)
                    ++queue_issues;
            }
        }
        queue_issues += increment_audit(q, w, 10.0).size() + lookback_audit(q, w, 10.0).size();
    }
    if (queue_issues) note(std::to_string(queue_issues) + " queue closed-form/bound mismatches");
    std::cout << "queue audits: " << queue_issues << " violations\n";
    return violations ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV fleet charging scheduler"};
    app.require_subcommand(1);
    Overrides o;

    auto* simulate = app.add_subcommand("simulate", "run one policy over one or more trials");
    add_common(simulate, o);
    auto* sweep = app.add_subcommand("sweep", "run the policy/parameter grid from the config");
    add_common(sweep, o);
    auto* verify = app.add_subcommand("verify", "run queue, window and flow audits");
    add_common(verify, o);
    auto* gen = app.add_subcommand("gen", "write a synthetic fleet.csv and prices.csv");
    add_common(gen, o);

    auto* prices = app.add_subcommand("prices", "price data utilities");
    prices->require_subcommand(1);
    auto* import = prices->add_subcommand("import", "extract one column of a market CSV into prices.csv");
    std::string in_path, column = "LMP_PRC", out_path = "prices.csv";
    double scale = 0.001;
    import->add_option("input", in_path, "source CSV")->required()->check(CLI::ExistingFile);
    import->add_option("--column", column, "price column name");
    import->add_option("--scale", scale, "multiplier to USD/kWh (0.001 for USD/MWh)");
    import->add_option("--out", out_path, "output price file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(simulate, o);
        if (sweep->parsed()) return cmd_sweep(sweep, o);
        if (verify->parsed()) return cmd_verify(verify, o);
        if (gen->parsed()) return cmd_gen(gen, o);
        if (import->parsed()) {
            std::ifstream in(in_path);
            const auto values = csv::read_price_column(in, column, scale);
            std::ofstream out(out_path);
            csv::write_prices(out, values);
            std::cout << "wrote " << values.size() << " prices to " << out_path << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
