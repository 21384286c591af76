// SPDX-License-Identifier: Apache-2.0
#include "evsched/harness.hpp"

#include "evsched/csv_io.hpp"
#include "evsched/demand.hpp"
#include "evsched/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

namespace evsched {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

std::string ev_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "ev%04d", i);
    return buf;
}

double bump(double center, double width, double h) { return std::exp(-((h - center) / width) * ((h - center) / width)); }

} // namespace

std::vector<double> duck_curve(int num_slots, double slot_minutes) {
    std::vector<double> prices(static_cast<std::size_t>(std::max(0, num_slots)));
    for (int t = 0; t < num_slots; ++t) {
        const double h = std::fmod((t + 0.5) * slot_minutes / 60.0, 24.0);
        prices[t] = 0.06 + 0.035 * bump(7.0, 1.3, h) - 0.045 * bump(12.5, 2.6, h) + 0.06 * bump(19.0, 1.8, h);
    }
    return prices;
}

Scenario generate_scenario(const GeneratorParams& p, std::uint64_t seed) {
    require(p.num_evs >= 1, "num_evs must be >= 1");
    require(p.num_slots >= 1, "num_slots must be >= 1");
    require(p.slot_minutes > 0.0, "slot_minutes must be positive");
    require(p.eta > 0.0 && p.eta <= 1.0, "eta must be in (0, 1]");
    require(p.arrival_sd_h >= 0.0, "arrival_sd_h must be >= 0");
    require(!p.parking_hours.empty() && p.parking_hours.size() == p.parking_weights.size(),
            "parking_hours and parking_weights must be non-empty and of equal length");
    require(p.p_min_kw > 0.0 && p.p_min_kw <= p.p_max_kw, "need 0 < p_min_kw <= p_max_kw");
    require(p.cap_min_kwh > 0.0 && p.cap_min_kwh <= p.cap_max_kwh, "need 0 < cap_min_kwh <= cap_max_kwh");
    require(p.soc_min >= 0.0 && p.soc_min < p.soc_max, "need 0 <= soc_min < soc_max");
    require(p.target_soc <= 1.0, "target_soc must be <= 1");
    require(p.target_soc >= p.soc_max, "target_soc is below the initial SOC range");
    require(p.alpha > 0.0, "alpha must be positive");

    const double dt = p.slot_minutes / 60.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> arrival(p.arrival_mean_h, p.arrival_sd_h);
    std::discrete_distribution<std::size_t> parking(p.parking_weights.begin(), p.parking_weights.end());
    std::uniform_real_distribution<double> power(p.p_min_kw, p.p_max_kw);
    std::uniform_real_distribution<double> capacity(p.cap_min_kwh, p.cap_max_kwh);
    std::uniform_real_distribution<double> soc(p.soc_min, p.soc_max);

    std::vector<Ev> fleet;
    for (int i = 0; i < p.num_evs; ++i) {
        const int R = static_cast<int>(std::lround(p.parking_hours[parking(rng)] / dt));
        require(R >= 1 && R <= p.num_slots, "parking duration outside the horizon");
        const int a = static_cast<int>(std::lround(arrival(rng) / dt));
        Ev ev;
        ev.id = ev_name(i);
        ev.group_id = "R" + std::to_string(R);
        ev.arrival_slot = std::clamp(a, 0, p.num_slots - R);
        ev.departure_slot = ev.arrival_slot + R;
        ev.p_max = power(rng);
        ev.e_cap = capacity(rng);
        const double soc0 = soc(rng);
        ev.e_req = (p.target_soc - soc0) * ev.e_cap;
        ev.e_max = (1.0 - soc0) * ev.e_cap;
        require(ev.e_req > 0.0, "generated a vehicle with no requirement");
        require(demand_last_slot(ev, p.eta, dt) < ev.departure_slot,
                ev.id + ": requirement cannot be met within its stay; widen power or parking");
        fleet.push_back(std::move(ev));
    }
    return make_scenario({p.num_slots, dt}, std::move(fleet), duck_curve(p.num_slots, p.slot_minutes), p.eta,
                         p.lookahead, p.alpha);
}

Scenario generate_stationary(const StationaryParams& p, std::uint64_t seed) {
    require(p.num_slots >= 1 && p.slot_minutes > 0.0, "need num_slots >= 1 and slot_minutes > 0");
    require(!p.parking_slots.empty(), "parking_slots must be non-empty");
    require(p.arrival_prob >= 0.0 && p.arrival_prob <= 1.0, "arrival_prob must be in [0, 1]");
    require(p.price_min <= p.price_max, "need price_min <= price_max");
    require(p.p_min_kw > 0.0 && p.p_min_kw <= p.p_max_kw, "need 0 < p_min_kw <= p_max_kw");
    require(p.e_req_min_kwh > 0.0 && p.e_req_min_kwh <= p.e_req_max_kwh, "need 0 < e_req_min_kwh <= e_req_max_kwh");
    require(p.headroom_kwh >= 0.0, "headroom_kwh must be >= 0");

    const double dt = p.slot_minutes / 60.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> price(p.price_min, p.price_max);
    std::bernoulli_distribution arrives(p.arrival_prob);
    std::uniform_real_distribution<double> power(p.p_min_kw, p.p_max_kw);
    std::uniform_real_distribution<double> energy(p.e_req_min_kwh, p.e_req_max_kwh);

    std::vector<double> prices(static_cast<std::size_t>(p.num_slots));
    for (double& v : prices) v = price(rng);
    std::vector<Ev> fleet;
    for (int t = 0; t < p.num_slots; ++t) {
        for (int R : p.parking_slots) {
            if (!arrives(rng)) continue;
            Ev ev;
            ev.id = ev_name(static_cast<int>(fleet.size()));
            ev.group_id = "R" + std::to_string(R);
            ev.arrival_slot = t;
            ev.departure_slot = t + R;
            ev.p_max = power(rng);
            ev.e_req = energy(rng);
            ev.e_max = ev.e_req + p.headroom_kwh;
            ev.e_cap = ev.e_max;
            if (ev.departure_slot > p.num_slots) continue;
            require(demand_last_slot(ev, p.eta, dt) < ev.departure_slot,
                    "parking too short for the sampled requirement");
            fleet.push_back(std::move(ev));
        }
    }
    require(!fleet.empty(), "no arrivals generated");
    return make_scenario({p.num_slots, dt}, std::move(fleet), std::move(prices), p.eta, 1, p.alpha);
}

PriceForecast apply_price_noise(std::span<const double> prices, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw InputError("sigma must be >= 0");
    PriceForecast f;
    f.values.assign(prices.begin(), prices.end());
    if (sigma == 0.0) return f;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> y(0.0, 1.0);
    double err = 0.0;
    int n = 0;
    for (std::size_t t = 0; t < prices.size(); ++t) {
        f.values[t] = (1.0 + sigma * y(rng)) * prices[t];
        if (prices[t] != 0.0) {
            err += std::abs(f.values[t] - prices[t]) / std::abs(prices[t]);
            ++n;
        }
    }
    f.mape = n ? err / n : 0.0;
    return f;
}

namespace {

std::vector<bool> groups_served(const Scenario& s, const RunReport& r) {
    std::vector<bool> ok(s.groups.size(), true);
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        for (std::size_t m : s.groups[g].members) {
            if (r.evs[m].completion_slot < 0) ok[g] = false;
        }
    }
    return ok;
}

} // namespace

VSearchResult find_optimal_V(const Scenario& s, const SimParams& base, const VSearchOptions& opt) {
    if (!(opt.resolution > 0.0) || opt.hi < opt.lo || opt.lo < 0.0)
        throw ConfigError("V search needs 0 <= lo <= hi and resolution > 0");
    const std::size_t G = s.groups.size();
    const auto value = [&](long long k) { return opt.lo + static_cast<double>(k) * opt.resolution; };
    const long long K = static_cast<long long>(std::ceil((opt.hi - opt.lo) / opt.resolution - 1e-9));

    VSearchResult res;
    SimParams p = base;
    p.audit = false;
    p.policy = opt.per_group ? PolicyKind::dpp_hetero : PolicyKind::dpp;
    const auto run = [&](const std::vector<long long>& ks) {
        ++res.simulations;
        if (opt.per_group) {
            p.V_per_group.resize(G);
            for (std::size_t g = 0; g < G; ++g) p.V_per_group[g] = value(ks[g]);
        } else {
            p.V = value(ks[0]);
        }
        const RunReport r = simulate(s, p);
        if (opt.per_group) return groups_served(s, r);
        return std::vector<bool>{r.all_served()};
    };

    const std::size_t n = opt.per_group ? G : 1;
    std::vector<long long> k_lo(n, 0);
    std::vector<long long> k_hi(n, K);
    const auto at_lo = run(k_lo);
    for (std::size_t i = 0; i < n; ++i) {
        if (!at_lo[i])
            throw InfeasibleError("V search: the lower bracket V=" + std::to_string(opt.lo) + " already leaves demand unserved" +
                                  (opt.per_group ? " in group " + s.groups[i].id : std::string()));
    }
    for (int e = 0;; ++e) {
        const auto at_hi = run(k_hi);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!at_hi[i]) continue;
            any = true;
            k_lo[i] = k_hi[i];
            k_hi[i] = std::max<long long>(1, 2 * k_hi[i]);
        }
        if (!any) break;
        if (e >= opt.max_expansions)
            throw InfeasibleError("V search: every V up to " + std::to_string(value(k_lo[0])) + " serves all demand");
    }
    while (true) {
        bool open = false;
        std::vector<long long> mid(n);
        for (std::size_t i = 0; i < n; ++i) {
            mid[i] = k_lo[i];
            if (k_hi[i] - k_lo[i] > 1) {
                mid[i] = k_lo[i] + (k_hi[i] - k_lo[i]) / 2;
                open = true;
            }
        }
        if (!open) break;
        const auto ok = run(mid);
        for (std::size_t i = 0; i < n; ++i) {
            if (mid[i] == k_lo[i]) continue;
            (ok[i] ? k_lo[i] : k_hi[i]) = mid[i];
        }
    }
    if (opt.per_group) {
        for (long long k : k_lo) res.V_per_group.push_back(value(k));
        res.V = *std::min_element(res.V_per_group.begin(), res.V_per_group.end());
    } else {
        res.V = value(k_lo[0]);
    }
    return res;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Scenario build_scenario(const ExperimentConfig& cfg, int trial) {
    const double alpha = cfg.alpha.value_or(cfg.generator.alpha);
    if (!cfg.fleet_csv) {
        GeneratorParams gp = cfg.generator;
        gp.alpha = alpha;
        gp.lookahead = cfg.w;
        Scenario s = generate_scenario(gp, trial_seed(cfg.seed, trial));
        if (cfg.prices_csv) {
            s.prices = PriceSeries(csv::read_prices(*cfg.prices_csv));
            if (static_cast<int>(s.prices.size()) != s.num_slots())
                throw ConfigError("price file has " + std::to_string(s.prices.size()) + " slots, scenario has " +
                                  std::to_string(s.num_slots()));
        }
        return s;
    }
    auto fleet = csv::read_fleet(*cfg.fleet_csv);
    std::vector<double> prices = cfg.prices_csv ? csv::read_prices(*cfg.prices_csv)
                                                : duck_curve(cfg.generator.num_slots, cfg.generator.slot_minutes);
    const int T = static_cast<int>(prices.size());
    return make_scenario({T, cfg.generator.slot_minutes / 60.0}, std::move(fleet), std::move(prices), cfg.generator.eta,
                         cfg.w, alpha);
}

std::vector<GridPoint> experiment_grid(const ExperimentConfig& cfg) {
    const auto policies = cfg.sweep_policies.empty() ? std::vector<PolicyKind>{cfg.policy} : cfg.sweep_policies;
    const auto ws = cfg.sweep_w.empty() ? std::vector<int>{cfg.w} : cfg.sweep_w;
    const auto Vs = cfg.sweep_V.empty() ? std::vector<double>{cfg.V} : cfg.sweep_V;
    const double alpha = cfg.alpha.value_or(cfg.generator.alpha);
    const auto alphas = cfg.sweep_alpha.empty() ? std::vector<double>{alpha} : cfg.sweep_alpha;
    std::vector<GridPoint> grid;
    for (int trial = 0; trial < cfg.trials; ++trial)
        for (PolicyKind p : policies)
            for (int w : ws)
                for (double V : Vs)
                    for (double a : alphas) grid.push_back({trial, p, w, V, a});
    return grid;
}

RunReport run_point(const ExperimentConfig& cfg, const GridPoint& pt) {
    ExperimentConfig local = cfg;
    local.w = pt.w;
    local.alpha = pt.alpha;
    const Scenario s = build_scenario(local, pt.trial);

    SimParams sp;
    sp.policy = pt.policy;
    sp.w = pt.w;
    sp.V = pt.V;
    if (pt.policy == PolicyKind::dpp_hetero) {
        for (const Group& g : s.groups) {
            const auto it = cfg.V_per_group.find(g.id);
            sp.V_per_group.push_back(it == cfg.V_per_group.end() ? pt.V : it->second);
        }
    }
    if (cfg.sigma > 0.0) {
        const std::uint64_t noise_seed = trial_seed(cfg.seed ^ 0x9e3779b97f4a7c15ULL, pt.trial);
        sp.forecast_prices = apply_price_noise(s.prices.values(), cfg.sigma, noise_seed).values;
    }
    if (cfg.tune_V && (pt.policy == PolicyKind::dpp || pt.policy == PolicyKind::dpp_hetero)) {
        VSearchOptions opt = cfg.search;
        opt.per_group = pt.policy == PolicyKind::dpp_hetero;
        const VSearchResult v = find_optimal_V(s, sp, opt);
        sp.V = v.V;
        sp.V_per_group = v.V_per_group;
    }
    return simulate(s, sp);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
    ExperimentResult out;
    out.points = experiment_grid(cfg);
    const std::size_t n = out.points.size();
    std::vector<std::optional<RunReport>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = run_point(cfg, out.points[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(1, n)));
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    pool.clear();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (auto& r : slots) out.reports.push_back(std::move(*r));

    if (!write_files) return out;
    std::filesystem::create_directories(cfg.out_dir / "runs");
    const auto summary_path = cfg.out_dir / "summary.csv";
    std::ofstream summary(summary_path);
    if (!summary) throw Error("cannot write " + summary_path.string());
    write_summary_header(summary);
    for (std::size_t i = 0; i < n; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%04zu_%s.json", i, out.reports[i].policy.c_str());
        const auto path = cfg.out_dir / "runs" / name;
        std::ofstream f(path);
        if (!f) throw Error("cannot write " + path.string());
        write_report_json(f, out.reports[i]);
        out.files.push_back(path);
        write_summary_row(summary, out.reports[i]);
    }
    out.files.push_back(summary_path);
    return out;
}

} // namespace evsched
