// SPDX-License-Identifier: Apache-2.0
#include "evsched/error.hpp"
#include "evsched/harness.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace evsched {

namespace {

class Reader {
public:
    Reader(const toml::table& t, std::string prefix) : t_(t), prefix_(std::move(prefix)) {}

    template <class T>
    void get(std::string_view key, T& out) {
        seen_.insert(std::string(key));
        const toml::node* n = t_.get(key);
        if (!n) return;
        if constexpr (std::is_same_v<T, double>) {
            if (auto v = n->value<double>()) {
                out = *v;
                return;
            }
        } else if constexpr (std::is_same_v<T, bool>) {
            if (auto v = n->value<bool>()) {
                out = *v;
                return;
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (auto v = n->value<std::int64_t>()) {
                out = static_cast<T>(*v);
                return;
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto v = n->value<std::string>()) {
                out = *v;
                return;
            }
        }
        fail(key, "has the wrong type");
    }

    template <class T>
    void get_list(std::string_view key, std::vector<T>& out) {
        seen_.insert(std::string(key));
        const toml::node* n = t_.get(key);
        if (!n) return;
        const toml::array* arr = n->as_array();
        if (!arr) fail(key, "must be an array");
        out.clear();
        for (const toml::node& el : *arr) {
            std::optional<T> v;
            if constexpr (std::is_same_v<T, std::string>) v = el.value<std::string>();
            else if constexpr (std::is_same_v<T, double>) v = el.value<double>();
            else if (auto i = el.value<std::int64_t>()) v = static_cast<T>(*i);
            if (!v) fail(key, "has an element of the wrong type");
            out.push_back(*v);
        }
    }

    const toml::table* table(std::string_view key) {
        seen_.insert(std::string(key));
        const toml::node* n = t_.get(key);
        if (!n) return nullptr;
        if (!n->is_table()) fail(key, "must be a table");
        return n->as_table();
    }

    void reject_unknown() const {
        for (const auto& [k, v] : t_) {
            if (!seen_.count(std::string(k.str()))) throw ConfigError("unknown config key '" + prefix_ + std::string(k.str()) + "'");
        }
    }

private:
    [[noreturn]] void fail(std::string_view key, const char* what) const {
        throw ConfigError("config key '" + prefix_ + std::string(key) + "' " + what);
    }

    const toml::table& t_;
    std::string prefix_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

} // namespace

ExperimentConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    ExperimentConfig cfg;
    Reader top(root, "");
    std::int64_t seed = static_cast<std::int64_t>(cfg.seed);
    top.get("seed", seed);
    cfg.seed = static_cast<std::uint64_t>(seed);
    top.get("trials", cfg.trials);
    top.get("workers", cfg.workers);
    std::string out_dir;
    top.get("out_dir", out_dir);
    if (!out_dir.empty()) cfg.out_dir = resolve(base_dir, out_dir);

    if (const toml::table* t = top.table("scenario")) {
        Reader r(*t, "scenario.");
        std::string fleet, prices;
        r.get("fleet", fleet);
        r.get("prices", prices);
        if (!fleet.empty()) cfg.fleet_csv = resolve(base_dir, fleet);
        if (!prices.empty()) cfg.prices_csv = resolve(base_dir, prices);
        auto& g = cfg.generator;
        r.get("num_evs", g.num_evs);
        r.get("num_slots", g.num_slots);
        r.get("slot_minutes", g.slot_minutes);
        r.get("eta", g.eta);
        r.get("arrival_mean_h", g.arrival_mean_h);
        r.get("arrival_sd_h", g.arrival_sd_h);
        r.get_list("parking_hours", g.parking_hours);
        r.get_list("parking_weights", g.parking_weights);
        r.get("p_min_kw", g.p_min_kw);
        r.get("p_max_kw", g.p_max_kw);
        r.get("cap_min_kwh", g.cap_min_kwh);
        r.get("cap_max_kwh", g.cap_max_kwh);
        r.get("soc_min", g.soc_min);
        r.get("soc_max", g.soc_max);
        r.get("target_soc", g.target_soc);
        r.reject_unknown();
    }
    if (const toml::table* t = top.table("policy")) {
        Reader r(*t, "policy.");
        std::string name;
        r.get("name", name);
        if (!name.empty()) {
            try {
                cfg.policy = parse_policy(name);
            } catch (const InputError& e) {
                throw ConfigError(e.what());
            }
        }
        r.get("w", cfg.w);
        r.get("V", cfg.V);
        double alpha = 0.0;
        r.get("alpha", alpha);
        if (t->contains("alpha")) cfg.alpha = alpha;
        if (const toml::table* vg = r.table("Vg")) {
            for (const auto& [k, v] : *vg) {
                const auto d = v.value<double>();
                if (!d) throw ConfigError("policy.Vg." + std::string(k.str()) + " must be a number");
                cfg.V_per_group[std::string(k.str())] = *d;
            }
        }
        r.reject_unknown();
    }
    if (const toml::table* t = top.table("noise")) {
        Reader r(*t, "noise.");
        cfg.sigma = kDefaultNoiseSigma; // a [noise] section alone turns noise on
        r.get("sigma", cfg.sigma);
        r.reject_unknown();
    }
    if (const toml::table* t = top.table("search")) {
        Reader r(*t, "search.");
        r.get("tune_V", cfg.tune_V);
        r.get("lo", cfg.search.lo);
        r.get("hi", cfg.search.hi);
        r.get("resolution", cfg.search.resolution);
        r.get("max_expansions", cfg.search.max_expansions);
        r.reject_unknown();
    }
    if (const toml::table* t = top.table("sweep")) {
        Reader r(*t, "sweep.");
        std::vector<std::string> names;
        r.get_list("policies", names);
        for (const auto& n : names) {
            try {
                cfg.sweep_policies.push_back(parse_policy(n));
            } catch (const InputError& e) {
                throw ConfigError(e.what());
            }
        }
        r.get_list("w", cfg.sweep_w);
        r.get_list("V", cfg.sweep_V);
        r.get_list("alpha", cfg.sweep_alpha);
        r.reject_unknown();
    }
    top.reject_unknown();

    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    if (cfg.w < 1) throw ConfigError("policy.w must be >= 1");
    if (cfg.sigma < 0.0) throw ConfigError("noise.sigma must be >= 0");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

} // namespace evsched
