// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"
#include "evsched/policies.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evsched {

/// Synthetic daily scenario: morning arrivals, groups by parking duration.
struct GeneratorParams {
    int num_evs = 100;
    int num_slots = 288;
    double slot_minutes = 5.0;
    double eta = 0.95;
    double arrival_mean_h = 8.0;
    double arrival_sd_h = 1.0;
    std::vector<double> parking_hours{6.0, 8.0, 10.0};
    std::vector<double> parking_weights{0.2, 0.3, 0.5};
    double p_min_kw = 150.0;
    double p_max_kw = 350.0;
    double cap_min_kwh = 300.0;
    double cap_max_kwh = 600.0;
    double soc_min = 0.25;
    double soc_max = 0.8;
    double target_soc = 0.8;
    double alpha = 1000.0;
    int lookahead = 1;
};

/// Throws ConfigError on inconsistent parameters.
Scenario generate_scenario(const GeneratorParams& p, std::uint64_t seed);

/// Daily USD/kWh curve: overnight shoulder, morning and evening peaks, midday trough.
std::vector<double> duck_curve(int num_slots, double slot_minutes);

/// Long horizon with i.i.d. uniform prices and Bernoulli arrivals in every
/// slot for each parking duration.
struct StationaryParams {
    int num_slots = 5760;
    double slot_minutes = 5.0;
    double eta = 0.95;
    std::vector<int> parking_slots{12, 36};
    double arrival_prob = 0.1;
    double price_min = 0.02;
    double price_max = 0.12;
    double p_min_kw = 50.0;
    double p_max_kw = 100.0;
    double e_req_min_kwh = 10.0;
    double e_req_max_kwh = 40.0;
    double headroom_kwh = 20.0; // E_max - E_req
    double alpha = 1000.0;
};

Scenario generate_stationary(const StationaryParams& p, std::uint64_t seed);

/// Noise level used when a config enables noise without giving sigma.
inline constexpr double kDefaultNoiseSigma = 0.05;

struct PriceForecast {
    std::vector<double> values;
    double mape = 0.0; // mean |forecast - price| / |price| over nonzero prices
};

/// forecast(t) = (1 + sigma*Y_t) * price(t) with Y_t standard normal.
PriceForecast apply_price_noise(std::span<const double> prices, double sigma, std::uint64_t seed);

struct VSearchOptions {
    double lo = 0.0;
    double hi = 1e4;
    double resolution = 0.1;
    int max_expansions = 16; // doublings of hi while hi still serves everything
    bool per_group = false;
};

struct VSearchResult {
    double V = 0.0;
    std::vector<double> V_per_group;
    int simulations = 0;
};

/// Largest V on the lattice lo + k*resolution for which dpp serves every
/// requirement (per group with per_group). The returned V is feasible and
/// V + resolution is not. Throws InfeasibleError when lo already fails or no
/// failing V is found after expanding hi.
VSearchResult find_optimal_V(const Scenario& s, const SimParams& base, const VSearchOptions& opt);

struct ExperimentConfig {
    GeneratorParams generator;
    std::optional<std::filesystem::path> fleet_csv;
    std::optional<std::filesystem::path> prices_csv;

    PolicyKind policy = PolicyKind::dpp;
    int w = 12;
    double V = 10.0;
    std::map<std::string, double> V_per_group;
    std::optional<double> alpha; // overrides the generator / group alpha
    double sigma = 0.0; // 0 = perfect forecasts
    std::uint64_t seed = 1;
    int trials = 1;
    std::filesystem::path out_dir = "out";
    bool tune_V = false;
    VSearchOptions search;
    int workers = 0; // 0 = hardware concurrency

    // Sweep grid; an empty list means "the single value above".
    std::vector<PolicyKind> sweep_policies;
    std::vector<int> sweep_w;
    std::vector<double> sweep_V;
    std::vector<double> sweep_alpha;
};

ExperimentConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Scenario for one trial: CSV inputs when given, otherwise the generator.
Scenario build_scenario(const ExperimentConfig& cfg, int trial);

std::uint64_t trial_seed(std::uint64_t seed, int trial);

struct GridPoint {
    int trial = 0;
    PolicyKind policy = PolicyKind::dpp;
    int w = 1;
    double V = 0.0;
    double alpha = 0.0;
};

std::vector<GridPoint> experiment_grid(const ExperimentConfig& cfg);

/// Runs one grid point (scenario, noise, optional V tuning, simulation).
RunReport run_point(const ExperimentConfig& cfg, const GridPoint& pt);

struct ExperimentResult {
    std::vector<GridPoint> points;
    std::vector<RunReport> reports; // grid order
    std::vector<std::filesystem::path> files;
};

/// Runs the grid on a worker pool and writes runs/<index>_<policy>.json plus summary.csv under out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

} // namespace evsched
