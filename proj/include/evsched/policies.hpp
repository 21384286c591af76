// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"
#include "evsched/disaggregation.hpp"
#include "evsched/queues.hpp"

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evsched {

enum class PolicyKind { greedy, mpc, dpp, dpp_hetero, offline };

std::string_view policy_name(PolicyKind p);
/// Accepts greedy, mpc, dpp (alias dpp_homog), dpp_hetero, offline. Throws InputError otherwise.
PolicyKind parse_policy(std::string_view name);

/// x[g][tau] is the planned power for slot base_slot + tau.
struct Plan {
    int base_slot = 0;
    int horizon = 0;
    std::vector<std::vector<double>> x;
};

/// caps[g][tau]; prices and caps share the (possibly truncated) window length.
Plan plan_dpp(std::span<const double> q, std::span<const double> z, std::span<const double> prices,
              const std::vector<std::vector<double>>& caps, double V, int base_slot);
Plan plan_dpp_hetero(std::span<const double> q, std::span<const double> z, std::span<const double> prices,
                     const std::vector<std::vector<double>>& caps, std::span<const double> V, int base_slot);

/// Drift-plus-penalty objective of a plan: sum_g sum_tau (V_g*pi - q_g - z_g) * x.
double dpp_objective(const Plan& plan, std::span<const double> q, std::span<const double> z,
                     std::span<const double> prices, std::span<const double> V);

/// The last w plans, oldest first.
class PlanBuffer {
public:
    explicit PlanBuffer(int w);

    /// Throws StateError unless plan.base_slot follows the newest buffered plan.
    void push(Plan plan);

    /// (1/w) * sum of the buffered plans' entries for slot t; absent plans count as 0.
    /// Throws StateError on an empty buffer.
    std::vector<double> buffered_average(int t) const;

    std::size_t size() const noexcept { return plans_.size(); }
    int w() const noexcept { return w_; }

private:
    int w_;
    std::deque<Plan> plans_;
};

/// Greedy fill in ascending price order (ties by slot). Slots with negative
/// price are filled up to `maximum`; the rest only until `required` is met.
/// Units follow `caps` (per-slot amounts).
std::vector<double> fill_cheapest(std::span<const double> prices, std::span<const double> caps, double required,
                                  double maximum);

struct MpcState {
    std::vector<double> energy_kwh; // battery level e_v, indexed like Scenario::fleet
    std::vector<bool> missed;       // missed-service already logged
};

/// Energy levels start at E_cap - E_max.
MpcState make_mpc_state(const Scenario& s);

struct MpcPlan {
    int base_slot = 0;
    int horizon = 0;
    std::vector<std::vector<double>> per_ev; // [fleet index][tau], empty rows for idle vehicles
    std::vector<std::size_t> newly_missed;   // vehicles whose deadline cannot be met
};

/// Window [t, t+w) clipped to the horizon; `prices` is the full forecast series.
MpcPlan plan_mpc(const Scenario& s, const MpcState& mpc, int t, int w, std::span<const double> prices);

/// Cost of an MPC plan over its window: dt * sum pi * p.
double mpc_objective(const MpcPlan& plan, std::span<const double> prices, double slot_hours);

/// Per group: min{group_power_cap(g,t), sum over active members of (E_req - served)/(eta*dt)}.
std::vector<double> plan_greedy(const Scenario& s, const ServiceLedger& ledger, int t);

struct OfflineSchedule {
    std::vector<std::vector<double>> x; // [g][t]
    double cost = 0.0;                  // USD, true prices
};

/// Exact minimizer of the aggregate problem per group. Throws InfeasibleError
/// when a group's capacity cannot cover its requirement.
OfflineSchedule offline_p2(const Scenario& s);

struct SimParams {
    PolicyKind policy = PolicyKind::dpp;
    int w = 1;
    double V = 10.0;
    std::vector<double> V_per_group; // dpp_hetero
    std::optional<std::vector<double>> forecast_prices;
    bool audit = true;
};

struct EvOutcome {
    std::string id;
    std::string group_id;
    double e_req = 0.0;
    double served_kwh = 0.0;
    int reference_slot = 0;  // last slot of the demand profile
    int completion_slot = -1;
    double delay_h = 0.0;    // meaningful when completion_slot >= 0
};

struct GroupOutcome {
    std::string id;
    double max_delay_h = 0.0;
    double avg_delay_h = 0.0;
    double max_q = 0.0;
    double max_z = 0.0;
    double Q = 0.0;
    double Z = 0.0;
    double delay_bound_h = 0.0;
};

struct MissedService {
    std::string ev_id;
    int slot = 0;
    double shortfall_kwh = 0.0;
};

struct RunReport {
    std::string policy;
    int w = 1;
    double V = 0.0;
    std::vector<double> V_per_group;
    double alpha = 0.0;

    std::vector<std::vector<double>> x; // implemented power [g][t]
    double total_cost = 0.0;            // USD at true prices
    double energy_kwh = 0.0;            // grid energy, dt * sum x
    double unit_cost = 0.0;             // total_cost / energy_kwh
    double avg_delay_h = 0.0;
    double max_delay_h = 0.0;
    double unserved_kwh = 0.0;
    double unallocated_kwh = 0.0; // planned power FIFO could not place
    double gap_bound = 0.0;       // NaN unless a dpp policy ran
    double delay_bound_h = 0.0;   // max over groups, NaN unless a dpp policy ran
    int truncated_window_slots = 0;

    std::vector<EvOutcome> evs;
    std::vector<GroupOutcome> groups;
    std::vector<MissedService> missed;
    QueueTrace queues;
    std::vector<std::string> audit_violations;

    bool all_served() const noexcept { return unserved_kwh <= 1e-6; }
};

RunReport simulate(const Scenario& s, const SimParams& params);

/// wR(Q+Z)/alpha slots. Throws InputError when alpha <= 0.
double delay_bound_slots(int w, int parking_slots, double Q, double Z, double alpha);
/// wR(2V*pi_max + 2wX + 2alpha/R)/alpha slots.
double delay_bound_corollary_slots(int w, int parking_slots, double V, double pi_max, double X, double alpha);

/// B/(wV); throws InputError when V <= 0.
double gap_bound(double B, int w, double V);
/// B/(w * min V_g).
double gap_bound(double B, int w, std::span<const double> V);

/// Time-averaged cost per slot without the dt factor: total_cost / (dt * T).
double per_slot_cost(double total_cost, const Scenario& s);

void write_report_json(std::ostream& out, const RunReport& r);
/// policy,w,V,alpha,total_cost_usd,unit_cost,avg_delay_h,max_delay_h,unserved_kwh,gap_bound,delay_bound
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const RunReport& r);

} // namespace evsched
