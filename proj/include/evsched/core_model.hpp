// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evsched {

/// Slots are 0-based; slot t covers [t*slot_hours, (t+1)*slot_hours).
struct TimeGrid {
    int num_slots = 1;
    double slot_hours = 1.0;
};

/// Static parameters of one vehicle. Energies are in kWh, power in kW.
struct Ev {
    std::string id;
    std::string group_id;
    double p_max = 0.0;
    double e_req = 0.0;
    double e_max = 0.0;
    double e_cap = 0.0;
    int arrival_slot = 0;   // first chargeable slot
    int departure_slot = 0; // first slot after the stay; not chargeable

    bool active_at(int t) const noexcept { return arrival_slot <= t && t < departure_slot; }
    int parking_slots() const noexcept { return departure_slot - arrival_slot; }

    /// Per-slot power that respects both the charger limit and the energy headroom.
    double slot_power_cap(double eta, double slot_hours) const noexcept;
};

/// Vehicles sharing one parking duration. `members` index into Scenario::fleet
/// and are kept in FIFO service order (arrival slot, then id).
struct Group {
    std::string id;
    int parking_slots = 0;
    std::vector<std::size_t> members;
    double alpha = 1.0;
    double x_cap_total = 0.0;
    double a_bound = 0.0; // set from the demand profile, see with_demand_bounds()
};

class PriceSeries {
public:
    PriceSeries() = default;
    explicit PriceSeries(std::vector<double> prices);

    double operator[](std::size_t t) const { return prices_[t]; }
    std::size_t size() const noexcept { return prices_.size(); }
    std::span<const double> values() const noexcept { return prices_; }
    double max() const noexcept { return max_; }
    double min() const noexcept { return min_; }

private:
    std::vector<double> prices_;
    double max_ = 0.0;
    double min_ = 0.0;
};

struct Scenario {
    TimeGrid grid;
    std::vector<Ev> fleet;
    std::vector<Group> groups;
    PriceSeries prices;
    double eta = 1.0;
    int lookahead = 1;

    int num_slots() const noexcept { return grid.num_slots; }
    double slot_hours() const noexcept { return grid.slot_hours; }

    /// Throws InputError for an unknown id.
    std::size_t group_index(std::string_view id) const;
    std::size_t ev_index(std::string_view id) const;
};

/// Partition `fleet` by group_id (groups in order of first appearance).
/// parking_slots is taken from the first member; validate_scenario() reports
/// members that disagree.
std::vector<Group> form_groups(const std::vector<Ev>& fleet, double alpha);

Scenario make_scenario(TimeGrid grid, std::vector<Ev> fleet, std::vector<double> prices,
                       double eta, int lookahead, double alpha);

/// One human-readable entry per violated invariant; empty when the scenario is well formed.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Sum over the group's vehicles active at t of min{E_max/(eta*dt), P}.
double group_power_cap(const Scenario& s, std::size_t g, int t);
double group_power_cap(const Scenario& s, std::string_view group_id, int t);

} // namespace evsched
