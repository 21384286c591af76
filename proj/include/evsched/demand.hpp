// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"

#include <vector>

namespace evsched {

/// Per-vehicle and per-group demand arrivals a_v(t), a_g(t) in kW.
struct DemandProfile {
    std::vector<std::vector<double>> per_ev;    // indexed like Scenario::fleet
    std::vector<std::vector<double>> per_group; // indexed like Scenario::groups
    std::vector<int> t_min;                     // full-power slots per vehicle
    std::vector<int> last_slot;                 // last slot with positive demand
    std::vector<bool> tail_after_departure;     // demand support runs past the stay
};

/// floor(E_req / (P * eta * dt)), tolerant of round-off just below an integer.
int full_power_slots(const Ev& ev, double eta, double slot_hours);

/// Full power P for T_min slots starting at arrival, then the remainder
/// E_req/(eta*dt) - T_min*P in the next slot. Throws InputError naming the
/// vehicle when positive demand would fall past the horizon.
std::vector<double> demand_profile(const Ev& ev, double eta, double slot_hours, int num_slots);

/// Last slot with positive demand (the demand-completion reference used for delays).
int demand_last_slot(const Ev& ev, double eta, double slot_hours);

DemandProfile build_demand(const Scenario& s);

/// Pointwise sum of the members' profiles.
std::vector<double> group_demand(const Scenario& s, const DemandProfile& profiles, std::size_t g);

/// Copy of `s` with every Group::a_bound set to max_t a_g(t).
Scenario with_demand_bounds(Scenario s, const DemandProfile& profiles);

} // namespace evsched
