// SPDX-License-Identifier: Apache-2.0
#include "evsched/demand.hpp"

#include "evsched/error.hpp"

#include <algorithm>
#include <cmath>

namespace evsched {

int full_power_slots(const Ev& ev, double eta, double slot_hours) {
    const double ratio = ev.e_req / (ev.p_max * eta * slot_hours);
    return static_cast<int>(std::floor(ratio + 1e-12));
}

namespace {

double tail_power(const Ev& ev, double eta, double slot_hours, int t_min) {
    const double tail = ev.e_req / (eta * slot_hours) - t_min * ev.p_max;
    return tail > 1e-12 * ev.p_max ? tail : 0.0;
}

} // namespace

int demand_last_slot(const Ev& ev, double eta, double slot_hours) {
    const int k = full_power_slots(ev, eta, slot_hours);
    return tail_power(ev, eta, slot_hours, k) > 0.0 ? ev.arrival_slot + k : ev.arrival_slot + k - 1;
}

std::vector<double> demand_profile(const Ev& ev, double eta, double slot_hours, int num_slots) {
    const int k = full_power_slots(ev, eta, slot_hours);
    const double tail = tail_power(ev, eta, slot_hours, k);
    const int last = tail > 0.0 ? ev.arrival_slot + k : ev.arrival_slot + k - 1;
    if (ev.arrival_slot < 0 || last >= num_slots) {
        throw InputError("ev " + ev.id + ": demand runs to slot " + std::to_string(last) +
                         ", past the horizon of " + std::to_string(num_slots) + " slots");
    }
    std::vector<double> a(static_cast<std::size_t>(num_slots), 0.0);
    for (int t = ev.arrival_slot; t < ev.arrival_slot + k; ++t) a[t] = ev.p_max;
    if (tail > 0.0) a[ev.arrival_slot + k] = tail;
    return a;
}

DemandProfile build_demand(const Scenario& s) {
    const int T = s.num_slots();
    DemandProfile d;
    d.per_ev.reserve(s.fleet.size());
    for (const Ev& ev : s.fleet) {
        d.per_ev.push_back(demand_profile(ev, s.eta, s.slot_hours(), T));
        d.t_min.push_back(full_power_slots(ev, s.eta, s.slot_hours()));
        const int last = demand_last_slot(ev, s.eta, s.slot_hours());
        d.last_slot.push_back(last);
        d.tail_after_departure.push_back(last >= ev.departure_slot);
    }
    d.per_group.reserve(s.groups.size());
    for (std::size_t g = 0; g < s.groups.size(); ++g) d.per_group.push_back(group_demand(s, d, g));
    return d;
}

std::vector<double> group_demand(const Scenario& s, const DemandProfile& profiles, std::size_t g) {
    if (g >= s.groups.size()) throw InputError("group index " + std::to_string(g) + " out of range");
    std::vector<double> sum(static_cast<std::size_t>(s.num_slots()), 0.0);
    for (std::size_t m : s.groups[g].members) {
        const auto& a = profiles.per_ev.at(m);
        for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += a[t];
    }
    return sum;
}

Scenario with_demand_bounds(Scenario s, const DemandProfile& profiles) {
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const auto& a = profiles.per_group.at(g);
        s.groups[g].a_bound = a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
    }
    return s;
}

} // namespace evsched
