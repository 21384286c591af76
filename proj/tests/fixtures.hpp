// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"
#include "oracles.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

inline evsched::Ev make_ev(std::string id, std::string group, double p, double e_req, double e_max, int arrival,
                           int departure) {
    evsched::Ev ev;
    ev.id = std::move(id);
    ev.group_id = std::move(group);
    ev.p_max = p;
    ev.e_req = e_req;
    ev.e_max = e_max;
    ev.e_cap = e_max;
    ev.arrival_slot = arrival;
    ev.departure_slot = departure;
    return ev;
}

// The two-vehicle example with both vehicles in one group: EV1 P=1 parked in
// slot 0, EV2 P=2 parked in slots 0 and 1, E_req = 1 each, eta = dt = 1.
// ev2_e_max = 1 gives the window-bound example, 2 the optimum/flow example.
inline evsched::Scenario two_ev(double ev2_e_max = 1.0, std::vector<double> prices = {2.0, 1.0}) {
    std::vector<evsched::Ev> fleet{make_ev("ev1", "G", 1.0, 1.0, 1.0, 0, 1),
                                   make_ev("ev2", "G", 2.0, 1.0, ev2_e_max, 0, 2)};
    return evsched::make_scenario({2, 1.0}, std::move(fleet), std::move(prices), 1.0, 1, 1.0);
}

// Integral instance in one group "G" (eta = dt = 1, prices 1.0 unless given).
inline evsched::Scenario from_int(const std::vector<oracle::IntEv>& evs, int T, std::vector<double> prices = {}) {
    std::vector<evsched::Ev> fleet;
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const auto& e = evs[i];
        fleet.push_back(make_ev("v" + std::to_string(i), "G", e.p, e.e_req, e.e_max, e.arrival, e.departure));
    }
    if (prices.empty()) prices.assign(static_cast<std::size_t>(T), 1.0);
    return evsched::make_scenario({T, 1.0}, std::move(fleet), std::move(prices), 1.0, 1, 1.0);
}

// Random integral instance with every vehicle able to meet E_req.
inline std::vector<oracle::IntEv> random_int_evs(std::mt19937_64& rng, int n, int T) {
    std::vector<oracle::IntEv> out;
    for (int i = 0; i < n; ++i) {
        oracle::IntEv e;
        e.p = std::uniform_int_distribution<int>(1, 2)(rng);
        e.arrival = std::uniform_int_distribution<int>(0, T - 1)(rng);
        e.departure = std::uniform_int_distribution<int>(e.arrival + 1, T)(rng);
        const int reach = e.p * (e.departure - e.arrival);
        e.e_req = std::uniform_int_distribution<int>(1, reach)(rng);
        e.e_max = std::uniform_int_distribution<int>(e.e_req, reach + 1)(rng);
        out.push_back(e);
    }
    return out;
}

} // namespace fixtures
