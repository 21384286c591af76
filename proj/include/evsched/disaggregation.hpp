// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace evsched {

struct CirculationEdge {
    int from = 0;
    int to = 0;
    double lower = 0.0;
    double upper = 0.0; // may be +inf
};

/// Node layout: source 0, sink 1, slot t at 2+t, member i at 2+T+i.
/// Members are the group's vehicles in Group::members order.
struct CirculationNetwork {
    static constexpr int source = 0;
    static constexpr int sink = 1;

    int num_slots = 0;
    std::vector<std::size_t> members; // fleet indices
    std::vector<CirculationEdge> edges;
    std::vector<std::string> labels;

    int node_count() const noexcept { return 2 + num_slots + static_cast<int>(members.size()); }
    int slot_node(int t) const noexcept { return 2 + t; }
    int ev_node(std::size_t i) const noexcept { return 2 + num_slots + static_cast<int>(i); }
};

/// Edges: s->t [x(t), x(t)], t->v [0, P_v] for t in the stay, v->r
/// [E_req/(eta*dt), E_max/(eta*dt)], r->s [0, inf].
/// Throws InputError when x is negative or above group_power_cap.
CirculationNetwork build_circulation_network(const Scenario& s, std::size_t g, std::span<const double> x);

/// Flow resolution of the integer reduction, in kW.
inline constexpr double kFlowResolution = 1e-6;

struct CirculationResult {
    bool feasible = false;
    /// per_ev[i][t] for member i; empty when infeasible.
    std::vector<std::vector<double>> per_ev;
    /// Node set W with lower(in W) > upper(out W); empty when feasible.
    std::vector<int> certificate;
    /// Edge indices entering / leaving the certificate set.
    std::vector<std::size_t> entering_edges;
    std::vector<std::size_t> leaving_edges;
    double entering_lower = 0.0;
    double leaving_upper = 0.0;
};

CirculationResult circulation_disaggregate(const CirculationNetwork& net);
CirculationResult circulation_disaggregate(const Scenario& s, std::size_t g, std::span<const double> x);

inline constexpr int kHoffmanNodeLimit = 24;

struct HoffmanVerdict {
    bool satisfied = true;
    std::optional<std::vector<int>> failing_set; // first failing subset in bitmask order
    double entering_lower = 0.0;
    double leaving_upper = 0.0;
    std::size_t subsets_checked = 0;
};

/// Checks lower(in W) <= upper(out W) for all 2^n node subsets. Throws
/// InputError above kHoffmanNodeLimit nodes.
HoffmanVerdict hoffman_verify(const CirculationNetwork& net, double tolerance = 1e-9);

/// Energy delivered to each vehicle so far, indexed like Scenario::fleet.
struct ServiceLedger {
    std::vector<double> served_kwh;
    std::vector<int> completion_slot; // -1 until served_kwh reaches E_req
};

ServiceLedger make_ledger(const Scenario& s);

struct FifoAllocation {
    std::vector<std::pair<std::size_t, double>> allocations; // (fleet index, kW), positive entries only
    double delivered = 0.0;
    double unallocated = 0.0;
};

/// Splits x_t among the group's active vehicles in order of arrival (then id),
/// each capped at min{P_v, (E_req - served)/(eta*dt)}. Updates `ledger`.
FifoAllocation fifo_disaggregate(const Scenario& s, std::size_t g, double x_t, int t, ServiceLedger& ledger);

} // namespace evsched
