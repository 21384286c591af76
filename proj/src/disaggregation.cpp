// SPDX-License-Identifier: Apache-2.0
#include "evsched/disaggregation.hpp"

#include "evsched/error.hpp"
#include "maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace evsched {

namespace {

constexpr std::int64_t kUnbounded = std::int64_t{1} << 60;

// Lower bounds round down and upper bounds round up, so the integer network
// is never tighter than the real one by more than one resolution step.
std::int64_t scale_down(double v) { return static_cast<std::int64_t>(std::floor(v / kFlowResolution + 1e-3)); }
std::int64_t scale_up(double v) {
    if (std::isinf(v)) return kUnbounded;
    return static_cast<std::int64_t>(std::ceil(v / kFlowResolution - 1e-3));
}

void fill_cut(const CirculationNetwork& net, const std::vector<bool>& in_set, CirculationResult& r) {
    for (int v = 0; v < net.node_count(); ++v) {
        if (in_set[v]) r.certificate.push_back(v);
    }
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const auto& edge = net.edges[e];
        if (in_set[edge.to] && !in_set[edge.from]) {
            r.entering_edges.push_back(e);
            r.entering_lower += edge.lower;
        } else if (in_set[edge.from] && !in_set[edge.to]) {
            r.leaving_edges.push_back(e);
            r.leaving_upper += edge.upper;
        }
    }
}

} // namespace

CirculationNetwork build_circulation_network(const Scenario& s, std::size_t g, std::span<const double> x) {
    if (g >= s.groups.size()) throw InputError("group index " + std::to_string(g) + " out of range");
    const int T = s.num_slots();
    if (static_cast<int>(x.size()) != T)
        throw InputError("schedule length " + std::to_string(x.size()) + " does not match the grid");
    for (int t = 0; t < T; ++t) {
        const double cap = group_power_cap(s, g, t);
        if (!(x[t] >= 0.0) || x[t] > cap + 1e-9 * std::max(1.0, cap))
            throw InputError("x(" + std::to_string(t) + ") = " + std::to_string(x[t]) + " outside [0, " +
                             std::to_string(cap) + "]");
    }

    CirculationNetwork net;
    net.num_slots = T;
    net.members = s.groups[g].members;
    net.labels = {"s", "r"};
    for (int t = 0; t < T; ++t) net.labels.push_back("slot" + std::to_string(t));
    for (std::size_t m : net.members) net.labels.push_back("ev:" + s.fleet[m].id);

    const double scale = 1.0 / (s.eta * s.slot_hours());
    for (int t = 0; t < T; ++t) net.edges.push_back({net.source, net.slot_node(t), x[t], x[t]});
    for (std::size_t i = 0; i < net.members.size(); ++i) {
        const Ev& ev = s.fleet[net.members[i]];
        for (int t = std::max(0, ev.arrival_slot); t < std::min(T, ev.departure_slot); ++t)
            net.edges.push_back({net.slot_node(t), net.ev_node(i), 0.0, ev.p_max});
    }
    for (std::size_t i = 0; i < net.members.size(); ++i) {
        const Ev& ev = s.fleet[net.members[i]];
        net.edges.push_back({net.ev_node(i), net.sink, ev.e_req * scale, ev.e_max * scale});
    }
    net.edges.push_back({net.sink, net.source, 0.0, std::numeric_limits<double>::infinity()});
    return net;
}

CirculationResult circulation_disaggregate(const CirculationNetwork& net) {
    const int n = net.node_count();
    const int super_source = n;
    const int super_sink = n + 1;
    detail::MaxFlow flow(n + 2);
    std::vector<std::int64_t> excess(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> lower(net.edges.size());
    std::vector<int> arc(net.edges.size());
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const auto& edge = net.edges[e];
        if (edge.lower > edge.upper) throw InputError("edge " + net.labels[edge.from] + "->" + net.labels[edge.to] +
                                                      " has lower > upper");
        lower[e] = scale_down(edge.lower);
        const std::int64_t upper = std::max(lower[e], scale_up(edge.upper));
        arc[e] = flow.add_arc(edge.from, edge.to, upper - lower[e]);
        excess[edge.to] += lower[e];
        excess[edge.from] -= lower[e];
    }
    std::int64_t demand = 0;
    for (int v = 0; v < n; ++v) {
        if (excess[v] > 0) {
            flow.add_arc(super_source, v, excess[v]);
            demand += excess[v];
        } else if (excess[v] < 0) {
            flow.add_arc(v, super_sink, -excess[v]);
        }
    }

    CirculationResult r;
    if (flow.solve(super_source, super_sink) < demand) {
        const auto seen = flow.reachable(super_source);
        fill_cut(net, std::vector<bool>(seen.begin(), seen.begin() + n), r);
        return r;
    }
    r.feasible = true;
    r.per_ev.assign(net.members.size(), std::vector<double>(static_cast<std::size_t>(net.num_slots), 0.0));
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const auto& edge = net.edges[e];
        const int slot = edge.from - 2;
        const int member = edge.to - 2 - net.num_slots;
        if (slot < 0 || slot >= net.num_slots || member < 0) continue;
        r.per_ev[member][slot] = static_cast<double>(lower[e] + flow.flow(arc[e])) * kFlowResolution;
    }
    return r;
}

CirculationResult circulation_disaggregate(const Scenario& s, std::size_t g, std::span<const double> x) {
    return circulation_disaggregate(build_circulation_network(s, g, x));
}

HoffmanVerdict hoffman_verify(const CirculationNetwork& net, double tolerance) {
    const int n = net.node_count();
    if (n > kHoffmanNodeLimit)
        throw InputError("hoffman_verify enumerates 2^n subsets and needs n <= " + std::to_string(kHoffmanNodeLimit) +
                         " (got " + std::to_string(n) + ")");
    HoffmanVerdict v;
    const std::uint32_t count = std::uint32_t{1} << n;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        ++v.subsets_checked;
        double in_lower = 0.0;
        double out_upper = 0.0;
        for (const auto& e : net.edges) {
            const bool from_in = (mask >> e.from) & 1u;
            const bool to_in = (mask >> e.to) & 1u;
            if (to_in && !from_in) in_lower += e.lower;
            if (from_in && !to_in) out_upper += e.upper;
        }
        if (in_lower > out_upper + tolerance * std::max(1.0, std::abs(out_upper))) {
            v.satisfied = false;
            std::vector<int> set;
            for (int i = 0; i < n; ++i) {
                if ((mask >> i) & 1u) set.push_back(i);
            }
            v.failing_set = std::move(set);
            v.entering_lower = in_lower;
            v.leaving_upper = out_upper;
            return v;
        }
    }
    return v;
}

ServiceLedger make_ledger(const Scenario& s) {
    return {std::vector<double>(s.fleet.size(), 0.0), std::vector<int>(s.fleet.size(), -1)};
}

FifoAllocation fifo_disaggregate(const Scenario& s, std::size_t g, double x_t, int t, ServiceLedger& ledger) {
    if (g >= s.groups.size()) throw InputError("group index " + std::to_string(g) + " out of range");
    if (!(x_t >= 0.0)) throw InputError("fifo_disaggregate: negative power " + std::to_string(x_t));
    const double energy_per_kw = s.eta * s.slot_hours();
    FifoAllocation out;
    double left = x_t;
    for (std::size_t m : s.groups[g].members) {
        if (left <= 0.0) break;
        const Ev& ev = s.fleet[m];
        if (!ev.active_at(t)) continue;
        const double remaining = ev.e_req - ledger.served_kwh[m];
        if (remaining <= 0.0) continue;
        const double give = std::min({left, ev.p_max, remaining / energy_per_kw});
        if (give <= 0.0) continue;
        left -= give;
        ledger.served_kwh[m] += give * energy_per_kw;
        if (ev.e_req - ledger.served_kwh[m] <= 1e-9 * ev.e_req) {
            ledger.served_kwh[m] = ev.e_req;
            if (ledger.completion_slot[m] < 0) ledger.completion_slot[m] = t;
        }
        out.allocations.emplace_back(m, give);
        out.delivered += give;
    }
    out.unallocated = std::max(0.0, left);
    return out;
}

} // namespace evsched
