// SPDX-License-Identifier: Apache-2.0
#include "evsched/csv_io.hpp"
#include "evsched/policies.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace evsched {

namespace {

nlohmann::json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string cell(double v) { return std::isfinite(v) ? csv::format_number(v) : std::string(); }

} // namespace

void write_report_json(std::ostream& out, const RunReport& r) {
    nlohmann::ordered_json j;
    j["policy"] = r.policy;
    j["w"] = r.w;
    j["V"] = number(r.V);
    j["V_per_group"] = r.V_per_group;
    j["alpha"] = r.alpha;
    j["total_cost_usd"] = r.total_cost;
    j["energy_kwh"] = r.energy_kwh;
    j["unit_cost"] = r.unit_cost;
    j["avg_delay_h"] = r.avg_delay_h;
    j["max_delay_h"] = r.max_delay_h;
    j["unserved_kwh"] = r.unserved_kwh;
    j["unallocated_kwh"] = r.unallocated_kwh;
    j["gap_bound"] = number(r.gap_bound);
    j["delay_bound_h"] = number(r.delay_bound_h);
    j["truncated_window_slots"] = r.truncated_window_slots;

    auto& groups = j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : r.groups) {
        groups.push_back({{"id", g.id},
                          {"max_delay_h", g.max_delay_h},
                          {"avg_delay_h", g.avg_delay_h},
                          {"max_q", g.max_q},
                          {"max_z", g.max_z},
                          {"Q", g.Q},
                          {"Z", g.Z},
                          {"delay_bound_h", number(g.delay_bound_h)}});
    }
    auto& evs = j["evs"] = nlohmann::ordered_json::array();
    for (const auto& e : r.evs) {
        evs.push_back({{"id", e.id},
                       {"group_id", e.group_id},
                       {"e_req_kwh", e.e_req},
                       {"served_kwh", e.served_kwh},
                       {"reference_slot", e.reference_slot},
                       {"completion_slot", e.completion_slot},
                       {"delay_h", e.completion_slot >= 0 ? number(e.delay_h) : nlohmann::json(nullptr)}});
    }
    auto& missed = j["missed_service"] = nlohmann::ordered_json::array();
    for (const auto& m : r.missed) missed.push_back({{"ev_id", m.ev_id}, {"slot", m.slot}, {"shortfall_kwh", m.shortfall_kwh}});
    j["audit_violations"] = r.audit_violations;
    out << j.dump(2) << '\n';
}

void write_summary_header(std::ostream& out) {
    out << "policy,w,V,alpha,total_cost_usd,unit_cost,avg_delay_h,max_delay_h,unserved_kwh,gap_bound,delay_bound\n";
}

void write_summary_row(std::ostream& out, const RunReport& r) {
    std::string v = cell(r.V);
    if (!r.V_per_group.empty()) {
        v.clear();
        for (std::size_t i = 0; i < r.V_per_group.size(); ++i) v += (i ? ";" : "") + csv::format_number(r.V_per_group[i]);
    }
    out << r.policy << ',' << r.w << ',' << v << ',' << cell(r.alpha) << ',' << cell(r.total_cost) << ','
        << cell(r.unit_cost) << ',' << cell(r.avg_delay_h) << ',' << cell(r.max_delay_h) << ',' << cell(r.unserved_kwh)
        << ',' << cell(r.gap_bound) << ',' << cell(r.delay_bound_h) << '\n';
}

} // namespace evsched
