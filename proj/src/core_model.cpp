// SPDX-License-Identifier: Apache-2.0
#include "evsched/core_model.hpp"

#include "evsched/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace evsched {

double Ev::slot_power_cap(double eta, double slot_hours) const noexcept {
    return std::min(e_max / (eta * slot_hours), p_max);
}

PriceSeries::PriceSeries(std::vector<double> prices) : prices_(std::move(prices)) {
    if (!prices_.empty()) {
        const auto [lo, hi] = std::minmax_element(prices_.begin(), prices_.end());
        min_ = *lo;
        max_ = *hi;
    }
}

std::size_t Scenario::group_index(std::string_view id) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].id == id) return g;
    }
    throw InputError("unknown group id '" + std::string(id) + "'");
}

std::size_t Scenario::ev_index(std::string_view id) const {
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        if (fleet[i].id == id) return i;
    }
    throw InputError("unknown ev id '" + std::string(id) + "'");
}

std::vector<Group> form_groups(const std::vector<Ev>& fleet, double alpha) {
    std::vector<Group> groups;
    std::map<std::string, std::size_t> slot_of;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const Ev& ev = fleet[i];
        auto [it, inserted] = slot_of.try_emplace(ev.group_id, groups.size());
        if (inserted) {
            Group g;
            g.id = ev.group_id;
            g.parking_slots = ev.parking_slots();
            g.alpha = alpha;
            groups.push_back(std::move(g));
        }
        Group& g = groups[it->second];
        g.members.push_back(i);
        g.x_cap_total += ev.p_max;
    }
    for (Group& g : groups) {
        std::stable_sort(g.members.begin(), g.members.end(), [&](std::size_t a, std::size_t b) {
            if (fleet[a].arrival_slot != fleet[b].arrival_slot)
                return fleet[a].arrival_slot < fleet[b].arrival_slot;
            return fleet[a].id < fleet[b].id;
        });
    }
    return groups;
}

Scenario make_scenario(TimeGrid grid, std::vector<Ev> fleet, std::vector<double> prices,
                       double eta, int lookahead, double alpha) {
    Scenario s;
    s.grid = grid;
    s.groups = form_groups(fleet, alpha);
    s.fleet = std::move(fleet);
    s.prices = PriceSeries(std::move(prices));
    s.eta = eta;
    s.lookahead = lookahead;
    return s;
}

namespace {

template <typename... Parts>
std::string concat(const Parts&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

} // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> out;
    const int T = s.grid.num_slots;
    if (T < 1) out.push_back(concat("grid: num_slots must be >= 1 (got ", T, ")"));
    if (!(s.grid.slot_hours > 0.0))
        out.push_back(concat("grid: slot_hours must be > 0 (got ", s.grid.slot_hours, ")"));
    if (!(s.eta > 0.0 && s.eta <= 1.0)) out.push_back(concat("scenario: eta must lie in (0,1] (got ", s.eta, ")"));
    if (s.lookahead < 1 || s.lookahead > T)
        out.push_back(concat("scenario: lookahead w must lie in [1,", T, "] (got ", s.lookahead, ")"));
    if (static_cast<long>(s.prices.size()) != T)
        out.push_back(concat("prices: length ", s.prices.size(), " does not match num_slots ", T));

    std::set<std::string> seen_ids;
    for (const Ev& ev : s.fleet) {
        if (!seen_ids.insert(ev.id).second) out.push_back(concat("ev ", ev.id, ": duplicate id"));
        if (!(ev.e_req > 0.0)) out.push_back(concat("ev ", ev.id, ": e_req must be > 0 (got ", ev.e_req, ")"));
        else if (!(ev.e_req <= ev.e_max))
            out.push_back(concat("ev ", ev.id, ": e_req ", ev.e_req, " exceeds e_max ", ev.e_max));
        if (!(ev.e_max <= ev.e_cap))
            out.push_back(concat("ev ", ev.id, ": e_max ", ev.e_max, " exceeds e_cap ", ev.e_cap));
        if (!(ev.p_max > 0.0)) out.push_back(concat("ev ", ev.id, ": p_max must be > 0 (got ", ev.p_max, ")"));
        if (ev.arrival_slot >= ev.departure_slot)
            out.push_back(concat("ev ", ev.id, ": arrival_slot ", ev.arrival_slot, " must precede departure_slot ",
                                 ev.departure_slot));
        if (ev.arrival_slot < 0 || ev.departure_slot > T)
            out.push_back(concat("ev ", ev.id, ": stay [", ev.arrival_slot, ",", ev.departure_slot,
                                 ") leaves the horizon [0,", T, ")"));
    }

    std::vector<int> owner_count(s.fleet.size(), 0);
    for (const Group& g : s.groups) {
        if (!(g.alpha > 0.0)) out.push_back(concat("group ", g.id, ": alpha must be > 0"));
        if (g.parking_slots < 1) out.push_back(concat("group ", g.id, ": parking_slots must be >= 1"));
        double cap_sum = 0.0;
        std::vector<std::string> off_span;
        for (std::size_t m : g.members) {
            if (m >= s.fleet.size()) {
                out.push_back(concat("group ", g.id, ": member index ", m, " out of range"));
                continue;
            }
            ++owner_count[m];
            const Ev& ev = s.fleet[m];
            cap_sum += ev.p_max;
            if (ev.group_id != g.id)
                out.push_back(concat("group ", g.id, ": member ", ev.id, " declares group ", ev.group_id));
            if (ev.parking_slots() != g.parking_slots) off_span.push_back(ev.id);
        }
        if (!off_span.empty()) {
            std::ostringstream os;
            os << "group " << g.id << ": members must all park " << g.parking_slots << " slots; mismatched:";
            for (const auto& id : off_span) os << ' ' << id;
            out.push_back(os.str());
        }
        if (std::abs(cap_sum - g.x_cap_total) > 1e-9 * std::max(1.0, cap_sum))
            out.push_back(concat("group ", g.id, ": x_cap_total ", g.x_cap_total, " differs from member sum ",
                                 cap_sum));
    }
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        if (owner_count[i] != 1)
            out.push_back(concat("ev ", s.fleet[i].id, ": belongs to ", owner_count[i], " groups (expected 1)"));
    }
    return out;
}

double group_power_cap(const Scenario& s, std::size_t g, int t) {
    if (g >= s.groups.size()) throw InputError(concat("group index ", g, " out of range"));
    if (t < 0 || t >= s.grid.num_slots) throw InputError(concat("slot ", t, " outside the grid"));
    double cap = 0.0;
    for (std::size_t m : s.groups[g].members) {
        const Ev& ev = s.fleet[m];
        if (ev.active_at(t)) cap += ev.slot_power_cap(s.eta, s.grid.slot_hours);
    }
    return cap;
}

double group_power_cap(const Scenario& s, std::string_view group_id, int t) {
    return group_power_cap(s, s.group_index(group_id), t);
}

} // namespace evsched
