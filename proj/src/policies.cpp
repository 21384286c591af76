// SPDX-License-Identifier: Apache-2.0
#include "evsched/policies.hpp"

#include "evsched/demand.hpp"
#include "evsched/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace evsched {

std::string_view policy_name(PolicyKind p) {
    switch (p) {
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::mpc: return "mpc";
    case PolicyKind::dpp: return "dpp";
    case PolicyKind::dpp_hetero: return "dpp_hetero";
    case PolicyKind::offline: return "offline";
    }
    return "unknown";
}

PolicyKind parse_policy(std::string_view name) {
    if (name == "greedy") return PolicyKind::greedy;
    if (name == "mpc") return PolicyKind::mpc;
    if (name == "dpp" || name == "dpp_homog") return PolicyKind::dpp;
    if (name == "dpp_hetero") return PolicyKind::dpp_hetero;
    if (name == "offline") return PolicyKind::offline;
    throw InputError("unknown policy '" + std::string(name) + "' (expected greedy, mpc, dpp, dpp_hetero or offline)");
}

Plan plan_dpp_hetero(std::span<const double> q, std::span<const double> z, std::span<const double> prices,
                     const std::vector<std::vector<double>>& caps, std::span<const double> V, int base_slot) {
    const std::size_t G = caps.size();
    if (q.size() != G || z.size() != G || V.size() != G)
        throw InputError("planner needs q, z and V for each of the " + std::to_string(G) + " groups");
    Plan plan;
    plan.base_slot = base_slot;
    plan.horizon = static_cast<int>(prices.size());
    plan.x.assign(G, std::vector<double>(prices.size(), 0.0));
    for (std::size_t g = 0; g < G; ++g) {
        if (caps[g].size() != prices.size()) throw InputError("cap window and price window differ in length");
        for (std::size_t tau = 0; tau < prices.size(); ++tau) {
            const double c = V[g] * prices[tau] - q[g] - z[g];
            plan.x[g][tau] = c < 0.0 ? caps[g][tau] : 0.0;
        }
    }
    return plan;
}

Plan plan_dpp(std::span<const double> q, std::span<const double> z, std::span<const double> prices,
              const std::vector<std::vector<double>>& caps, double V, int base_slot) {
    const std::vector<double> v(caps.size(), V);
    return plan_dpp_hetero(q, z, prices, caps, v, base_slot);
}

double dpp_objective(const Plan& plan, std::span<const double> q, std::span<const double> z,
                     std::span<const double> prices, std::span<const double> V) {
    double total = 0.0;
    for (std::size_t g = 0; g < plan.x.size(); ++g) {
        for (std::size_t tau = 0; tau < plan.x[g].size(); ++tau)
            total += (V[g] * prices[tau] - q[g] - z[g]) * plan.x[g][tau];
    }
    return total;
}

PlanBuffer::PlanBuffer(int w) : w_(w) {
    if (w < 1) throw InputError("lookahead w must be >= 1");
}

void PlanBuffer::push(Plan plan) {
    if (!plans_.empty() && plan.base_slot != plans_.back().base_slot + 1)
        throw StateError("plan for slot " + std::to_string(plan.base_slot) + " does not follow slot " +
                         std::to_string(plans_.back().base_slot));
    plans_.push_back(std::move(plan));
    while (static_cast<int>(plans_.size()) > w_) plans_.pop_front();
}

std::vector<double> PlanBuffer::buffered_average(int t) const {
    if (plans_.empty()) throw StateError("buffered average requested from an empty plan buffer");
    std::vector<double> avg(plans_.back().x.size(), 0.0);
    for (const Plan& p : plans_) {
        const int tau = t - p.base_slot;
        if (tau < 0 || tau >= p.horizon) continue;
        for (std::size_t g = 0; g < avg.size(); ++g) avg[g] += p.x[g][tau];
    }
    for (double& v : avg) v /= w_;
    return avg;
}

std::vector<double> fill_cheapest(std::span<const double> prices, std::span<const double> caps, double required,
                                  double maximum) {
    if (prices.size() != caps.size()) throw InputError("price and cap series differ in length");
    std::vector<std::size_t> order(prices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return prices[i] < prices[j]; });
    std::vector<double> x(prices.size(), 0.0);
    double total = 0.0;
    for (std::size_t i : order) {
        const double limit = prices[i] < 0.0 ? std::max(maximum, required) : required;
        if (total >= limit) {
            if (prices[i] >= 0.0) break;
            continue;
        }
        x[i] = std::min(caps[i], limit - total);
        total += x[i];
    }
    return x;
}

MpcState make_mpc_state(const Scenario& s) {
    MpcState st;
    for (const Ev& ev : s.fleet) st.energy_kwh.push_back(ev.e_cap - ev.e_max);
    st.missed.assign(s.fleet.size(), false);
    return st;
}

MpcPlan plan_mpc(const Scenario& s, const MpcState& mpc, int t, int w, std::span<const double> prices) {
    const int T = s.num_slots();
    if (t < 0 || t >= T || w < 1) throw InputError("mpc window starts outside the horizon");
    if (static_cast<int>(prices.size()) < T) throw InputError("mpc needs a price for every slot");
    const int h = std::min(w, T - t);
    const double scale = s.eta * s.slot_hours();
    const auto window_prices = prices.subspan(static_cast<std::size_t>(t), static_cast<std::size_t>(h));

    MpcPlan plan;
    plan.base_slot = t;
    plan.horizon = h;
    plan.per_ev.resize(s.fleet.size());
    for (std::size_t m = 0; m < s.fleet.size(); ++m) {
        const Ev& ev = s.fleet[m];
        if (!ev.active_at(t)) continue;
        const double delivered = mpc.energy_kwh[m] - (ev.e_cap - ev.e_max);
        const double remaining = std::max(0.0, ev.e_req - delivered) / scale;
        const double headroom = std::max(0.0, ev.e_max - delivered) / scale;
        std::vector<double> caps(static_cast<std::size_t>(h), 0.0);
        for (int tau = 0; tau < h; ++tau) caps[tau] = t + tau < ev.departure_slot ? ev.p_max : 0.0;
        const bool deadline_inside = ev.departure_slot <= t + h;
        const double required = deadline_inside ? remaining : 0.0;
        const double capacity = std::accumulate(caps.begin(), caps.end(), 0.0);
        if (required > capacity * (1.0 + 1e-12) + 1e-12) {
            std::vector<double> x(caps.size(), 0.0);
            double used = 0.0;
            for (std::size_t tau = 0; tau < caps.size(); ++tau) {
                x[tau] = std::min(caps[tau], headroom - used);
                used += x[tau];
            }
            plan.per_ev[m] = std::move(x);
            if (!mpc.missed[m]) plan.newly_missed.push_back(m);
            continue;
        }
        plan.per_ev[m] = fill_cheapest(window_prices, caps, required, headroom);
    }
    return plan;
}

double mpc_objective(const MpcPlan& plan, std::span<const double> prices, double slot_hours) {
    double total = 0.0;
    for (const auto& row : plan.per_ev) {
        for (std::size_t tau = 0; tau < row.size(); ++tau) total += prices[plan.base_slot + tau] * row[tau];
    }
    return total * slot_hours;
}

std::vector<double> plan_greedy(const Scenario& s, const ServiceLedger& ledger, int t) {
    const double scale = s.eta * s.slot_hours();
    std::vector<double> x(s.groups.size(), 0.0);
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        double unserved = 0.0;
        for (std::size_t m : s.groups[g].members) {
            const Ev& ev = s.fleet[m];
            if (ev.active_at(t)) unserved += std::max(0.0, ev.e_req - ledger.served_kwh[m]) / scale;
        }
        x[g] = std::min(group_power_cap(s, g, t), unserved);
    }
    return x;
}

OfflineSchedule offline_p2(const Scenario& s) {
    const int T = s.num_slots();
    const double scale = s.eta * s.slot_hours();
    const auto prices = s.prices.values();
    OfflineSchedule out;
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        std::vector<double> caps(static_cast<std::size_t>(T));
        for (int t = 0; t < T; ++t) caps[t] = group_power_cap(s, g, t);
        double required = 0.0;
        double maximum = 0.0;
        for (std::size_t m : s.groups[g].members) {
            required += s.fleet[m].e_req / scale;
            maximum += s.fleet[m].e_max / scale;
        }
        const double capacity = std::accumulate(caps.begin(), caps.end(), 0.0);
        if (capacity < required * (1.0 - 1e-12))
            throw InfeasibleError("group " + s.groups[g].id + ": capacity " + std::to_string(capacity * scale) +
                                  " kWh is below the requirement " + std::to_string(required * scale) + " kWh");
        auto x = fill_cheapest(prices.first(static_cast<std::size_t>(T)), caps, required, maximum);
        for (int t = 0; t < T; ++t) out.cost += prices[t] * x[t] * s.slot_hours();
        out.x.push_back(std::move(x));
    }
    return out;
}

double delay_bound_slots(int w, int parking_slots, double Q, double Z, double alpha) {
    if (!(alpha > 0.0)) throw InputError("delay bound needs alpha > 0");
    return static_cast<double>(w) * parking_slots * (Q + Z) / alpha;
}

double delay_bound_corollary_slots(int w, int parking_slots, double V, double pi_max, double X, double alpha) {
    if (!(alpha > 0.0)) throw InputError("delay bound needs alpha > 0");
    const double r = static_cast<double>(parking_slots);
    return w * r * (2.0 * V * pi_max + 2.0 * w * X + 2.0 * alpha / r) / alpha;
}

double gap_bound(double B, int w, double V) {
    if (!(V > 0.0)) throw InputError("gap bound needs V > 0");
    if (w < 1) throw InputError("lookahead w must be >= 1");
    return B / (w * V);
}

double gap_bound(double B, int w, std::span<const double> V) {
    if (V.empty()) throw InputError("gap bound needs at least one V");
    return gap_bound(B, w, *std::min_element(V.begin(), V.end()));
}

double per_slot_cost(double total_cost, const Scenario& s) { return total_cost / (s.slot_hours() * s.num_slots()); }

namespace {

void credit(const Scenario& s, std::size_t m, double power, int t, ServiceLedger& ledger) {
    const Ev& ev = s.fleet[m];
    ledger.served_kwh[m] += power * s.eta * s.slot_hours();
    if (ledger.completion_slot[m] < 0 && ledger.served_kwh[m] >= ev.e_req * (1.0 - 1e-9)) ledger.completion_slot[m] = t;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

void audit_queues(const Scenario& s, const RunReport& r, const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& x, bool prop4, std::vector<std::string>& out) {
    const int w = r.queues.w;
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const auto& q = r.queues.q[g];
        const auto& z = r.queues.z[g];
        const std::string& id = s.groups[g].id;
        for (std::size_t t = 0; t < q.size(); ++t) {
            if (q[t] < 0.0 || z[t] < 0.0) out.push_back("group " + id + ": negative queue at slot " + std::to_string(t));
            if (static_cast<int>(t) < w && (q[t] != 0.0 || z[t] != 0.0))
                out.push_back("group " + id + ": nonzero queue before slot w at " + std::to_string(t));
            if (prop4 && q[t] > r.groups[g].Q + 1e-6)
                out.push_back("group " + id + ": q(" + std::to_string(t) + ")=" + fmt(q[t]) + " exceeds Q_g=" +
                              fmt(r.groups[g].Q));
            if (prop4 && z[t] > r.groups[g].Z + 1e-6)
                out.push_back("group " + id + ": z(" + std::to_string(t) + ")=" + fmt(z[t]) + " exceeds Z_g=" +
                              fmt(r.groups[g].Z));
        }
        double X = 0.0;
        for (double v : a[g]) X = std::max(X, v);
        for (double v : x[g]) X = std::max(X, v);
        for (const auto& v : increment_audit(q, w, X))
            out.push_back("group " + id + ": " + v.family + " bound violated at slot " + std::to_string(v.t));
        for (const auto& v : lookback_audit(q, w, X))
            out.push_back("group " + id + ": " + v.family + " bound violated at slot " + std::to_string(v.t));
    }
}

} // namespace

RunReport simulate(const Scenario& s, const SimParams& params) {
    if (const auto problems = validate_scenario(s); !problems.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw InputError(msg);
    }
    const int T = s.num_slots();
    const std::size_t G = s.groups.size();
    const int w = params.w;
    if (w < 1 || w > T) throw InputError("lookahead w=" + std::to_string(w) + " outside [1, " + std::to_string(T) + "]");
    const bool dpp = params.policy == PolicyKind::dpp || params.policy == PolicyKind::dpp_hetero;
    std::vector<double> V = params.V_per_group;
    if (params.policy == PolicyKind::dpp_hetero) {
        if (V.size() != G)
            throw InputError("dpp_hetero needs one V per group (got " + std::to_string(V.size()) + " for " +
                             std::to_string(G) + ")");
    } else {
        V.assign(G, params.V);
    }
    const std::vector<double> true_prices(s.prices.values().begin(), s.prices.values().end());
    const std::vector<double>& forecast = params.forecast_prices ? *params.forecast_prices : true_prices;
    if (static_cast<int>(forecast.size()) < T) throw InputError("forecast covers fewer slots than the horizon");

    const DemandProfile demand = build_demand(s);
    const Scenario sb = with_demand_bounds(s, demand);
    const double dt = s.slot_hours();

    std::vector<std::vector<double>> caps(G, std::vector<double>(static_cast<std::size_t>(T)));
    for (std::size_t g = 0; g < G; ++g) {
        for (int t = 0; t < T; ++t) caps[g][t] = group_power_cap(s, g, t);
    }

    std::vector<std::string> ids;
    std::vector<double> alpha_over_r;
    for (const Group& grp : s.groups) {
        ids.push_back(grp.id);
        alpha_over_r.push_back(grp.alpha / grp.parking_slots);
    }
    QueueState queues(ids, w, alpha_over_r);
    PlanBuffer buffer(w);
    ServiceLedger ledger = make_ledger(s);
    MpcState mpc = make_mpc_state(s);

    RunReport r;
    r.policy = std::string(policy_name(params.policy));
    r.w = w;
    r.V = params.policy == PolicyKind::dpp_hetero ? std::numeric_limits<double>::quiet_NaN() : params.V;
    if (params.policy == PolicyKind::dpp_hetero) r.V_per_group = V;
    r.alpha = G ? s.groups[0].alpha : 0.0;
    r.x.assign(G, std::vector<double>(static_cast<std::size_t>(T), 0.0));
    std::vector<std::vector<double>> delivered(G, std::vector<double>(static_cast<std::size_t>(T), 0.0));

    std::optional<OfflineSchedule> offline;
    if (params.policy == PolicyKind::offline) offline = offline_p2(s);

    std::vector<double> q(G), z(G), a_t(G), x_t(G);
    for (int t = 0; t < T; ++t) {
        const int h = std::min(w, T - t);
        if (h < w && (dpp || params.policy == PolicyKind::mpc)) ++r.truncated_window_slots;
        for (std::size_t g = 0; g < G; ++g) {
            q[g] = queues.q(g);
            z[g] = queues.z(g);
            a_t[g] = demand.per_group[g][t];
        }

        std::vector<double> planned(G, 0.0);
        switch (params.policy) {
        case PolicyKind::dpp:
        case PolicyKind::dpp_hetero: {
            std::vector<std::vector<double>> window(G);
            for (std::size_t g = 0; g < G; ++g) window[g].assign(caps[g].begin() + t, caps[g].begin() + t + h);
            const std::span<const double> prices(forecast.data() + t, static_cast<std::size_t>(h));
            buffer.push(plan_dpp_hetero(q, z, prices, window, V, t));
            planned = buffer.buffered_average(t);
            break;
        }
        case PolicyKind::greedy: planned = plan_greedy(s, ledger, t); break;
        case PolicyKind::offline:
            for (std::size_t g = 0; g < G; ++g) planned[g] = offline->x[g][t];
            break;
        case PolicyKind::mpc: {
            const MpcPlan plan = plan_mpc(s, mpc, t, w, forecast);
            for (std::size_t m : plan.newly_missed) {
                mpc.missed[m] = true;
                const double shortfall = s.fleet[m].e_req - ledger.served_kwh[m];
                r.missed.push_back({s.fleet[m].id, t, shortfall});
            }
            for (std::size_t g = 0; g < G; ++g) {
                for (std::size_t m : s.groups[g].members) {
                    if (plan.per_ev[m].empty()) continue;
                    const double p = plan.per_ev[m][0];
                    if (p <= 0.0) continue;
                    credit(s, m, p, t, ledger);
                    mpc.energy_kwh[m] += p * s.eta * dt;
                    planned[g] += p;
                }
                delivered[g][t] = planned[g];
            }
            break;
        }
        }

        for (std::size_t g = 0; g < G; ++g) {
            r.x[g][t] = planned[g];
            if (params.policy != PolicyKind::mpc) {
                const FifoAllocation alloc = fifo_disaggregate(s, g, planned[g], t, ledger);
                delivered[g][t] = alloc.delivered;
                r.unallocated_kwh += alloc.unallocated * dt;
                if (params.policy != PolicyKind::offline) r.x[g][t] = alloc.delivered;
            }
            x_t[g] = delivered[g][t];
        }
        queues.advance(a_t, x_t);
    }

    for (std::size_t g = 0; g < G; ++g) {
        for (int t = 0; t < T; ++t) {
            r.total_cost += true_prices[t] * r.x[g][t] * dt;
            r.energy_kwh += r.x[g][t] * dt;
        }
    }
    r.unit_cost = r.energy_kwh > 0.0 ? r.total_cost / r.energy_kwh : 0.0;
    r.queues = queues.trace();

    const BoundConstants bc = bound_constants(sb, V, w);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.gap_bound = nan;
    r.delay_bound_h = nan;
    if (dpp) {
        const bool positive = std::all_of(V.begin(), V.end(), [](double v) { return v > 0.0; });
        r.gap_bound = positive ? gap_bound(bc.B, w, V) : std::numeric_limits<double>::infinity();
    }

    double delay_sum = 0.0;
    int completed = 0;
    for (std::size_t m = 0; m < s.fleet.size(); ++m) {
        const Ev& ev = s.fleet[m];
        EvOutcome o{ev.id, ev.group_id, ev.e_req, ledger.served_kwh[m], demand.last_slot[m], ledger.completion_slot[m], 0.0};
        r.unserved_kwh += std::max(0.0, ev.e_req - ledger.served_kwh[m]);
        if (o.completion_slot >= 0) {
            o.delay_h = std::max(0, o.completion_slot - o.reference_slot) * dt;
            delay_sum += o.delay_h;
            r.max_delay_h = std::max(r.max_delay_h, o.delay_h);
            ++completed;
        }
        r.evs.push_back(std::move(o));
    }
    if (r.unserved_kwh < 1e-9) r.unserved_kwh = 0.0;
    r.avg_delay_h = completed ? delay_sum / completed : 0.0;

    for (std::size_t g = 0; g < G; ++g) {
        GroupOutcome go;
        go.id = s.groups[g].id;
        go.Q = bc.groups[g].Q;
        go.Z = bc.groups[g].Z;
        go.delay_bound_h = delay_bound_slots(w, s.groups[g].parking_slots, go.Q, go.Z, s.groups[g].alpha) * dt;
        go.max_q = *std::max_element(r.queues.q[g].begin(), r.queues.q[g].end());
        go.max_z = *std::max_element(r.queues.z[g].begin(), r.queues.z[g].end());
        double sum = 0.0;
        int n = 0;
        for (std::size_t m : s.groups[g].members) {
            if (r.evs[m].completion_slot < 0) continue;
            go.max_delay_h = std::max(go.max_delay_h, r.evs[m].delay_h);
            sum += r.evs[m].delay_h;
            ++n;
        }
        go.avg_delay_h = n ? sum / n : 0.0;
        if (dpp) r.delay_bound_h = std::isnan(r.delay_bound_h) ? go.delay_bound_h : std::max(r.delay_bound_h, go.delay_bound_h);
        r.groups.push_back(std::move(go));
    }

    if (params.audit) {
        auto& out = r.audit_violations;
        std::vector<std::vector<double>> a(G);
        for (std::size_t g = 0; g < G; ++g) a[g] = demand.per_group[g];
        audit_queues(s, r, a, delivered, dpp, out);
        for (std::size_t m = 0; m < s.fleet.size(); ++m) {
            if (ledger.served_kwh[m] > s.fleet[m].e_max * (1.0 + 1e-9) + 1e-9)
                out.push_back("ev " + s.fleet[m].id + ": charged past E_max");
        }
        if (dpp) {
            for (std::size_t g = 0; g < G; ++g) {
                if (r.groups[g].max_delay_h >= r.groups[g].delay_bound_h)
                    out.push_back("group " + r.groups[g].id + ": max delay " + fmt(r.groups[g].max_delay_h) +
                                  " h is not below the bound " + fmt(r.groups[g].delay_bound_h) + " h");
            }
        }
    }
    return r;
}

} // namespace evsched
