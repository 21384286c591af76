// SPDX-License-Identifier: Apache-2.0
#include "evsched/aggregation.hpp"
#include "evsched/demand.hpp"
#include "evsched/disaggregation.hpp"
#include "evsched/error.hpp"
#include "evsched/harness.hpp"
#include "evsched/policies.hpp"
#include "evsched/queues.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace evsched;

namespace {

std::vector<int> window_of(const py::iterable& slots) {
    std::vector<int> out;
    for (auto s : slots) out.push_back(s.cast<int>());
    return out;
}

py::dict p3_verdict(const P3Verdict& v) {
    py::dict d;
    d["feasible"] = v.feasible;
    d["windows_checked"] = v.windows_checked;
    if (v.witness) {
        d["window"] = v.witness->window;
        d["side"] = v.witness->side == BoundSide::upper ? "upper" : "lower";
        d["window_sum"] = v.witness->window_sum;
        d["lower"] = v.witness->lower;
        d["upper"] = v.witness->upper;
    }
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "EV fleet charging scheduler (drift-plus-penalty with buffered averaging, baselines, audits)";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<StateError>(m, "StateError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init([](int n, double h) { return TimeGrid{n, h}; }), py::arg("num_slots"), py::arg("slot_hours"))
        .def_readwrite("num_slots", &TimeGrid::num_slots)
        .def_readwrite("slot_hours", &TimeGrid::slot_hours);

    py::class_<Ev>(m, "Ev")
        .def(py::init([](std::string id, std::string group, double p, double e_req, double e_max, double e_cap,
                         int arrival, int departure) {
                 return Ev{std::move(id), std::move(group), p, e_req, e_max, e_cap, arrival, departure};
             }),
             py::arg("id"), py::arg("group_id"), py::arg("p_max"), py::arg("e_req"), py::arg("e_max"),
             py::arg("e_cap"), py::arg("arrival_slot"), py::arg("departure_slot"))
        .def_readwrite("id", &Ev::id)
        .def_readwrite("group_id", &Ev::group_id)
        .def_readwrite("p_max", &Ev::p_max)
        .def_readwrite("e_req", &Ev::e_req)
        .def_readwrite("e_max", &Ev::e_max)
        .def_readwrite("e_cap", &Ev::e_cap)
        .def_readwrite("arrival_slot", &Ev::arrival_slot)
        .def_readwrite("departure_slot", &Ev::departure_slot)
        .def("__repr__", [](const Ev& e) { return "<Ev " + e.id + " group=" + e.group_id + ">"; });

    py::class_<Group>(m, "Group")
        .def_readonly("id", &Group::id)
        .def_readonly("parking_slots", &Group::parking_slots)
        .def_readonly("members", &Group::members)
        .def_readonly("alpha", &Group::alpha)
        .def_readonly("x_cap_total", &Group::x_cap_total)
        .def_readonly("a_bound", &Group::a_bound);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("grid", &Scenario::grid)
        .def_readonly("fleet", &Scenario::fleet)
        .def_readonly("groups", &Scenario::groups)
        .def_readonly("eta", &Scenario::eta)
        .def_readonly("lookahead", &Scenario::lookahead)
        .def_property_readonly("prices", [](const Scenario& s) {
            return std::vector<double>(s.prices.values().begin(), s.prices.values().end());
        })
        .def_property_readonly("pi_max", [](const Scenario& s) { return s.prices.max(); })
        .def("group_index", &Scenario::group_index);

    m.def("make_scenario", &make_scenario, py::arg("grid"), py::arg("fleet"), py::arg("prices"), py::arg("eta"),
          py::arg("lookahead") = 1, py::arg("alpha") = 1.0);
    m.def("validate_scenario", &validate_scenario);
    m.def("group_power_cap", py::overload_cast<const Scenario&, std::string_view, int>(&group_power_cap),
          py::arg("scenario"), py::arg("group_id"), py::arg("t"));

    m.def("demand_profile", &demand_profile, py::arg("ev"), py::arg("eta"), py::arg("slot_hours"),
          py::arg("num_slots"));
    m.def("group_demand", [](const Scenario& s, std::string_view g) {
        return group_demand(s, build_demand(s), s.group_index(g));
    });

    m.def("window_bounds", [](const Scenario& s, std::string_view g, const py::iterable& slots) {
        const auto wb = window_bounds(s, s.group_index(g), window_of(slots));
        return py::make_tuple(wb.lower, wb.upper);
    });
    m.def(
        "check_p3_feasible",
        [](const Scenario& s, std::string_view g, std::vector<double> x, bool exhaustive, int random_subsets,
           std::uint64_t seed) {
            P3Options o;
            o.mode = exhaustive ? P3Mode::exhaustive : P3Mode::sampled;
            o.random_subsets = random_subsets;
            o.seed = seed;
            return p3_verdict(check_p3_feasible(s, s.group_index(g), x, o));
        },
        py::arg("scenario"), py::arg("group_id"), py::arg("x"), py::arg("exhaustive") = false,
        py::arg("random_subsets") = 256, py::arg("seed") = 0);
    m.def("relaxation_gap_bound", &relaxation_gap_bound);

    m.def("circulation_disaggregate", [](const Scenario& s, std::string_view g, std::vector<double> x) {
        const std::size_t gi = s.group_index(g);
        const auto net = build_circulation_network(s, gi, x);
        const auto r = circulation_disaggregate(net);
        py::dict d;
        d["feasible"] = r.feasible;
        py::dict per_ev;
        for (std::size_t i = 0; i < r.per_ev.size(); ++i) per_ev[py::str(s.fleet[net.members[i]].id)] = r.per_ev[i];
        d["per_ev"] = per_ev;
        std::vector<std::string> cert;
        for (int node : r.certificate) cert.push_back(net.labels[node]);
        d["certificate"] = cert;
        return d;
    });
    m.def("hoffman_verify", [](const Scenario& s, std::string_view g, std::vector<double> x) {
        const auto net = build_circulation_network(s, s.group_index(g), x);
        const auto h = hoffman_verify(net);
        py::dict d;
        d["satisfied"] = h.satisfied;
        d["subsets_checked"] = h.subsets_checked;
        if (h.failing_set) {
            std::vector<std::string> labels;
            for (int node : *h.failing_set) labels.push_back(net.labels[node]);
            d["failing_set"] = labels;
        }
        return d;
    });

    py::enum_<QueueDiscipline>(m, "QueueDiscipline")
        .value("net_clamped", QueueDiscipline::net_clamped)
        .value("serve_then_arrive", QueueDiscipline::serve_then_arrive);
    m.def(
        "update_queues",
        [](double q, double z, std::vector<double> a, std::vector<double> x, double alpha_over_r, QueueDiscipline d) {
            const auto r = update_queues({q, z}, a, x, alpha_over_r, d);
            return py::make_tuple(r.q, r.z);
        },
        py::arg("q"), py::arg("z"), py::arg("a_window"), py::arg("x_window"), py::arg("alpha_over_r"),
        py::arg("discipline") = QueueDiscipline::net_clamped);
    m.def(
        "backlog_recursion",
        [](std::vector<double> a, std::vector<double> x, int w, QueueDiscipline d, std::vector<double> init) {
            return backlog_recursion(a, x, w, d, init);
        },
        py::arg("a"), py::arg("x"), py::arg("w"), py::arg("discipline") = QueueDiscipline::net_clamped,
        py::arg("initial") = std::vector<double>{});
    m.def(
        "closed_form_backlog",
        [](std::vector<double> a, std::vector<double> x, int w, int t, int n, QueueDiscipline d, double q_t) {
            return closed_form_backlog(a, x, w, t, n, d, q_t);
        },
        py::arg("a"), py::arg("x"), py::arg("w"), py::arg("t"), py::arg("n"),
        py::arg("discipline") = QueueDiscipline::net_clamped, py::arg("q_t") = 0.0);
    m.def(
        "increment_audit",
        [](std::vector<double> q, int w, double X) {
            std::vector<std::string> out;
            for (const auto& v : increment_audit(q, w, X)) out.push_back(v.family + "@" + std::to_string(v.t));
            return out;
        },
        py::arg("q"), py::arg("w"), py::arg("X"));
    m.def("lookback_lower_bound", [](double M, int w, double X) {
        const auto b = lookback_lower_bound(M, w, X);
        return py::make_tuple(b.extended, b.appendix_d);
    });

    m.def(
        "plan_dpp",
        [](std::vector<double> q, std::vector<double> z, std::vector<double> prices,
           std::vector<std::vector<double>> caps, std::vector<double> V) {
            return plan_dpp_hetero(q, z, prices, caps, V, 0).x;
        },
        py::arg("q"), py::arg("z"), py::arg("prices"), py::arg("caps"), py::arg("V"));
    m.def("offline_p2", [](const Scenario& s) {
        const auto o = offline_p2(s);
        return py::make_tuple(o.x, o.cost);
    });
    m.def("delay_bound_slots", &delay_bound_slots);
    m.def("gap_bound", py::overload_cast<double, int, double>(&gap_bound));

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("policy", &RunReport::policy)
        .def_readonly("w", &RunReport::w)
        .def_readonly("V", &RunReport::V)
        .def_readonly("x", &RunReport::x)
        .def_readonly("total_cost", &RunReport::total_cost)
        .def_readonly("unit_cost", &RunReport::unit_cost)
        .def_readonly("avg_delay_h", &RunReport::avg_delay_h)
        .def_readonly("max_delay_h", &RunReport::max_delay_h)
        .def_readonly("unserved_kwh", &RunReport::unserved_kwh)
        .def_readonly("gap_bound", &RunReport::gap_bound)
        .def_readonly("delay_bound_h", &RunReport::delay_bound_h)
        .def_readonly("audit_violations", &RunReport::audit_violations)
        .def_property_readonly("all_served", &RunReport::all_served)
        .def("to_json", [](const RunReport& r) {
            std::ostringstream os;
            write_report_json(os, r);
            return os.str();
        });

    m.def(
        "simulate",
        [](const Scenario& s, std::string_view policy, int w, double V, std::vector<double> V_per_group,
           std::optional<std::vector<double>> forecast, bool audit) {
            SimParams p;
            p.policy = parse_policy(policy);
            p.w = w;
            p.V = V;
            p.V_per_group = std::move(V_per_group);
            p.forecast_prices = std::move(forecast);
            p.audit = audit;
            py::gil_scoped_release release;
            return simulate(s, p);
        },
        py::arg("scenario"), py::arg("policy") = "dpp", py::arg("w") = 1, py::arg("V") = 10.0,
        py::arg("V_per_group") = std::vector<double>{}, py::arg("forecast_prices") = py::none(),
        py::arg("audit") = true);

    py::class_<GeneratorParams>(m, "GeneratorParams")
        .def(py::init<>())
        .def_readwrite("num_evs", &GeneratorParams::num_evs)
        .def_readwrite("num_slots", &GeneratorParams::num_slots)
        .def_readwrite("slot_minutes", &GeneratorParams::slot_minutes)
        .def_readwrite("eta", &GeneratorParams::eta)
        .def_readwrite("arrival_mean_h", &GeneratorParams::arrival_mean_h)
        .def_readwrite("arrival_sd_h", &GeneratorParams::arrival_sd_h)
        .def_readwrite("parking_hours", &GeneratorParams::parking_hours)
        .def_readwrite("parking_weights", &GeneratorParams::parking_weights)
        .def_readwrite("p_min_kw", &GeneratorParams::p_min_kw)
        .def_readwrite("p_max_kw", &GeneratorParams::p_max_kw)
        .def_readwrite("soc_min", &GeneratorParams::soc_min)
        .def_readwrite("soc_max", &GeneratorParams::soc_max)
        .def_readwrite("target_soc", &GeneratorParams::target_soc)
        .def_readwrite("alpha", &GeneratorParams::alpha);
    m.def("generate_scenario", &generate_scenario, py::arg("params") = GeneratorParams{}, py::arg("seed") = 1);
    m.def("duck_curve", &duck_curve, py::arg("num_slots") = 288, py::arg("slot_minutes") = 5.0);
    m.def("apply_price_noise", [](std::vector<double> prices, double sigma, std::uint64_t seed) {
        const auto f = apply_price_noise(prices, sigma, seed);
        return py::make_tuple(f.values, f.mape);
    });
    m.def(
        "find_optimal_V",
        [](const Scenario& s, int w, bool per_group, double resolution) {
            SimParams p;
            p.w = w;
            p.audit = false;
            VSearchOptions o;
            o.per_group = per_group;
            o.resolution = resolution;
            VSearchResult r;
            {
                py::gil_scoped_release release;
                r = find_optimal_V(s, p, o);
            }
            return per_group ? py::cast(r.V_per_group) : py::cast(r.V);
        },
        py::arg("scenario"), py::arg("w"), py::arg("per_group") = false, py::arg("resolution") = 0.1);
}
