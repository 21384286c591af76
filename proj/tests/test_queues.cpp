// SPDX-License-Identifier: Apache-2.0
#include "evsched/error.hpp"
#include "evsched/queues.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace evsched;

TEST_CASE("update_queues examples") {
    const std::vector<double> a{3, 3, 0, 0}, x{1, 1, 1, 1};
    const auto q = backlog_recursion(a, x, 2, QueueDiscipline::net_clamped);
    CHECK(q[2] == 4.0);
    CHECK(q[3] == 1.0);

    const std::vector<double> same{2, 2, 2, 2, 2, 2};
    for (double v : backlog_recursion(same, same, 3, QueueDiscipline::net_clamped)) CHECK(v == 0.0);

    const std::vector<double> wa{1, 1}, wx{8, 9};
    const QueuePair clamp = update_queues({5.0, 0.0}, wa, wx, 1.0);
    CHECK(clamp.q == 0.0);

    CHECK_THROWS_AS(update_queues({}, std::vector<double>{}, std::vector<double>{}, 1.0), StateError);
    CHECK_THROWS_AS(update_queues({}, std::vector<double>{1}, std::vector<double>{1, 2}, 1.0), StateError);
}

TEST_CASE("delay queue grows only while backlog is present") {
    const std::vector<double> a{1}, x{0.5};
    CHECK(update_queues({0.0, 2.0}, a, x, 3.0).z == 1.5);
    CHECK(update_queues({1.0, 2.0}, a, x, 3.0).z == 4.5);
    CHECK(update_queues({1e-12, 2.0}, a, x, 3.0).z == 1.5); // round-off is not backlog
    CHECK(update_queues({1.0, 0.0}, std::vector<double>{0}, std::vector<double>{9}, 3.0).z == 0.0);
}

TEST_CASE("QueueState zero start, nonnegative, matches the longhand recursion") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int w : {1, 2, 3, 5}) {
        QueueState qs({"A", "B"}, w, {0.5, 2.0});
        std::vector<double> a0, x0;
        for (int t = 0; t < 60; ++t) {
            const std::vector<double> at{u(rng), u(rng)}, xt{u(rng), u(rng)};
            a0.push_back(at[0]);
            x0.push_back(xt[0]);
            qs.advance(at, xt);
        }
        const auto ref = oracle::backlog(a0, x0, w, true);
        const auto& tr = qs.trace();
        for (int t = 0; t <= 60; ++t) {
            CHECK(tr.q[0][t] == doctest::Approx(ref[t]).epsilon(1e-12));
            CHECK(tr.q[1][t] >= 0.0);
            CHECK(tr.z[1][t] >= 0.0);
            if (t < w) CHECK((tr.q[0][t] == 0.0 && tr.z[0][t] == 0.0));
        }
        CHECK_THROWS_AS(qs.advance(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), StateError);
    }
}

TEST_CASE("closed form") {
    SUBCASE("q(w) is the first window's arrivals") {
        const std::vector<double> a{1, 2, 3, 4, 5, 6}, x{6, 5, 4, 3, 2, 1};
        CHECK(closed_form_backlog(a, x, 3, 0, 1, QueueDiscipline::serve_then_arrive) == 6.0);
        CHECK(backlog_recursion(a, x, 3, QueueDiscipline::serve_then_arrive)[3] == 6.0);
    }
    SUBCASE("n = 1 is one update step, with a nonzero start") {
        const std::vector<double> a{4, 1, 0, 2}, x{1, 3, 2, 2};
        for (auto d : {QueueDiscipline::net_clamped, QueueDiscipline::serve_then_arrive}) {
            const QueuePair one = update_queues({2.5, 0}, std::span(a).first(2), std::span(x).first(2), 0, d);
            CHECK(closed_form_backlog(a, x, 2, 0, 1, d, 2.5) == doctest::Approx(one.q));
        }
    }
    SUBCASE("random series, every checkpoint, both disciplines") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        for (int seed = 0; seed < 200; ++seed) {
            const int w = 3, T = 60;
            std::vector<double> a(T), x(T), init(w);
            for (auto* v : {&a, &x})
                for (double& e : *v) e = u(rng);
            for (double& e : init) e = seed % 2 ? u(rng) : 0.0;
            for (bool net : {true, false}) {
                const auto ref = oracle::backlog(a, x, w, net, init);
                const auto d = net ? QueueDiscipline::net_clamped : QueueDiscipline::serve_then_arrive;
                for (int t = 0; t < w; ++t)
                    for (int n = 1; t + n * w <= T; ++n)
                        CHECK(std::abs(closed_form_backlog(a, x, w, t, n, d, init[t]) - ref[t + n * w]) <= 1e-9);
            }
        }
    }
    SUBCASE("out of range") {
        const std::vector<double> a(5, 1.0);
        CHECK_THROWS_AS(closed_form_backlog(a, a, 2, 0, 3, QueueDiscipline::net_clamped), InputError);
        CHECK_THROWS_AS(closed_form_backlog(a, a, 2, 2, 1, QueueDiscipline::net_clamped), InputError);
    }
}

TEST_CASE("max plus min") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int rep = 0; rep < 2000; ++rep) {
        const int n = 1 + rep % 8;
        std::vector<double> al(n), be(n), sum(n);
        for (int i = 0; i < n; ++i) {
            al[i] = u(rng);
            be[i] = u(rng);
            sum[i] = al[i] + be[i];
        }
        const double mid = *std::max_element(al.begin(), al.end()) + *std::min_element(be.begin(), be.end());
        CHECK(*std::min_element(sum.begin(), sum.end()) <= mid);
        CHECK(mid <= *std::max_element(sum.begin(), sum.end()));
    }
}

TEST_CASE("increment and lookback audits") {
    SUBCASE("block edge with full arrivals and no service") {
        const int w = 4;
        const double X = 10;
        const std::vector<double> a(12, X), x(12, 0.0);
        const auto q = backlog_recursion(a, x, w, QueueDiscipline::net_clamped);
        CHECK(q[w] - q[w - 1] == w * X);
        CHECK(increment_audit(q, w, X).empty());
    }
    SUBCASE("balanced flow") {
        const std::vector<double> a(20, 3.0);
        const auto q = backlog_recursion(a, a, 3, QueueDiscipline::net_clamped);
        CHECK(increment_audit(q, 3, 3.0).empty());
        CHECK(lookback_audit(q, 3, 3.0).empty());
    }
    SUBCASE("a hand-made jump is caught") {
        const std::vector<double> q{0, 0, 50, 0};
        const auto v = increment_audit(q, 4, 1.0);
        REQUIRE_FALSE(v.empty());
        CHECK(v[0].family == "step");
    }
    SUBCASE("lookback floors") {
        CHECK(lookback_lower_bound(100, 4, 10).extended == 20.0);
        CHECK(lookback_lower_bound(100, 3, 10).extended == 50.0);
        CHECK(lookback_lower_bound(100, 3, 10).appendix_d == 70.0);
    }
    SUBCASE("random traces satisfy every family") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        for (int seed = 0; seed < 100; ++seed) {
            const int w = 1 + seed % 8;
            std::vector<double> a(120), x(120);
            for (auto* v : {&a, &x})
                for (double& e : *v) e = u(rng);
            const auto q = backlog_recursion(a, x, w, QueueDiscipline::net_clamped);
            CHECK(increment_audit(q, w, 10.0).empty());
            CHECK(lookback_audit(q, w, 10.0).empty());
        }
    }
}

TEST_CASE("bound constants") {
    std::vector<Ev> fleet{fixtures::make_ev("a", "R", 2, 1, 1, 0, 4), fixtures::make_ev("b", "R", 3, 1, 1, 0, 4)};
    Scenario s = make_scenario({4, 1.0}, fleet, {0.2, 1.0, 0.5, 0.1}, 1.0, 1, 4.0);
    s.groups[0].a_bound = 2.0;
    const auto b = bound_constants(s, 10.0, 2);
    REQUIRE(b.groups.size() == 1);
    CHECK(b.pi_max == 1.0);
    CHECK(b.groups[0].X == 5.0);
    CHECK(b.groups[0].Q == 30.0);
    CHECK(b.groups[0].Z == 10.0 + 2.0 * 1.0);
    CHECK(b.groups[0].B1 == 100.0);

    // alpha/R = 1, w = 1, X = 1, Z = 11
    std::vector<Ev> one{fixtures::make_ev("a", "R", 1, 1, 1, 0, 1)};
    Scenario s1 = make_scenario({1, 1.0}, one, {1.0}, 1.0, 1, 1.0);
    const auto b1 = bound_constants(s1, 9.0, 1);
    CHECK(b1.groups[0].Z == 11.0);
    CHECK(b1.groups[0].B2 == 24.0);
    CHECK_THROWS_AS(bound_constants(s1, std::vector<double>{1.0, 2.0}, 1), InputError);
}

TEST_CASE("queue trace csv") {
    QueueState qs({"A"}, 1, {1.0});
    qs.advance(std::vector<double>{2.0}, std::vector<double>{0.5});
    std::ostringstream os;
    write_queue_trace_csv(os, qs.trace());
    CHECK(os.str() == "t,group_id,q_kw,z,indicator\n0,A,0,0,0\n1,A,1.5,0,1\n");
}
