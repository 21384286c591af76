// SPDX-License-Identifier: Apache-2.0
#include "evsched/queues.hpp"

#include "evsched/csv_io.hpp"
#include "evsched/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace evsched {

QueuePair update_queues(QueuePair base, std::span<const double> a_window, std::span<const double> x_window,
                        double alpha_over_r, QueueDiscipline discipline) {
    if (a_window.empty() || a_window.size() != x_window.size())
        throw StateError("queue update needs equal, non-empty arrival and power windows (got " +
                         std::to_string(a_window.size()) + " and " + std::to_string(x_window.size()) + ")");
    const double sum_a = std::accumulate(a_window.begin(), a_window.end(), 0.0);
    const double sum_x = std::accumulate(x_window.begin(), x_window.end(), 0.0);
    QueuePair next;
    if (discipline == QueueDiscipline::net_clamped)
        next.q = std::max(base.q + (sum_a - sum_x), 0.0);
    else
        next.q = std::max(base.q - sum_x, 0.0) + sum_a;
    next.z = std::max(base.z - sum_x + (base.q > kBacklogEpsilon ? alpha_over_r : 0.0), 0.0);
    return next;
}

void write_queue_trace_csv(std::ostream& out, const QueueTrace& trace) {
    out << "t,group_id,q_kw,z,indicator\n";
    const std::size_t slots = trace.q.empty() ? 0 : trace.q[0].size();
    for (std::size_t t = 0; t < slots; ++t) {
        for (std::size_t g = 0; g < trace.q.size(); ++g) {
            out << t << ',' << trace.group_ids[g] << ',' << csv::format_number(trace.q[g][t]) << ','
                << csv::format_number(trace.z[g][t]) << ',' << (trace.q[g][t] > kBacklogEpsilon ? 1 : 0) << '\n';
        }
    }
}

QueueState::QueueState(std::vector<std::string> group_ids, int w, std::vector<double> alpha_over_r,
                       QueueDiscipline discipline)
    : alpha_over_r_(std::move(alpha_over_r)), discipline_(discipline) {
    if (w < 1) throw InputError("lookahead w must be >= 1");
    if (group_ids.size() != alpha_over_r_.size()) throw InputError("one alpha/R value per group is required");
    trace_.w = w;
    trace_.group_ids = std::move(group_ids);
    trace_.q.assign(alpha_over_r_.size(), std::vector<double>{0.0});
    trace_.z.assign(alpha_over_r_.size(), std::vector<double>{0.0});
    a_.assign(alpha_over_r_.size(), {});
    x_.assign(alpha_over_r_.size(), {});
}

void QueueState::advance(std::span<const double> a_t, std::span<const double> x_t) {
    if (a_t.size() != num_groups() || x_t.size() != num_groups())
        throw StateError("queue advance needs one arrival and one power value per group");
    const int w = trace_.w;
    for (std::size_t g = 0; g < num_groups(); ++g) {
        a_[g].push_back(a_t[g]);
        x_[g].push_back(x_t[g]);
        const int next = static_cast<int>(a_[g].size());
        if (next < w) {
            trace_.q[g].push_back(0.0);
            trace_.z[g].push_back(0.0);
            continue;
        }
        const int base = next - w;
        const QueuePair v = update_queues({trace_.q[g][base], trace_.z[g][base]},
                                          std::span<const double>(a_[g]).subspan(base, w),
                                          std::span<const double>(x_[g]).subspan(base, w), alpha_over_r_[g],
                                          discipline_);
        trace_.q[g].push_back(v.q);
        trace_.z[g].push_back(v.z);
    }
}

std::vector<double> backlog_recursion(std::span<const double> a, std::span<const double> x, int w,
                                      QueueDiscipline discipline, std::span<const double> initial) {
    if (w < 1) throw InputError("lookahead w must be >= 1");
    if (a.size() != x.size()) throw InputError("arrival and power series differ in length");
    if (!initial.empty() && static_cast<int>(initial.size()) != w)
        throw InputError("initial backlog needs exactly w values");
    const std::size_t T = a.size();
    std::vector<double> q(T + 1, 0.0);
    for (std::size_t t = 0; t <= T; ++t) {
        if (static_cast<int>(t) < w) {
            q[t] = initial.empty() ? 0.0 : initial[t];
            continue;
        }
        const std::size_t base = t - w;
        q[t] = update_queues({q[base], 0.0}, a.subspan(base, w), x.subspan(base, w), 0.0, discipline).q;
    }
    return q;
}

double closed_form_backlog(std::span<const double> a, std::span<const double> x, int w, int t, int n,
                           QueueDiscipline discipline, double q_t) {
    if (w < 1 || t < 0 || t >= w || n < 1)
        throw InputError("closed form needs w >= 1, 0 <= t < w and n >= 1");
    const std::size_t end = static_cast<std::size_t>(t) + static_cast<std::size_t>(n) * w;
    if (end > a.size() || end > x.size())
        throw InputError("closed form reads slot " + std::to_string(end - 1) + " past the series end");

    // Walk the blocks backwards, keeping suffix sums from block k to the end.
    const bool net = discipline == QueueDiscipline::net_clamped;
    double suffix_a = 0.0;
    double suffix_x = 0.0;
    double best = net ? 0.0 : -HUGE_VAL; // net_clamped includes the empty (k = n) sum
    for (int k = n - 1; k >= 0; --k) {
        const double x_after = suffix_x; // sum of x from block k+1 on
        for (int i = w - 1; i >= 0; --i) {
            const std::size_t idx = static_cast<std::size_t>(t) + static_cast<std::size_t>(k) * w + i;
            suffix_a += a[idx];
            suffix_x += x[idx];
        }
        if (net) {
            best = std::max(best, (k == 0 ? q_t : 0.0) + suffix_a - suffix_x);
        } else {
            best = std::max(best, suffix_a - x_after);
            if (k == 0) best = std::max(best, q_t + suffix_a - suffix_x);
        }
    }
    return best;
}

namespace {

bool outside(double v, double lo, double hi, double tol) {
    return v < lo - tol * std::max(1.0, std::abs(lo)) || v > hi + tol * std::max(1.0, std::abs(hi));
}

} // namespace

std::vector<BoundViolation> increment_audit(std::span<const double> q, int w, double X, double tol) {
    if (w < 1) throw InputError("lookahead w must be >= 1");
    std::vector<BoundViolation> out;
    const int len = static_cast<int>(q.size());
    auto check = [&](const char* family, int ref, int c, double v, double lo, double hi) {
        if (outside(v, lo, hi, tol)) out.push_back({family, ref, c, v, lo, hi});
    };
    for (int base = 0; base < len; base += w) {
        for (int t = 0; t + 1 <= w - 1 && base + t + 1 < len; ++t)
            check("step", base + t, 1, q[base + t + 1] - q[base + t], -2 * X, 2 * X);
        for (int t = 0; t < w; ++t) {
            for (int c = 1; t + c <= w - 1 && base + t + c < len; ++c)
                check("multi_step", base + t, c, q[base + t + c] - q[base + t], -2.0 * c * X, 2.0 * c * X);
        }
        if (base >= w) {
            check("block_edge", base, 1, q[base] - q[base - 1], -2 * X, (w + 2) * X);
            for (int c = 1; c <= w; ++c)
                check("block_back", base, c, q[base] - q[base - c], -2.0 * c * X, (w + 2.0 * c) * X);
        }
    }
    return out;
}

LookbackBounds lookback_lower_bound(double M, int w, double X) {
    if (w < 1) throw InputError("lookahead w must be >= 1");
    const double extended = w % 2 == 0 ? M - 2.0 * w * X : M - (2.0 * w - 1.0) * X;
    return {extended, M - w * X};
}

std::vector<BoundViolation> lookback_audit(std::span<const double> q, int w, double X, double tol) {
    if (w < 1) throw InputError("lookahead w must be >= 1");
    std::vector<BoundViolation> out;
    const int len = static_cast<int>(q.size());
    const double inf = HUGE_VAL;
    for (int end = w; end < len; end += w) {
        const double floor = lookback_lower_bound(q[end], w, X).extended;
        for (int tau = 0; tau < w; ++tau) {
            const double v = q[end - w + tau];
            if (outside(v, floor, inf, tol)) out.push_back({"lookback_block", end - w + tau, w - tau, v, floor, inf});
        }
    }
    for (int t = 0; t < len; ++t) {
        const double floor = lookback_lower_bound(q[t], w, X).appendix_d;
        for (int tau = 0; tau < w && tau <= t; ++tau) {
            const double v = q[t - tau];
            if (outside(v, floor, inf, tol)) out.push_back({"lookback_window", t - tau, tau, v, floor, inf});
        }
    }
    return out;
}

BoundConstants bound_constants(const Scenario& s, std::span<const double> V_per_group, int w) {
    if (V_per_group.size() != s.groups.size())
        throw InputError("bound_constants needs one V per group (got " + std::to_string(V_per_group.size()) + " for " +
                         std::to_string(s.groups.size()) + " groups)");
    if (w < 1) throw InputError("lookahead w must be >= 1");
    BoundConstants b;
    b.w = w;
    b.pi_max = s.prices.max();
    for (std::size_t g = 0; g < s.groups.size(); ++g) {
        const Group& grp = s.groups[g];
        GroupBoundConstants c;
        c.V = V_per_group[g];
        c.X = grp.x_cap_total;
        c.A = grp.a_bound;
        c.alpha_over_r = grp.alpha / grp.parking_slots;
        c.Q = c.V * b.pi_max + 2.0 * w * c.X;
        c.Z = c.V * b.pi_max + 2.0 * c.alpha_over_r;
        const double window = w * std::max(c.X, c.A);
        c.B1 = window * window;
        c.B2 = c.alpha_over_r * c.alpha_over_r + (w * c.X) * (w * c.X) + 2.0 * c.Z * c.alpha_over_r;
        b.B += 0.5 * (c.B1 + 2.0 * w * c.Q * c.A + c.B2);
        b.groups.push_back(c);
    }
    return b;
}

BoundConstants bound_constants(const Scenario& s, double V, int w) {
    const std::vector<double> v(s.groups.size(), V);
    return bound_constants(s, v, w);
}

} // namespace evsched
