// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace evsched {

/// net_clamped:        q(t+w) = max{q(t) + sum(a - x), 0}       (used by the scheduler)
/// serve_then_arrive:  q(t+w) = max{q(t) - sum x, 0} + sum a
enum class QueueDiscipline { net_clamped, serve_then_arrive };

/// Backlog at or below this (kW) counts as empty for the delay indicator, so
/// round-off left after exact service does not keep charging z.
inline constexpr double kBacklogEpsilon = 1e-9;

struct QueuePair {
    double q = 0.0;
    double z = 0.0;
};

/// One w-step update from the base-time values. The indicator is taken at the
/// base time (q > kBacklogEpsilon). Throws StateError when the windows are empty or differ in length.
QueuePair update_queues(QueuePair base, std::span<const double> a_window, std::span<const double> x_window,
                        double alpha_over_r, QueueDiscipline discipline = QueueDiscipline::net_clamped);

struct QueueTrace {
    int w = 1;
    std::vector<std::string> group_ids;
    std::vector<std::vector<double>> q; // [group][slot]
    std::vector<std::vector<double>> z;
};

/// Columns: t,group_id,q_kw,z,indicator
void write_queue_trace_csv(std::ostream& out, const QueueTrace& trace);

/// Per-group queues advanced one slot at a time from realized arrivals and
/// implemented powers. Values for slots < w are zero.
class QueueState {
public:
    QueueState(std::vector<std::string> group_ids, int w, std::vector<double> alpha_over_r,
               QueueDiscipline discipline = QueueDiscipline::net_clamped);

    int w() const noexcept { return trace_.w; }
    std::size_t num_groups() const noexcept { return alpha_over_r_.size(); }
    /// Slot whose q and z are current.
    int slot() const noexcept { return static_cast<int>(a_.empty() ? 0 : a_[0].size()); }
    double q(std::size_t g) const { return trace_.q[g].back(); }
    double z(std::size_t g) const { return trace_.z[g].back(); }

    /// Record a_g(slot) and x_g(slot) for every group and compute the next slot's values.
    void advance(std::span<const double> a_t, std::span<const double> x_t);

    const QueueTrace& trace() const noexcept { return trace_; }

private:
    QueueTrace trace_;
    std::vector<double> alpha_over_r_;
    QueueDiscipline discipline_;
    std::vector<std::vector<double>> a_;
    std::vector<std::vector<double>> x_;
};

/// q(0..T) for series of length T. `initial` gives q(0..w-1) (zeros when empty).
std::vector<double> backlog_recursion(std::span<const double> a, std::span<const double> x, int w,
                                      QueueDiscipline discipline, std::span<const double> initial = {});

/// q(t + n*w) evaluated directly from q(t) and the series, for t in [0, w-1], n >= 1.
/// Throws InputError when an index falls outside the series.
double closed_form_backlog(std::span<const double> a, std::span<const double> x, int w, int t, int n,
                           QueueDiscipline discipline, double q_t = 0.0);

struct BoundViolation {
    std::string family;
    int t = 0; // reference slot
    int c = 0; // offset (1 for single steps)
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Families: "step" |q(t+1+nw) - q(t+nw)| <= 2X for t in [0, w-2];
/// "multi_step" |q(t+c+nw) - q(t+nw)| <= 2cX inside one block;
/// "block_edge" -2X <= q(nw) - q(nw-1) <= (w+2)X;
/// "block_back" -2cX <= q(nw) - q(nw-c) <= (w+2c)X for c in [1, w].
std::vector<BoundViolation> increment_audit(std::span<const double> q, int w, double X, double tol = 1e-9);

struct LookbackBounds {
    double extended = 0.0;   // floor on q(nw+tau) given q((n+1)w) >= M
    double appendix_d = 0.0; // floor on q(t-tau) given q(t) >= M
};

LookbackBounds lookback_lower_bound(double M, int w, double X);

/// Families: "lookback_block" (extended floor with M = q((n+1)w)) and
/// "lookback_window" (q(t-tau) >= q(t) - wX for tau in [0, w-1]).
std::vector<BoundViolation> lookback_audit(std::span<const double> q, int w, double X, double tol = 1e-9);

struct GroupBoundConstants {
    double V = 0.0;
    double X = 0.0; // sum of member P_v
    double A = 0.0; // max_t a_g(t)
    double alpha_over_r = 0.0;
    double Q = 0.0;
    double Z = 0.0;
    double B1 = 0.0;
    double B2 = 0.0;
};

struct BoundConstants {
    int w = 1;
    double pi_max = 0.0;
    std::vector<GroupBoundConstants> groups;
    double B = 0.0;
};

/// Uses Group::x_cap_total, Group::a_bound (see with_demand_bounds) and the scenario's price maximum.
BoundConstants bound_constants(const Scenario& s, std::span<const double> V_per_group, int w);
BoundConstants bound_constants(const Scenario& s, double V, int w);

} // namespace evsched
