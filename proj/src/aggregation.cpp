// SPDX-License-Identifier: Apache-2.0
#include "evsched/aggregation.hpp"

#include "evsched/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <tuple>

namespace evsched {

namespace {

struct MemberTerms {
    int first = 0; // first available slot
    int last = 0;  // last available slot (inclusive)
    double power = 0.0;
    double need = 0.0; // E_req/(eta*dt)
    double room = 0.0; // E_max/(eta*dt)
};

std::vector<MemberTerms> member_terms(const Scenario& s, std::size_t g) {
    if (g >= s.groups.size()) throw InputError("group index " + std::to_string(g) + " out of range");
    const double scale = 1.0 / (s.eta * s.slot_hours());
    std::vector<MemberTerms> terms;
    for (std::size_t m : s.groups[g].members) {
        const Ev& ev = s.fleet[m];
        terms.push_back({ev.arrival_slot, ev.departure_slot - 1, ev.p_max, ev.e_req * scale, ev.e_max * scale});
    }
    return terms;
}

/// Bounds for a window given as a prefix count of its indicator (pre[t] = |U ∩ [0,t)|).
std::pair<double, double> bounds_from_prefix(const std::vector<MemberTerms>& terms, const std::vector<int>& pre) {
    double lower = 0.0;
    double upper = 0.0;
    const int T = static_cast<int>(pre.size()) - 1;
    for (const MemberTerms& m : terms) {
        const int lo = std::clamp(m.first, 0, T);
        const int hi = std::clamp(m.last + 1, 0, T);
        const int span = std::max(0, hi - lo);
        const int inside = span > 0 ? pre[hi] - pre[lo] : 0;
        const int outside = span - inside;
        lower += std::max(0.0, m.need - m.power * outside);
        upper += std::min(m.room, m.power * inside);
    }
    return {lower, upper};
}

bool exceeds(double value, double bound, double tol) { return value > bound + tol * std::max(1.0, std::abs(bound)); }

/// Colexicographic order on sorted slot lists (matches numeric bitmask order).
bool colex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
}

struct Candidate {
    std::size_t cardinality;
    int side_rank; // 0 = upper, 1 = lower
    std::vector<int> window;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.cardinality != b.cardinality) return a.cardinality < b.cardinality;
    if (a.side_rank != b.side_rank) return a.side_rank < b.side_rank;
    return colex_less(a.window, b.window);
}

class ViolationTracker {
public:
    ViolationTracker(std::span<const double> x, const std::vector<MemberTerms>& terms, double tol)
        : x_(x), terms_(terms), tol_(tol) {}

    void visit(std::vector<int> window) {
        ++checked_;
        std::vector<int> pre(x_.size() + 1, 0);
        double sum = 0.0;
        for (int t : window) {
            pre[t + 1] = 1;
            sum += x_[t];
        }
        for (std::size_t t = 0; t < x_.size(); ++t) pre[t + 1] += pre[t];
        const auto [lower, upper] = bounds_from_prefix(terms_, pre);
        const bool over = exceeds(sum, upper, tol_);
        const bool under = exceeds(lower, sum, tol_);
        if (!over && !under) return;
        Candidate c{window.size(), over ? 0 : 1, window};
        if (!best_ || candidate_less(c, best_->first)) {
            P3Witness w{std::move(window), over ? BoundSide::upper : BoundSide::lower, sum, lower, upper};
            best_.emplace(std::move(c), std::move(w));
        }
    }

    P3Verdict verdict() const {
        P3Verdict v;
        v.windows_checked = checked_;
        if (best_) {
            v.feasible = false;
            v.witness = best_->second;
        }
        return v;
    }

    bool has_violation() const { return best_.has_value(); }

private:
    std::span<const double> x_;
    const std::vector<MemberTerms>& terms_;
    double tol_;
    std::size_t checked_ = 0;
    std::optional<std::pair<Candidate, P3Witness>> best_;
};

P3Verdict check_exhaustive(std::span<const double> x, const std::vector<MemberTerms>& terms, double tol) {
    const int T = static_cast<int>(x.size());
    std::vector<std::uint32_t> avail;
    for (const MemberTerms& m : terms) {
        std::uint32_t mask = 0;
        for (int t = std::max(0, m.first); t <= std::min(m.last, T - 1); ++t) mask |= 1u << t;
        avail.push_back(mask);
    }
    const std::uint32_t full = T == 32 ? ~0u : ((1u << T) - 1u);
    std::size_t checked = 0;
    for (int k = 0; k <= T; ++k) {
        std::optional<std::uint32_t> first_upper;
        std::optional<std::uint32_t> first_lower;
        double up_sum = 0, up_lo = 0, up_hi = 0, lo_sum = 0, lo_lo = 0, lo_hi = 0;
        // Gosper's hack walks the k-subsets in increasing numeric order.
        std::uint32_t mask = k == 0 ? 0u : ((1u << k) - 1u);
        while (true) {
            ++checked;
            double sum = 0.0;
            for (std::uint32_t bits = mask; bits; bits &= bits - 1) sum += x[std::countr_zero(bits)];
            double lower = 0.0;
            double upper = 0.0;
            for (std::size_t i = 0; i < terms.size(); ++i) {
                const int inside = std::popcount(avail[i] & mask);
                const int outside = std::popcount(avail[i] & ~mask & full);
                lower += std::max(0.0, terms[i].need - terms[i].power * outside);
                upper += std::min(terms[i].room, terms[i].power * inside);
            }
            if (!first_upper && exceeds(sum, upper, tol)) {
                first_upper = mask;
                up_sum = sum, up_lo = lower, up_hi = upper;
            }
            if (!first_lower && exceeds(lower, sum, tol)) {
                first_lower = mask;
                lo_sum = sum, lo_lo = lower, lo_hi = upper;
            }
            if (k == 0 || k == T) break;
            const std::uint32_t c = mask & (~mask + 1u);
            const std::uint32_t r = mask + c;
            const std::uint32_t next = (((r ^ mask) >> 2) / c) | r;
            if (next > full || next < mask) break;
            mask = next;
        }
        if (first_upper || first_lower) {
            const bool upper_side = first_upper.has_value();
            const std::uint32_t m = upper_side ? *first_upper : *first_lower;
            P3Witness w;
            for (int t = 0; t < T; ++t) {
                if (m & (1u << t)) w.window.push_back(t);
            }
            w.side = upper_side ? BoundSide::upper : BoundSide::lower;
            w.window_sum = upper_side ? up_sum : lo_sum;
            w.lower = upper_side ? up_lo : lo_lo;
            w.upper = upper_side ? up_hi : lo_hi;
            return {false, std::move(w), checked};
        }
    }
    return {true, std::nullopt, checked};
}

} // namespace

WindowBounds window_bounds(const Scenario& s, std::size_t g, std::span<const int> window) {
    const int T = s.num_slots();
    std::vector<int> pre(static_cast<std::size_t>(T) + 1, 0);
    for (int t : window) {
        if (t < 0 || t >= T) throw InputError("window slot " + std::to_string(t) + " outside the grid");
        pre[t + 1] = 1;
    }
    for (int t = 0; t < T; ++t) pre[t + 1] += pre[t];
    const auto [lower, upper] = bounds_from_prefix(member_terms(s, g), pre);
    std::vector<int> sorted(window.begin(), window.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    return {lower, upper, std::move(sorted)};
}

P3Verdict check_p3_feasible(const Scenario& s, std::size_t g, std::span<const double> x, const P3Options& options) {
    const int T = s.num_slots();
    if (static_cast<int>(x.size()) != T)
        throw InputError("schedule length " + std::to_string(x.size()) + " does not match the grid");
    const auto terms = member_terms(s, g);
    if (options.mode == P3Mode::exhaustive) {
        if (T > kExhaustiveSlotLimit)
            throw InputError("exhaustive P3 check needs T <= " + std::to_string(kExhaustiveSlotLimit) + " (got " +
                             std::to_string(T) + ")");
        return check_exhaustive(x, terms, options.tolerance);
    }

    ViolationTracker tracker(x, terms, options.tolerance);
    tracker.visit({});
    for (int a = 0; a < T; ++a) {
        std::vector<int> window;
        for (int b = a; b < T; ++b) {
            window.push_back(b);
            tracker.visit(window);
        }
    }
    std::mt19937_64 rng(options.seed);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < options.random_subsets; ++i) {
        std::vector<int> window;
        for (int t = 0; t < T; ++t) {
            if (coin(rng)) window.push_back(t);
        }
        tracker.visit(std::move(window));
    }
    return tracker.verdict();
}

double relaxation_gap_bound(const Scenario& s) {
    const int T = s.num_slots();
    double total = 0.0;
    for (const Ev& ev : s.fleet) {
        const int lo = std::max(0, ev.arrival_slot);
        const int hi = std::min(T, ev.departure_slot);
        if (lo >= hi) continue;
        const auto first = s.prices.values().begin() + lo;
        const auto last = s.prices.values().begin() + hi;
        const auto [mn, mx] = std::minmax_element(first, last);
        total += ev.e_req * (*mx - *mn);
    }
    return total / (s.eta * T * s.slot_hours());
}

} // namespace evsched
