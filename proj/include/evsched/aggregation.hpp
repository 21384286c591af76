// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "evsched/core_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace evsched {

/// Bounds on the energy (in power-slot units) a group can absorb inside a
/// set of slots `window`, given every member's requirement and headroom.
struct WindowBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<int> window;
};

WindowBounds window_bounds(const Scenario& s, std::size_t g, std::span<const int> window);

enum class P3Mode { exhaustive, sampled };

struct P3Options {
    P3Mode mode = P3Mode::sampled;
    int random_subsets = 256;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
};

enum class BoundSide { lower, upper };

struct P3Witness {
    std::vector<int> window;
    BoundSide side = BoundSide::upper;
    double window_sum = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct P3Verdict {
    bool feasible = true;
    std::optional<P3Witness> witness;
    std::size_t windows_checked = 0;
};

/// Exhaustive mode visits all 2^T windows and requires T <= 20. Sampled mode
/// visits every contiguous window plus `random_subsets` random ones.
/// The reported witness is the first violation in the order: lowest
/// cardinality, upper-bound violations before lower-bound ones, then
/// colexicographic slot order (numeric order of the slot bitmask).
P3Verdict check_p3_feasible(const Scenario& s, std::size_t g, std::span<const double> x, const P3Options& options);

inline constexpr int kExhaustiveSlotLimit = 20;

/// (1/(eta*T*dt)) * sum_v E_req * (max_{U_v} pi - min_{U_v} pi).
double relaxation_gap_bound(const Scenario& s);

} // namespace evsched
