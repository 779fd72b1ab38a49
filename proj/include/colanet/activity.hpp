#pragma once

#include <cstdint>
#include <limits>

namespace colanet {

// Activity time of a neuron. The neuron is active iff a > 0. The value +inf
// is represented by a sentinel strictly greater than any finite activity
// time; it is absorbing under the per-tick decrement and can only be
// replaced by a negative gating spike.
using activity_t = std::int32_t;

inline constexpr activity_t kActivityInf = std::numeric_limits<activity_t>::max();

inline bool is_active(activity_t a) { return a > 0; }

/// Per-tick activity update:
///   a+1 if a < -1,  +inf if a = -1,  0 if a = 0,  a-1 if a > 0 (inf stays inf).
inline activity_t step_activity(activity_t a) {
    if (a == kActivityInf) return kActivityInf;
    if (a < -1) return a + 1;
    if (a == -1) return kActivityInf;
    if (a == 0) return 0;
    return a - 1;
}

/// Gating spike with weight omega: min(a, omega) for omega < 0,
/// max(a, omega) for omega > 0. omega = 0 is a configuration error and must
/// be rejected upstream.
inline activity_t apply_gating(activity_t a, activity_t omega) {
    if (omega < 0) return a < omega ? a : omega;
    return a > omega ? a : omega;
}

}  // namespace colanet
