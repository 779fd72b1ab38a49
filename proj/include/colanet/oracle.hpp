#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "colanet/dataset.hpp"
#include "colanet/harness.hpp"

namespace colanet {

/// Conditional mean world state per discrete 133-node code (joint over the
/// six coordinate groups), gathered on a calibration run.
struct JointCalibration {
    struct Stat {
        std::int64_t count = 0;
        double x = 0, y = 0, vx = 0, vy = 0, racket = 0;  // running sums
    };
    std::unordered_map<std::uint64_t, Stat> states;

    static std::uint64_t key(int x_bin, int y_bin, int vx_bin, int vy_bin, int racket_bin,
                             int close_cell /* -1 when absent */) {
        std::uint64_t k = static_cast<std::uint64_t>(x_bin);
        k = k * 30 + static_cast<std::uint64_t>(y_bin);
        k = k * 9 + static_cast<std::uint64_t>(vx_bin);
        k = k * 9 + static_cast<std::uint64_t>(vy_bin);
        k = k * 30 + static_cast<std::uint64_t>(racket_bin);
        k = k * 26 + static_cast<std::uint64_t>(close_cell + 1);
        return k;
    }
};

/// Free-runs the world for n_samples ticks and accumulates the conditional
/// state sums per visited discrete code.
JointCalibration calibrate_joint_states(std::int64_t n_samples, std::uint64_t seed,
                                        const EncoderConfig& encoder);

/// Decodes an interval's active bins (dominant node per group) and
/// substitutes the calibration's conditional means; codes never visited in
/// calibration fall back to the active bins' midpoints.
WorldState decode_interval(const LabeledInterval& interval, const EncoderConfig& encoder,
                           const JointCalibration& joint);

/// Accuracy upper bound estimate: reconstructs each interval's state from
/// its discrete code and labels it with the frozen-racket lookahead; the
/// prediction is compared against the interval's recorded label.
RunReport theoretical_limit_oracle(const std::vector<LabeledInterval>& intervals,
                                   const EncoderConfig& encoder, const JointCalibration& joint,
                                   int horizon_ticks = kDefaultHorizon);

/// Rebuilds the labeled intervals of a stream region from its files
/// (stimulus ticks of each window plus the sidecar label).
std::vector<LabeledInterval> stream_intervals(const AssembledStream& stream, bool test_only);

}  // namespace colanet
