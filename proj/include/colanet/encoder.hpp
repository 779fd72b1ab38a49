#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "colanet/pong.hpp"

namespace colanet {

// Input node layout. One node per bin; exactly one node per coordinate group
// is active at any time, plus at most one close-zone node.
//   [0,30)    ball x        30 uniform bins over [-5, 5]
//   [30,60)   ball y        30 uniform bins
//   [60,69)   ball vx       9 equal-occupancy bins (calibrated edges)
//   [69,78)   ball vy       9 equal-occupancy bins
//   [78,108)  racket y      30 uniform bins
//   [108,133) close zone    5x5 grid over a 3x3 field glued to the racket
inline constexpr int kXNodes = 30;
inline constexpr int kYNodes = 30;
inline constexpr int kVxNodes = 9;
inline constexpr int kVyNodes = 9;
inline constexpr int kRacketNodes = 30;
inline constexpr int kCloseNodes = 25;
inline constexpr int kInputNodes = 133;

inline constexpr int kXBase = 0;
inline constexpr int kYBase = 30;
inline constexpr int kVxBase = 60;
inline constexpr int kVyBase = 69;
inline constexpr int kRacketBase = 78;
inline constexpr int kCloseBase = 108;

inline constexpr double kCloseField = 3.0;      // cm, square side
inline constexpr double kCloseCell = 0.6;       // cm
inline constexpr int kRateHz = 300;             // per active node
inline constexpr int kIntervalTicks = 10;       // stimulus slice length

struct EncoderConfig {
    std::array<double, kVxNodes - 1> vx_edges{};  // interior quantile edges
    std::array<double, kVyNodes - 1> vy_edges{};

    int x_bin(double x) const;
    int y_bin(double y) const;
    int vx_bin(double vx) const;
    int vy_bin(double vy) const;
    int racket_bin(double racket_y) const;
    /// -1 when the ball is outside the racket-glued 3x3 field.
    int close_cell(const WorldState& s) const;

    /// The active nodes for a state: 5 coordinate nodes plus the close-zone
    /// node when applicable.
    void active_nodes(const WorldState& s, std::vector<std::int32_t>& out) const;
};

/// Conditional per-bin means gathered on a calibration run; the decode side
/// of the encoder. Bins never occupied fall back to midpoints.
struct CalibrationStats {
    std::vector<double> x_mean, y_mean, vx_mean, vy_mean, racket_mean;  // per bin
    std::vector<std::int64_t> x_count, y_count, vx_count, vy_count, racket_count;
};

struct Calibration {
    EncoderConfig encoder;
    CalibrationStats stats;
};

/// Free-runs the world for n_samples ticks (resetting on wall/racket
/// events), computes 9-quantile velocity bin edges from the time-weighted
/// samples and the per-bin conditional means. n_samples must be >= 1.
Calibration calibrate_velocity_bins(std::int64_t n_samples, std::uint64_t seed);

std::string calibration_to_json(const Calibration& calib);
Calibration calibration_from_json(const std::string& text);

/// 300 Hz rate coder on the 1 msec grid: deterministic per-node phase
/// accumulators (increment 0.3, emit and subtract 1 on reaching 1). Phases
/// reset on the global 10-tick interval grid to a fixed per-node offset, so
/// every stimulus slice carries an identical per-node emission pattern
/// (exactly 3 spikes per active node per slice) while different nodes stay
/// desynchronized, as independent rate-coding populations are.
class SpikeEncoder {
public:
    explicit SpikeEncoder(const EncoderConfig& config) : config_(&config) {}

    /// Fixed phase offset of a node at each interval boundary, thousandths.
    static int phase_offset_milli(int node) { return node * 617 % 500; }

    /// Nodes spiking at this tick for the given state. `tick` drives the
    /// interval-grid phase reset.
    void encode(const WorldState& s, std::int64_t tick, std::vector<std::int32_t>& spikes);

private:
    const EncoderConfig* config_;
    std::array<int, kInputNodes> phase_milli_{};  // thousandths of a spike
    std::vector<std::int32_t> active_;
};

}  // namespace colanet
