#include "colanet/oracle.hpp"

#include <array>

namespace colanet {

namespace {

double uniform_midpoint(int bin, double lo, double hi, int n) {
    return lo + (bin + 0.5) * (hi - lo) / n;
}

template <std::size_t N>
double edge_midpoint(int bin, const std::array<double, N>& edges) {
    if (bin == 0) return edges[0] - (edges[1] - edges[0]) / 2.0;
    if (bin == static_cast<int>(N)) return edges[N - 1] + (edges[N - 1] - edges[N - 2]) / 2.0;
    return 0.5 * (edges[static_cast<std::size_t>(bin) - 1] + edges[static_cast<std::size_t>(bin)]);
}

struct DecodedBins {
    int x = 0, y = 0, vx = 0, vy = 0, racket = 0;
    int close = -1;
};

/// Dominant node per coordinate group over the interval's raster.
DecodedBins decode_bins(const LabeledInterval& interval) {
    std::array<int, kInputNodes> count{};
    for (std::int32_t node : interval.nodes) ++count[node];
    auto argmax = [&](int base, int n) {
        int best = -1;
        int best_count = 0;
        for (int i = 0; i < n; ++i) {
            if (count[base + i] > best_count) {
                best_count = count[base + i];
                best = i;
            }
        }
        return best;
    };
    DecodedBins bins;
    bins.x = std::max(0, argmax(kXBase, kXNodes));
    bins.y = std::max(0, argmax(kYBase, kYNodes));
    bins.vx = std::max(0, argmax(kVxBase, kVxNodes));
    bins.vy = std::max(0, argmax(kVyBase, kVyNodes));
    bins.racket = std::max(0, argmax(kRacketBase, kRacketNodes));
    bins.close = argmax(kCloseBase, kCloseNodes);
    return bins;
}

}  // namespace

JointCalibration calibrate_joint_states(std::int64_t n_samples, std::uint64_t seed,
                                        const EncoderConfig& encoder) {
    JointCalibration joint;
    Rng rng(derive_seed(seed, "calibration"));
    WorldState w = reset_world(rng);
    for (std::int64_t t = 0; t < n_samples; ++t) {
        const std::uint64_t key = JointCalibration::key(
            encoder.x_bin(w.ball_x), encoder.y_bin(w.ball_y), encoder.vx_bin(w.ball_vx),
            encoder.vy_bin(w.ball_vy), encoder.racket_bin(w.racket_y), encoder.close_cell(w));
        JointCalibration::Stat& s = joint.states[key];
        ++s.count;
        s.x += w.ball_x;
        s.y += w.ball_y;
        s.vx += w.ball_vx;
        s.vy += w.ball_vy;
        s.racket += w.racket_y;
        if (step_world(w) != WorldEvent::none) w = reset_world(rng);
    }
    return joint;
}

WorldState decode_interval(const LabeledInterval& interval, const EncoderConfig& encoder,
                           const JointCalibration& joint) {
    const DecodedBins bins = decode_bins(interval);
    WorldState s;
    const auto it = joint.states.find(
        JointCalibration::key(bins.x, bins.y, bins.vx, bins.vy, bins.racket, bins.close));
    if (it != joint.states.end()) {
        const JointCalibration::Stat& st = it->second;
        const double n = static_cast<double>(st.count);
        s.ball_x = st.x / n;
        s.ball_y = st.y / n;
        s.ball_vx = st.vx / n;
        s.ball_vy = st.vy / n;
        s.racket_y = st.racket / n;
        return s;
    }
    s.ball_x = uniform_midpoint(bins.x, -kFieldHalf, kFieldHalf, kXNodes);
    s.ball_y = uniform_midpoint(bins.y, -kFieldHalf, kFieldHalf, kYNodes);
    s.ball_vx = edge_midpoint(bins.vx, encoder.vx_edges);
    s.ball_vy = edge_midpoint(bins.vy, encoder.vy_edges);
    s.racket_y = uniform_midpoint(bins.racket, -kFieldHalf, kFieldHalf, kRacketNodes);
    return s;
}

RunReport theoretical_limit_oracle(const std::vector<LabeledInterval>& intervals,
                                   const EncoderConfig& encoder, const JointCalibration& joint,
                                   int horizon_ticks) {
    std::vector<Prediction> predictions;
    predictions.reserve(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const WorldState s = decode_interval(intervals[i], encoder, joint);
        const bool positive = label_state(s, horizon_ticks) == Label::good;
        predictions.push_back({static_cast<std::int64_t>(i), positive, intervals[i].label});
    }
    return evaluate(predictions);
}

std::vector<LabeledInterval> stream_intervals(const AssembledStream& stream, bool test_only) {
    std::vector<LabeledInterval> intervals;
    for (const StreamWindow& w : stream.windows) {
        if (test_only && w.train) continue;
        LabeledInterval iv;
        iv.label = w.label;
        for (int k = 0; k < kIntervalTicks; ++k) {
            const std::int64_t t = w.start_tick + k;
            for (std::int64_t i = stream.spike_offsets[t]; i < stream.spike_offsets[t + 1]; ++i) {
                iv.nodes.push_back(stream.spike_nodes[static_cast<std::size_t>(i)]);
            }
            iv.offsets[static_cast<std::size_t>(k) + 1] = static_cast<std::int32_t>(iv.nodes.size());
        }
        intervals.push_back(std::move(iv));
    }
    return intervals;
}

}  // namespace colanet
