#include "colanet/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace colanet {

namespace {

int uniform_bin(double v, double lo, double hi, int n) {
    int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
    return std::clamp(b, 0, n - 1);
}

template <std::size_t N>
int edge_bin(double v, const std::array<double, N>& edges) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

}  // namespace

int EncoderConfig::x_bin(double x) const { return uniform_bin(x, -kFieldHalf, kFieldHalf, kXNodes); }
int EncoderConfig::y_bin(double y) const { return uniform_bin(y, -kFieldHalf, kFieldHalf, kYNodes); }
int EncoderConfig::vx_bin(double vx) const { return edge_bin(vx, vx_edges); }
int EncoderConfig::vy_bin(double vy) const { return edge_bin(vy, vy_edges); }
int EncoderConfig::racket_bin(double racket_y) const {
    return uniform_bin(racket_y, -kFieldHalf, kFieldHalf, kRacketNodes);
}

int EncoderConfig::close_cell(const WorldState& s) const {
    // 3x3 field whose left-border center rides on the racket center.
    const double dx = s.ball_x - (-kFieldHalf);
    const double dy = s.ball_y - (s.racket_y - kCloseField / 2.0);
    if (dx < 0.0 || dx > kCloseField || dy < 0.0 || dy > kCloseField) return -1;
    const int col = std::min(4, static_cast<int>(std::floor(dx / kCloseCell)));
    const int row = std::min(4, static_cast<int>(std::floor(dy / kCloseCell)));
    return row * 5 + col;
}

void EncoderConfig::active_nodes(const WorldState& s, std::vector<std::int32_t>& out) const {
    out.clear();
    out.push_back(kXBase + x_bin(s.ball_x));
    out.push_back(kYBase + y_bin(s.ball_y));
    out.push_back(kVxBase + vx_bin(s.ball_vx));
    out.push_back(kVyBase + vy_bin(s.ball_vy));
    out.push_back(kRacketBase + racket_bin(s.racket_y));
    const int cell = close_cell(s);
    if (cell >= 0) out.push_back(kCloseBase + cell);
}

void SpikeEncoder::encode(const WorldState& s, std::int64_t tick,
                          std::vector<std::int32_t>& spikes) {
    if (tick % kIntervalTicks == 0) {
        for (int node = 0; node < kInputNodes; ++node) {
            phase_milli_[node] = phase_offset_milli(node);
        }
    }
    config_->active_nodes(s, active_);
    spikes.clear();
    for (std::int32_t node : active_) {
        int& phase = phase_milli_[node];
        phase += kRateHz;  // 300 Hz * 1 msec = 0.3 spikes/tick, in thousandths
        if (phase >= 1000) {
            phase -= 1000;
            spikes.push_back(node);
        }
    }
    std::sort(spikes.begin(), spikes.end());
}

namespace {

struct BinAccumulator {
    std::vector<double> sum;
    std::vector<std::int64_t> count;

    explicit BinAccumulator(int n) : sum(n, 0.0), count(n, 0) {}

    void add(int bin, double v) {
        sum[bin] += v;
        ++count[bin];
    }

    void finish(std::vector<double>& mean, std::vector<std::int64_t>& out_count,
                std::vector<double> fallback) {
        mean.resize(sum.size());
        for (std::size_t i = 0; i < sum.size(); ++i) {
            mean[i] = count[i] > 0 ? sum[i] / static_cast<double>(count[i]) : fallback[i];
        }
        out_count = count;
    }
};

std::vector<double> uniform_midpoints(double lo, double hi, int n) {
    std::vector<double> m(n);
    const double w = (hi - lo) / n;
    for (int i = 0; i < n; ++i) m[i] = lo + (i + 0.5) * w;
    return m;
}

template <std::size_t N>
std::vector<double> edge_midpoints(const std::array<double, N>& edges) {
    // Bin 0 and the last bin are half-open; use the adjacent edge offset by
    // half the neighbouring bin width as a crude midpoint fallback.
    std::vector<double> m(N + 1);
    for (std::size_t i = 0; i + 1 < N; ++i) m[i + 1] = 0.5 * (edges[i] + edges[i + 1]);
    const double w0 = edges[1] - edges[0];
    m[0] = edges[0] - w0 / 2.0;
    m[N] = edges[N - 1] + (edges[N - 1] - edges[N - 2]) / 2.0;
    return m;
}

template <std::size_t N>
void quantile_edges(std::vector<double>& samples, std::array<double, N>& edges) {
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    for (std::size_t k = 1; k <= N; ++k) {
        edges[k - 1] = samples[std::min(n - 1, k * n / (N + 1))];
    }
}

}  // namespace

Calibration calibrate_velocity_bins(std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("calibration needs at least one sample tick");

    Rng rng(derive_seed(seed, "calibration"));
    WorldState w = reset_world(rng);
    std::vector<double> vx_samples, vy_samples;
    vx_samples.reserve(static_cast<std::size_t>(n_samples));
    vy_samples.reserve(static_cast<std::size_t>(n_samples));

    std::vector<WorldState> trajectory;
    trajectory.reserve(static_cast<std::size_t>(n_samples));
    for (std::int64_t t = 0; t < n_samples; ++t) {
        trajectory.push_back(w);
        vx_samples.push_back(w.ball_vx);
        vy_samples.push_back(w.ball_vy);
        if (step_world(w) != WorldEvent::none) w = reset_world(rng);
    }

    Calibration calib;
    quantile_edges(vx_samples, calib.encoder.vx_edges);
    quantile_edges(vy_samples, calib.encoder.vy_edges);

    BinAccumulator x_acc(kXNodes), y_acc(kYNodes), vx_acc(kVxNodes), vy_acc(kVyNodes),
        racket_acc(kRacketNodes);
    for (const WorldState& s : trajectory) {
        x_acc.add(calib.encoder.x_bin(s.ball_x), s.ball_x);
        y_acc.add(calib.encoder.y_bin(s.ball_y), s.ball_y);
        vx_acc.add(calib.encoder.vx_bin(s.ball_vx), s.ball_vx);
        vy_acc.add(calib.encoder.vy_bin(s.ball_vy), s.ball_vy);
        racket_acc.add(calib.encoder.racket_bin(s.racket_y), s.racket_y);
    }
    CalibrationStats& st = calib.stats;
    x_acc.finish(st.x_mean, st.x_count, uniform_midpoints(-kFieldHalf, kFieldHalf, kXNodes));
    y_acc.finish(st.y_mean, st.y_count, uniform_midpoints(-kFieldHalf, kFieldHalf, kYNodes));
    vx_acc.finish(st.vx_mean, st.vx_count, edge_midpoints(calib.encoder.vx_edges));
    vy_acc.finish(st.vy_mean, st.vy_count, edge_midpoints(calib.encoder.vy_edges));
    racket_acc.finish(st.racket_mean, st.racket_count,
                      uniform_midpoints(-kFieldHalf, kFieldHalf, kRacketNodes));
    return calib;
}

std::string calibration_to_json(const Calibration& calib) {
    nlohmann::json j;
    j["vx_edges"] = calib.encoder.vx_edges;
    j["vy_edges"] = calib.encoder.vy_edges;
    j["rate_hz"] = kRateHz;
    j["x_mean"] = calib.stats.x_mean;
    j["y_mean"] = calib.stats.y_mean;
    j["vx_mean"] = calib.stats.vx_mean;
    j["vy_mean"] = calib.stats.vy_mean;
    j["racket_mean"] = calib.stats.racket_mean;
    j["x_count"] = calib.stats.x_count;
    j["y_count"] = calib.stats.y_count;
    j["vx_count"] = calib.stats.vx_count;
    j["vy_count"] = calib.stats.vy_count;
    j["racket_count"] = calib.stats.racket_count;
    return j.dump(2);
}

Calibration calibration_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Calibration calib;
    j.at("vx_edges").get_to(calib.encoder.vx_edges);
    j.at("vy_edges").get_to(calib.encoder.vy_edges);
    j.at("x_mean").get_to(calib.stats.x_mean);
    j.at("y_mean").get_to(calib.stats.y_mean);
    j.at("vx_mean").get_to(calib.stats.vx_mean);
    j.at("vy_mean").get_to(calib.stats.vy_mean);
    j.at("racket_mean").get_to(calib.stats.racket_mean);
    j.at("x_count").get_to(calib.stats.x_count);
    j.at("y_count").get_to(calib.stats.y_count);
    j.at("vx_count").get_to(calib.stats.vx_count);
    j.at("vy_count").get_to(calib.stats.vy_count);
    j.at("racket_count").get_to(calib.stats.racket_count);
    return calib;
}

}  // namespace colanet
