#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "colanet/encoder.hpp"
#include "colanet/pong.hpp"

namespace colanet {

// Engine input file names, as referenced by the network description.
inline constexpr const char* kInputFileName = "inpstaticperm.txt";
inline constexpr const char* kTargetFileName = "inpstatictargetperm.txt";
inline constexpr const char* kWindowsFileName = "windows.csv";
inline constexpr const char* kMetaFileName = "meta.json";

inline constexpr int kWindowTicks = 20;       // stimulus + silence
inline constexpr int kDefaultHorizon = 300;   // label lookahead T, msec

struct RecordedRun {
    std::int64_t n_ticks = 0;
    // Per-tick encoded spikes, CSR layout.
    std::vector<std::int64_t> spike_offsets;  // n_ticks + 1
    std::vector<std::int32_t> spike_nodes;
    struct Event {
        std::int64_t tick;  // the step out of this tick's state hit the border
        WorldEvent kind;
    };
    std::vector<Event> events;
    std::vector<WorldState> trajectory;       // state at each tick, pre-step
};

/// Free-running world simulation with resets on every racket/left-wall
/// event. Logs per-tick state, encoded spikes and events.
RecordedRun record_run(std::int64_t n_ticks, std::uint64_t seed, const EncoderConfig& encoder);

struct LabeledInterval {
    std::array<std::int32_t, kIntervalTicks + 1> offsets{};  // CSR into nodes
    std::vector<std::int32_t> nodes;
    Label label = Label::unlabeled;
};

struct ExtractOptions {
    int horizon_ticks = kDefaultHorizon;
    /// Re-check every interval against the frozen-racket criterion instead
    /// of inheriting the fragment label; intervals that come out unlabeled
    /// are dropped.
    bool relabel_intervals = false;
};

/// Cuts the pre-event fragments into 10-tick intervals aligned to the global
/// interval grid. Each interval carries the label of the fragment's
/// terminating event; partial slices at either end are discarded.
std::vector<LabeledInterval> extract_fragments(const RecordedRun& run,
                                               const ExtractOptions& options = {});

struct StreamWindow {
    std::int64_t start_tick = 0;
    Label label = Label::unlabeled;
    bool train = false;
};

struct AssembledStream {
    std::vector<std::int64_t> spike_offsets;  // per tick, CSR
    std::vector<std::int32_t> spike_nodes;
    std::vector<std::uint8_t> label_active;   // label node spiking this tick
    std::vector<StreamWindow> windows;
    std::int64_t learning_time = 0;           // ticks; training region is [0, learning_time)

    std::int64_t n_ticks() const { return static_cast<std::int64_t>(label_active.size()); }
};

/// Seeded shuffle, 10 ticks of silence after every interval, label-node
/// activity over the whole 20-tick window for the training region
/// (good-labeled windows only; the binary task has a single class node).
/// Test-region ground truth lives only in the window table.
AssembledStream shuffle_and_interleave(const std::vector<LabeledInterval>& intervals,
                                       std::uint64_t seed, double train_fraction = 2.0 / 3.0);

/// Writes the stream as engine input files plus the window sidecar and meta.
void write_stream(const AssembledStream& stream, const std::filesystem::path& dir);
AssembledStream read_stream(const std::filesystem::path& dir);

}  // namespace colanet
