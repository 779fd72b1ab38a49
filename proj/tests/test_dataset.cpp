#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "colanet/dataset.hpp"

using namespace colanet;
namespace fs = std::filesystem;

namespace {

Calibration test_calibration() {
    static Calibration calib = calibrate_velocity_bins(200000, 4);
    return calib;
}

RecordedRun synthetic_run(std::int64_t n_ticks, std::vector<RecordedRun::Event> events) {
    RecordedRun run;
    run.n_ticks = n_ticks;
    run.spike_offsets.push_back(0);
    for (std::int64_t t = 0; t < n_ticks; ++t) {
        run.spike_nodes.push_back(static_cast<std::int32_t>(t % kInputNodes));
        run.spike_offsets.push_back(static_cast<std::int64_t>(run.spike_nodes.size()));
        run.trajectory.push_back({});
    }
    run.events = std::move(events);
    return run;
}

}  // namespace

TEST_CASE("record_run basics") {
    Calibration calib = test_calibration();
    SUBCASE("zero duration gives empty logs") {
        RecordedRun run = record_run(0, 1, calib.encoder);
        CHECK(run.n_ticks == 0);
        CHECK(run.spike_nodes.empty());
        CHECK(run.events.empty());
    }
    SUBCASE("tick count and determinism") {
        RecordedRun a = record_run(50000, 42, calib.encoder);
        RecordedRun b = record_run(50000, 42, calib.encoder);
        CHECK(a.n_ticks == 50000);
        CHECK(a.spike_offsets.size() == 50001);
        CHECK(a.spike_nodes == b.spike_nodes);
        REQUIRE(a.events.size() == b.events.size());
        for (std::size_t i = 0; i < a.events.size(); ++i) {
            CHECK(a.events[i].tick == b.events[i].tick);
            CHECK(a.events[i].kind == b.events[i].kind);
        }
        CHECK(!a.events.empty());
        RecordedRun c = record_run(50000, 43, calib.encoder);
        CHECK(a.spike_nodes != c.spike_nodes);
    }
}

TEST_CASE("extract_fragments slices the grid-aligned pre-event window") {
    SUBCASE("a 300-tick fragment yields 30 intervals with the event's label") {
        RecordedRun run = synthetic_run(301, {{300, WorldEvent::hit_racket}});
        auto intervals = extract_fragments(run);
        CHECK(intervals.size() == 30);
        for (const auto& iv : intervals) {
            CHECK(iv.label == Label::good);
            CHECK(iv.offsets[kIntervalTicks] == 10);  // one spike per tick here
        }
    }
    SUBCASE("an event too early leaves no full slice") {
        RecordedRun run = synthetic_run(6, {{5, WorldEvent::hit_left_wall}});
        CHECK(extract_fragments(run).empty());
    }
    SUBCASE("no events, no intervals") {
        RecordedRun run = synthetic_run(1000, {});
        CHECK(extract_fragments(run).empty());
    }
    SUBCASE("fragments never straddle the previous event") {
        RecordedRun run = synthetic_run(500,
                                        {{95, WorldEvent::hit_left_wall},
                                         {400, WorldEvent::hit_racket}});
        auto intervals = extract_fragments(run);
        // First fragment: slices within [0, 95) -> 9; second: [100, 400) -> 30.
        CHECK(intervals.size() == 9 + 30);
        int good = 0;
        for (const auto& iv : intervals) good += iv.label == Label::good ? 1 : 0;
        CHECK(good == 30);
    }
    SUBCASE("short gap between events") {
        RecordedRun run = synthetic_run(200,
                                        {{100, WorldEvent::hit_left_wall},
                                         {115, WorldEvent::hit_racket}});
        auto intervals = extract_fragments(run);
        // Second fragment covers [101, 115): only slice [110, 120) overlaps
        // the event tick, so nothing fits fully.
        CHECK(intervals.size() == 10);
    }
}

TEST_CASE("shuffle_and_interleave") {
    std::vector<LabeledInterval> intervals(3);
    for (int i = 0; i < 3; ++i) {
        intervals[static_cast<std::size_t>(i)].label = i == 0 ? Label::good : Label::bad;
        for (int t = 0; t < kIntervalTicks; ++t) {
            intervals[static_cast<std::size_t>(i)].nodes.push_back(i);
            intervals[static_cast<std::size_t>(i)].offsets[static_cast<std::size_t>(t) + 1] =
                static_cast<std::int32_t>(t + 1);
        }
    }

    SUBCASE("three intervals make a 60-tick stream") {
        AssembledStream s = shuffle_and_interleave(intervals, 7);
        CHECK(s.n_ticks() == 60);
        CHECK(s.windows.size() == 3);
        CHECK(s.learning_time == 2 * kWindowTicks);
        // Stimulus ticks carry spikes, silence ticks are empty.
        for (std::int64_t w = 0; w < 3; ++w) {
            for (int t = 0; t < kWindowTicks; ++t) {
                const std::int64_t tick = w * kWindowTicks + t;
                const auto count = s.spike_offsets[tick + 1] - s.spike_offsets[tick];
                CHECK(count == (t < kIntervalTicks ? 1 : 0));
            }
        }
    }

    SUBCASE("learning time example: 300 intervals, 2/3 train") {
        std::vector<LabeledInterval> many(300);
        for (auto& iv : many) iv.label = Label::bad;
        AssembledStream s = shuffle_and_interleave(many, 1);
        CHECK(s.learning_time == 200 * kWindowTicks);
    }

    SUBCASE("label node is active for all 20 ticks of good training windows only") {
        AssembledStream s = shuffle_and_interleave(intervals, 7);
        for (std::size_t w = 0; w < s.windows.size(); ++w) {
            const StreamWindow& win = s.windows[w];
            const bool expect = win.train && win.label == Label::good;
            for (int t = 0; t < kWindowTicks; ++t) {
                CHECK(s.label_active[static_cast<std::size_t>(win.start_tick + t)] ==
                      (expect ? 1 : 0));
            }
        }
        // After learning_time the label channel is silent.
        for (std::int64_t t = s.learning_time; t < s.n_ticks(); ++t) {
            CHECK(s.label_active[static_cast<std::size_t>(t)] == 0);
        }
    }

    SUBCASE("same seed, same permutation; different seed differs") {
        std::vector<LabeledInterval> many(64);
        for (std::size_t i = 0; i < many.size(); ++i) {
            many[i].label = Label::bad;
            many[i].nodes.assign(1, static_cast<std::int32_t>(i));
            many[i].offsets[1] = 1;
            for (int t = 1; t <= kIntervalTicks; ++t) many[i].offsets[static_cast<std::size_t>(t)] = 1;
        }
        AssembledStream a = shuffle_and_interleave(many, 5);
        AssembledStream b = shuffle_and_interleave(many, 5);
        AssembledStream c = shuffle_and_interleave(many, 6);
        CHECK(a.spike_nodes == b.spike_nodes);
        CHECK(a.spike_nodes != c.spike_nodes);
    }

    SUBCASE("train and test windows partition the stream") {
        std::vector<LabeledInterval> many(100);
        for (auto& iv : many) iv.label = Label::good;
        AssembledStream s = shuffle_and_interleave(many, 9);
        std::int64_t train = 0;
        for (std::size_t w = 0; w < s.windows.size(); ++w) {
            const StreamWindow& win = s.windows[w];
            CHECK(win.start_tick == static_cast<std::int64_t>(w) * kWindowTicks);
            train += win.train ? 1 : 0;
            CHECK(win.train == (win.start_tick < s.learning_time));
        }
        CHECK(train == 66);
    }
}

TEST_CASE("stream file round-trip") {
    Calibration calib = test_calibration();
    RecordedRun run = record_run(30000, 21, calib.encoder);
    auto intervals = extract_fragments(run);
    REQUIRE(!intervals.empty());
    AssembledStream stream = shuffle_and_interleave(intervals, 21);

    const fs::path dir = fs::temp_directory_path() / "colanet_dataset_test";
    fs::remove_all(dir);
    write_stream(stream, dir);
    AssembledStream back = read_stream(dir);

    CHECK(back.spike_offsets == stream.spike_offsets);
    CHECK(back.spike_nodes == stream.spike_nodes);
    CHECK(back.label_active == stream.label_active);
    CHECK(back.learning_time == stream.learning_time);
    REQUIRE(back.windows.size() == stream.windows.size());
    for (std::size_t w = 0; w < back.windows.size(); ++w) {
        CHECK(back.windows[w].start_tick == stream.windows[w].start_tick);
        CHECK(back.windows[w].label == stream.windows[w].label);
        CHECK(back.windows[w].train == stream.windows[w].train);
    }
    fs::remove_all(dir);
}

TEST_CASE("stream text format") {
    AssembledStream stream;
    stream.spike_offsets = {0, 3, 3};
    stream.spike_nodes = {0, 42, 132};
    stream.label_active = {1, 0};
    stream.windows = {{0, Label::good, true}};
    stream.learning_time = 20;

    const fs::path dir = fs::temp_directory_path() / "colanet_format_test";
    fs::remove_all(dir);
    write_stream(stream, dir);

    std::ifstream in(dir / kInputFileName);
    std::string line;
    std::getline(in, line);
    CHECK(line == "0 42 132");
    std::getline(in, line);
    CHECK(line.empty());

    std::ifstream tgt(dir / kTargetFileName);
    std::getline(tgt, line);
    CHECK(line == "0");
    std::getline(tgt, line);
    CHECK(line == "-");
    fs::remove_all(dir);
}

TEST_CASE("malformed stream lines report the line number") {
    const fs::path dir = fs::temp_directory_path() / "colanet_bad_stream";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream in(dir / kInputFileName);
        in << "0 1\nbogus\n";
        std::ofstream tgt(dir / kTargetFileName);
        tgt << "-\n-\n";
        std::ofstream win(dir / kWindowsFileName);
        win << "window,start_tick,label,split\n";
        std::ofstream meta(dir / kMetaFileName);
        meta << "{\"learning_time\": 0}\n";
    }
    try {
        read_stream(dir);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("recorded class balance: both classes occur") {
    Calibration calib = test_calibration();
    RecordedRun run = record_run(300000, 8, calib.encoder);
    auto intervals = extract_fragments(run);
    std::int64_t good = 0;
    std::int64_t bad = 0;
    for (const auto& iv : intervals) (iv.label == Label::good ? good : bad) += 1;
    CHECK(good > 0);
    CHECK(bad > 0);
    CHECK(good < bad);  // random racket placement makes misses dominate
}

TEST_CASE("relabel flag drops horizon-ambiguous intervals") {
    Calibration calib = test_calibration();
    RecordedRun run = record_run(100000, 12, calib.encoder);
    ExtractOptions relabel;
    relabel.relabel_intervals = true;
    auto strict = extract_fragments(run, relabel);
    auto inherited = extract_fragments(run);
    CHECK(!strict.empty());
    CHECK(strict.size() <= inherited.size());
}
