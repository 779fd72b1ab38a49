#include "colanet/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace colanet {

RecordedRun record_run(std::int64_t n_ticks, std::uint64_t seed, const EncoderConfig& encoder) {
    RecordedRun run;
    run.n_ticks = n_ticks;
    run.spike_offsets.reserve(static_cast<std::size_t>(n_ticks) + 1);
    run.spike_offsets.push_back(0);
    run.trajectory.reserve(static_cast<std::size_t>(n_ticks));

    Rng rng(derive_seed(seed, "record"));
    WorldState w = reset_world(rng);
    SpikeEncoder enc(encoder);
    std::vector<std::int32_t> spikes;
    for (std::int64_t t = 0; t < n_ticks; ++t) {
        run.trajectory.push_back(w);
        enc.encode(w, t, spikes);
        run.spike_nodes.insert(run.spike_nodes.end(), spikes.begin(), spikes.end());
        run.spike_offsets.push_back(static_cast<std::int64_t>(run.spike_nodes.size()));
        const WorldEvent ev = step_world(w);
        if (ev != WorldEvent::none) {
            run.events.push_back({t, ev});
            w = reset_world(rng);
        }
    }
    return run;
}

std::vector<LabeledInterval> extract_fragments(const RecordedRun& run,
                                               const ExtractOptions& options) {
    std::vector<LabeledInterval> intervals;
    std::int64_t prev_event = -1;
    for (const RecordedRun::Event& ev : run.events) {
        const Label fragment_label =
            ev.kind == WorldEvent::hit_racket ? Label::good : Label::bad;
        const std::int64_t lo = std::max<std::int64_t>(prev_event + 1, ev.tick - options.horizon_ticks);
        prev_event = ev.tick;
        if (ev.tick < kIntervalTicks) continue;
        const std::int64_t first_slice = (lo + kIntervalTicks - 1) / kIntervalTicks;
        const std::int64_t last_slice = (ev.tick - kIntervalTicks) / kIntervalTicks;
        for (std::int64_t s = first_slice; s <= last_slice; ++s) {
            LabeledInterval iv;
            iv.label = fragment_label;
            if (options.relabel_intervals) {
                iv.label = label_state(run.trajectory[static_cast<std::size_t>(s * kIntervalTicks)],
                                       options.horizon_ticks);
                if (iv.label == Label::unlabeled) continue;
            }
            for (int k = 0; k < kIntervalTicks; ++k) {
                const std::int64_t t = s * kIntervalTicks + k;
                for (std::int64_t i = run.spike_offsets[t]; i < run.spike_offsets[t + 1]; ++i) {
                    iv.nodes.push_back(run.spike_nodes[static_cast<std::size_t>(i)]);
                }
                iv.offsets[static_cast<std::size_t>(k) + 1] =
                    static_cast<std::int32_t>(iv.nodes.size());
            }
            intervals.push_back(std::move(iv));
        }
    }
    return intervals;
}

AssembledStream shuffle_and_interleave(const std::vector<LabeledInterval>& intervals,
                                       std::uint64_t seed, double train_fraction) {
    if (intervals.empty()) throw std::invalid_argument("cannot assemble an empty interval list");
    std::vector<std::size_t> perm(intervals.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(derive_seed(seed, "shuffle"));
    rng.shuffle(perm);

    const auto n = static_cast<std::int64_t>(intervals.size());
    const auto n_train =
        static_cast<std::int64_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));

    AssembledStream stream;
    stream.learning_time = n_train * kWindowTicks;
    stream.spike_offsets.reserve(static_cast<std::size_t>(n) * kWindowTicks + 1);
    stream.spike_offsets.push_back(0);
    stream.label_active.reserve(static_cast<std::size_t>(n) * kWindowTicks);

    for (std::int64_t k = 0; k < n; ++k) {
        const LabeledInterval& iv = intervals[perm[static_cast<std::size_t>(k)]];
        const bool train = k < n_train;
        const bool label_on = train && iv.label == Label::good;
        stream.windows.push_back({k * kWindowTicks, iv.label, train});
        for (int t = 0; t < kWindowTicks; ++t) {
            if (t < kIntervalTicks) {
                for (std::int32_t i = iv.offsets[t]; i < iv.offsets[t + 1]; ++i) {
                    stream.spike_nodes.push_back(iv.nodes[static_cast<std::size_t>(i)]);
                }
            }
            stream.spike_offsets.push_back(static_cast<std::int64_t>(stream.spike_nodes.size()));
            stream.label_active.push_back(label_on ? 1 : 0);
        }
    }
    return stream;
}

namespace {

const char* label_name(Label l) {
    switch (l) {
        case Label::good:
            return "good";
        case Label::bad:
            return "bad";
        default:
            return "unlabeled";
    }
}

Label label_from(const std::string& s, const std::string& where) {
    if (s == "good") return Label::good;
    if (s == "bad") return Label::bad;
    throw std::runtime_error(where + ": unknown label '" + s + "'");
}

}  // namespace

void write_stream(const AssembledStream& stream, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream in_file(dir / kInputFileName, std::ios::binary);
        std::ofstream tgt_file(dir / kTargetFileName, std::ios::binary);
        if (!in_file || !tgt_file) throw std::runtime_error("cannot write stream files in " + dir.string());
        for (std::int64_t t = 0; t < stream.n_ticks(); ++t) {
            for (std::int64_t i = stream.spike_offsets[t]; i < stream.spike_offsets[t + 1]; ++i) {
                if (i > stream.spike_offsets[t]) in_file << ' ';
                in_file << stream.spike_nodes[static_cast<std::size_t>(i)];
            }
            in_file << '\n';
            tgt_file << (stream.label_active[static_cast<std::size_t>(t)] ? "0" : "-") << '\n';
        }
    }
    {
        std::ofstream win_file(dir / kWindowsFileName, std::ios::binary);
        win_file << "window,start_tick,label,split\n";
        for (std::size_t k = 0; k < stream.windows.size(); ++k) {
            const StreamWindow& w = stream.windows[k];
            win_file << k << ',' << w.start_tick << ',' << label_name(w.label) << ','
                     << (w.train ? "train" : "test") << '\n';
        }
    }
    {
        std::int64_t n_good = 0;
        std::int64_t n_bad = 0;
        std::int64_t n_train = 0;
        for (const StreamWindow& w : stream.windows) {
            (w.label == Label::good ? n_good : n_bad) += 1;
            n_train += w.train ? 1 : 0;
        }
        nlohmann::json meta;
        meta["tick_ms"] = 1;
        meta["input_nodes"] = kInputNodes;
        meta["window_ticks"] = kWindowTicks;
        meta["stimulus_ticks"] = kIntervalTicks;
        meta["windows"] = stream.windows.size();
        meta["train_windows"] = n_train;
        meta["learning_time"] = stream.learning_time;
        meta["good_windows"] = n_good;
        meta["bad_windows"] = n_bad;
        std::ofstream meta_file(dir / kMetaFileName, std::ios::binary);
        meta_file << meta.dump(2) << '\n';
    }
}

AssembledStream read_stream(const std::filesystem::path& dir) {
    AssembledStream stream;
    {
        std::ifstream in_file(dir / kInputFileName, std::ios::binary);
        if (!in_file) throw std::runtime_error("cannot open " + (dir / kInputFileName).string());
        stream.spike_offsets.push_back(0);
        std::string line;
        int line_no = 0;
        while (std::getline(in_file, line)) {
            ++line_no;
            const char* p = line.data();
            const char* end = p + line.size();
            while (p < end) {
                while (p < end && *p == ' ') ++p;
                if (p == end) break;
                std::int32_t v = 0;
                auto [next, ec] = std::from_chars(p, end, v);
                if (ec != std::errc()) {
                    throw std::runtime_error((dir / kInputFileName).string() + ":" +
                                             std::to_string(line_no) + ": malformed spike list");
                }
                stream.spike_nodes.push_back(v);
                p = next;
            }
            stream.spike_offsets.push_back(static_cast<std::int64_t>(stream.spike_nodes.size()));
        }
    }
    {
        std::ifstream tgt_file(dir / kTargetFileName, std::ios::binary);
        if (!tgt_file) throw std::runtime_error("cannot open " + (dir / kTargetFileName).string());
        std::string line;
        int line_no = 0;
        while (std::getline(tgt_file, line)) {
            ++line_no;
            if (line == "-") {
                stream.label_active.push_back(0);
            } else if (line == "0") {
                stream.label_active.push_back(1);
            } else {
                throw std::runtime_error((dir / kTargetFileName).string() + ":" +
                                         std::to_string(line_no) + ": malformed target line");
            }
        }
    }
    if (stream.label_active.size() + 1 != stream.spike_offsets.size()) {
        throw std::runtime_error("input and target files disagree on tick count");
    }
    {
        std::ifstream win_file(dir / kWindowsFileName, std::ios::binary);
        if (!win_file) throw std::runtime_error("cannot open " + (dir / kWindowsFileName).string());
        std::string line;
        std::getline(win_file, line);  // header
        int line_no = 1;
        while (std::getline(win_file, line)) {
            ++line_no;
            if (line.empty()) continue;
            StreamWindow w;
            std::size_t p1 = line.find(',');
            std::size_t p2 = line.find(',', p1 + 1);
            std::size_t p3 = line.find(',', p2 + 1);
            if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos) {
                throw std::runtime_error((dir / kWindowsFileName).string() + ":" +
                                         std::to_string(line_no) + ": malformed row");
            }
            w.start_tick = std::stoll(line.substr(p1 + 1, p2 - p1 - 1));
            w.label = label_from(line.substr(p2 + 1, p3 - p2 - 1), "windows.csv");
            w.train = line.substr(p3 + 1) == "train";
            stream.windows.push_back(w);
        }
    }
    {
        std::ifstream meta_file(dir / kMetaFileName, std::ios::binary);
        if (!meta_file) throw std::runtime_error("cannot open " + (dir / kMetaFileName).string());
        nlohmann::json meta = nlohmann::json::parse(meta_file);
        stream.learning_time = meta.at("learning_time").get<std::int64_t>();
    }
    return stream;
}

}  // namespace colanet
