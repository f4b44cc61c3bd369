#include "qflow/io.hpp"

#include "qflow/errors.hpp"
#include "qflow/flow_solvers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qflow {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return in;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
    throw InputError(source + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

bool skip_line(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

template <typename T>
T to_number(const std::string& tok, const std::string& source, int line) {
    T value{};
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, value);
    if (ec != std::errc() || ptr != end) fail(source, line, "malformed number '" + tok + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(value)) fail(source, line, "non-finite number '" + tok + "'");
    return value;
}

std::string shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string digits(double v, int significant) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return buf;
}

}  // namespace

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << content;
    if (!out) throw InputError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Detections

std::vector<Detection> read_detections(std::istream& in, const std::string& source) {
    std::vector<Detection> dets;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (skip_line(line)) continue;
        const auto tok = split(line);
        if (tok.size() != 7) fail(source, lineno, "expected 7 fields, got " + std::to_string(tok.size()));
        Detection d;
        d.id = static_cast<int>(dets.size());
        d.frame = to_number<int>(tok[0], source, lineno);
        d.class_id = to_number<int>(tok[1], source, lineno);
        d.box = {to_number<double>(tok[2], source, lineno), to_number<double>(tok[3], source, lineno),
                 to_number<double>(tok[4], source, lineno), to_number<double>(tok[5], source, lineno)};
        d.score = to_number<double>(tok[6], source, lineno);
        if (d.frame < 0) fail(source, lineno, "negative frame");
        if (d.class_id < 0) fail(source, lineno, "negative class id");
        if (!d.box.well_formed()) fail(source, lineno, "box coordinates must increase");
        dets.push_back(d);
    }
    return dets;
}

std::vector<Detection> parse_detections(const std::string& path) {
    auto in = open_input(path);
    return read_detections(in, path);
}

void write_detections(std::ostream& out, const std::vector<Detection>& dets) {
    for (const auto& d : dets)
        out << d.frame << ' ' << d.class_id << ' ' << shortest(d.box.x1) << ' ' << shortest(d.box.y1) << ' '
            << shortest(d.box.x2) << ' ' << shortest(d.box.y2) << ' ' << shortest(d.score) << '\n';
}

// ---------------------------------------------------------------------------
// Ground-truth labels

std::string class_name(int class_id) {
    static const char* kNames[] = {"Car", "Pedestrian", "Cyclist"};
    if (class_id >= 0 && class_id < 3) return kNames[class_id];
    return "Class" + std::to_string(class_id);
}

ClassMap default_class_map(int num_classes) {
    ClassMap m;
    for (int k = 0; k < num_classes; ++k) m[class_name(k)] = k;
    return m;
}

std::vector<GroundTruthBox> read_gt_labels(std::istream& in, const ClassMap& classes, const std::string& source) {
    std::vector<GroundTruthBox> gts;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (skip_line(line)) continue;
        const auto tok = split(line);
        if (tok.size() < 10) fail(source, lineno, "expected at least 10 fields, got " + std::to_string(tok.size()));
        GroundTruthBox g;
        g.frame = to_number<int>(tok[0], source, lineno);
        g.track_id = to_number<int>(tok[1], source, lineno);
        for (int k = 3; k <= 5; ++k) to_number<double>(tok[k], source, lineno);
        g.box = {to_number<double>(tok[6], source, lineno), to_number<double>(tok[7], source, lineno),
                 to_number<double>(tok[8], source, lineno), to_number<double>(tok[9], source, lineno)};
        if (g.frame < 0) fail(source, lineno, "negative frame");
        auto it = classes.find(tok[2]);
        if (tok[2] == "DontCare" || it == classes.end()) {
            g.ambiguous = true;
            g.class_id = 0;
        } else {
            g.class_id = it->second;
            if (!g.box.well_formed()) fail(source, lineno, "box coordinates must increase");
        }
        // Ignore regions may be degenerate; they only need to be usable for overlap tests.
        if (g.ambiguous && !g.box.well_formed()) continue;
        gts.push_back(g);
    }
    return gts;
}

std::vector<GroundTruthBox> parse_gt_labels(const std::string& path, const ClassMap& classes) {
    auto in = open_input(path);
    return read_gt_labels(in, classes, path);
}

void write_gt_labels(std::ostream& out, const std::vector<GroundTruthBox>& gts) {
    for (const auto& g : gts) {
        out << g.frame << ' ' << (g.ambiguous ? -1 : g.track_id) << ' ' << (g.ambiguous ? "DontCare" : class_name(g.class_id))
            << " 0 0 -10 " << shortest(g.box.x1) << ' ' << shortest(g.box.y1) << ' ' << shortest(g.box.x2) << ' '
            << shortest(g.box.y2) << " -1 -1 -1 -1000 -1000 -1000 -10\n";
    }
}

// ---------------------------------------------------------------------------
// Weights

WeightVector read_weights(std::istream& in, const std::string& source) {
    // Blocks in any order; values may wrap lines.
    std::map<std::string, std::vector<double>> blocks;
    int K = -1, D = -1;
    std::string current;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (skip_line(line)) continue;
        const auto tok = split(line);
        const bool is_name = std::isalpha(static_cast<unsigned char>(tok[0][0]));
        size_t start = 0;
        if (is_name) {
            current = tok[0];
            if (current != "birth" && current != "death" && current != "appearance" && current != "transition" &&
                current != "pairwise")
                fail(source, lineno, "unknown block '" + current + "'");
            if (blocks.count(current)) fail(source, lineno, "duplicate block '" + current + "'");
            blocks[current];
            start = 1;
            if (current == "pairwise") {
                if (tok.size() < 3) fail(source, lineno, "pairwise header needs K and D");
                K = to_number<int>(tok[1], source, lineno);
                D = to_number<int>(tok[2], source, lineno);
                if (K < 1 || D < 1) fail(source, lineno, "pairwise K and D must be positive");
                start = 3;
            }
        } else if (current.empty()) {
            fail(source, lineno, "values before the first block name");
        }
        for (size_t k = start; k < tok.size(); ++k) blocks[current].push_back(to_number<double>(tok[k], source, lineno));
    }
    for (const char* name : {"birth", "death", "appearance", "transition", "pairwise"})
        if (!blocks.count(name)) throw InputError(source + ": missing block '" + name + "'");
    const auto& t = blocks["transition"];
    if (blocks["birth"].size() != 1 || blocks["death"].size() != 1 || blocks["appearance"].size() != 2 || t.empty() ||
        t.size() % 2 != 0 || blocks["pairwise"].size() != size_t(K) * K * D)
        throw InputError(source + ": weight block sizes are inconsistent");

    WeightLayout layout{K, D, static_cast<int>(t.size() / 2)};
    WeightVector w(layout);
    w.birth() = blocks["birth"][0];
    w.death() = blocks["death"][0];
    w.appearance() = Eigen::Map<const Eigen::Vector2d>(blocks["appearance"].data());
    w.transition() = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    w.pairwise() = Eigen::Map<const Eigen::VectorXd>(blocks["pairwise"].data(), layout.pairwise_size());
    return w;
}

WeightVector parse_weights(const std::string& path) {
    auto in = open_input(path);
    return read_weights(in, path);
}

void write_weights(std::ostream& out, const WeightVector& w) {
    auto row = [&](auto values) {
        for (Eigen::Index k = 0; k < values.size(); ++k) out << (k ? " " : "") << digits(values[k], 17);
        out << '\n';
    };
    const auto& layout = w.layout();
    out << "birth\n" << digits(w.birth(), 17) << '\n';
    out << "death\n" << digits(w.death(), 17) << '\n';
    out << "appearance\n";
    row(w.appearance());
    out << "transition\n";
    row(w.transition());
    out << "pairwise " << layout.num_classes << ' ' << layout.relation_dim << '\n';
    for (int a = 0; a < layout.num_classes; ++a)
        for (int b = 0; b < layout.num_classes; ++b) row(w.pairwise_block(a, b));
}

void save_weights(const std::string& path, const WeightVector& w) {
    std::ostringstream ss;
    write_weights(ss, w);
    write_file(path, ss.str());
}

// ---------------------------------------------------------------------------
// Tracks

std::vector<TrackBox> read_tracks(std::istream& in, const std::string& source) {
    std::vector<TrackBox> tracks;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (skip_line(line)) continue;
        const auto tok = split(line);
        if (tok.size() != 8) fail(source, lineno, "expected 8 fields, got " + std::to_string(tok.size()));
        TrackBox t;
        t.frame = to_number<int>(tok[0], source, lineno);
        t.track_id = to_number<int>(tok[1], source, lineno);
        t.class_id = to_number<int>(tok[2], source, lineno);
        t.box = {to_number<double>(tok[3], source, lineno), to_number<double>(tok[4], source, lineno),
                 to_number<double>(tok[5], source, lineno), to_number<double>(tok[6], source, lineno)};
        t.score = to_number<double>(tok[7], source, lineno);
        if (!t.box.well_formed()) fail(source, lineno, "box coordinates must increase");
        tracks.push_back(t);
    }
    return tracks;
}

std::vector<TrackBox> parse_tracks(const std::string& path) {
    auto in = open_input(path);
    return read_tracks(in, path);
}

void write_tracks(std::ostream& out, const std::vector<TrackBox>& tracks) {
    for (const auto& t : tracks)
        out << t.frame << ' ' << t.track_id << ' ' << t.class_id << ' ' << digits(t.box.x1, 6) << ' ' << digits(t.box.y1, 6)
            << ' ' << digits(t.box.x2, 6) << ' ' << digits(t.box.y2, 6) << ' ' << digits(t.score, 6) << '\n';
}

std::vector<TrackBox> tracks_from_flow(const TrackingGraph& g, const FlowSolution& f) {
    std::vector<TrackBox> out;
    const auto tracks = extract_tracks(g, f);
    for (size_t id = 0; id < tracks.size(); ++id)
        for (int node : tracks[id]) {
            const auto& d = g.detections()[node];
            out.push_back({d.frame, static_cast<int>(id), d.class_id, d.box, d.score});
        }
    std::stable_sort(out.begin(), out.end(), [](const TrackBox& a, const TrackBox& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
    });
    return out;
}

}  // namespace qflow
