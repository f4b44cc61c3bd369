#include "qflow/synth.hpp"

#include "qflow/errors.hpp"
#include "qflow/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace qflow {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (num_sequences < 1 || num_frames < 1 || num_tracks < 0 || num_classes < 1) throw InputError("synth counts out of range");
    if (!(image_width > 0.0 && image_height > 0.0)) throw InputError("image size must be positive");
    if (!(min_width > 0.0 && max_width >= min_width)) throw InputError("box width range invalid");
    if (!(max_speed >= 0.0) || !(detection_noise >= 0.0) || !(score_model.std >= 0.0))
        throw InputError("speed, noise and score std must be nonnegative");
    if (min_length < 1) throw InputError("min_length must be >= 1");
    if (!prob(miss_rate) || !prob(false_positive_rate)) throw InputError("rates must lie in [0, 1]");
}

SynthConfig parse_synth_config(const std::string& json_text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("synth config: ") + e.what());
    }
    if (!j.is_object()) throw InputError("synth config must be a JSON object");
    static const std::set<std::string> known = {"num_sequences", "num_frames", "num_tracks", "num_classes",
                                                "image_size", "min_width", "max_width", "max_speed",
                                                "min_length", "detection_noise", "miss_rate", "false_positive_rate",
                                                "score_model", "scenarios", "seed"};
    SynthConfig c;
    try {
        for (const auto& [key, value] : j.items())
            if (!known.count(key)) throw InputError("synth config: unknown key '" + key + "'");
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("num_sequences", c.num_sequences);
        get("num_frames", c.num_frames);
        get("num_tracks", c.num_tracks);
        get("num_classes", c.num_classes);
        get("min_width", c.min_width);
        get("max_width", c.max_width);
        get("max_speed", c.max_speed);
        get("min_length", c.min_length);
        get("detection_noise", c.detection_noise);
        get("miss_rate", c.miss_rate);
        get("false_positive_rate", c.false_positive_rate);
        get("seed", c.seed);
        if (j.contains("image_size")) {
            const auto& s = j.at("image_size");
            if (!s.is_array() || s.size() != 2) throw InputError("synth config: image_size must be [width, height]");
            c.image_width = s[0].get<double>();
            c.image_height = s[1].get<double>();
        }
        if (j.contains("score_model")) {
            const auto& s = j.at("score_model");
            if (s.contains("mean_true")) c.score_model.mean_true = s.at("mean_true").get<double>();
            if (s.contains("mean_false")) c.score_model.mean_false = s.at("mean_false").get<double>();
            if (s.contains("std")) c.score_model.std = s.at("std").get<double>();
        }
        if (j.contains("scenarios")) {
            for (const auto& s : j.at("scenarios")) {
                const auto name = s.get<std::string>();
                if (name == "overlap_clutter") c.overlap_clutter = true;
                else if (name == "co_occurrence") c.co_occurrence = true;
                else if (name != "none") throw InputError("synth config: unknown scenario '" + name + "'");
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("synth config: ") + e.what());
    }
    c.validate();
    return c;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_synth_config(ss.str());
}

namespace {

double aspect_ratio(int class_id) {
    static const double kAspect[] = {0.6, 2.2, 1.4};
    return class_id < 3 ? kAspect[class_id] : 1.0;
}

// Targets moving rigidly together.
struct Group {
    struct Member {
        int track_id;
        int class_id;
        double dx;
        double w, h;
    };
    std::vector<Member> members;
    int start = 0;
    int stop = 0;  // exclusive
    Eigen::Vector2d center, velocity;
    double left = 0, right = 0, top = 0, bottom = 0;  // extents relative to center
};

}  // namespace

Sequence synth_scene(const SynthConfig& cfg, int index) {
    cfg.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto normal = [&](double mean, double sd) { return sd > 0.0 ? std::normal_distribution<double>(mean, sd)(rng) : mean; };
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

    const int length_lo = std::min(cfg.min_length, cfg.num_frames);
    std::vector<Group> groups;
    for (int t = 0; t < cfg.num_tracks;) {
        Group g;
        const int cls = pick(cfg.num_classes);
        const double w = uniform(cfg.min_width, cfg.max_width);
        g.members.push_back({t++, cls, 0.0, w, w * aspect_ratio(cls)});
        if (cfg.co_occurrence && t < cfg.num_tracks) {
            const int cls2 = (cls + 1) % cfg.num_classes;
            const double w2 = uniform(cfg.min_width, cfg.max_width);
            g.members.push_back({t++, cls2, 0.65 * (w + w2), w2, w2 * aspect_ratio(cls2)});
        }
        const int length = length_lo + pick(cfg.num_frames - length_lo + 1);
        g.start = pick(cfg.num_frames - length + 1);
        g.stop = g.start + length;
        g.left = g.top = 1e300;
        g.right = g.bottom = -1e300;
        for (const auto& m : g.members) {
            g.left = std::min(g.left, m.dx - m.w / 2);
            g.right = std::max(g.right, m.dx + m.w / 2);
            g.top = std::min(g.top, -m.h / 2);
            g.bottom = std::max(g.bottom, m.h / 2);
        }
        const double x_lo = -g.left, x_hi = std::max(x_lo, cfg.image_width - g.right);
        const double y_lo = -g.top, y_hi = std::max(y_lo, cfg.image_height - g.bottom);
        g.center = {uniform(x_lo, x_hi), uniform(y_lo, y_hi)};
        g.velocity = {uniform(-cfg.max_speed, cfg.max_speed), uniform(-cfg.max_speed, cfg.max_speed)};
        groups.push_back(g);
    }

    Sequence out;
    int next_id = 0;
    for (int frame = 0; frame < cfg.num_frames; ++frame) {
        for (auto& g : groups) {
            if (frame < g.start || frame >= g.stop) continue;
            if (frame > g.start) {
                // Constant velocity with reflection at the image border.
                g.center += g.velocity;
                auto bounce = [](double& c, double& v, double lo, double hi) {
                    if (hi <= lo) return;
                    if (c < lo) c = 2 * lo - c, v = -v;
                    if (c > hi) c = 2 * hi - c, v = -v;
                    c = std::clamp(c, lo, hi);
                };
                bounce(g.center.x(), g.velocity.x(), -g.left, cfg.image_width - g.right);
                bounce(g.center.y(), g.velocity.y(), -g.top, cfg.image_height - g.bottom);
            }
            for (const auto& m : g.members) {
                const Box truth = Box::from_center(g.center.x() + m.dx, g.center.y(), m.w, m.h);
                out.gts.push_back({frame, m.track_id, m.class_id, truth, false});

                auto emit = [&](const Box& base, double noise) {
                    Box b{base.x1 + normal(0, noise), base.y1 + normal(0, noise), base.x2 + normal(0, noise),
                          base.y2 + normal(0, noise)};
                    if (!b.well_formed()) b = base;
                    const double score = normal(cfg.score_model.mean_true, cfg.score_model.std);
                    out.detections.push_back({next_id++, frame, m.class_id, b, score, g.velocity});
                };
                if (uniform(0, 1) >= cfg.miss_rate) emit(truth, cfg.detection_noise);
                if (cfg.overlap_clutter && uniform(0, 1) >= cfg.miss_rate) {
                    const double s = uniform(0.8, 0.92);
                    const auto c = truth.center();
                    emit(Box::from_center(c.x(), c.y(), s * m.w, s * m.h), cfg.detection_noise / 2);
                }
            }
        }
        for (int k = 0; k < cfg.num_tracks; ++k) {
            if (uniform(0, 1) >= cfg.false_positive_rate) continue;
            const int cls = pick(cfg.num_classes);
            const double w = uniform(cfg.min_width, cfg.max_width), h = w * aspect_ratio(cls);
            const Box b = Box::from_center(uniform(0, cfg.image_width), uniform(0, cfg.image_height), w, h);
            const double score = normal(cfg.score_model.mean_false, cfg.score_model.std);
            out.detections.push_back({next_id++, frame, cls, b, score, Eigen::Vector2d::Zero()});
        }
    }
    return out;
}

std::vector<Sequence> synth_suite(const SynthConfig& cfg) {
    std::vector<Sequence> suite;
    for (int k = 0; k < cfg.num_sequences; ++k) suite.push_back(synth_scene(cfg, k));
    return suite;
}

namespace {

std::string sequence_stem(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", index);
    return buf;
}

}  // namespace

void write_suite(const std::vector<Sequence>& suite, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw InputError("cannot create " + out_dir + ": " + ec.message());
    for (size_t k = 0; k < suite.size(); ++k) {
        const fs::path stem = fs::path(out_dir) / sequence_stem(static_cast<int>(k));
        std::ostringstream dets, labels;
        write_detections(dets, suite[k].detections);
        write_gt_labels(labels, suite[k].gts);
        write_file(stem.string() + ".dets", dets.str());
        write_file(stem.string() + ".labels", labels.str());
    }
}

std::vector<Sequence> read_suite(const std::string& dir, int num_classes_hint) {
    if (!fs::is_directory(dir)) throw InputError(dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".dets") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Sequence> suite;
    const ClassMap classes = default_class_map(num_classes_hint);
    for (const auto& path : files) {
        Sequence s;
        s.detections = parse_detections(path.string());
        fs::path labels = path;
        labels.replace_extension(".labels");
        if (fs::exists(labels)) s.gts = parse_gt_labels(labels.string(), classes);
        suite.push_back(std::move(s));
    }
    return suite;
}

}  // namespace qflow
