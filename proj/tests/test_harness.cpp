#include "qflow/bench.hpp"
#include "qflow/errors.hpp"
#include "qflow/io.hpp"
#include "qflow/synth.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qflow_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(const std::string& args) {
    const int status = std::system((std::string(QFLOW_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Io, DetectionsRoundTripExactly) {
    SynthConfig cfg;
    cfg.num_frames = 15;
    const auto dets = synth_scene(cfg).detections;
    std::stringstream ss;
    write_detections(ss, dets);
    const auto back = read_detections(ss);
    ASSERT_EQ(back.size(), dets.size());
    for (size_t k = 0; k < dets.size(); ++k) {
        EXPECT_EQ(back[k].box, dets[k].box);
        EXPECT_EQ(back[k].score, dets[k].score);
        EXPECT_EQ(back[k].frame, dets[k].frame);
        EXPECT_EQ(back[k].id, static_cast<int>(k));
    }
}

TEST(Io, MalformedLinesReportSourceAndLine) {
    std::stringstream ss("# header\n0 0 1 2 3 4 0.5\n1 0 1 2 3\n");
    try {
        read_detections(ss, "x.dets");
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("x.dets:3"), std::string::npos);
    }
    std::stringstream bad_box("0 0 5 2 3 4 0.5\n");
    EXPECT_THROW(read_detections(bad_box), InputError);
}

TEST(Io, LabelsMapClassesAndIgnoreRegions) {
    std::stringstream ss(
        "0 1 Car 0 0 -10 1 2 11 12 -1 -1 -1 -1000 -1000 -1000 -10\n"
        "0 -1 DontCare -1 -1 -10 5 5 20 20 -1 -1 -1 -1000 -1000 -1000 -10\n"
        "1 2 Pedestrian 0 0 -10 1 2 11 12 -1 -1 -1 -1000 -1000 -1000 -10\n"
        "1 3 Tram 0 0 -10 1 2 11 12 -1 -1 -1 -1000 -1000 -1000 -10\n");
    const auto gts = read_gt_labels(ss, default_class_map(2));
    ASSERT_EQ(gts.size(), 4u);
    EXPECT_FALSE(gts[0].ambiguous);
    EXPECT_EQ(gts[0].box, (Box{1, 2, 11, 12}));
    EXPECT_TRUE(gts[1].ambiguous);
    EXPECT_EQ(gts[2].class_id, 1);
    EXPECT_TRUE(gts[3].ambiguous);
    std::stringstream out;
    write_gt_labels(out, {gts[0], gts[2]});
    const auto back = read_gt_labels(out, default_class_map(2));
    EXPECT_EQ(back[1].track_id, 2);
    EXPECT_EQ(back[1].class_id, 1);
    EXPECT_EQ(class_name(4), "Class4");
}

TEST(Io, WeightsRoundTripBitExact) {
    WeightVector w(WeightLayout{2, kRelationDim, 3});
    std::mt19937_64 rng(61);
    std::normal_distribution<double> n01;
    for (auto& x : w.values()) x = n01(rng) / 3.0;
    std::stringstream ss;
    write_weights(ss, w);
    const WeightVector back = read_weights(ss);
    EXPECT_EQ(back.layout(), w.layout());
    EXPECT_EQ(back.values(), w.values());
    std::stringstream truncated("birth\n1\ndeath\n1\n");
    EXPECT_THROW(read_weights(truncated), InputError);
}

TEST(Io, TracksFromFlowNumberTracksInOrder) {
    const std::vector<Detection> dets = {qflow::testing::det_at(0, 0, 0.0), qflow::testing::det_at(1, 0, 50.0),
                                         qflow::testing::det_at(2, 1, 0.0)};
    const auto g = build_graph(dets, GraphParams{});
    FlowSolution f = FlowSolution::zero(g);
    f.det.setOnes();
    f.birth << 1, 1, 0;
    f.death << 0, 1, 1;
    f.trans[0] = 1;
    const auto boxes = tracks_from_flow(g, f);
    ASSERT_EQ(boxes.size(), 3u);
    EXPECT_EQ(boxes[0].track_id, 0);
    EXPECT_EQ(boxes[1].track_id, 1);
    EXPECT_EQ(boxes[2].track_id, 0);
    std::stringstream ss;
    write_tracks(ss, boxes);
    EXPECT_EQ(read_tracks(ss).size(), 3u);
}

TEST(Synth, SeededAndScenarioShaped) {
    SynthConfig cfg;
    cfg.num_frames = 40;
    cfg.overlap_clutter = true;
    const Sequence a = synth_scene(cfg, 0), b = synth_scene(cfg, 0), c = synth_scene(cfg, 1);
    ASSERT_EQ(a.detections.size(), b.detections.size());
    for (size_t k = 0; k < a.detections.size(); ++k) EXPECT_EQ(a.detections[k].box, b.detections[k].box);
    EXPECT_NE(a.detections.size(), c.detections.size());
    // clutter: many detections sit strictly inside another one of the same frame
    int stacked = 0;
    for (const auto& d : a.detections)
        for (const auto& e : a.detections)
            if (d.id != e.id && d.frame == e.frame && spatial_relation(d.box, e.box)[kStrictlyOverlap] == 0.0 &&
                spatial_relation(e.box, d.box)[kStrictlyOverlap] == 1.0)
                ++stacked;
    EXPECT_GT(stacked, 20);
    for (const auto& gt : a.gts) {
        EXPECT_GE(gt.frame, 0);
        EXPECT_LT(gt.frame, 40);
        EXPECT_TRUE(gt.box.well_formed());
    }
}

TEST(Synth, NoiselessDetectionsEqualLabels) {
    SynthConfig cfg;
    cfg.num_frames = 30;
    cfg.miss_rate = 0.0;
    cfg.false_positive_rate = 0.0;
    cfg.detection_noise = 0.0;
    const Sequence s = synth_scene(cfg);
    ASSERT_EQ(s.detections.size(), s.gts.size());
    for (const auto& gt : s.gts) {
        int hits = 0;
        for (const auto& d : s.detections) hits += d.frame == gt.frame && d.box == gt.box;
        EXPECT_EQ(hits, 1);
    }
}

TEST(Synth, ConfigParsing) {
    const auto cfg = parse_synth_config(R"({"num_sequences": 3, "image_size": [640, 480], "scenarios": ["co_occurrence"],
                                            "score_model": {"mean_true": 2.0}})");
    EXPECT_EQ(cfg.num_sequences, 3);
    EXPECT_EQ(cfg.image_width, 640.0);
    EXPECT_TRUE(cfg.co_occurrence);
    EXPECT_FALSE(cfg.overlap_clutter);
    EXPECT_EQ(cfg.score_model.mean_true, 2.0);
    EXPECT_THROW(parse_synth_config(R"({"num_frame": 3})"), InputError);
    EXPECT_THROW(parse_synth_config(R"({"miss_rate": 1.5})"), InputError);
    EXPECT_THROW(parse_synth_config("[1, 2"), InputError);
}

TEST(Synth, SuiteRoundTripsThroughFiles) {
    SynthConfig cfg;
    cfg.num_sequences = 2;
    cfg.num_frames = 12;
    cfg.num_classes = 2;
    const auto dir = scratch("suite");
    const auto suite = synth_suite(cfg);
    write_suite(suite, dir.string());
    const auto back = read_suite(dir.string());
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].detections.size(), suite[1].detections.size());
    EXPECT_EQ(back[1].gts.size(), suite[1].gts.size());
    fs::remove_all(dir);
}

TEST(Bench, ReportsGapsAndTimes) {
    std::mt19937_64 rng(62);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 12;
    spec.pair_prob = 0.5;
    std::vector<std::pair<std::string, CostedGraph>> instances;
    for (int k = 0; k < 5; ++k) instances.push_back({std::to_string(k), qflow::testing::random_instance(rng, spec)});
    const auto r = bench_run(instances, {"dp1q", "lp"});
    EXPECT_EQ(r.rows.size(), 10u);
    for (const auto& row : r.rows) {
        EXPECT_FALSE(std::isnan(row.lower_bound));
        EXPECT_GE(row.objective, row.lower_bound - 1e-7);
    }
    EXPECT_GE(r.median_gap("lp"), 0.0);
    EXPECT_NE(r.csv().find("instance,method"), std::string::npos);
    EXPECT_NE(r.svg().find("<polyline"), std::string::npos);
    EXPECT_TRUE(std::isnan(bench_run(instances, {"dp1"}).median_gap("dp1")));
    EXPECT_THROW(bench_run(instances, {"nope"}), InputError);
}

TEST(Bench, DefaultWeightsPenaliseStackedBoxes) {
    const WeightVector w = default_weights(WeightLayout{2, kRelationDim, 8});
    EXPECT_LT(w.pairwise_block(1, 1)[kStrictlyOverlap], 0.0);
    EXPECT_EQ(w.pairwise_block(0, 1)[kStrictlyOverlap], 0.0);
    EXPECT_GT(w.appearance()[0], 0.0);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const std::string d = dir.string();
    EXPECT_EQ(cli("synth --config " QFLOW_DATA_DIR "/train_suite.json --out-dir " + d + "/s --seed 3"), 0);
    EXPECT_TRUE(fs::exists(dir / "s" / "0000.dets"));
    EXPECT_EQ(cli("bench --suite " + d + "/s --methods dp1q,dp2q --out " + d + "/b.csv"), 0);
    EXPECT_EQ(cli("track --dets " + d + "/s/0000.dets --weights " + d + "/missing.txt --out " + d + "/t.txt"), 1);
    EXPECT_EQ(cli("track --bogus"), 1);
    EXPECT_EQ(cli("bench --suite " + d + "/s --methods nope --out " + d + "/b.csv"), 1);
    EXPECT_EQ(cli("--help"), 0);
    fs::remove_all(dir);
}
