// Command-line front end: synth, track, train, eval, bench.

#include "qflow/bench.hpp"
#include "qflow/errors.hpp"
#include "qflow/evaluation.hpp"
#include "qflow/io.hpp"
#include "qflow/learning.hpp"
#include "qflow/synth.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace qflow;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<TrackBox> smooth_all(const std::vector<TrackBox>& boxes) {
    std::map<int, std::vector<TrackBox>> by_track;
    for (const auto& b : boxes) by_track[b.track_id].push_back(b);
    std::vector<TrackBox> out;
    for (const auto& [id, track] : by_track)
        for (const auto& b : smooth_track(track)) out.push_back(b);
    std::stable_sort(out.begin(), out.end(), [](const TrackBox& a, const TrackBox& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
    });
    return out;
}

int max_class(const std::vector<Sequence>& suite) {
    int k = 0;
    for (const auto& s : suite) {
        for (const auto& d : s.detections) k = std::max(k, d.class_id);
        for (const auto& g : s.gts)
            if (!g.ambiguous) k = std::max(k, g.class_id);
    }
    return k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Min-cost-flow multi-object tracking with pairwise interactions"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic suite");
    std::string synth_config, synth_out;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--config", synth_config, "JSON scene configuration")->required();
    synth->add_option("--out-dir", synth_out, "Output directory")->required();
    synth->add_option("--seed", synth_seed, "Overrides the configured seed");

    // track
    auto* track = app.add_subcommand("track", "Link detections into tracks");
    std::string track_dets, track_weights, track_method = "dp1q", track_out;
    bool track_smooth = false;
    GraphParams track_params;
    track->add_option("--dets", track_dets, "Detection file")->required();
    track->add_option("--weights", track_weights, "Weight file")->required();
    track->add_option("--method", track_method, "ssp|dp1|dp2|dp1q|dp2q|lp")->capture_default_str();
    track->add_option("--out", track_out, "Track file")->required();
    track->add_flag("--smooth", track_smooth, "Cubic B-spline smoothing of every track");
    track->add_option("--score-threshold", track_params.score_threshold)->capture_default_str();
    track->add_option("--link-threshold", track_params.link_threshold)->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "Structured-SVM training on a labelled suite");
    std::string train_data, train_method = "dp", train_out;
    TrainingOptions train_opts;
    int train_chunk = 10, train_overlap = 5, train_classes = 0;
    GraphParams train_params;
    train->add_option("--data", train_data, "Directory of NNNN.dets / NNNN.labels")->required();
    train->add_option("--c", train_opts.C, "Regularisation constant")->capture_default_str();
    train->add_option("--method", train_method, "dp|lp")->capture_default_str();
    train->add_option("--out", train_out, "Weight file")->required();
    train->add_option("--eps", train_opts.eps)->capture_default_str();
    train->add_option("--max-iter", train_opts.max_iterations)->capture_default_str();
    train->add_option("--chunk", train_chunk, "Window length in frames, 0 for whole sequences")->capture_default_str();
    train->add_option("--overlap", train_overlap)->capture_default_str();
    train->add_option("--num-classes", train_classes, "Defaults to the largest class id seen + 1");
    train->add_option("--score-threshold", train_params.score_threshold)->capture_default_str();
    train->add_option("--link-threshold", train_params.link_threshold)->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "CLEAR-MOT metrics of a track file");
    std::string eval_tracks, eval_gt, eval_csv;
    double eval_iou = 0.5;
    int eval_classes = 8;
    eval->add_option("--tracks", eval_tracks)->required();
    eval->add_option("--gt", eval_gt, "KITTI label file")->required();
    eval->add_option("--iou", eval_iou)->capture_default_str();
    eval->add_option("--num-classes", eval_classes, "Number of mapped class names")->capture_default_str();
    eval->add_option("--csv", eval_csv, "Also write the report as CSV");

    // bench
    auto* bench = app.add_subcommand("bench", "Compare solvers on a suite");
    std::string bench_suite, bench_methods = "dp1q,dp2q,lp", bench_out, bench_weights, bench_cumulative, bench_svg;
    GraphParams bench_params;
    bench->add_option("--suite", bench_suite, "Directory of NNNN.dets")->required();
    bench->add_option("--methods", bench_methods, "Comma-separated list")->capture_default_str();
    bench->add_option("--out", bench_out, "Per-row CSV")->required();
    bench->add_option("--weights", bench_weights, "Weight file (default: hand-set weights)");
    bench->add_option("--cumulative", bench_cumulative, "Cumulative-curve CSV");
    bench->add_option("--svg", bench_svg, "Cumulative-curve plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            SynthConfig cfg = load_synth_config(synth_config);
            if (synth_seed) cfg.seed = *synth_seed;
            write_suite(synth_suite(cfg), synth_out);
        } else if (*track) {
            if (!is_method(track_method)) throw InputError("unknown method '" + track_method + "'");
            const WeightVector w = parse_weights(track_weights);
            track_params.num_classes = w.layout().num_classes;
            track_params.max_gap = w.layout().max_gap;
            auto graph = std::make_shared<const TrackingGraph>(build_graph(parse_detections(track_dets), track_params));
            const auto out = run_method(assign_costs(graph, w), track_method);
            check_feasible(*graph, out.flow);
            auto boxes = tracks_from_flow(*graph, out.flow);
            if (track_smooth) boxes = smooth_all(boxes);
            std::ostringstream ss;
            write_tracks(ss, boxes);
            write_file(track_out, ss.str());
        } else if (*train) {
            InferenceMethod method;
            if (train_method == "dp") method = InferenceMethod::kGreedyDp;
            else if (train_method == "lp") method = InferenceMethod::kLp;
            else throw InputError("unknown training method '" + train_method + "'");
            train_opts.method = method;
            const auto suite = read_suite(train_data);
            if (suite.empty()) throw InputError("no sequences in " + train_data);
            train_params.num_classes = train_classes > 0 ? train_classes : max_class(suite) + 1;
            std::vector<TrainingProblem> problems;
            for (const auto& s : suite) {
                if (train_chunk > 0) {
                    for (auto& p : chunk_sequences(s, train_chunk, train_overlap, train_params)) problems.push_back(std::move(p));
                } else {
                    problems.push_back(make_training_problem(s, train_params));
                }
            }
            const auto result = cutting_plane_train(problems, train_opts);
            for (size_t k = 0; k < result.history.size(); ++k) {
                const auto& h = result.history[k];
                std::printf("iter %3zu  violation %.6g  xi %.6g  objective %.6g\n", k + 1, h.violation, h.xi, h.master_objective);
            }
            std::printf("%s after %d iterations\n", result.converged ? "converged" : "stopped", result.iterations());
            save_weights(train_out, result.weights);
        } else if (*eval) {
            const auto report = clear_mot(parse_tracks(eval_tracks), parse_gt_labels(eval_gt, default_class_map(eval_classes)), eval_iou);
            std::cout << format_report(report);
            if (!eval_csv.empty()) write_file(eval_csv, report_csv_header() + report_csv_row(report));
        } else if (*bench) {
            const auto methods = split_list(bench_methods);
            for (const auto& m : methods)
                if (!is_method(m)) throw InputError("unknown method '" + m + "'");
            const auto suite = read_suite(bench_suite);
            std::optional<WeightVector> w;
            if (!bench_weights.empty()) w = parse_weights(bench_weights);
            bench_params.num_classes = w ? w->layout().num_classes : max_class(suite) + 1;
            std::vector<std::pair<std::string, CostedGraph>> instances;
            for (size_t k = 0; k < suite.size(); ++k) {
                auto graph = std::make_shared<const TrackingGraph>(build_graph(suite[k].detections, bench_params));
                const WeightVector weights = w ? *w : default_weights(WeightLayout::of(*graph));
                instances.push_back({std::to_string(k), assign_costs(graph, weights)});
            }
            const auto report = bench_run(instances, methods);
            write_file(bench_out, report.csv());
            if (!bench_cumulative.empty()) write_file(bench_cumulative, report.cumulative_csv());
            if (!bench_svg.empty()) write_file(bench_svg, report.svg());
            std::cout << report.summary();
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
