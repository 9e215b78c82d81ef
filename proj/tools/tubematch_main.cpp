#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tubematch/eval.hpp"
#include "tubematch/io.hpp"
#include "tubematch/matching.hpp"
#include "tubematch/parallel.hpp"
#include "tubematch/shift.hpp"
#include "tubematch/simulator.hpp"
#include "tubematch/tubes.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tubematch;

// "1/8", "1/4" or a plain decimal.
double parse_fraction(const std::string& text) {
    const std::size_t slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            const double num = std::stod(text.substr(0, slash));
            const double den = std::stod(text.substr(slash + 1));
            if (den == 0.0) throw std::invalid_argument("zero denominator");
            return num / den;
        }
        return std::stod(text);
    } catch (const std::exception&) {
        throw std::runtime_error("cannot parse fraction '" + text + "'");
    }
}

std::vector<double> parse_threshold_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::runtime_error("cannot parse threshold '" + item + "'");
        }
        if (!(out.back() >= 0.0 && out.back() <= 1.0)) {
            throw std::runtime_error("threshold " + item + " outside [0, 1]");
        }
        pos = comma + 1;
    }
    if (out.empty()) {
        throw std::runtime_error("empty threshold list");
    }
    return out;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path == "-") {
        std::cout << content;
    } else {
        write_file_atomic(out_path, content);
    }
}

struct SimulateOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int run_simulate(const SimulateOptions& opt) {
    SceneConfig cfg = read_scene_config(opt.config_path);
    if (opt.seed_set) cfg.seed = opt.seed;

    const SyntheticScene scene = generate_scene(cfg);
    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);

    const std::string video_id = "scene-" + std::to_string(cfg.seed);
    write_feature_file(dir / "features.qft", scene.clip);
    write_detections_jsonl(dir / "detections.jsonl", {{video_id, scene.detections}});
    write_tubes_jsonl(dir / "gt_tubes.jsonl", {{video_id, scene.gt_tubes}});
    write_alignment_json(dir / "planted_alignment.json", scene.planted_perms);
    return 0;
}

int run_match(const std::string& features_path, const std::string& out_path) {
    const FeatureClip clip = read_feature_file(features_path);
    const TrackAlignment align = match_clip(clip);
    write_alignment_json(out_path, align);
    return 0;
}

struct ShiftOptions {
    std::string features_path;
    std::string forward = "1/8";
    std::string backward = "1/8";
    std::string alignment = "naive";
    std::string out_path;
};

int run_shift(const ShiftOptions& opt) {
    const FeatureClip clip = read_feature_file(opt.features_path);
    ShiftSpec spec;
    spec.forward_fraction = parse_fraction(opt.forward);
    spec.backward_fraction = parse_fraction(opt.backward);

    FeatureClip shifted = [&] {
        if (opt.alignment == "naive") {
            spec.alignment = AlignmentMode::index_naive;
            return temporal_shift(clip, spec);
        }
        spec.alignment = AlignmentMode::matched;
        const TrackAlignment align = read_alignment_json(opt.alignment);
        return matched_shift(clip, spec, align);
    }();
    write_feature_file(opt.out_path, shifted);
    return 0;
}

struct LinkOptions {
    std::string detections_path;
    LinkParams params;
    std::string out_path;
};

int run_link(const LinkOptions& opt) {
    const std::vector<VideoDetections> videos = read_detections_jsonl(opt.detections_path);
    std::size_t classes = 0;
    for (const VideoDetections& video : videos) {
        for (const auto& frame : video.frames) {
            for (const FrameDetection& det : frame) {
                classes = std::max(classes, det.class_scores.size());
            }
        }
    }
    std::vector<VideoTubes> result;
    for (const VideoDetections& video : videos) {
        if (video.frames.empty()) continue;
        result.push_back({video.video_id, link_all_classes(video.frames, classes, opt.params)});
    }
    write_tubes_jsonl(opt.out_path, result);
    return 0;
}

struct EvalOptions {
    std::string pred_path;
    std::string gt_path;
    std::string metric;
    std::string thresholds = "0.5,0.75";
    std::string interpolation = "all_point";
    std::string out_path = "-";
};

int run_eval(const EvalOptions& opt) {
    const std::vector<double> thresholds = parse_threshold_list(opt.thresholds);
    ApInterpolation interp;
    if (opt.interpolation == "all_point") {
        interp = ApInterpolation::all_point;
    } else if (opt.interpolation == "eleven_point") {
        interp = ApInterpolation::eleven_point;
    } else {
        throw std::runtime_error("unknown interpolation '" + opt.interpolation + "'");
    }

    const std::vector<VideoTubes> gt = read_tubes_jsonl(opt.gt_path);
    MetricTable table;
    if (opt.metric == "frame") {
        table = frame_map(read_detections_jsonl(opt.pred_path), gt, thresholds, interp);
    } else if (opt.metric == "video") {
        table = video_map(read_tubes_jsonl(opt.pred_path), gt, thresholds, interp);
    } else {
        throw std::runtime_error("unknown metric '" + opt.metric + "' (expected frame or video)");
    }
    emit(opt.out_path, eval_report_to_json(table, opt.metric, interp));
    return 0;
}

struct AblationOptions {
    std::string config_path;
    int trials = 20;
    std::string fractions = "1/8";
    LinkParams link;
    std::string out_path = "-";
    std::string csv_path;
};

int run_ablation_cmd(const AblationOptions& opt) {
    const SceneConfig cfg = read_scene_config(opt.config_path);
    ShiftSpec spec;
    spec.forward_fraction = parse_fraction(opt.fractions);
    spec.backward_fraction = spec.forward_fraction;
    spec.position = ShiftPosition::query;

    const AblationReport report = run_ablation(cfg, spec, opt.trials, opt.link);
    emit(opt.out_path, ablation_report_to_json(report));
    if (!opt.csv_path.empty()) {
        write_file_atomic(opt.csv_path, ablation_report_to_csv(report));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("TUBEMATCH_THREADS")) {
        const auto cap = parse_thread_cap(env);
        if (!cap) {
            std::cerr << "error: TUBEMATCH_THREADS must be a non-negative integer, got '" << env
                      << "'\n";
            return 1;
        }
        set_thread_cap(*cap);
    }

    CLI::App app{"query matching, temporal feature shift, tube linking and detection evaluation"};
    app.require_subcommand(1);

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic scene");
    simulate->add_option("config", sim.config_path, "scene config file")->required();
    simulate->add_option("--seed", sim.seed, "override the config seed")
        ->each([&](const std::string&) { sim.seed_set = true; });
    simulate->add_option("--out-dir", sim.out_dir, "output directory")->required();

    std::string match_features, match_out;
    CLI::App* match = app.add_subcommand("match", "match query slots across adjacent frames");
    match->add_option("features", match_features, "QFT1 feature file")->required();
    match->add_option("--out", match_out, "alignment JSON output")->required();

    ShiftOptions shift;
    CLI::App* shift_cmd = app.add_subcommand("shift", "temporally shift feature channels");
    shift_cmd->add_option("features", shift.features_path, "QFT1 feature file")->required();
    shift_cmd->add_option("--forward-frac", shift.forward, "fraction shifted to the next frame");
    shift_cmd->add_option("--backward-frac", shift.backward,
                          "fraction shifted to the previous frame");
    shift_cmd->add_option("--alignment", shift.alignment,
                          "'naive' or an alignment JSON file for matched shifting");
    shift_cmd->add_option("--out", shift.out_path, "shifted QFT1 output")->required();

    LinkOptions link;
    CLI::App* link_cmd = app.add_subcommand("link", "link detections into action tubes");
    link_cmd->add_option("detections", link.detections_path, "detections JSON-lines")->required();
    link_cmd->add_option("--lambda", link.params.lambda_iou, "spatial continuity weight");
    link_cmd->add_option("--min-link-iou", link.params.min_link_iou, "minimum IoU per link");
    link_cmd->add_option("--score-floor", link.params.score_floor, "minimum mean tube score");
    link_cmd->add_option("--out", link.out_path, "tubes JSON-lines output")->required();

    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "frame-mAP / video-mAP evaluation");
    eval_cmd->add_option("--pred", eval.pred_path, "detections (frame) or tubes (video) file")
        ->required();
    eval_cmd->add_option("--gt", eval.gt_path, "ground-truth tubes JSON-lines")->required();
    eval_cmd->add_option("--metric", eval.metric, "frame or video")->required();
    eval_cmd->add_option("--thresholds", eval.thresholds, "comma-separated IoU thresholds");
    eval_cmd->add_option("--interpolation", eval.interpolation, "all_point or eleven_point");
    eval_cmd->add_option("--out", eval.out_path, "report path, '-' for stdout");

    AblationOptions ablation;
    CLI::App* ablation_cmd =
        app.add_subcommand("ablation", "compare no/naive/matched shift over simulated trials");
    ablation_cmd->add_option("config", ablation.config_path, "scene config file")->required();
    ablation_cmd->add_option("--trials", ablation.trials, "number of trials")
        ->check(CLI::PositiveNumber);
    ablation_cmd->add_option("--fractions", ablation.fractions,
                             "channel fraction per direction, e.g. 1/8 or 1/4");
    ablation_cmd->add_option("--lambda", ablation.link.lambda_iou, "spatial continuity weight");
    ablation_cmd->add_option("--min-link-iou", ablation.link.min_link_iou, "minimum IoU per link");
    ablation_cmd->add_option("--score-floor", ablation.link.score_floor, "minimum mean tube score");
    ablation_cmd->add_option("--out", ablation.out_path, "report path, '-' for stdout");
    ablation_cmd->add_option("--csv", ablation.csv_path, "also write the report as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (match->parsed()) return run_match(match_features, match_out);
        if (shift_cmd->parsed()) return run_shift(shift);
        if (link_cmd->parsed()) return run_link(link);
        if (eval_cmd->parsed()) return run_eval(eval);
        if (ablation_cmd->parsed()) return run_ablation_cmd(ablation);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
