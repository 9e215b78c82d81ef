#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "tubematch/io.hpp"
#include "tubematch/rng.hpp"
#include "tubematch/shift.hpp"

using namespace tubematch;
namespace fs = std::filesystem;

namespace {

const char* cli_path() {
    return TUBEMATCH_CLI_PATH;
}

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "tubematch_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

const std::string kSmallConfig =
    "T = 6\nN = 10\nD = 24\nK = 3\nC = 6\n"
    "embed_noise_sigma = 0.02\nbox_jitter_sigma = 1.0\nscore_noise_sigma = 0.0\n"
    "permute_slots = true\nseed = 7\n";

}  // namespace

TEST_CASE("simulate writes a full scene and is deterministic") {
    const fs::path dir = work_dir() / "sim";
    const fs::path config = work_dir() / "scene.cfg";
    write_text(config, kSmallConfig);

    REQUIRE(run("simulate " + config.string() + " --out-dir " + (dir / "a").string()) == 0);
    for (const char* name :
         {"features.qft", "detections.jsonl", "gt_tubes.jsonl", "planted_alignment.json"}) {
        CHECK(fs::exists(dir / "a" / name));
    }

    REQUIRE(run("simulate " + config.string() + " --out-dir " + (dir / "b").string()) == 0);
    for (const char* name :
         {"features.qft", "detections.jsonl", "gt_tubes.jsonl", "planted_alignment.json"}) {
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }

    // --seed overrides the config
    REQUIRE(run("simulate " + config.string() + " --seed 123 --out-dir " +
                (dir / "c").string()) == 0);
    CHECK(slurp(dir / "a" / "features.qft") != slurp(dir / "c" / "features.qft"));
}

TEST_CASE("simulate rejects invalid configs without leaving outputs") {
    const fs::path config = work_dir() / "bad.cfg";
    const fs::path out = work_dir() / "bad_out";

    write_text(config, "T = 0\n");
    CHECK(run("simulate " + config.string() + " --out-dir " + out.string()) != 0);

    write_text(config, "N = 4\nK = 9\n");
    CHECK(run("simulate " + config.string() + " --out-dir " + out.string()) != 0);
    CHECK(!fs::exists(out / "features.qft"));
}

TEST_CASE("match produces the planted alignment on an easy scene") {
    const fs::path dir = work_dir() / "match";
    fs::create_directories(dir);
    const fs::path config = dir / "scene.cfg";
    // zero noise so matching is exact on actor slots
    write_text(config,
               "T = 5\nN = 8\nD = 24\nK = 3\nC = 6\n"
               "embed_noise_sigma = 0.0\nbox_jitter_sigma = 1.0\nscore_noise_sigma = 0.0\n"
               "permute_slots = true\nseed = 11\n");
    REQUIRE(run("simulate " + config.string() + " --out-dir " + dir.string()) == 0);
    REQUIRE(run("match " + (dir / "features.qft").string() + " --out " +
                (dir / "alignment.json").string()) == 0);

    const TrackAlignment found = read_alignment_json(dir / "alignment.json");
    const TrackAlignment planted = read_alignment_json(dir / "planted_alignment.json");
    REQUIRE(found.frames() == planted.frames());

    // deterministic rerun
    REQUIRE(run("match " + (dir / "features.qft").string() + " --out " +
                (dir / "alignment2.json").string()) == 0);
    CHECK(slurp(dir / "alignment.json") == slurp(dir / "alignment2.json"));
}

TEST_CASE("match rejects single-frame clips") {
    const fs::path dir = work_dir() / "match_t1";
    fs::create_directories(dir);
    FeatureClip clip(1, 2, 3);
    write_feature_file(dir / "one.qft", clip);
    CHECK(run("match " + (dir / "one.qft").string() + " --out " + (dir / "out.json").string()) !=
          0);
    CHECK(!fs::exists(dir / "out.json"));
}

TEST_CASE("shift with zero fractions copies the payload") {
    const fs::path dir = work_dir() / "shift0";
    fs::create_directories(dir);
    Rng rng(5);
    FeatureClip clip(3, 2, 8);
    for (double& v : clip.data()) v = rng.next_gaussian();
    write_feature_file(dir / "in.qft", clip);

    REQUIRE(run("shift " + (dir / "in.qft").string() +
                " --forward-frac 0 --backward-frac 0 --out " + (dir / "out.qft").string()) == 0);
    CHECK(slurp(dir / "in.qft") == slurp(dir / "out.qft"));
}

TEST_CASE("shift reproduces the three-frame hand case through the CLI") {
    const fs::path dir = work_dir() / "shift_hand";
    fs::create_directories(dir);
    const FeatureClip clip = FeatureClip::from_data(3, 1, 3,
                                                    {1, 10, 100,  //
                                                     2, 20, 200,  //
                                                     3, 30, 300});
    write_feature_file(dir / "in.qft", clip);
    REQUIRE(run("shift " + (dir / "in.qft").string() +
                " --forward-frac 1/3 --backward-frac 1/3 --out " + (dir / "out.qft").string()) ==
            0);

    const FeatureClip out = read_feature_file(dir / "out.qft");
    CHECK(out.at(0, 0, 0) == 0.0);
    CHECK(out.at(0, 0, 1) == 20.0);
    CHECK(out.at(0, 0, 2) == 100.0);
    CHECK(out.at(1, 0, 0) == 1.0);
    CHECK(out.at(1, 0, 1) == 30.0);
    CHECK(out.at(1, 0, 2) == 200.0);
    CHECK(out.at(2, 0, 0) == 2.0);
    CHECK(out.at(2, 0, 1) == 0.0);
    CHECK(out.at(2, 0, 2) == 300.0);
}

TEST_CASE("shift with an identity alignment file equals the naive shift") {
    const fs::path dir = work_dir() / "shift_id";
    fs::create_directories(dir);
    Rng rng(9);
    FeatureClip clip(4, 3, 8);
    for (double& v : clip.data()) v = rng.next_gaussian();
    write_feature_file(dir / "in.qft", clip);
    write_alignment_json(dir / "identity.json", identity_alignment(4, 3));

    REQUIRE(run("shift " + (dir / "in.qft").string() +
                " --forward-frac 1/4 --backward-frac 1/4 --out " + (dir / "naive.qft").string()) ==
            0);
    REQUIRE(run("shift " + (dir / "in.qft").string() +
                " --forward-frac 1/4 --backward-frac 1/4 --alignment " +
                (dir / "identity.json").string() + " --out " + (dir / "matched.qft").string()) ==
            0);
    CHECK(slurp(dir / "naive.qft") == slurp(dir / "matched.qft"));
}

TEST_CASE("shift validates its fractions") {
    const fs::path dir = work_dir() / "shift_bad";
    fs::create_directories(dir);
    write_feature_file(dir / "in.qft", FeatureClip(2, 2, 4));
    CHECK(run("shift " + (dir / "in.qft").string() +
              " --forward-frac 0.8 --backward-frac 0.8 --out " + (dir / "out.qft").string()) != 0);
    CHECK(run("shift " + (dir / "in.qft").string() + " --forward-frac nonsense --out " +
              (dir / "out.qft").string()) != 0);
    CHECK(!fs::exists(dir / "out.qft"));
}

TEST_CASE("link turns a detection chain into a tube and handles empty input") {
    const fs::path dir = work_dir() / "link";
    fs::create_directories(dir);

    FrameDetection det;
    det.slot_index = 0;
    det.box = {0, 0, 10, 10};
    det.class_scores = {0.9};
    FrameDetection det2 = det;
    det2.frame_index = 1;
    write_detections_jsonl(dir / "dets.jsonl", {{"v0", {{det}, {det2}}}});

    REQUIRE(run("link " + (dir / "dets.jsonl").string() + " --out " +
                (dir / "tubes.jsonl").string()) == 0);
    const auto tubes = read_tubes_jsonl(dir / "tubes.jsonl");
    REQUIRE(tubes.size() == 1);
    REQUIRE(tubes[0].tubes.size() == 1);
    CHECK(tubes[0].tubes[0].score == doctest::Approx(0.9));
    CHECK(tubes[0].tubes[0].boxes.size() == 2);

    write_text(dir / "empty.jsonl", "");
    REQUIRE(run("link " + (dir / "empty.jsonl").string() + " --out " +
                (dir / "empty_tubes.jsonl").string()) == 0);
    CHECK(slurp(dir / "empty_tubes.jsonl").empty());
}

TEST_CASE("link separates the two-by-two case") {
    const fs::path dir = work_dir() / "link22";
    fs::create_directories(dir);

    auto det = [](int frame, int slot, BoundingBox box) {
        FrameDetection d;
        d.frame_index = frame;
        d.slot_index = slot;
        d.box = box;
        d.class_scores = {0.8};
        return d;
    };
    write_detections_jsonl(dir / "dets.jsonl",
                           {{"v0",
                             {{det(0, 0, {0, 0, 20, 20}), det(0, 1, {100, 100, 120, 120})},
                              {det(1, 0, {1, 1, 21, 21}), det(1, 1, {101, 101, 121, 121})}}}});
    REQUIRE(run("link " + (dir / "dets.jsonl").string() + " --min-link-iou 0.3 --out " +
                (dir / "tubes.jsonl").string()) == 0);
    const auto tubes = read_tubes_jsonl(dir / "tubes.jsonl");
    REQUIRE(tubes.size() == 1);
    CHECK(tubes[0].tubes.size() == 2);
}

TEST_CASE("eval scores perfect predictions at 1 and empty predictions at 0") {
    const fs::path dir = work_dir() / "eval";
    fs::create_directories(dir);

    ActionTube tube;
    tube.class_id = 0;
    tube.score = 0.9;
    tube.start_frame = 0;
    tube.boxes = {{0, 0, 10, 10}, {0, 0, 10, 10}};
    write_tubes_jsonl(dir / "gt.jsonl", {{"v0", {tube}}});
    write_tubes_jsonl(dir / "pred.jsonl", {{"v0", {tube}}});

    REQUIRE(run("eval --pred " + (dir / "pred.jsonl").string() + " --gt " +
                (dir / "gt.jsonl").string() + " --metric video --out " +
                (dir / "report.json").string()) == 0);
    const std::string report = slurp(dir / "report.json");
    CHECK(report.find("\"0.50\": 1.0") != std::string::npos);
    CHECK(report.find("\"0.75\": 1.0") != std::string::npos);
    CHECK(report.find("\"avg_50_95\": 1.0") != std::string::npos);

    write_text(dir / "none.jsonl", "");
    REQUIRE(run("eval --pred " + (dir / "none.jsonl").string() + " --gt " +
                (dir / "gt.jsonl").string() + " --metric video --out " +
                (dir / "zero.json").string()) == 0);
    const std::string zero = slurp(dir / "zero.json");
    CHECK(zero.find("\"0.50\": 0.0") != std::string::npos);

    // frame metric over detections derived from the tube
    FrameDetection det;
    det.frame_index = 0;
    det.slot_index = 0;
    det.box = {0, 0, 10, 10};
    det.class_scores = {0.9};
    FrameDetection det2 = det;
    det2.frame_index = 1;
    write_detections_jsonl(dir / "dets.jsonl", {{"v0", {{det}, {det2}}}});
    REQUIRE(run("eval --pred " + (dir / "dets.jsonl").string() + " --gt " +
                (dir / "gt.jsonl").string() + " --metric frame --thresholds 0.5,0.75 --out " +
                (dir / "frame.json").string()) == 0);
    CHECK(slurp(dir / "frame.json").find("\"0.50\": 1.0") != std::string::npos);

    CHECK(run("eval --pred " + (dir / "dets.jsonl").string() + " --gt " +
              (dir / "gt.jsonl").string() + " --metric nope --out " +
              (dir / "x.json").string()) != 0);
    CHECK(run("eval --pred " + (dir / "dets.jsonl").string() + " --gt " +
              (dir / "gt.jsonl").string() + " --metric frame --thresholds 1.5 --out " +
              (dir / "x.json").string()) != 0);
}

TEST_CASE("ablation emits a report plus CSV and stays deterministic") {
    const fs::path dir = work_dir() / "ablation";
    fs::create_directories(dir);
    const fs::path config = dir / "scene.cfg";
    write_text(config, kSmallConfig);

    REQUIRE(run("ablation " + config.string() + " --trials 2 --fractions 1/4 --out " +
                (dir / "report.json").string() + " --csv " + (dir / "report.csv").string()) == 0);
    const std::string report = slurp(dir / "report.json");
    CHECK(report.find("no_shift") != std::string::npos);
    CHECK(report.find("naive_shift") != std::string::npos);
    CHECK(report.find("matched_shift") != std::string::npos);
    CHECK(report.find("avg_50_95") != std::string::npos);

    const std::string csv = slurp(dir / "report.csv");
    CHECK(csv.find("variant,metric,threshold,value") == 0);
    CHECK(csv.find("matched_shift,video_map,avg_50_95") != std::string::npos);

    REQUIRE(run("ablation " + config.string() + " --trials 2 --fractions 1/4 --out " +
                (dir / "report2.json").string()) == 0);
    CHECK(report == slurp(dir / "report2.json"));

    CHECK(run("ablation " + config.string() + " --trials 0 --out " + (dir / "x.json").string()) !=
          0);
}

TEST_CASE("unknown flags and missing files exit nonzero") {
    CHECK(run("") != 0);
    CHECK(run("frobnicate") != 0);
    CHECK(run("match /nonexistent.qft --out /tmp/x.json") != 0);
    CHECK(run("simulate /nonexistent.cfg --out-dir /tmp/x") != 0);
}
