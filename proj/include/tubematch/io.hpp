#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tubematch/core.hpp"
#include "tubematch/eval.hpp"
#include "tubematch/matching.hpp"
#include "tubematch/simulator.hpp"

namespace tubematch {

// QFT1 feature file: 4-byte magic "QFT1", then T, N, D as 32-bit unsigned
// little-endian, then T*N*D IEEE-754 32-bit little-endian values in
// (t, n, d) row-major order. The declared sizes must match the payload
// byte length exactly.
FeatureClip read_feature_file(const std::filesystem::path& path);
void write_feature_file(const std::filesystem::path& path, const FeatureClip& clip);

// JSON-lines detections, one record per detection:
//   {"schema_version":1,"video_id":..,"frame":..,"slot":..,
//    "box":[x1,y1,x2,y2],"scores":[..]}
std::vector<VideoDetections> read_detections_jsonl(const std::filesystem::path& path);
void write_detections_jsonl(const std::filesystem::path& path,
                            const std::vector<VideoDetections>& videos);

// JSON-lines tubes, one record per tube:
//   {"schema_version":1,"video_id":..,"class_id":..,"score":..,
//    "start_frame":..,"boxes":[[x1,y1,x2,y2],..]}
std::vector<VideoTubes> read_tubes_jsonl(const std::filesystem::path& path);
void write_tubes_jsonl(const std::filesystem::path& path, const std::vector<VideoTubes>& videos);

// Alignment JSON: pair maps plus their compositions back to frame 0.
TrackAlignment read_alignment_json(const std::filesystem::path& path);
void write_alignment_json(const std::filesystem::path& path, const TrackAlignment& align);

// Flat key = value scene configuration ('#' starts a comment). Keys match
// the SceneConfig fields: T, N, D, K, C, embed_noise_sigma,
// box_jitter_sigma, score_noise_sigma, permute_slots, seed,
// identity_max_cos. Unknown keys, duplicates and malformed values are
// reported with their line number.
SceneConfig parse_scene_config_text(const std::string& text);
SceneConfig read_scene_config(const std::filesystem::path& path);

// Writes to a temp file in the target directory and renames on success, so
// a failure never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string eval_report_to_json(const MetricTable& table, const std::string& metric,
                                ApInterpolation interp);
std::string ablation_report_to_json(const AblationReport& report);
std::string ablation_report_to_csv(const AblationReport& report);

}  // namespace tubematch
