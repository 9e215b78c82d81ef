#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubematch/core.hpp"
#include "tubematch/eval.hpp"
#include "tubematch/matching.hpp"
#include "tubematch/shift.hpp"
#include "tubematch/tubes.hpp"

namespace tubematch {

struct SceneConfig {
    int frames = 8;    // T
    int slots = 100;   // N
    int dims = 256;    // D
    int actors = 6;    // K, at most N
    int classes = 21;  // C
    double embed_noise_sigma = 0.05;
    double box_jitter_sigma = 2.0;
    double score_noise_sigma = 0.01;
    bool permute_slots = true;
    std::uint64_t seed = 0;
    // Rejection bound on the pairwise cosine similarity of class prototypes
    // (and hence of actor identities).
    double identity_max_cos = 0.5;
};

void validate_config(const SceneConfig& cfg);

// A generated scene: per-class prototype embeddings, K actors with linear
// box motion on full-length ground-truth tubes, a T x N x D query clip where
// each frame hosts the actor embeddings (plus noise) in per-frame slots,
// and per-frame detections. Actor slots carry jittered copies of the true
// boxes; background slots carry fresh low-norm embeddings and degenerate
// point boxes with near-zero scores, so they never link into tubes.
// planted_perms records the adjacent-frame slot correspondence of the
// actors, extended order-preservingly to a full bijection.
struct SyntheticScene {
    SceneConfig config;
    std::vector<std::vector<double>> prototypes;      // C x D class bank, unit rows
    std::vector<int> actor_classes;                   // K
    std::vector<std::vector<int>> actor_slots;        // per frame: actor k -> slot
    std::vector<ActionTube> gt_tubes;                 // K tubes of length T
    FeatureClip clip;
    TrackAlignment planted_perms;
    std::vector<std::vector<FrameDetection>> detections;  // per frame, slot order
};

// Fully deterministic in cfg (including the seed). Throws when rejection
// sampling cannot separate the requested number of prototypes within a
// bounded attempt count (dims too small for identity_max_cos).
SyntheticScene generate_scene(const SceneConfig& cfg);

// Recomputes detection scores from a (possibly shifted) clip against the
// scene's prototype bank: score_c = clamp01(dot(embedding, prototype_c)).
// Boxes and ordering are untouched; no noise is applied, so differences
// between variants are attributable to the shift alone.
std::vector<std::vector<FrameDetection>> rederive_scores(const SyntheticScene& scene,
                                                         const FeatureClip& clip);

struct VariantMetrics {
    std::string name;
    std::vector<double> frame_sweep;  // mean mAP per sweep threshold
    std::vector<double> video_sweep;
    double frame_avg_50_95 = 0.0;
    double video_avg_50_95 = 0.0;

    bool operator==(const VariantMetrics&) const = default;
};

struct AblationReport {
    SceneConfig config;
    ShiftSpec shift;
    LinkParams link;
    int trials = 0;
    std::vector<VariantMetrics> variants;  // no_shift, naive_shift, matched_shift
};

// For each trial seed: build a scene, produce three detection sets (no
// shift, index-naive shift, matched shift driven by match_clip), link tubes
// per class and evaluate frame/video mAP over the threshold sweep. Reported
// values are means over trials; trials run in parallel but aggregate in
// trial order, so the report is identical for any thread count.
AblationReport run_ablation(const SceneConfig& cfg, const ShiftSpec& spec, int trials,
                            const LinkParams& link = {});

}  // namespace tubematch
