#include "tubematch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "tubematch/parallel.hpp"
#include "tubematch/rng.hpp"

namespace tubematch {

namespace {

constexpr double kSceneWidth = 320.0;
constexpr double kSceneHeight = 240.0;
constexpr double kBackgroundNorm = 0.1;
constexpr int kRejectionAttempts = 1000;

double clamp01(double v) {
    return std::clamp(v, 0.0, 1.0);
}

std::vector<double> random_unit_vector(Rng& rng, int dims) {
    std::vector<double> v(static_cast<std::size_t>(dims));
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (double& x : v) {
            x = rng.next_gaussian();
            norm_sq += x * x;
        }
    } while (norm_sq == 0.0);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
    return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

}  // namespace

void validate_config(const SceneConfig& cfg) {
    if (cfg.frames < 1) throw std::invalid_argument("SceneConfig: T must be at least 1");
    if (cfg.slots < 1) throw std::invalid_argument("SceneConfig: N must be at least 1");
    if (cfg.dims < 1) throw std::invalid_argument("SceneConfig: D must be at least 1");
    if (cfg.classes < 1) throw std::invalid_argument("SceneConfig: C must be at least 1");
    if (cfg.actors < 0) throw std::invalid_argument("SceneConfig: K must be non-negative");
    if (cfg.actors > cfg.slots) throw std::invalid_argument("SceneConfig: K must not exceed N");
    if (!(cfg.embed_noise_sigma >= 0.0)) {
        throw std::invalid_argument("SceneConfig: embed_noise_sigma must be non-negative");
    }
    if (!(cfg.box_jitter_sigma >= 0.0)) {
        throw std::invalid_argument("SceneConfig: box_jitter_sigma must be non-negative");
    }
    if (!(cfg.score_noise_sigma >= 0.0)) {
        throw std::invalid_argument("SceneConfig: score_noise_sigma must be non-negative");
    }
    if (!(cfg.identity_max_cos > 0.0 && cfg.identity_max_cos <= 1.0)) {
        throw std::invalid_argument("SceneConfig: identity_max_cos must lie in (0, 1]");
    }
}

SyntheticScene generate_scene(const SceneConfig& cfg) {
    validate_config(cfg);
    Rng rng(cfg.seed);

    const auto T = static_cast<std::size_t>(cfg.frames);
    const auto N = static_cast<std::size_t>(cfg.slots);
    const auto D = static_cast<std::size_t>(cfg.dims);
    const auto K = static_cast<std::size_t>(cfg.actors);
    const auto C = static_cast<std::size_t>(cfg.classes);

    SyntheticScene scene{.config = cfg,
                         .prototypes = {},
                         .actor_classes = {},
                         .actor_slots = {},
                         .gt_tubes = {},
                         .clip = FeatureClip(T, N, D),
                         .planted_perms = {},
                         .detections = {}};

    // Class prototype bank: unit vectors kept pairwise dissimilar by
    // rejection sampling.
    scene.prototypes.reserve(C);
    for (std::size_t c = 0; c < C; ++c) {
        bool accepted = false;
        for (int attempt = 0; attempt < kRejectionAttempts && !accepted; ++attempt) {
            std::vector<double> candidate = random_unit_vector(rng, cfg.dims);
            accepted = true;
            for (const auto& existing : scene.prototypes) {
                if (dot(candidate, existing) > cfg.identity_max_cos) {
                    accepted = false;
                    break;
                }
            }
            if (accepted) scene.prototypes.push_back(std::move(candidate));
        }
        if (!accepted) {
            throw std::runtime_error(
                "generate_scene: rejection sampling failed; D is too small to separate " +
                std::to_string(C) + " prototypes at identity_max_cos " +
                std::to_string(cfg.identity_max_cos));
        }
    }

    // Actor classes: distinct while K <= C, so identities (the class
    // prototypes) inherit the pairwise similarity bound.
    if (K <= C) {
        const std::vector<int> order = rng.permutation(cfg.classes);
        scene.actor_classes.assign(order.begin(), order.begin() + static_cast<long>(K));
    } else {
        for (std::size_t k = 0; k < K; ++k) {
            scene.actor_classes.push_back(static_cast<int>(rng.next_below(C)));
        }
    }

    // Linear box motion; ground truth stays jitter-free.
    struct Motion {
        double cx, cy, w, h, vx, vy;
    };
    std::vector<Motion> motions(K);
    for (Motion& m : motions) {
        m.cx = rng.next_uniform(60.0, kSceneWidth - 60.0);
        m.cy = rng.next_uniform(50.0, kSceneHeight - 50.0);
        m.w = rng.next_uniform(40.0, 90.0);
        m.h = rng.next_uniform(40.0, 90.0);
        m.vx = rng.next_uniform(-4.0, 4.0);
        m.vy = rng.next_uniform(-4.0, 4.0);
    }
    auto gt_box = [&](std::size_t k, std::size_t t) {
        const Motion& m = motions[k];
        const double cx = m.cx + m.vx * static_cast<double>(t);
        const double cy = m.cy + m.vy * static_cast<double>(t);
        return BoundingBox{cx - m.w / 2.0, cy - m.h / 2.0, cx + m.w / 2.0, cy + m.h / 2.0};
    };
    scene.gt_tubes.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        ActionTube tube;
        tube.class_id = scene.actor_classes[k];
        tube.score = 1.0;
        tube.start_frame = 0;
        for (std::size_t t = 0; t < T; ++t) tube.boxes.push_back(gt_box(k, t));
        scene.gt_tubes.push_back(std::move(tube));
    }

    // Slot layout per frame; slot_actor is the inverse map (-1 = background).
    scene.actor_slots.assign(T, std::vector<int>(K, 0));
    std::vector<std::vector<int>> slot_actor(T, std::vector<int>(N, -1));
    for (std::size_t t = 0; t < T; ++t) {
        if (cfg.permute_slots) {
            const std::vector<int> perm = rng.permutation(cfg.slots);
            for (std::size_t k = 0; k < K; ++k) scene.actor_slots[t][k] = perm[k];
        } else {
            for (std::size_t k = 0; k < K; ++k) scene.actor_slots[t][k] = static_cast<int>(k);
        }
        for (std::size_t k = 0; k < K; ++k) {
            slot_actor[t][static_cast<std::size_t>(scene.actor_slots[t][k])] = static_cast<int>(k);
        }
    }

    // Planted adjacent-frame maps: actor slots follow the actors, the
    // remaining slots pair up in ascending order.
    scene.planted_perms.slots = N;
    for (std::size_t t = 0; t + 1 < T; ++t) {
        Permutation sigma(N, -1);
        std::vector<char> target_used(N, 0);
        for (std::size_t k = 0; k < K; ++k) {
            sigma[static_cast<std::size_t>(scene.actor_slots[t][k])] = scene.actor_slots[t + 1][k];
            target_used[static_cast<std::size_t>(scene.actor_slots[t + 1][k])] = 1;
        }
        std::size_t next_target = 0;
        for (std::size_t n = 0; n < N; ++n) {
            if (sigma[n] >= 0) continue;
            while (target_used[next_target]) ++next_target;
            sigma[n] = static_cast<int>(next_target);
            target_used[next_target] = 1;
        }
        scene.planted_perms.pair_maps.push_back(std::move(sigma));
    }

    // Clip: actor slots carry identity + noise, background slots fresh
    // low-norm embeddings, in (t, n) draw order.
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < N; ++n) {
            const int k = slot_actor[t][n];
            if (k >= 0) {
                const std::vector<double>& identity =
                    scene.prototypes[static_cast<std::size_t>(scene.actor_classes[static_cast<std::size_t>(k)])];
                for (std::size_t d = 0; d < D; ++d) {
                    double v = identity[d];
                    if (cfg.embed_noise_sigma > 0.0) {
                        v += rng.next_gaussian(0.0, cfg.embed_noise_sigma);
                    }
                    scene.clip(t, n, d) = v;
                }
            } else {
                const std::vector<double> direction = random_unit_vector(rng, cfg.dims);
                for (std::size_t d = 0; d < D; ++d) {
                    scene.clip(t, n, d) = kBackgroundNorm * direction[d];
                }
            }
        }
    }

    // Detections: every slot emits one. Actor slots carry jittered copies of
    // the true box; background slots carry degenerate point boxes so they
    // can never link into tubes or match ground truth.
    scene.detections.assign(T, {});
    for (std::size_t t = 0; t < T; ++t) {
        scene.detections[t].reserve(N);
        for (std::size_t n = 0; n < N; ++n) {
            FrameDetection det;
            det.frame_index = static_cast<int>(t);
            det.slot_index = static_cast<int>(n);
            const int k = slot_actor[t][n];
            if (k >= 0) {
                const BoundingBox truth = gt_box(static_cast<std::size_t>(k), t);
                double x1 = truth.x1, y1 = truth.y1, x2 = truth.x2, y2 = truth.y2;
                if (cfg.box_jitter_sigma > 0.0) {
                    x1 += rng.next_gaussian(0.0, cfg.box_jitter_sigma);
                    y1 += rng.next_gaussian(0.0, cfg.box_jitter_sigma);
                    x2 += rng.next_gaussian(0.0, cfg.box_jitter_sigma);
                    y2 += rng.next_gaussian(0.0, cfg.box_jitter_sigma);
                }
                det.box = BoundingBox{std::min(x1, x2), std::min(y1, y2), std::max(x1, x2),
                                      std::max(y1, y2)};
            } else {
                const double x = rng.next_uniform(0.0, kSceneWidth);
                const double y = rng.next_uniform(0.0, kSceneHeight);
                det.box = BoundingBox{x, y, x, y};
            }
            det.class_scores.resize(C);
            for (std::size_t c = 0; c < C; ++c) {
                double s = dot(scene.clip.query(t, n), scene.prototypes[c]);
                if (cfg.score_noise_sigma > 0.0) {
                    s += rng.next_gaussian(0.0, cfg.score_noise_sigma);
                }
                det.class_scores[c] = clamp01(s);
            }
            scene.detections[t].push_back(std::move(det));
        }
    }
    return scene;
}

std::vector<std::vector<FrameDetection>> rederive_scores(const SyntheticScene& scene,
                                                         const FeatureClip& clip) {
    if (clip.frames() != scene.clip.frames() || clip.slots() != scene.clip.slots() ||
        clip.dims() != scene.clip.dims()) {
        throw std::invalid_argument("rederive_scores: clip dimensions do not match the scene");
    }
    std::vector<std::vector<FrameDetection>> result = scene.detections;
    const auto frames = static_cast<std::int64_t>(result.size());
#pragma omp parallel for schedule(static) num_threads(resolved_threads())
    for (std::int64_t t = 0; t < frames; ++t) {
        for (FrameDetection& det : result[static_cast<std::size_t>(t)]) {
            const auto n = static_cast<std::size_t>(det.slot_index);
            for (std::size_t c = 0; c < scene.prototypes.size(); ++c) {
                det.class_scores[c] =
                    clamp01(dot(clip.query(static_cast<std::size_t>(t), n), scene.prototypes[c]));
            }
        }
    }
    return result;
}

namespace {

struct TrialMetrics {
    std::vector<double> frame_sweep;
    std::vector<double> video_sweep;
};

TrialMetrics evaluate_variant(const SyntheticScene& scene,
                              const std::vector<std::vector<FrameDetection>>& detections,
                              const LinkParams& link, const std::string& video_id) {
    const auto C = static_cast<std::size_t>(scene.config.classes);
    const std::vector<ActionTube> tubes = link_all_classes(detections, C, link);

    const std::vector<VideoDetections> pred_dets = {{video_id, detections}};
    const std::vector<VideoTubes> pred_tubes = {{video_id, tubes}};
    const std::vector<VideoTubes> gt = {{video_id, scene.gt_tubes}};

    const MetricTable frame = frame_map(pred_dets, gt, sweep_thresholds());
    const MetricTable video = video_map(pred_tubes, gt, sweep_thresholds());
    return {frame.map_values, video.map_values};
}

}  // namespace

AblationReport run_ablation(const SceneConfig& cfg, const ShiftSpec& spec, int trials,
                            const LinkParams& link) {
    validate_config(cfg);
    validate_link_params(link);
    if (trials < 1) {
        throw std::invalid_argument("run_ablation: trials must be at least 1");
    }
    channel_split(static_cast<std::size_t>(cfg.dims), spec);  // validates the fractions

    // Independent per-trial seeds derived ahead of the parallel loop.
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(trials));
    std::uint64_t sm = cfg.seed;
    for (auto& s : seeds) s = splitmix64_next(sm);

    constexpr int kVariants = 3;
    std::vector<std::array<TrialMetrics, kVariants>> per_trial(static_cast<std::size_t>(trials));

#pragma omp parallel for schedule(dynamic) num_threads(resolved_threads())
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        SceneConfig trial_cfg = cfg;
        trial_cfg.seed = seeds[static_cast<std::size_t>(trial)];
        const SyntheticScene scene = generate_scene(trial_cfg);
        const std::string video_id = "trial-" + std::to_string(trial);

        ShiftSpec naive_spec = spec;
        naive_spec.alignment = AlignmentMode::index_naive;
        ShiftSpec matched_spec = spec;
        matched_spec.alignment = AlignmentMode::matched;

        const FeatureClip shifted_naive = temporal_shift(scene.clip, naive_spec);
        const TrackAlignment align = match_clip(scene.clip);
        const FeatureClip shifted_matched = matched_shift(scene.clip, matched_spec, align);

        auto& out = per_trial[static_cast<std::size_t>(trial)];
        out[0] = evaluate_variant(scene, rederive_scores(scene, scene.clip), link, video_id);
        out[1] = evaluate_variant(scene, rederive_scores(scene, shifted_naive), link, video_id);
        out[2] = evaluate_variant(scene, rederive_scores(scene, shifted_matched), link, video_id);
    }

    AblationReport report;
    report.config = cfg;
    report.shift = spec;
    report.link = link;
    report.trials = trials;
    const std::size_t sweep_size = sweep_thresholds().size();
    static const char* kNames[kVariants] = {"no_shift", "naive_shift", "matched_shift"};
    for (int v = 0; v < kVariants; ++v) {
        VariantMetrics metrics;
        metrics.name = kNames[v];
        metrics.frame_sweep.assign(sweep_size, 0.0);
        metrics.video_sweep.assign(sweep_size, 0.0);
        for (int trial = 0; trial < trials; ++trial) {
            const TrialMetrics& tm = per_trial[static_cast<std::size_t>(trial)][static_cast<std::size_t>(v)];
            for (std::size_t i = 0; i < sweep_size; ++i) {
                metrics.frame_sweep[i] += tm.frame_sweep[i];
                metrics.video_sweep[i] += tm.video_sweep[i];
            }
        }
        double frame_avg = 0.0, video_avg = 0.0;
        for (std::size_t i = 0; i < sweep_size; ++i) {
            metrics.frame_sweep[i] /= static_cast<double>(trials);
            metrics.video_sweep[i] /= static_cast<double>(trials);
            frame_avg += metrics.frame_sweep[i];
            video_avg += metrics.video_sweep[i];
        }
        metrics.frame_avg_50_95 = frame_avg / static_cast<double>(sweep_size);
        metrics.video_avg_50_95 = video_avg / static_cast<double>(sweep_size);
        report.variants.push_back(std::move(metrics));
    }
    return report;
}

}  // namespace tubematch
