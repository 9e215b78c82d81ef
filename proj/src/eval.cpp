#include "tubematch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "tubematch/parallel.hpp"

namespace tubematch {

const std::vector<double>& sweep_thresholds() {
    static const std::vector<double> sweep = {0.50, 0.55, 0.60, 0.65, 0.70,
                                              0.75, 0.80, 0.85, 0.90, 0.95};
    return sweep;
}

double average_precision(const std::vector<ApPrediction>& preds, int gt_count, double threshold,
                         ApInterpolation interp) {
    if (gt_count <= 0) return 0.0;

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].score > preds[b].score;  // ties keep input order
    });

    std::vector<char> gt_taken(static_cast<std::size_t>(gt_count), 0);
    std::vector<char> is_tp(order.size(), 0);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const ApPrediction& pred = preds[order[rank]];
        int best_gt = -1;
        double best_overlap = -1.0;
        for (const auto& [gt_id, overlap] : pred.overlaps) {
            if (gt_id < 0 || gt_id >= gt_count) {
                throw std::invalid_argument("average_precision: ground-truth id out of range");
            }
            if (gt_taken[static_cast<std::size_t>(gt_id)]) continue;
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best_gt = gt_id;
            }
        }
        if (best_gt >= 0 && best_overlap > threshold) {
            is_tp[rank] = 1;
            gt_taken[static_cast<std::size_t>(best_gt)] = 1;
        }
    }

    std::vector<double> precision(order.size());
    std::vector<double> recall(order.size());
    int tp_cum = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        tp_cum += is_tp[rank];
        precision[rank] = static_cast<double>(tp_cum) / static_cast<double>(rank + 1);
        recall[rank] = static_cast<double>(tp_cum) / static_cast<double>(gt_count);
    }

    // Precision envelope: max precision at any recall >= current.
    for (std::size_t rank = precision.size(); rank-- > 1;) {
        precision[rank - 1] = std::max(precision[rank - 1], precision[rank]);
    }

    if (interp == ApInterpolation::eleven_point) {
        double total = 0.0;
        for (int k = 0; k <= 10; ++k) {
            const double r = static_cast<double>(k) / 10.0;
            double best = 0.0;
            for (std::size_t rank = 0; rank < order.size(); ++rank) {
                if (recall[rank] >= r) {
                    best = precision[rank];
                    break;  // envelope is non-increasing past this rank
                }
            }
            total += best;
        }
        return total / 11.0;
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (is_tp[rank]) {
            ap += (recall[rank] - prev_recall) * precision[rank];
            prev_recall = recall[rank];
        }
    }
    return ap;
}

namespace {

struct ClassPool {
    std::vector<ApPrediction> preds;
    int gt_count = 0;
};

// Shared mAP assembly: evaluates requested thresholds plus the canonical
// sweep, averages the sweep into avg_50_95, and excludes classes without
// ground truth from every mean.
MetricTable tabulate(const std::vector<ClassPool>& pools, const std::vector<double>& thresholds,
                     ApInterpolation interp) {
    std::vector<double> eval_thresholds = thresholds;
    for (double t : sweep_thresholds()) {
        if (std::find(eval_thresholds.begin(), eval_thresholds.end(), t) == eval_thresholds.end()) {
            eval_thresholds.push_back(t);
        }
    }

    const std::size_t classes = pools.size();
    std::vector<std::vector<double>> ap(eval_thresholds.size(),
                                        std::vector<double>(classes, 0.0));
    const auto class_count = static_cast<std::int64_t>(classes);
#pragma omp parallel for schedule(dynamic) num_threads(resolved_threads())
    for (std::int64_t c = 0; c < class_count; ++c) {
        const ClassPool& pool = pools[static_cast<std::size_t>(c)];
        for (std::size_t ti = 0; ti < eval_thresholds.size(); ++ti) {
            ap[ti][static_cast<std::size_t>(c)] =
                average_precision(pool.preds, pool.gt_count, eval_thresholds[ti], interp);
        }
    }

    auto mean_over_present = [&](std::size_t ti) {
        double sum = 0.0;
        int present = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            if (pools[c].gt_count > 0) {
                sum += ap[ti][c];
                ++present;
            }
        }
        return present > 0 ? sum / static_cast<double>(present) : 0.0;
    };

    MetricTable table;
    table.thresholds = thresholds;
    table.map_values.reserve(thresholds.size());
    table.per_class.resize(thresholds.size());
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
        table.map_values.push_back(mean_over_present(ti));
        for (std::size_t c = 0; c < classes; ++c) {
            if (pools[c].gt_count > 0) {
                table.per_class[ti][static_cast<int>(c)] = ap[ti][c];
            }
        }
    }

    double sweep_sum = 0.0;
    for (double t : sweep_thresholds()) {
        const auto it = std::find(eval_thresholds.begin(), eval_thresholds.end(), t);
        sweep_sum += mean_over_present(static_cast<std::size_t>(it - eval_thresholds.begin()));
    }
    table.avg_50_95 = sweep_sum / static_cast<double>(sweep_thresholds().size());
    return table;
}

}  // namespace

MetricTable frame_map(const std::vector<VideoDetections>& detections,
                      const std::vector<VideoTubes>& ground_truth,
                      const std::vector<double>& thresholds, ApInterpolation interp) {
    // Class count from the detections; every record must agree.
    std::size_t classes = 0;
    for (const VideoDetections& video : detections) {
        for (const auto& frame : video.frames) {
            for (const FrameDetection& det : frame) {
                if (classes == 0) {
                    classes = det.class_scores.size();
                } else if (det.class_scores.size() != classes) {
                    throw std::invalid_argument("frame_map: mismatched class counts");
                }
            }
        }
    }
    for (const VideoTubes& video : ground_truth) {
        for (const ActionTube& tube : video.tubes) {
            classes = std::max(classes, static_cast<std::size_t>(tube.class_id) + 1);
        }
    }
    if (classes == 0) {
        throw std::invalid_argument("frame_map: no detections and no ground truth");
    }

    // Per (class, video, frame) ground-truth boxes with per-class global ids.
    struct GtBox {
        int id;
        BoundingBox box;
    };
    std::vector<ClassPool> pools(classes);
    // video id -> index for fast pred->gt lookup
    auto video_index = [&](const std::string& id) -> int {
        for (std::size_t v = 0; v < ground_truth.size(); ++v) {
            if (ground_truth[v].video_id == id) return static_cast<int>(v);
        }
        return -1;
    };
    // gt_boxes[c][v] : frame -> boxes
    std::vector<std::vector<std::map<int, std::vector<GtBox>>>> gt_boxes(
        classes, std::vector<std::map<int, std::vector<GtBox>>>(ground_truth.size()));
    for (std::size_t v = 0; v < ground_truth.size(); ++v) {
        for (const ActionTube& tube : ground_truth[v].tubes) {
            validate_tube(tube);
            const auto c = static_cast<std::size_t>(tube.class_id);
            for (int f = tube.frame_begin(); f < tube.frame_end(); ++f) {
                gt_boxes[c][v][f].push_back({pools[c].gt_count++, tube.box_at(f)});
            }
        }
    }

    for (const VideoDetections& video : detections) {
        const int v = video_index(video.video_id);
        for (const auto& frame : video.frames) {
            for (const FrameDetection& det : frame) {
                for (std::size_t c = 0; c < det.class_scores.size(); ++c) {
                    ApPrediction pred;
                    pred.score = det.class_scores[c];
                    if (v >= 0) {
                        const auto& by_frame = gt_boxes[c][static_cast<std::size_t>(v)];
                        const auto it = by_frame.find(det.frame_index);
                        if (it != by_frame.end()) {
                            for (const GtBox& gt : it->second) {
                                const double overlap = box_iou(det.box, gt.box);
                                if (overlap > 0.0) {
                                    pred.overlaps.emplace_back(gt.id, overlap);
                                }
                            }
                        }
                    }
                    pools[c].preds.push_back(std::move(pred));
                }
            }
        }
    }
    return tabulate(pools, thresholds, interp);
}

MetricTable video_map(const std::vector<VideoTubes>& predictions,
                      const std::vector<VideoTubes>& ground_truth,
                      const std::vector<double>& thresholds, ApInterpolation interp) {
    std::size_t classes = 0;
    for (const VideoTubes& video : predictions) {
        for (const ActionTube& tube : video.tubes) {
            classes = std::max(classes, static_cast<std::size_t>(tube.class_id) + 1);
        }
    }
    for (const VideoTubes& video : ground_truth) {
        for (const ActionTube& tube : video.tubes) {
            classes = std::max(classes, static_cast<std::size_t>(tube.class_id) + 1);
        }
    }
    if (classes == 0) {
        throw std::invalid_argument("video_map: no predictions and no ground truth");
    }

    struct GtTubeRef {
        int id;
        const ActionTube* tube;
    };
    std::vector<ClassPool> pools(classes);
    // gt_tubes[c] per video id
    std::vector<std::vector<std::pair<std::string, std::vector<GtTubeRef>>>> gt_by_class(classes);
    for (const VideoTubes& video : ground_truth) {
        for (const ActionTube& tube : video.tubes) {
            validate_tube(tube);
            const auto c = static_cast<std::size_t>(tube.class_id);
            auto& videos = gt_by_class[c];
            auto it = std::find_if(videos.begin(), videos.end(),
                                   [&](const auto& entry) { return entry.first == video.video_id; });
            if (it == videos.end()) {
                videos.push_back({video.video_id, {}});
                it = std::prev(videos.end());
            }
            it->second.push_back({pools[c].gt_count++, &tube});
        }
    }

    for (const VideoTubes& video : predictions) {
        for (const ActionTube& tube : video.tubes) {
            validate_tube(tube);
            const auto c = static_cast<std::size_t>(tube.class_id);
            ApPrediction pred;
            pred.score = tube.score;
            const auto& videos = gt_by_class[c];
            const auto it = std::find_if(videos.begin(), videos.end(),
                                         [&](const auto& entry) { return entry.first == video.video_id; });
            if (it != videos.end()) {
                for (const GtTubeRef& gt : it->second) {
                    const double overlap = tube_3d_iou(tube, *gt.tube);
                    if (overlap > 0.0) {
                        pred.overlaps.emplace_back(gt.id, overlap);
                    }
                }
            }
            pools[c].preds.push_back(std::move(pred));
        }
    }
    return tabulate(pools, thresholds, interp);
}

}  // namespace tubematch
