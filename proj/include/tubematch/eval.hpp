#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tubematch/core.hpp"
#include "tubematch/tubes.hpp"

namespace tubematch {

struct VideoDetections {
    std::string video_id;
    std::vector<std::vector<FrameDetection>> frames;
};

struct VideoTubes {
    std::string video_id;
    std::vector<ActionTube> tubes;
};

enum class ApInterpolation { all_point, eleven_point };

// One scored prediction with its candidate ground-truth overlaps (same
// class, same video/frame pool). gt ids index the per-class ground-truth
// list; entries with zero overlap may be omitted.
struct ApPrediction {
    double score = 0.0;
    std::vector<std::pair<int, double>> overlaps;
};

// Average precision for one class at one threshold. Predictions are ranked
// by descending score (ties keep input order), each is greedily matched to
// the highest-overlap unmatched ground truth, and counts as a true positive
// only when that overlap is strictly greater than the threshold. all_point
// integrates the precision envelope over recall; eleven_point averages the
// envelope at recalls 0, 0.1, .., 1.0. Zero ground truths give 0.
double average_precision(const std::vector<ApPrediction>& preds, int gt_count, double threshold,
                         ApInterpolation interp = ApInterpolation::all_point);

// The canonical ten-threshold sweep 0.50, 0.55, .., 0.95.
const std::vector<double>& sweep_thresholds();

struct MetricTable {
    std::vector<double> thresholds;                 // as requested
    std::vector<double> map_values;                 // mAP per requested threshold
    double avg_50_95 = 0.0;                         // mean mAP over the ten-threshold sweep
    std::vector<std::map<int, double>> per_class;   // per requested threshold: class -> AP
};

// Frame-level mAP: per class, detections from all frames of all videos are
// pooled and scored by box IoU against same-frame ground-truth boxes (taken
// from the ground-truth tubes). Classes absent from the ground truth are
// excluded from the mean.
MetricTable frame_map(const std::vector<VideoDetections>& detections,
                      const std::vector<VideoTubes>& ground_truth,
                      const std::vector<double>& thresholds,
                      ApInterpolation interp = ApInterpolation::all_point);

// Video-level mAP: predicted tubes scored by spatio-temporal IoU against
// ground-truth tubes of the same video and class.
MetricTable video_map(const std::vector<VideoTubes>& predictions,
                      const std::vector<VideoTubes>& ground_truth,
                      const std::vector<double>& thresholds,
                      ApInterpolation interp = ApInterpolation::all_point);

}  // namespace tubematch
