#pragma once

#include <cstddef>
#include <vector>

#include "tubematch/core.hpp"

namespace tubematch {

struct LinkParams {
    double lambda_iou = 1.0;    // weight of spatial continuity against class score
    double min_link_iou = 0.1;  // links with lower IoU are forbidden
    double score_floor = 0.05;  // extraction stops once the best path's mean score drops below
};

void validate_link_params(const LinkParams& params);

// Viterbi-style linking for one class: repeatvery extracts the full-length
// detection path maximizing
//   sum_t score(b_t) + lambda_iou * sum_t iou(b_t, b_{t+1})
// over edges with iou >= min_link_iou, removes its boxes, and stops when no
// complete path remains or the best path's mean class score falls below
// score_floor. Tube score is the mean class score along the path.
std::vector<ActionTube> link_tubes(const std::vector<std::vector<FrameDetection>>& frames,
                                   int class_id, const LinkParams& params);

// link_tubes for every class id in [0, class_count), concatenated in class
// order. Classes are independent and run in parallel.
std::vector<ActionTube> link_all_classes(const std::vector<std::vector<FrameDetection>>& frames,
                                         std::size_t class_count, const LinkParams& params);

// Spatio-temporal overlap: temporal IoU of the two frame ranges times the
// mean per-frame box IoU over the temporally intersecting frames; 0 when the
// ranges do not overlap.
double tube_3d_iou(const ActionTube& a, const ActionTube& b);

}  // namespace tubematch
