#include "tubematch/tubes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "tubematch/parallel.hpp"

namespace tubematch {

void validate_link_params(const LinkParams& params) {
    if (!std::isfinite(params.lambda_iou) || params.lambda_iou < 0.0) {
        throw std::invalid_argument("LinkParams: lambda_iou must be finite and non-negative");
    }
    if (!(params.min_link_iou >= 0.0 && params.min_link_iou <= 1.0)) {
        throw std::invalid_argument("LinkParams: min_link_iou must lie in [0, 1]");
    }
    if (!std::isfinite(params.score_floor)) {
        throw std::invalid_argument("LinkParams: score_floor must be finite");
    }
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct PathResult {
    bool found = false;
    double objective = kNegInf;
    std::vector<int> picks;  // detection index per frame
};

// Best remaining full-length path for one class. Ties prefer the smallest
// detection index at every choice, so extraction is deterministic.
PathResult best_path(const std::vector<std::vector<FrameDetection>>& frames,
                     const std::vector<std::vector<double>>& scores,
                     const std::vector<std::vector<std::vector<double>>>& iou_cache,
                     const std::vector<std::vector<char>>& used, const LinkParams& params) {
    const std::size_t T = frames.size();
    std::vector<std::vector<double>> dp(T);
    std::vector<std::vector<int>> parent(T);

    dp[0].assign(frames[0].size(), kNegInf);
    parent[0].assign(frames[0].size(), -1);
    for (std::size_t i = 0; i < frames[0].size(); ++i) {
        if (!used[0][i]) dp[0][i] = scores[0][i];
    }

    for (std::size_t t = 1; t < T; ++t) {
        dp[t].assign(frames[t].size(), kNegInf);
        parent[t].assign(frames[t].size(), -1);
        for (std::size_t j = 0; j < frames[t].size(); ++j) {
            if (used[t][j]) continue;
            double best = kNegInf;
            int arg = -1;
            for (std::size_t i = 0; i < frames[t - 1].size(); ++i) {
                if (dp[t - 1][i] == kNegInf) continue;
                const double iou = iou_cache[t - 1][i][j];
                if (iou < params.min_link_iou) continue;
                const double cand = dp[t - 1][i] + params.lambda_iou * iou;
                if (cand > best) {
                    best = cand;
                    arg = static_cast<int>(i);
                }
            }
            if (arg >= 0) {
                dp[t][j] = best + scores[t][j];
                parent[t][j] = arg;
            }
        }
    }

    PathResult result;
    for (std::size_t j = 0; j < dp[T - 1].size(); ++j) {
        if (dp[T - 1][j] > result.objective) {
            result.objective = dp[T - 1][j];
            result.found = true;
            result.picks.assign(T, -1);
            int cur = static_cast<int>(j);
            for (std::size_t t = T; t-- > 0;) {
                result.picks[t] = cur;
                cur = parent[t][static_cast<std::size_t>(cur)];
            }
        }
    }
    return result;
}

}  // namespace

std::vector<ActionTube> link_tubes(const std::vector<std::vector<FrameDetection>>& frames,
                                   int class_id, const LinkParams& params) {
    if (frames.empty()) {
        throw std::invalid_argument("link_tubes: empty frame list");
    }
    validate_link_params(params);

    const std::size_t T = frames.size();
    std::vector<std::vector<double>> scores(T);
    for (std::size_t t = 0; t < T; ++t) {
        scores[t].reserve(frames[t].size());
        for (const FrameDetection& det : frames[t]) {
            if (class_id < 0 || static_cast<std::size_t>(class_id) >= det.class_scores.size()) {
                throw std::invalid_argument("link_tubes: detection carries no score for the class");
            }
            scores[t].push_back(det.class_scores[static_cast<std::size_t>(class_id)]);
        }
    }

    // Adjacent-frame IoU cache, shared across extraction rounds.
    std::vector<std::vector<std::vector<double>>> iou_cache(T > 1 ? T - 1 : 0);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        iou_cache[t].assign(frames[t].size(), std::vector<double>(frames[t + 1].size(), 0.0));
        for (std::size_t i = 0; i < frames[t].size(); ++i) {
            for (std::size_t j = 0; j < frames[t + 1].size(); ++j) {
                iou_cache[t][i][j] = box_iou(frames[t][i].box, frames[t + 1][j].box);
            }
        }
    }

    std::vector<std::vector<char>> used(T);
    for (std::size_t t = 0; t < T; ++t) used[t].assign(frames[t].size(), 0);

    std::vector<ActionTube> tubes;
    for (;;) {
        const PathResult path = best_path(frames, scores, iou_cache, used, params);
        if (!path.found) break;

        double mean_score = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            mean_score += scores[t][static_cast<std::size_t>(path.picks[t])];
        }
        mean_score /= static_cast<double>(T);
        if (mean_score < params.score_floor) break;

        ActionTube tube;
        tube.class_id = class_id;
        tube.score = mean_score;
        tube.start_frame = frames[0][static_cast<std::size_t>(path.picks[0])].frame_index;
        tube.boxes.reserve(T);
        for (std::size_t t = 0; t < T; ++t) {
            const auto pick = static_cast<std::size_t>(path.picks[t]);
            tube.boxes.push_back(frames[t][pick].box);
            used[t][pick] = 1;
        }
        tubes.push_back(std::move(tube));
    }
    return tubes;
}

std::vector<ActionTube> link_all_classes(const std::vector<std::vector<FrameDetection>>& frames,
                                         std::size_t class_count, const LinkParams& params) {
    std::vector<std::vector<ActionTube>> per_class(class_count);
    const auto classes = static_cast<std::int64_t>(class_count);
#pragma omp parallel for schedule(dynamic) num_threads(resolved_threads())
    for (std::int64_t c = 0; c < classes; ++c) {
        per_class[static_cast<std::size_t>(c)] = link_tubes(frames, static_cast<int>(c), params);
    }
    std::vector<ActionTube> all;
    for (auto& tubes : per_class) {
        for (auto& tube : tubes) all.push_back(std::move(tube));
    }
    return all;
}

double tube_3d_iou(const ActionTube& a, const ActionTube& b) {
    validate_tube(a);
    validate_tube(b);
    const int lo = std::max(a.frame_begin(), b.frame_begin());
    const int hi = std::min(a.frame_end(), b.frame_end());
    const int inter = hi - lo;
    if (inter <= 0) return 0.0;
    const int uni = a.length() + b.length() - inter;

    double spatial = 0.0;
    for (int f = lo; f < hi; ++f) {
        spatial += box_iou(a.box_at(f), b.box_at(f));
    }
    spatial /= static_cast<double>(inter);
    return (static_cast<double>(inter) / static_cast<double>(uni)) * spatial;
}

}  // namespace tubematch
