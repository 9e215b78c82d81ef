#include "tubematch/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tubematch {

bool BoundingBox::valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x1 <= x2 && y1 <= y2;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix1 = std::max(a.x1, b.x1);
    const double iy1 = std::max(a.y1, b.y1);
    const double ix2 = std::min(a.x2, b.x2);
    const double iy2 = std::min(a.y2, b.y2);

    const double iw = std::max(0.0, ix2 - ix1);
    const double ih = std::max(0.0, iy2 - iy1);
    const double inter = iw * ih;

    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

FeatureClip::FeatureClip(std::size_t frames, std::size_t slots, std::size_t dims)
    : frames_(frames), slots_(slots), dims_(dims), data_(frames * slots * dims, 0.0) {
    if (frames < 1 || slots < 1 || dims < 1) {
        throw std::invalid_argument("FeatureClip: frames, slots and dims must be at least 1");
    }
}

FeatureClip FeatureClip::from_data(std::size_t frames, std::size_t slots, std::size_t dims,
                                   std::vector<double> values) {
    FeatureClip clip(frames, slots, dims);
    if (values.size() != clip.size()) {
        throw std::invalid_argument("FeatureClip: expected " + std::to_string(clip.size()) +
                                    " values, got " + std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("FeatureClip: non-finite element");
        }
    }
    clip.data_ = std::move(values);
    return clip;
}

double FeatureClip::at(std::size_t t, std::size_t n, std::size_t d) const {
    if (t >= frames_ || n >= slots_ || d >= dims_) {
        throw std::out_of_range("FeatureClip: index out of range");
    }
    return data_[offset(t, n, d)];
}

void FeatureClip::set(std::size_t t, std::size_t n, std::size_t d, double value) {
    if (t >= frames_ || n >= slots_ || d >= dims_) {
        throw std::out_of_range("FeatureClip: index out of range");
    }
    if (!std::isfinite(value)) {
        throw std::invalid_argument("FeatureClip: refusing non-finite write");
    }
    data_[offset(t, n, d)] = value;
}

std::span<const double> FeatureClip::query(std::size_t t, std::size_t n) const {
    if (t >= frames_ || n >= slots_) {
        throw std::out_of_range("FeatureClip: query index out of range");
    }
    return {data_.data() + offset(t, n, 0), dims_};
}

std::span<const double> FeatureClip::frame(std::size_t t) const {
    if (t >= frames_) {
        throw std::out_of_range("FeatureClip: frame index out of range");
    }
    return {data_.data() + offset(t, 0, 0), slots_ * dims_};
}

void validate_detection(const FrameDetection& det, std::size_t class_count) {
    if (det.frame_index < 0) {
        throw std::invalid_argument("FrameDetection: negative frame index");
    }
    if (det.slot_index < 0) {
        throw std::invalid_argument("FrameDetection: negative slot index");
    }
    if (!det.box.valid()) {
        throw std::invalid_argument("FrameDetection: invalid box");
    }
    if (det.class_scores.size() != class_count) {
        throw std::invalid_argument("FrameDetection: expected " + std::to_string(class_count) +
                                    " class scores, got " + std::to_string(det.class_scores.size()));
    }
    for (double s : det.class_scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw std::invalid_argument("FrameDetection: class score outside [0, 1]");
        }
    }
}

const BoundingBox& ActionTube::box_at(int frame) const {
    if (frame < start_frame || frame >= frame_end()) {
        throw std::out_of_range("ActionTube: frame outside tube range");
    }
    return boxes[static_cast<std::size_t>(frame - start_frame)];
}

void validate_tube(const ActionTube& tube) {
    if (tube.boxes.empty()) {
        throw std::invalid_argument("ActionTube: no boxes");
    }
    if (tube.class_id < 0) {
        throw std::invalid_argument("ActionTube: negative class id");
    }
    if (tube.start_frame < 0) {
        throw std::invalid_argument("ActionTube: negative start frame");
    }
    if (!std::isfinite(tube.score)) {
        throw std::invalid_argument("ActionTube: non-finite score");
    }
    for (const BoundingBox& box : tube.boxes) {
        if (!box.valid()) {
            throw std::invalid_argument("ActionTube: invalid box");
        }
    }
}

}  // namespace tubematch
