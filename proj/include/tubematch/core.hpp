#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tubematch {

struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    bool valid() const;

    bool operator==(const BoundingBox&) const = default;
};

// Intersection over union in [0, 1]. Two boxes whose union has zero area
// (both degenerate) get 0.
double box_iou(const BoundingBox& a, const BoundingBox& b);

// A T x N x D stack of per-frame query features, row-major in (t, n, d).
// Every element is finite; at()/set() enforce the index space and the
// finiteness invariant, operator() is the unchecked kernel path.
class FeatureClip {
  public:
    FeatureClip(std::size_t frames, std::size_t slots, std::size_t dims);
    static FeatureClip from_data(std::size_t frames, std::size_t slots, std::size_t dims,
                                 std::vector<double> values);

    std::size_t frames() const { return frames_; }
    std::size_t slots() const { return slots_; }
    std::size_t dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    double at(std::size_t t, std::size_t n, std::size_t d) const;
    void set(std::size_t t, std::size_t n, std::size_t d, double value);

    double operator()(std::size_t t, std::size_t n, std::size_t d) const {
        return data_[offset(t, n, d)];
    }
    double& operator()(std::size_t t, std::size_t n, std::size_t d) {
        return data_[offset(t, n, d)];
    }

    // D-length view of one query vector.
    std::span<const double> query(std::size_t t, std::size_t n) const;
    // N*D-length view of one frame.
    std::span<const double> frame(std::size_t t) const;

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool operator==(const FeatureClip&) const = default;

  private:
    std::size_t offset(std::size_t t, std::size_t n, std::size_t d) const {
        return (t * slots_ + n) * dims_ + d;
    }

    std::size_t frames_ = 0;
    std::size_t slots_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> data_;
};

struct FrameDetection {
    int frame_index = 0;
    int slot_index = 0;
    BoundingBox box;
    std::vector<double> class_scores;  // length C, each in [0, 1]

    bool operator==(const FrameDetection&) const = default;
};

// Throws std::invalid_argument when the detection violates its invariants.
void validate_detection(const FrameDetection& det, std::size_t class_count);

// A linked sequence of boxes over consecutive frames carrying one class.
// boxes[i] sits at frame start_frame + i, so the consecutive-frames
// invariant holds by construction; boxes must be non-empty.
struct ActionTube {
    int class_id = 0;
    double score = 0.0;
    int start_frame = 0;
    std::vector<BoundingBox> boxes;

    int frame_begin() const { return start_frame; }
    int frame_end() const { return start_frame + static_cast<int>(boxes.size()); }
    int length() const { return static_cast<int>(boxes.size()); }
    const BoundingBox& box_at(int frame) const;

    bool operator==(const ActionTube&) const = default;
};

void validate_tube(const ActionTube& tube);

}  // namespace tubematch
