#pragma once

#include "tubematch/core.hpp"
#include "tubematch/matching.hpp"
#include "tubematch/shift.hpp"

// Serial reference implementations of the parallel kernels. These share the
// per-element arithmetic with the OpenMP versions, so outputs must be
// bit-identical; the test suite and the benchmark compare the two.
namespace tubematch::reference {

SquareMatrix similarity_matrix(std::span<const double> frame_a, std::span<const double> frame_b,
                               std::size_t slots, std::size_t dims);

FeatureClip temporal_shift(const FeatureClip& clip, const ShiftSpec& spec);
FeatureClip matched_shift(const FeatureClip& clip, const ShiftSpec& spec,
                          const TrackAlignment& align);

TrackAlignment match_clip(const FeatureClip& clip);

}  // namespace tubematch::reference
