#pragma once

#include <cstddef>
#include <string>

#include "tubematch/core.hpp"
#include "tubematch/matching.hpp"

namespace tubematch {

// Where in a detector the shifted features would sit. Pure metadata: clips
// carry no network structure, the label just travels with experiment
// configurations.
enum class ShiftPosition { backbone, encoder_input, encoder, encoder_output, decoder, query };

enum class AlignmentMode { index_naive, matched };

// Fill rule for frames whose shift source falls outside the clip.
enum class BoundaryMode { zero_fill, copy_self };

struct ShiftSpec {
    double forward_fraction = 0.125;   // fraction of channels handed to frame t+1
    double backward_fraction = 0.125;  // fraction of channels handed to frame t-1
    ShiftPosition position = ShiftPosition::query;
    AlignmentMode alignment = AlignmentMode::index_naive;
    BoundaryMode boundary = BoundaryMode::zero_fill;
};

struct ChannelSplit {
    std::size_t forward = 0;   // D_f leading channels
    std::size_t backward = 0;  // D_d channels after the forward block
};

// floor(fraction * dims) per direction. Fractions must lie in [0, 1] and sum
// to at most 1, which keeps forward + backward <= dims.
ChannelSplit channel_split(std::size_t dims, const ShiftSpec& spec);

// Index-naive temporal shift: each slot n exchanges channel blocks with the
// same slot of its neighbouring frames. For the output at (t, n):
//   d < D_f            comes from frame t-1,
//   D_f <= d < D_f+D_d comes from frame t+1,
//   the rest           is copied through.
// Frames with no source (t = 0 forward, t = T-1 backward) follow
// spec.boundary. Requires spec.alignment == index_naive.
FeatureClip temporal_shift(const FeatureClip& clip, const ShiftSpec& spec);

// Track-aligned shift: the forward block of slot i at frame t lands in slot
// sigma_t(i) at frame t+1, and slot i at frame t takes its backward block
// from slot sigma_t(i) at frame t+1, so channel blocks follow matched query
// identities instead of raw slot indices. With identity pair maps the result
// is bitwise equal to temporal_shift. Requires spec.alignment == matched and
// alignment dimensions matching the clip.
FeatureClip matched_shift(const FeatureClip& clip, const ShiftSpec& spec,
                          const TrackAlignment& align);

const char* to_string(ShiftPosition position);
ShiftPosition shift_position_from_string(const std::string& name);

}  // namespace tubematch
