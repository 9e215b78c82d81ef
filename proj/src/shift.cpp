#include "tubematch/shift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "tubematch/parallel.hpp"

namespace tubematch {

ChannelSplit channel_split(std::size_t dims, const ShiftSpec& spec) {
    if (dims < 1) {
        throw std::invalid_argument("channel_split: dims must be at least 1");
    }
    if (!(spec.forward_fraction >= 0.0 && spec.forward_fraction <= 1.0) ||
        !(spec.backward_fraction >= 0.0 && spec.backward_fraction <= 1.0)) {
        throw std::invalid_argument("channel_split: fractions must lie in [0, 1]");
    }
    if (spec.forward_fraction + spec.backward_fraction > 1.0) {
        throw std::invalid_argument("channel_split: fractions sum above 1");
    }
    ChannelSplit split;
    split.forward = static_cast<std::size_t>(std::floor(spec.forward_fraction * static_cast<double>(dims)));
    split.backward = static_cast<std::size_t>(std::floor(spec.backward_fraction * static_cast<double>(dims)));
    return split;
}

namespace {

// Shared kernel: slot sources are identity for the index-naive mode and the
// alignment's (inverted) pair maps for the matched mode. The forward block
// of output (t, n) reads frame t-1, the backward block frame t+1.
FeatureClip shift_impl(const FeatureClip& clip, const ShiftSpec& spec,
                       const TrackAlignment* align) {
    const std::size_t T = clip.frames();
    const std::size_t N = clip.slots();
    const std::size_t D = clip.dims();
    const ChannelSplit split = channel_split(D, spec);
    const std::size_t fwd = split.forward;
    const std::size_t bwd = split.backward;

    // forward_src[t-1][n] = slot at frame t-1 whose forward block lands in
    // slot n at frame t (inverse pair map); backward_src[t][i] = slot at
    // frame t+1 feeding the backward block of slot i at frame t (pair map).
    std::vector<Permutation> forward_src;
    if (align != nullptr) {
        forward_src.reserve(align->pair_maps.size());
        for (const Permutation& p : align->pair_maps) {
            forward_src.push_back(invert_permutation(p));
        }
    }

    FeatureClip out(T, N, D);
    const auto frames = static_cast<std::int64_t>(T);
    const auto slots = static_cast<std::int64_t>(N);
#pragma omp parallel for collapse(2) schedule(static) num_threads(resolved_threads())
    for (std::int64_t ti = 0; ti < frames; ++ti) {
        for (std::int64_t ni = 0; ni < slots; ++ni) {
            const auto t = static_cast<std::size_t>(ti);
            const auto n = static_cast<std::size_t>(ni);
            double* dst = &out(t, n, 0);

            if (fwd > 0) {
                std::size_t src_slot = n;
                if (align != nullptr && t >= 1) {
                    src_slot = static_cast<std::size_t>(forward_src[t - 1][n]);
                }
                if (t >= 1) {
                    const double* src = &clip(t - 1, src_slot, 0);
                    std::copy(src, src + fwd, dst);
                } else if (spec.boundary == BoundaryMode::copy_self) {
                    const double* src = &clip(t, n, 0);
                    std::copy(src, src + fwd, dst);
                }  // zero_fill: output is already zero
            }

            if (bwd > 0) {
                std::size_t src_slot = n;
                if (align != nullptr && t + 1 < T) {
                    src_slot = static_cast<std::size_t>(align->pair_maps[t][n]);
                }
                if (t + 1 < T) {
                    const double* src = &clip(t + 1, src_slot, fwd);
                    std::copy(src, src + bwd, dst + fwd);
                } else if (spec.boundary == BoundaryMode::copy_self) {
                    const double* src = &clip(t, n, fwd);
                    std::copy(src, src + bwd, dst + fwd);
                }
            }

            const std::size_t keep = fwd + bwd;
            if (keep < D) {
                const double* src = &clip(t, n, keep);
                std::copy(src, src + (D - keep), dst + keep);
            }
        }
    }
    return out;
}

}  // namespace

FeatureClip temporal_shift(const FeatureClip& clip, const ShiftSpec& spec) {
    if (spec.alignment != AlignmentMode::index_naive) {
        throw std::invalid_argument("temporal_shift: spec.alignment must be index_naive");
    }
    return shift_impl(clip, spec, nullptr);
}

FeatureClip matched_shift(const FeatureClip& clip, const ShiftSpec& spec,
                          const TrackAlignment& align) {
    if (spec.alignment != AlignmentMode::matched) {
        throw std::invalid_argument("matched_shift: spec.alignment must be matched");
    }
    if (align.slots != clip.slots() || align.frames() != clip.frames()) {
        throw std::invalid_argument("matched_shift: alignment dimensions do not match the clip");
    }
    validate_alignment(align);
    return shift_impl(clip, spec, &align);
}

const char* to_string(ShiftPosition position) {
    switch (position) {
        case ShiftPosition::backbone: return "backbone";
        case ShiftPosition::encoder_input: return "encoder_input";
        case ShiftPosition::encoder: return "encoder";
        case ShiftPosition::encoder_output: return "encoder_output";
        case ShiftPosition::decoder: return "decoder";
        case ShiftPosition::query: return "query";
    }
    return "query";
}

ShiftPosition shift_position_from_string(const std::string& name) {
    if (name == "backbone") return ShiftPosition::backbone;
    if (name == "encoder_input") return ShiftPosition::encoder_input;
    if (name == "encoder") return ShiftPosition::encoder;
    if (name == "encoder_output") return ShiftPosition::encoder_output;
    if (name == "decoder") return ShiftPosition::decoder;
    if (name == "query") return ShiftPosition::query;
    throw std::invalid_argument("unknown shift position: " + name);
}

}  // namespace tubematch
