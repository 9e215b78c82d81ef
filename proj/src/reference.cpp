#include "tubematch/reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace tubematch::reference {

SquareMatrix similarity_matrix(std::span<const double> frame_a, std::span<const double> frame_b,
                               std::size_t slots, std::size_t dims) {
    if (frame_a.size() != slots * dims || frame_b.size() != slots * dims) {
        throw std::invalid_argument("similarity_matrix: frame size does not match slots * dims");
    }
    SquareMatrix sim(slots);
    for (std::size_t i = 0; i < slots; ++i) {
        for (std::size_t j = 0; j < slots; ++j) {
            sim(i, j) = cosine_similarity(frame_a.subspan(i * dims, dims),
                                          frame_b.subspan(j * dims, dims));
        }
    }
    return sim;
}

namespace {

FeatureClip shift_serial(const FeatureClip& clip, const ShiftSpec& spec,
                         const TrackAlignment* align) {
    const std::size_t T = clip.frames();
    const std::size_t N = clip.slots();
    const std::size_t D = clip.dims();
    const ChannelSplit split = channel_split(D, spec);
    const std::size_t fwd = split.forward;
    const std::size_t bwd = split.backward;

    std::vector<Permutation> forward_src;
    if (align != nullptr) {
        for (const Permutation& p : align->pair_maps) {
            forward_src.push_back(invert_permutation(p));
        }
    }

    FeatureClip out(T, N, D);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < N; ++n) {
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
                }
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
    return shift_serial(clip, spec, nullptr);
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
    return shift_serial(clip, spec, &align);
}

TrackAlignment match_clip(const FeatureClip& clip) {
    if (clip.frames() < 2) {
        throw std::invalid_argument("match_clip: need at least two frames");
    }
    TrackAlignment align;
    align.slots = clip.slots();
    align.pair_maps.resize(clip.frames() - 1);
    for (std::size_t t = 0; t + 1 < clip.frames(); ++t) {
        const SquareMatrix sim =
            similarity_matrix(clip.frame(t), clip.frame(t + 1), clip.slots(), clip.dims());
        SquareMatrix cost(clip.slots());
        for (std::size_t i = 0; i < clip.slots(); ++i) {
            for (std::size_t j = 0; j < clip.slots(); ++j) {
                cost(i, j) = 1.0 - sim(i, j);
            }
        }
        align.pair_maps[t] = hungarian(cost);
    }
    return align;
}

}  // namespace tubematch::reference
