// Times the OpenMP kernels against their serial reference twins and checks
// that both produce identical bits while at it.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "tubematch/matching.hpp"
#include "tubematch/parallel.hpp"
#include "tubematch/reference.hpp"
#include "tubematch/rng.hpp"
#include "tubematch/shift.hpp"

namespace {

using namespace tubematch;
using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto start = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = clock_type::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() /
           static_cast<double>(reps);
}

FeatureClip random_clip(std::size_t frames, std::size_t slots, std::size_t dims,
                        std::uint64_t seed) {
    Rng rng(seed);
    FeatureClip clip(frames, slots, dims);
    for (double& v : clip.data()) v = rng.next_gaussian();
    return clip;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-24s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms, equal ? "bit-equal" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("threads: %d\n", resolved_threads());

    {
        const FeatureClip clip = random_clip(2, 256, 512, 11);
        SquareMatrix serial_out, parallel_out;
        const double s = time_ms(
            [&] {
                serial_out =
                    reference::similarity_matrix(clip.frame(0), clip.frame(1), 256, 512);
            },
            3);
        const double p = time_ms(
            [&] { parallel_out = similarity_matrix(clip.frame(0), clip.frame(1), 256, 512); }, 3);
        report("similarity_matrix", s, p, serial_out == parallel_out);
    }

    {
        const FeatureClip clip = random_clip(16, 256, 1024, 12);
        ShiftSpec spec;
        spec.forward_fraction = 0.25;
        spec.backward_fraction = 0.25;
        FeatureClip serial_out(1, 1, 1), parallel_out(1, 1, 1);
        const double s = time_ms([&] { serial_out = reference::temporal_shift(clip, spec); }, 5);
        const double p = time_ms([&] { parallel_out = temporal_shift(clip, spec); }, 5);
        report("temporal_shift", s, p, serial_out == parallel_out);
    }

    {
        const FeatureClip clip = random_clip(16, 256, 1024, 13);
        ShiftSpec spec;
        spec.forward_fraction = 0.25;
        spec.backward_fraction = 0.25;
        spec.alignment = AlignmentMode::matched;
        Rng rng(14);
        TrackAlignment align;
        align.slots = 256;
        for (std::size_t t = 0; t + 1 < 16; ++t) align.pair_maps.push_back(rng.permutation(256));
        FeatureClip serial_out(1, 1, 1), parallel_out(1, 1, 1);
        const double s =
            time_ms([&] { serial_out = reference::matched_shift(clip, spec, align); }, 5);
        const double p = time_ms([&] { parallel_out = matched_shift(clip, spec, align); }, 5);
        report("matched_shift", s, p, serial_out == parallel_out);
    }

    {
        const FeatureClip clip = random_clip(8, 128, 256, 15);
        TrackAlignment serial_out, parallel_out;
        const double s = time_ms([&] { serial_out = reference::match_clip(clip); }, 2);
        const double p = time_ms([&] { parallel_out = match_clip(clip); }, 2);
        report("match_clip", s, p, serial_out == parallel_out);
    }

    return 0;
}
