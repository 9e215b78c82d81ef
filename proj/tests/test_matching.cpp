#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "tubematch/core.hpp"
#include "tubematch/matching.hpp"
#include "tubematch/rng.hpp"

using namespace tubematch;

namespace {

double assignment_cost(const SquareMatrix& cost, const Permutation& sigma) {
    double total = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        total += cost(i, static_cast<std::size_t>(sigma[i]));
    }
    return total;
}

// Exhaustive oracle: minimum cost over all n! permutations, keeping the
// lexicographically smallest optimum (next_permutation enumerates in
// lexicographic order, strict improvement keeps the first).
std::pair<Permutation, double> brute_force_assignment(const SquareMatrix& cost) {
    Permutation perm(cost.size());
    std::iota(perm.begin(), perm.end(), 0);
    Permutation best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        const double c = assignment_cost(cost, perm);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, best_cost};
}

SquareMatrix random_cost(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    SquareMatrix cost(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cost(i, j) = rng.next_uniform(lo, hi);
        }
    }
    return cost;
}

FeatureClip clip_from_rows(const std::vector<std::vector<double>>& frames_rows, std::size_t slots,
                           std::size_t dims) {
    std::vector<double> data;
    for (const auto& frame : frames_rows) {
        data.insert(data.end(), frame.begin(), frame.end());
    }
    return FeatureClip::from_data(frames_rows.size(), slots, dims, std::move(data));
}

}  // namespace

TEST_CASE("cosine similarity hand cases") {
    const std::vector<double> e1{1, 0, 0};
    CHECK(cosine_similarity(e1, e1) == doctest::Approx(1.0));

    const std::vector<double> a{1, 0}, b{0, 1};
    CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));

    const std::vector<double> u{1, 1}, v{1, 0};
    CHECK(cosine_similarity(u, v) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cosine similarity zero-norm convention and length check") {
    const std::vector<double> zero{0, 0, 0}, unit{1, 0, 0};
    CHECK(cosine_similarity(zero, unit) == 0.0);
    CHECK(cosine_similarity(zero, zero) == 0.0);

    const std::vector<double> shorter{1, 0};
    CHECK_THROWS_AS(cosine_similarity(shorter, unit), std::invalid_argument);
}

TEST_CASE("similarity matrix of orthonormal rows is the identity") {
    const std::vector<double> frame{1, 0, 0, 0, 1, 0, 0, 0, 1};
    const SquareMatrix sim = similarity_matrix(frame, frame, 3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(sim(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("similarity matrix matches entrywise recomputation") {
    Rng rng(5);
    const std::size_t slots = 3, dims = 7;
    std::vector<double> fa(slots * dims), fb(slots * dims);
    for (double& x : fa) x = rng.next_gaussian();
    for (double& x : fb) x = rng.next_gaussian();

    const SquareMatrix sim = similarity_matrix(fa, fb, slots, dims);
    for (std::size_t i = 0; i < slots; ++i) {
        for (std::size_t j = 0; j < slots; ++j) {
            const double expect =
                cosine_similarity(std::span(fa).subspan(i * dims, dims),
                                  std::span(fb).subspan(j * dims, dims));
            CHECK(sim(i, j) == expect);
            CHECK(sim(i, j) >= -1.0);
            CHECK(sim(i, j) <= 1.0);
        }
    }

    CHECK(similarity_matrix(fa, fb, 1, 21)(0, 0) == cosine_similarity(fa, fb));
    CHECK_THROWS_AS(similarity_matrix(fa, fb, 4, dims), std::invalid_argument);
}

TEST_CASE("hungarian solves the obvious cases") {
    SquareMatrix diag_zero(3, 1.0);
    for (std::size_t i = 0; i < 3; ++i) diag_zero(i, i) = 0.0;
    CHECK(hungarian(diag_zero) == Permutation{0, 1, 2});

    SquareMatrix swap_best(2);
    swap_best(0, 0) = 1.0;
    swap_best(0, 1) = 0.0;
    swap_best(1, 0) = 0.0;
    swap_best(1, 1) = 1.0;
    CHECK(hungarian(swap_best) == Permutation{1, 0});
}

TEST_CASE("hungarian rejects non-finite costs") {
    SquareMatrix cost(2, 0.0);
    cost(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(hungarian(cost), std::invalid_argument);
    cost(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(hungarian(cost), std::invalid_argument);
}

TEST_CASE("hungarian equals brute force on random matrices") {
    Rng rng(17);
    for (std::size_t n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 60; ++trial) {
            const SquareMatrix cost = random_cost(rng, n, -2.0, 3.0);
            const auto [best, best_cost] = brute_force_assignment(cost);
            const Permutation sigma = hungarian(cost);
            REQUIRE(is_permutation(sigma));
            CHECK(assignment_cost(cost, sigma) == best_cost);
        }
    }
}

TEST_CASE("hungarian breaks ties lexicographically") {
    // all-equal costs: every permutation is optimal
    CHECK(hungarian(SquareMatrix(5, 0.0)) == Permutation{0, 1, 2, 3, 4});
    CHECK(hungarian(SquareMatrix(4, 2.5)) == Permutation{0, 1, 2, 3});

    // two optima {0->0,1->1} and {0->1,1->0}, both cost 1
    SquareMatrix tied(2);
    tied(0, 0) = 0.0;
    tied(0, 1) = 1.0;
    tied(1, 0) = 0.0;
    tied(1, 1) = 1.0;
    CHECK(hungarian(tied) == Permutation{0, 1});

    // small-integer matrices tie often; the oracle keeps the
    // lexicographically smallest optimum, the solver must match it exactly
    Rng rng(23);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 2 + trial % 4;
        SquareMatrix cost(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                cost(i, j) = static_cast<double>(rng.next_below(3));
            }
        }
        const auto [best, best_cost] = brute_force_assignment(cost);
        const Permutation sigma = hungarian(cost);
        CHECK(assignment_cost(cost, sigma) == best_cost);
        CHECK(sigma == best);
    }
}

TEST_CASE("match_pair recovers a planted permutation") {
    Rng rng(31);
    const std::size_t slots = 6, dims = 16;

    // distinct near-orthogonal rows
    std::vector<double> frame_a(slots * dims);
    for (double& x : frame_a) x = rng.next_gaussian();

    const Permutation planted = rng.permutation(static_cast<int>(slots));
    std::vector<double> frame_b(slots * dims);
    for (std::size_t i = 0; i < slots; ++i) {
        for (std::size_t d = 0; d < dims; ++d) {
            frame_b[static_cast<std::size_t>(planted[i]) * dims + d] = frame_a[i * dims + d];
        }
    }

    CHECK(match_pair(frame_a, frame_b, slots, dims) == planted);
}

TEST_CASE("match_pair identity and single-slot cases") {
    const std::vector<double> frame{1, 0, 0, 0, 1, 0, 0, 0, 1};
    CHECK(match_pair(frame, frame, 3, 3) == Permutation{0, 1, 2});

    const std::vector<double> one{0.3, -2.0};
    CHECK(match_pair(one, one, 1, 2) == Permutation{0});
}

TEST_CASE("match_pair is scale invariant") {
    Rng rng(37);
    const std::size_t slots = 5, dims = 12;
    std::vector<double> fa(slots * dims), fb(slots * dims);
    for (double& x : fa) x = rng.next_gaussian();
    for (double& x : fb) x = rng.next_gaussian();

    const SquareMatrix sim_before = similarity_matrix(fa, fb, slots, dims);
    const Permutation sigma_before = match_pair(fa, fb, slots, dims);

    std::vector<double> fa_scaled = fa;
    for (std::size_t i = 0; i < slots; ++i) {
        const double scale = rng.next_uniform(0.1, 10.0);
        for (std::size_t d = 0; d < dims; ++d) fa_scaled[i * dims + d] *= scale;
    }
    const SquareMatrix sim_after = similarity_matrix(fa_scaled, fb, slots, dims);
    for (std::size_t i = 0; i < slots; ++i) {
        for (std::size_t j = 0; j < slots; ++j) {
            CHECK(sim_after(i, j) == doctest::Approx(sim_before(i, j)).epsilon(1e-9));
        }
    }
    CHECK(match_pair(fa_scaled, fb, slots, dims) == sigma_before);
}

TEST_CASE("match_pair of swapped frames is the inverse match") {
    Rng rng(43);
    const std::size_t slots = 5, dims = 12;
    std::vector<double> fa(slots * dims), fb(slots * dims);
    for (double& x : fa) x = rng.next_gaussian();
    for (double& x : fb) x = rng.next_gaussian();

    const Permutation forward = match_pair(fa, fb, slots, dims);
    const Permutation backward = match_pair(fb, fa, slots, dims);
    CHECK(backward == invert_permutation(forward));
}

TEST_CASE("match_clip computes one map per adjacent pair") {
    const std::vector<double> frame{1, 0, 0, 0, 1, 0, 0, 0, 1};
    const FeatureClip clip = clip_from_rows({frame, frame, frame, frame}, 3, 3);

    const TrackAlignment align = match_clip(clip);
    CHECK(align.frames() == 4);
    CHECK(align.pair_maps.size() == 3);
    for (const Permutation& map : align.pair_maps) {
        CHECK(map == Permutation{0, 1, 2});
    }

    const FeatureClip two = clip_from_rows({frame, frame}, 3, 3);
    CHECK(match_clip(two).pair_maps.size() == 1);

    const FeatureClip single = clip_from_rows({frame}, 3, 3);
    CHECK_THROWS_AS(match_clip(single), std::invalid_argument);
}

TEST_CASE("match_clip recovers per-frame planted permutations") {
    Rng rng(47);
    const std::size_t slots = 8, dims = 24, frames = 5;

    std::vector<double> base(slots * dims);
    for (double& x : base) x = rng.next_gaussian();

    std::vector<std::vector<double>> frame_data;
    std::vector<Permutation> slot_of;  // per frame: original row -> slot
    Permutation identity(slots);
    std::iota(identity.begin(), identity.end(), 0);
    slot_of.push_back(identity);
    frame_data.push_back(base);
    for (std::size_t t = 1; t < frames; ++t) {
        const Permutation perm = rng.permutation(static_cast<int>(slots));
        std::vector<double> frame(slots * dims);
        for (std::size_t i = 0; i < slots; ++i) {
            for (std::size_t d = 0; d < dims; ++d) {
                frame[static_cast<std::size_t>(perm[i]) * dims + d] = base[i * dims + d];
            }
        }
        slot_of.push_back(perm);
        frame_data.push_back(std::move(frame));
    }

    const FeatureClip clip = clip_from_rows(frame_data, slots, dims);
    const TrackAlignment align = match_clip(clip);
    for (std::size_t t = 0; t + 1 < frames; ++t) {
        // expected map: slot_of[t][i] -> slot_of[t+1][i]
        for (std::size_t i = 0; i < slots; ++i) {
            CHECK(align.pair_maps[t][static_cast<std::size_t>(slot_of[t][i])] ==
                  slot_of[t + 1][i]);
        }
    }
}

TEST_CASE("compose_to_reference") {
    TrackAlignment align;
    align.slots = 2;
    align.pair_maps = {{1, 0}, {1, 0}};

    CHECK(compose_to_reference(align, 0) == Permutation{0, 1});
    CHECK(compose_to_reference(align, 1) == Permutation{1, 0});
    CHECK(compose_to_reference(align, 2) == Permutation{0, 1});  // swap twice
    CHECK_THROWS_AS(compose_to_reference(align, 3), std::out_of_range);

    const TrackAlignment id = identity_alignment(4, 3);
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(compose_to_reference(id, t) == Permutation{0, 1, 2});
    }
}

TEST_CASE("alignment validation") {
    TrackAlignment align;
    align.slots = 3;
    align.pair_maps = {{0, 1, 2}, {2, 0, 1}};
    CHECK_NOTHROW(validate_alignment(align));

    align.pair_maps.push_back({0, 0, 1});
    CHECK_THROWS_AS(validate_alignment(align), std::invalid_argument);

    align.pair_maps.back() = {0, 1};
    CHECK_THROWS_AS(validate_alignment(align), std::invalid_argument);
}
