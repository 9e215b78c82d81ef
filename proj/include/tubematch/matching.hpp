#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tubematch/core.hpp"

namespace tubematch {

// Dense square matrix, row-major.
class SquareMatrix {
  public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
    std::span<const double> values() const { return values_; }

    bool operator==(const SquareMatrix&) const = default;

  private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

using Permutation = std::vector<int>;

bool is_permutation(const Permutation& p);
Permutation invert_permutation(const Permutation& p);

// Per-pair alignment of query slots across a clip: pair_maps[t][i] is the
// slot at frame t+1 matched to slot i at frame t. Each map is a bijection on
// {0, .., slots-1} and there is one map per adjacent frame pair.
struct TrackAlignment {
    std::size_t slots = 0;
    std::vector<Permutation> pair_maps;

    std::size_t frames() const { return pair_maps.size() + 1; }

    bool operator==(const TrackAlignment&) const = default;
};

TrackAlignment identity_alignment(std::size_t frames, std::size_t slots);
void validate_alignment(const TrackAlignment& align);

// u.v / (|u||v|), clamped to [-1, 1]; 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Pairwise cosine similarities between the query vectors of two frames laid
// out as slots x dims blocks: entry (i, j) compares slot i of frame_a with
// slot j of frame_b.
SquareMatrix similarity_matrix(std::span<const double> frame_a, std::span<const double> frame_b,
                               std::size_t slots, std::size_t dims);
SquareMatrix similarity_matrix(const FeatureClip& clip, std::size_t t);

// Exact minimum-cost assignment (Jonker-Volgenant style shortest augmenting
// paths, O(n^3)). Returns sigma minimizing sum_i cost(i, sigma(i)); among
// equal-cost optima the lexicographically smallest sigma is returned.
Permutation hungarian(const SquareMatrix& cost);

// Maximum-similarity matching of query slots between two frames: hungarian
// on cost(i, j) = 1 - cosine similarity.
Permutation match_pair(std::span<const double> frame_a, std::span<const double> frame_b,
                       std::size_t slots, std::size_t dims);

// match_pair over every adjacent frame pair of the clip. Requires T >= 2.
TrackAlignment match_clip(const FeatureClip& clip);

// Composition sigma_{t-1} o .. o sigma_0 mapping frame-0 slots to frame-t
// slots; the identity for t = 0.
Permutation compose_to_reference(const TrackAlignment& align, std::size_t t);

}  // namespace tubematch
