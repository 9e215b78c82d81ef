#include "tubematch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "tubematch/parallel.hpp"

namespace tubematch {

SquareMatrix::SquareMatrix(std::size_t n, double fill) : n_(n), values_(n * n, fill) {}

bool is_permutation(const Permutation& p) {
    std::vector<char> seen(p.size(), 0);
    for (int v : p) {
        if (v < 0 || static_cast<std::size_t>(v) >= p.size() || seen[static_cast<std::size_t>(v)]) {
            return false;
        }
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

Permutation invert_permutation(const Permutation& p) {
    Permutation inv(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        inv[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
    }
    return inv;
}

TrackAlignment identity_alignment(std::size_t frames, std::size_t slots) {
    if (frames < 1) {
        throw std::invalid_argument("identity_alignment: need at least one frame");
    }
    TrackAlignment align;
    align.slots = slots;
    Permutation id(slots);
    for (std::size_t i = 0; i < slots; ++i) id[i] = static_cast<int>(i);
    align.pair_maps.assign(frames - 1, id);
    return align;
}

void validate_alignment(const TrackAlignment& align) {
    for (const Permutation& p : align.pair_maps) {
        if (p.size() != align.slots || !is_permutation(p)) {
            throw std::invalid_argument("TrackAlignment: pair map is not a bijection on the slots");
        }
    }
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine_similarity: length mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double sim = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(sim, -1.0, 1.0);
}

SquareMatrix similarity_matrix(std::span<const double> frame_a, std::span<const double> frame_b,
                               std::size_t slots, std::size_t dims) {
    if (frame_a.size() != slots * dims || frame_b.size() != slots * dims) {
        throw std::invalid_argument("similarity_matrix: frame size does not match slots * dims");
    }
    SquareMatrix sim(slots);
    const auto n = static_cast<std::int64_t>(slots);
#pragma omp parallel for schedule(static) num_threads(resolved_threads())
    for (std::int64_t i = 0; i < n; ++i) {
        const std::span<const double> qi = frame_a.subspan(static_cast<std::size_t>(i) * dims, dims);
        for (std::int64_t j = 0; j < n; ++j) {
            const std::span<const double> qj =
                frame_b.subspan(static_cast<std::size_t>(j) * dims, dims);
            sim(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = cosine_similarity(qi, qj);
        }
    }
    return sim;
}

SquareMatrix similarity_matrix(const FeatureClip& clip, std::size_t t) {
    if (t + 1 >= clip.frames()) {
        throw std::out_of_range("similarity_matrix: no adjacent frame");
    }
    return similarity_matrix(clip.frame(t), clip.frame(t + 1), clip.slots(), clip.dims());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Kuhn augmenting path restricted to unblocked columns of the tight graph.
bool try_augment(int row, const std::vector<std::vector<int>>& adj, std::vector<char>& visited,
                 std::vector<int>& col_owner, const std::vector<char>& col_blocked) {
    for (int j : adj[static_cast<std::size_t>(row)]) {
        if (col_blocked[static_cast<std::size_t>(j)] || visited[static_cast<std::size_t>(j)]) {
            continue;
        }
        visited[static_cast<std::size_t>(j)] = 1;
        int& owner = col_owner[static_cast<std::size_t>(j)];
        if (owner < 0 || try_augment(owner, adj, visited, col_owner, col_blocked)) {
            owner = row;
            return true;
        }
    }
    return false;
}

bool rows_from_have_perfect_matching(int from, int n, const std::vector<std::vector<int>>& adj,
                                     const std::vector<char>& col_blocked) {
    std::vector<int> col_owner(static_cast<std::size_t>(n), -1);
    std::vector<char> visited(static_cast<std::size_t>(n));
    for (int i = from; i < n; ++i) {
        std::fill(visited.begin(), visited.end(), 0);
        if (!try_augment(i, adj, visited, col_owner, col_blocked)) return false;
    }
    return true;
}

// All optimal assignments live on the tight edges of the final potentials.
// Fixing columns row by row, smallest feasible column first, yields the
// lexicographically smallest optimum.
Permutation lexicographic_tight_matching(int n, const std::vector<std::vector<int>>& adj,
                                         const Permutation& fallback) {
    std::vector<char> col_blocked(static_cast<std::size_t>(n), 0);
    Permutation sigma(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        bool fixed = false;
        for (int j : adj[static_cast<std::size_t>(i)]) {
            if (col_blocked[static_cast<std::size_t>(j)]) continue;
            col_blocked[static_cast<std::size_t>(j)] = 1;
            if (rows_from_have_perfect_matching(i + 1, n, adj, col_blocked)) {
                sigma[static_cast<std::size_t>(i)] = j;
                fixed = true;
                break;
            }
            col_blocked[static_cast<std::size_t>(j)] = 0;
        }
        if (!fixed) return fallback;  // tolerance artefact; keep the optimal assignment
    }
    return sigma;
}

}  // namespace

Permutation hungarian(const SquareMatrix& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};

    double max_abs = 0.0;
    for (double v : cost.values()) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("hungarian: non-finite cost entry");
        }
        max_abs = std::max(max_abs, std::abs(v));
    }

    // Shortest augmenting path formulation with row/column potentials;
    // column n is the virtual start of each augmentation.
    std::vector<double> row_pot(static_cast<std::size_t>(n), 0.0);
    std::vector<double> col_pot(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match_row(static_cast<std::size_t>(n) + 1, -1);  // column -> row
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 0; i < n; ++i) {
        match_row[static_cast<std::size_t>(n)] = i;
        int j0 = n;
        std::vector<double> min_reduced(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match_row[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = -1;
            for (int j = 0; j < n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double reduced = cost(static_cast<std::size_t>(i0), static_cast<std::size_t>(j)) -
                                       row_pot[static_cast<std::size_t>(i0)] -
                                       col_pot[static_cast<std::size_t>(j)];
                if (reduced < min_reduced[static_cast<std::size_t>(j)]) {
                    min_reduced[static_cast<std::size_t>(j)] = reduced;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (min_reduced[static_cast<std::size_t>(j)] < delta) {
                    delta = min_reduced[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    if (match_row[static_cast<std::size_t>(j)] >= 0) {
                        row_pot[static_cast<std::size_t>(match_row[static_cast<std::size_t>(j)])] +=
                            delta;
                    }
                    col_pot[static_cast<std::size_t>(j)] -= delta;
                } else {
                    min_reduced[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match_row[static_cast<std::size_t>(j0)] != -1);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match_row[static_cast<std::size_t>(j0)] = match_row[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != n);
    }

    Permutation sigma(static_cast<std::size_t>(n), -1);
    for (int j = 0; j < n; ++j) {
        sigma[static_cast<std::size_t>(match_row[static_cast<std::size_t>(j)])] = j;
    }

    // Resolve ties deterministically: edges whose reduced cost vanishes are
    // the ones optimal assignments can use. The tolerance sits far above
    // accumulated rounding (~n * eps * scale) and far below genuine cost
    // gaps.
    const double tol = 1e-9 * std::max(1.0, max_abs);
    std::vector<std::vector<int>> tight(static_cast<std::size_t>(n));
    std::size_t tight_edges = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double reduced = cost(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) -
                                   row_pot[static_cast<std::size_t>(i)] -
                                   col_pot[static_cast<std::size_t>(j)];
            if (reduced <= tol) {
                tight[static_cast<std::size_t>(i)].push_back(j);
                ++tight_edges;
            }
        }
    }
    if (tight_edges == static_cast<std::size_t>(n)) {
        return sigma;  // unique optimum
    }
    return lexicographic_tight_matching(n, tight, sigma);
}

Permutation match_pair(std::span<const double> frame_a, std::span<const double> frame_b,
                       std::size_t slots, std::size_t dims) {
    const SquareMatrix sim = similarity_matrix(frame_a, frame_b, slots, dims);
    SquareMatrix cost(slots);
    for (std::size_t i = 0; i < slots; ++i) {
        for (std::size_t j = 0; j < slots; ++j) {
            cost(i, j) = 1.0 - sim(i, j);
        }
    }
    return hungarian(cost);
}

TrackAlignment match_clip(const FeatureClip& clip) {
    if (clip.frames() < 2) {
        throw std::invalid_argument("match_clip: need at least two frames");
    }
    TrackAlignment align;
    align.slots = clip.slots();
    align.pair_maps.resize(clip.frames() - 1);
    const auto pairs = static_cast<std::int64_t>(clip.frames() - 1);
#pragma omp parallel for schedule(dynamic) num_threads(resolved_threads())
    for (std::int64_t t = 0; t < pairs; ++t) {
        align.pair_maps[static_cast<std::size_t>(t)] =
            match_pair(clip.frame(static_cast<std::size_t>(t)),
                       clip.frame(static_cast<std::size_t>(t) + 1), clip.slots(), clip.dims());
    }
    return align;
}

Permutation compose_to_reference(const TrackAlignment& align, std::size_t t) {
    if (t >= align.frames()) {
        throw std::out_of_range("compose_to_reference: frame index out of range");
    }
    Permutation composed(align.slots);
    for (std::size_t i = 0; i < align.slots; ++i) composed[i] = static_cast<int>(i);
    for (std::size_t k = 0; k < t; ++k) {
        const Permutation& step = align.pair_maps[k];
        for (std::size_t i = 0; i < align.slots; ++i) {
            composed[i] = step[static_cast<std::size_t>(composed[i])];
        }
    }
    return composed;
}

}  // namespace tubematch
