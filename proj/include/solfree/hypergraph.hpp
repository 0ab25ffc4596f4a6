#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "solfree/cyclic.hpp"
#include "solfree/forms.hpp"

namespace solfree {

/// Vertices 0..n-1; each edge is a sorted set of distinct vertices. A set is
/// independent when it contains no edge entirely.
struct Hypergraph {
    std::size_t vertex_count = 0;
    std::vector<std::vector<std::uint32_t>> edges;

    /// Drops duplicate edges and edges that contain another edge.
    void normalize();
    bool is_independent(std::span<const std::uint32_t> vertices) const;
};

/// Vertices are the residues of Z/m; every solution tuple of every form
/// contributes the set of its distinct coordinates.
Hypergraph solution_hypergraph(const FormFamily& family, std::int64_t modulus,
                               SolutionFilter filter = SolutionFilter::all);

/// Vertex i*m + x stands for x in A_i; one edge per solution of L in A_1 x ... x A_t.
Hypergraph solution_hypergraph(const LinearForm& form, std::span<const CyclicSet> sets);

/// Vertices are the cells of resolution N; an edge is a cell tuple whose product of
/// half-open cells meets ker L.
Hypergraph grid_solution_hypergraph(const FormFamily& family, std::int64_t resolution);

struct MisOptions {
    std::optional<std::chrono::steady_clock::time_point> deadline;
    /// Independent set to start from; the search only reports strictly larger sets.
    std::vector<std::uint32_t> incumbent;
    /// Stop as soon as the incumbent reaches this size (it is then optimal).
    std::optional<std::size_t> upper_bound;
    /// Vertices that must belong to the answer.
    std::vector<std::uint32_t> forced;
    /// When non-empty, only vertices with allowed[v] != 0 may be chosen.
    std::vector<std::uint8_t> allowed;
};

struct MisResult {
    std::vector<std::uint32_t> vertices;  ///< sorted
    bool optimal = false;                 ///< search space exhausted or bound reached
    bool improved = false;                ///< beats the supplied incumbent
    std::uint64_t nodes = 0;
};

/// Branch and bound for a maximum independent set under the constraints in options.
/// The bound subtracts a greedy packing of disjoint residual edges from the number
/// of remaining candidates.
MisResult maximum_independent_set(const Hypergraph& graph, const MisOptions& options = {});

}  // namespace solfree
