#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "solfree/cyclic.hpp"
#include "solfree/forms.hpp"
#include "solfree/torus.hpp"

namespace solfree {

/// One linear equation over a collection of base sets in Z/m. Coordinate i
/// ranges over B_{base[i]} - shift[i].
struct RemovalConstraint {
    LinearForm form;
    std::vector<std::size_t> base;
    std::vector<std::int64_t> shift;
};

struct GreedyRemoval {
    std::vector<CyclicSet> removed;  ///< one per base set, in base coordinates
    std::size_t rounds = 0;
    std::size_t total() const;
};

/// Deletes the base element lying on the most remaining solutions until every
/// constraint is solution-free. Ties go to the smallest residue, then the
/// smallest base index.
GreedyRemoval greedy_removal(std::span<const CyclicSet> bases, std::span<const RemovalConstraint> constraints);

/// t sets: one base per coordinate. A single set: the same set in every coordinate.
GreedyRemoval greedy_removal_cyclic(const LinearForm& form, std::span<const CyclicSet> sets);

struct ExactRemoval {
    std::size_t size = 0;
    std::vector<CyclicSet> removed;  ///< same layout as greedy_removal_cyclic
};

/// Minimum total deletion making the instance L-free (modulus at most 20).
ExactRemoval exact_min_removal(const LinearForm& form, std::span<const CyclicSet> sets);

struct LiftedRemoval {
    std::vector<GridSet> removed;  ///< E_i at resolution N
    bool certified = false;
    std::uint64_t tuples_checked = 0;
};

/// Lifts removals for the shifted instances (A'_1, ..., A'_{t-1}, A'_t - r) of
/// x_1 + ... + x_{t-1} - x_t to T. per_shift[r][i] is E'_{i,r} in the coordinates
/// of A'_i. Throws if some shifted instance is not free after removal or if the
/// lifted remainder fails the grid certificate.
LiftedRemoval lift_removal_to_torus(std::span<const GridSet> sets,
                                    std::span<const std::vector<CyclicSet>> per_shift);

struct TorusRemoval {
    LinearForm form;
    std::int64_t resolution = 0;       ///< resolution of the discretised instance
    std::vector<std::int64_t> dilations;  ///< e_i with s L(x) = sum_{i != q} e_i x_i - e_q x_q
    std::vector<GridSet> removed;      ///< E_i, pulled back to A_i
    std::vector<GridSet> remainders;   ///< A_i \ E_i
    bool remainder_free = false;
    std::uint64_t witness_checked = 0;
    std::size_t repairs = 0;           ///< boundary cells removed after the pull-back
    Rational removed_measure = 0;      ///< sum of mu(E_i)
    Rational target = 0;               ///< requested epsilon, reported only
    nlohmann::json certificate() const;
};

/// Removal on T through the x_1 + ... + x_{t-1} - x_t instance (c_i A_i).
/// A single set means the same set in every coordinate; the remainder is then
/// one set, the intersection of the coordinate remainders.
TorusRemoval removal_on_torus(const LinearForm& form, std::span<const GridSet> sets, const Rational& epsilon = 0,
                              const GridOptions& options = {});

}  // namespace solfree
