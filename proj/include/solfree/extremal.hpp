#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solfree/cyclic.hpp"
#include "solfree/forms.hpp"
#include "solfree/torus.hpp"

namespace solfree {

struct ExactSearchOptions {
    std::chrono::milliseconds time_limit{60000};
    SolutionFilter filter = SolutionFilter::all;
    std::size_t heuristic_iterations = 20000;
    std::uint64_t seed = 1;
};

struct MaxFreeResult {
    std::size_t size = 0;
    CyclicSet witness;
    bool optimal = false;
    std::optional<std::size_t> upper_bound;  ///< floor((p+1)/3) when it applies
    std::size_t heuristic_size = 0;          ///< size of the starting incumbent
    std::uint64_t nodes = 0;
};

/// floor((p+1)/3) when m is prime and the family contains +-(x1+x2-x3) up to order.
std::optional<std::size_t> cauchy_davenport_bound(const FormFamily& family, std::int64_t modulus);

/// Largest F-free subset of Z/m by branch and bound on the solution hypergraph.
/// Sets are normalised under unit dilations: the smallest gcd class present is
/// represented by its generator. On timeout the best set found is returned.
MaxFreeResult max_free_exact(const FormFamily& family, std::int64_t modulus, const ExactSearchOptions& options = {});

struct HeuristicResult {
    std::size_t size = 0;
    CyclicSet witness;
};

/// Seeded with the longest free run of consecutive residues, then improved by
/// add/swap moves with a tabu list. Deterministic for a given seed.
HeuristicResult max_free_heuristic(const FormFamily& family, std::int64_t modulus, std::size_t iterations,
                                   std::uint64_t seed, SolutionFilter filter = SolutionFilter::all);

struct IntervalConstruction {
    Rational density;
    Rational translate;   ///< y; the set is (-1/2s, 1/2s) - y
    Rational left, right; ///< endpoints of the open arc
    GridSet witness;      ///< the arc as half-open cells
    CellSemantics semantics = CellSemantics::half_open;  ///< reading under which witness is certified free
    GridFreeCheck certificate;
};

/// The interval lower bound mu = 1/s, s = sum of s_L, for families of non-invariant forms.
IntervalConstruction torus_interval_construction(const FormFamily& family, const GridOptions& options = {});

enum class SearchMethod { exact, heuristic };

struct GridMaxFree {
    Rational density;
    GridSet witness;
    bool optimal = false;
};

/// Best F-free union of cells at resolution N.
GridMaxFree torus_max_free_grid(const FormFamily& family, std::int64_t resolution, SearchMethod method,
                                std::uint64_t seed = 1, std::chrono::milliseconds time_limit = std::chrono::minutes(1));

/// {x in Z/p : x/p in the arc}, with the arc read open or half-open.
CyclicSet discretize_interval(const IntervalConstruction& construction, std::int64_t p);

struct ConvergenceConfig {
    std::chrono::milliseconds time_limit_per_prime{60000};
    std::size_t heuristic_iterations = 20000;
    std::uint64_t seed = 1;
    std::int64_t grid_resolution = 12;  ///< resolution for torus_max_free_grid, 0 to skip
    SolutionFilter filter = SolutionFilter::all;
    unsigned jobs = 1;
};

struct ConvergenceRow {
    std::int64_t p = 0;
    Rational density;
    bool exact = false;
    std::size_t lower_heuristic = 0;
    std::optional<std::size_t> upper_bound;
    std::optional<Rational> torus_lb;
    std::int64_t elapsed_ms = 0;
    std::optional<Rational> discretized;  ///< density of the discretised torus witness when free
};

struct ConvergenceTable {
    FormFamily family;
    std::vector<ConvergenceRow> rows;
    std::optional<Rational> torus_lb;

    std::string to_csv() const;
    std::string to_svg() const;
};

ConvergenceTable convergence_experiment(const FormFamily& family, const std::vector<std::int64_t>& primes,
                                        const ConvergenceConfig& config = {});

struct OddResidueRow {
    std::int64_t p = 0;
    std::int64_t modulus = 0;
    Rational density;
    bool sum_free = false;
};
/// Odd residues in Z/2p for each p.
std::vector<OddResidueRow> odd_residue_demo(const std::vector<std::int64_t>& primes);

}  // namespace solfree
