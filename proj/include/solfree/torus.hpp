#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "solfree/cyclic.hpp"
#include "solfree/forms.hpp"
#include "solfree/rational.hpp"

namespace solfree {

struct GridOptions {
    /// Largest common resolution any grid computation may build.
    std::int64_t resolution_cap = std::int64_t{1} << 18;

    /// Default options with SOLFREE_RESOLUTION_CAP applied when set.
    static GridOptions from_environment();
};

/// Subset of T = R/Z that is a union of cells [j/N, (j+1)/N), j = 0..N-1.
///
/// Cells are 0-based in the API. Serialised forms (JSON, CLI `cells:` specs) use
/// 1-based numbering, so cell number j there means [(j-1)/N, j/N).
class GridSet {
public:
    GridSet() = default;
    explicit GridSet(std::int64_t resolution);

    static GridSet from_cells(std::int64_t resolution, std::span<const std::int64_t> cells);
    static GridSet from_cells(std::int64_t resolution, std::initializer_list<std::int64_t> cells) {
        return from_cells(resolution, std::span<const std::int64_t>(cells.begin(), cells.size()));
    }
    static GridSet full(std::int64_t resolution);
    /// The arc [a, b) mod 1 with 0 <= b - a <= 1, at the coarsest grid containing both ends.
    static GridSet from_interval(const Rational& a, const Rational& b);

    std::int64_t resolution() const { return resolution_; }
    bool contains_cell(std::int64_t j) const { return bits_[static_cast<std::size_t>(mod_floor(j, resolution_))] != 0; }
    void insert_cell(std::int64_t j) { bits_[static_cast<std::size_t>(mod_floor(j, resolution_))] = 1; }
    void erase_cell(std::int64_t j) { bits_[static_cast<std::size_t>(mod_floor(j, resolution_))] = 0; }
    bool contains_point(const Rational& x) const;

    std::size_t cell_count() const;
    bool empty() const { return cell_count() == 0; }
    std::vector<std::int64_t> cells() const;
    Rational measure() const;
    const std::vector<std::uint8_t>& bitmap() const { return bits_; }

    /// The cells viewed as a subset of Z/N.
    CyclicSet as_cyclic() const;
    static GridSet from_cyclic(const CyclicSet& set);

    friend bool operator==(const GridSet&, const GridSet&) = default;

private:
    std::int64_t resolution_ = 1;
    std::vector<std::uint8_t> bits_;
};

/// Step function on T, constant on the cells of resolution N, values in [0,1].
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::int64_t resolution, std::vector<Rational> values);

    static GridFunction indicator(const GridSet& set);
    static GridFunction constant(std::int64_t resolution, const Rational& value);

    std::int64_t resolution() const { return resolution_; }
    const std::vector<Rational>& values() const { return values_; }
    Rational mean() const;
    std::vector<double> to_doubles() const;

private:
    std::int64_t resolution_ = 1;
    std::vector<Rational> values_;
};

/// Same point set at resolution N * factor.
GridSet refine(const GridSet& set, std::int64_t factor);
GridSet refine_to(const GridSet& set, std::int64_t resolution);
GridSet set_union(const GridSet& a, const GridSet& b);
GridSet set_difference(const GridSet& a, const GridSet& b);

/// {x : c x in A} at resolution N |c|. Exact for c > 0; for c < 0 the half-open
/// cells differ from the exact preimage in finitely many points (same measure).
GridSet dilation_preimage(const GridSet& set, std::int64_t c);
/// c A at resolution N; same boundary convention as dilation_preimage.
GridSet dilate_image(const GridSet& set, std::int64_t c);

/// W(d, m) = Vol{v in [0,1)^n : m <= sum d_i v_i < m + 1}.
Rational eulerian_weight(std::span<const std::int64_t> d, std::int64_t m);

struct EulerianWeightTable {
    std::vector<std::int64_t> coeffs;
    std::int64_t first_index = 0;   ///< m of weights[0]
    std::vector<Rational> weights;  ///< W(d, first_index + k); all positive
    Rational at(std::int64_t m) const;
};

/// Memoised per coefficient multiset; safe to call concurrently.
const EulerianWeightTable& eulerian_weights(std::span<const std::int64_t> d);

/// Number of permutations of [n] with exactly k ascents.
BigInt eulerian_number(std::int64_t n, std::int64_t k);

/// Exact T_L(A_1, ..., A_t) on T.
Rational solution_measure_grid(const LinearForm& form, std::span<const GridSet> sets,
                               const GridOptions& options = {});
/// Floating-point T_L of step functions given by cell values at a common resolution.
double solution_measure_grid_approx(const LinearForm& form, std::int64_t resolution,
                                    std::span<const std::vector<double>> cell_values,
                                    const GridOptions& options = {});

struct EulerianIdentity {
    Rational lhs;  ///< T_1 on T
    Rational rhs;  ///< Eulerian combination of shifted T_1 on Z/N
};
/// Both sides of the identity expressing T_1 on T through T_1 on Z/N, for
/// the form x_1 + ... + x_{t-1} - x_t.
EulerianIdentity eulerian_identity_check(const LinearForm& form, std::span<const GridSet> sets,
                                         const GridOptions& options = {});

enum class CellSemantics {
    half_open,  ///< the set is the union of the half-open cells
    interior    ///< the set is the interior of that union (an open set)
};

struct GridFreeCheck {
    bool free = true;
    std::size_t form_index = 0;
    std::int64_t resolution = 0;           ///< common resolution of the analysis
    std::vector<std::int64_t> witness_cells;  ///< 0-based cells at `resolution`
    std::vector<Rational> witness_point;      ///< x in A_1 x ... x A_t with L(x) = 0 in T
    std::uint64_t tuples_covered = 0;         ///< number of cell tuples the decision covers
};

/// Exact decision whether (A_1 x ... x A_t) meets ker L.
GridFreeCheck is_free_grid(const LinearForm& form, std::span<const GridSet> sets,
                           CellSemantics semantics = CellSemantics::half_open, const GridOptions& options = {});
GridFreeCheck is_free_grid(const FormFamily& family, const GridSet& set,
                           CellSemantics semantics = CellSemantics::half_open, const GridOptions& options = {});

namespace detail {
/// Emptiness test with each coordinate split into open cells and isolated grid points,
/// all at one resolution. Exposed for cross-checking the half-open rule.
GridFreeCheck is_free_grid_by_classes(const LinearForm& form, std::int64_t resolution,
                                      std::span<const CyclicSet> open_cells, std::span<const CyclicSet> points);
}  // namespace detail

/// ||f||_{U^2(T)} for a step function; the Fourier series is truncated once the
/// k^-4 tail bound on sum |f^(k)|^4 is below tol.
double u2_norm_grid(const GridFunction& f, double tol = 1e-9);
/// Same for real cell values (may be signed).
double u2_norm_step(std::span<const double> cell_values, double tol = 1e-9);
/// sqrt of the mean square of a step function.
double l2_norm_step(std::span<const double> cell_values);

void to_json(nlohmann::json& j, const GridSet& set);
void from_json(const nlohmann::json& j, GridSet& set);

}  // namespace solfree
