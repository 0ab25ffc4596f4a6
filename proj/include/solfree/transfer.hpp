#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "solfree/cyclic.hpp"
#include "solfree/forms.hpp"
#include "solfree/torus.hpp"

namespace solfree {

/// Function with finite Fourier support on Z/p or T. Frequencies are residues
/// 0..p-1 on Z/p and integers on T; the support is symmetric and contains 0.
struct SpectralFunction {
    Carrier group;
    std::map<std::int64_t, std::complex<double>> coefficients;
    Rational mean = 0;  ///< exact coefficient at frequency 0

    std::size_t support_size() const { return coefficients.size(); }
    std::vector<std::int64_t> support() const;
    /// Value at x in Z/p (x an integer) or at x in T.
    double value_at_residue(std::int64_t x) const;
    double value_at_point(double x) const;
    /// sum |gamma| |g^(gamma)|, frequencies taken as centred integers.
    double derivative_mass() const;
};

/// Finite sum of eq. (FI): sum over gamma with c_i gamma in the support of prod g^(c_i gamma).
std::complex<double> spectral_solution_measure(const LinearForm& form, const SpectralFunction& f);

struct Regularized {
    SpectralFunction function;
    double l2_residual = 0;     ///< l2 norm of the discarded part
    std::size_t dropped = 0;    ///< nonzero frequencies discarded
    std::vector<double> form_deltas;  ///< |T_L(f) - T_L(f')| when forms were supplied
};

/// Keeps 0 and every frequency with |f^(gamma)| >= threshold, then trims to
/// max_support by magnitude (ties: smaller |gamma|, then gamma >= 0 first),
/// always keeping gamma and -gamma together.
Regularized regularize(const CyclicFunction& f, double threshold, std::size_t max_support,
                       const FormFamily* forms = nullptr);
/// Same for a step function on T; candidate frequencies are |k| <= max_frequency.
Regularized regularize(const GridFunction& f, double threshold, std::size_t max_support,
                       std::int64_t max_frequency, const FormFamily* forms = nullptr);

/// Bijection between frequency sets with phi(0) = 0.
struct FreimanMap {
    Carrier source;
    Carrier target;
    std::int64_t k = 2;
    std::map<std::int64_t, std::int64_t> pairs;
    std::int64_t lambda = 1;  ///< dilation used by find_iso_modp_to_int

    std::int64_t operator()(std::int64_t gamma) const;
    bool contains(std::int64_t gamma) const { return pairs.count(gamma) != 0; }
};

/// Checks the Freiman k-isomorphism property: two k-multisets of the domain have
/// equal sums iff their images do.
bool verify_freiman(const FreimanMap& map);

/// x -> centred lift of lambda x with the smallest lambda in 1..p-1 putting every
/// lift in (-p/2k, p/2k). Requires 0 in R and p prime.
FreimanMap find_iso_modp_to_int(std::span<const std::int64_t> frequencies, std::int64_t k, std::int64_t p);

/// x -> x mod N, valid when 2k diam(A) < N. Requires 0 in A.
FreimanMap find_iso_int_to_modn(std::span<const std::int64_t> frequencies, std::int64_t k, std::int64_t n);

/// h-fold sumset of R in Z/p (group.modulus = p) or Z (group = T).
std::vector<std::int64_t> build_product_set(std::span<const std::int64_t> frequencies, std::int64_t h, Carrier group);

/// g with g^(phi(gamma)) = f'^(gamma), zero elsewhere.
SpectralFunction transfer_spectrum(const SpectralFunction& fprime, const FreimanMap& map);

struct Sampled {
    std::vector<double> values;
    double error_bound = 0;  ///< sup |g(x) - g(midpoint)| over each cell
};
/// Cell-midpoint samples of a trigonometric polynomial on T.
Sampled sample_on_grid(const SpectralFunction& g, std::int64_t resolution);
/// Values of a function on Z/m at every residue.
std::vector<double> values_on_cyclic(const SpectralFunction& g);

struct RangeCorrected {
    std::vector<Rational> values;
    double l2_distance = 0;   ///< RMS distance to the input
    std::size_t clipped = 0;  ///< entries that left [0,1]
    std::size_t passes = 0;
};
/// Clips to [0,1] and spreads the difference to `mean` uniformly over entries that
/// can still move, until the mean is exactly `mean`.
RangeCorrected range_correct(std::span<const Rational> values, const Rational& mean);
RangeCorrected range_correct(std::span<const double> values, const Rational& mean);
/// Mean of the input taken exactly.
RangeCorrected range_correct(std::span<const double> values);

struct FormReport {
    LinearForm form;
    double t_source = 0;
    double t_target = 0;
    double delta = 0;
    double bound = 0;  ///< t eps alpha^(t-2)
};

struct TransferReport {
    Rational alpha = 0;
    std::size_t support_size = 0;
    std::size_t product_size = 0;
    std::int64_t k = 0;
    std::int64_t h = 0;
    std::int64_t lambda = 1;
    double l2_residual = 0;
    double sampling_error = 0;
    double range_l2 = 0;
    std::vector<FormReport> per_form;
    bool bounds_flag = false;  ///< some delta exceeds its bound
    nlohmann::json to_json() const;
};

struct TransferConfig {
    double epsilon = 0.05;
    std::optional<double> threshold;  ///< default epsilon / 4
    std::size_t max_support = 24;
    std::optional<std::int64_t> height;  ///< default max h(L) over the family
    std::int64_t max_frequency = 64;     ///< T source: candidate frequencies |k| <= this
    std::int64_t target_resolution = 0; ///< T target: grid resolution, default 12 p
};

struct TransferToTorus {
    GridFunction function;
    TransferReport report;
};
struct TransferToCyclic {
    CyclicFunction function;
    TransferReport report;
};

/// Z/p -> T.
TransferToTorus transfer_pipeline(const CyclicFunction& f, const FormFamily& forms, const TransferConfig& config = {});
/// T -> Z/p.
TransferToCyclic transfer_pipeline(const GridFunction& f, std::int64_t p, const FormFamily& forms,
                                   const TransferConfig& config = {});

bool is_prime(std::int64_t n);

}  // namespace solfree
