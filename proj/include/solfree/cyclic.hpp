#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "solfree/forms.hpp"
#include "solfree/rational.hpp"

namespace solfree {

/// Subset of Z/m stored as a membership bitmap.
class CyclicSet {
public:
    CyclicSet() = default;
    explicit CyclicSet(std::int64_t modulus);

    static CyclicSet from_members(std::int64_t modulus, std::span<const std::int64_t> members);
    static CyclicSet from_members(std::int64_t modulus, std::initializer_list<std::int64_t> members) {
        return from_members(modulus, std::span<const std::int64_t>(members.begin(), members.size()));
    }
    static CyclicSet full(std::int64_t modulus);

    std::int64_t modulus() const { return modulus_; }
    bool contains(std::int64_t x) const { return bits_[static_cast<std::size_t>(mod_floor(x, modulus_))] != 0; }
    void insert(std::int64_t x) { bits_[static_cast<std::size_t>(mod_floor(x, modulus_))] = 1; }
    void erase(std::int64_t x) { bits_[static_cast<std::size_t>(mod_floor(x, modulus_))] = 0; }

    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::vector<std::int64_t> members() const;
    Rational density() const;
    const std::vector<std::uint8_t>& bitmap() const { return bits_; }

    /// A + r.
    CyclicSet shifted(std::int64_t r) const;
    /// A \ B (same modulus).
    CyclicSet minus(const CyclicSet& other) const;

    friend bool operator==(const CyclicSet&, const CyclicSet&) = default;

private:
    std::int64_t modulus_ = 1;
    std::vector<std::uint8_t> bits_;
};

/// f : Z/m -> [0,1] with exact rational values.
class CyclicFunction {
public:
    CyclicFunction() = default;
    CyclicFunction(std::int64_t modulus, std::vector<Rational> values);

    static CyclicFunction indicator(const CyclicSet& set);
    static CyclicFunction constant(std::int64_t modulus, const Rational& value);

    std::int64_t modulus() const { return modulus_; }
    const std::vector<Rational>& values() const { return values_; }
    const Rational& operator[](std::size_t x) const { return values_[x]; }
    Rational mean() const;
    std::vector<double> to_doubles() const;

private:
    std::int64_t modulus_ = 1;
    std::vector<Rational> values_;
};

/// Entry gamma holds f^(gamma) = (1/m) sum_x f(x) e(-gamma x / m). Carrying the 1/m here
/// makes the spectral solution formula a plain sum over gamma.
struct CyclicSpectrum {
    std::int64_t modulus = 1;
    std::vector<std::complex<double>> coefficients;
};

/// Normalised forward DFT of real samples (FFTW backed).
std::vector<std::complex<double>> dft_values(std::span<const double> values);
/// Normalised forward DFT of complex samples.
std::vector<std::complex<double>> dft_values(std::span<const std::complex<double>> values);
/// f(x) = sum_gamma F(gamma) e(gamma x / m), the inverse of dft_values.
std::vector<std::complex<double>> inverse_dft_values(std::span<const std::complex<double>> coefficients);

CyclicSpectrum dft(const CyclicFunction& f);
CyclicSpectrum dft(std::int64_t modulus, std::span<const double> values);

/// Exact T_L by enumerating the first t-1 coordinates; needs gcd(c_t, m) = 1.
Rational solution_count_bruteforce(const LinearForm& form, std::span<const CyclicSet> sets);

/// Exact T_L via iterated cyclic convolution of dilated value vectors.
Rational solution_measure_convolution(const LinearForm& form, std::span<const CyclicSet> sets);
Rational solution_measure_convolution(const LinearForm& form, std::span<const CyclicFunction> functions);

/// Raw count #{x in A_1 x ... x A_t : L(x) = 0 mod m}; valid for any modulus.
BigInt solution_count(const LinearForm& form, std::span<const CyclicSet> sets);

/// sum_gamma f1^(c_1 gamma) ... ft^(c_t gamma); every c_i must be a unit mod m.
std::complex<double> solution_measure_spectral(const LinearForm& form, std::span<const CyclicSpectrum> spectra);

/// Floating-point T_L of real-valued functions through the spectral formula.
double solution_measure_approx(const LinearForm& form, std::int64_t modulus,
                               std::span<const std::vector<double>> values);

/// (sum_gamma |f^(gamma)|^4)^(1/4).
double u2_norm(const CyclicFunction& f);
double u2_norm(std::span<const double> values);
/// sqrt((1/m) sum_x f(x)^2).
double l2_norm(std::span<const double> values);

enum class SolutionFilter {
    all,              ///< every t-tuple counts, repeated coordinates included
    exclude_constant  ///< ignore (x, ..., x); variant for invariant forms
};

struct FreeCheck {
    bool free = true;
    std::size_t form_index = 0;           ///< which form produced the witness
    std::vector<std::int64_t> witness;    ///< solution tuple when !free
};

/// Decides whether A_1 x ... x A_t avoids ker L. Works for any modulus.
FreeCheck is_free(const LinearForm& form, std::span<const CyclicSet> sets,
                  SolutionFilter filter = SolutionFilter::all);
/// F-freeness of a single set.
FreeCheck is_free(const FormFamily& family, const CyclicSet& set, SolutionFilter filter = SolutionFilter::all);

/// {n a mod m : a in A}.
CyclicSet dilate_set(const CyclicSet& set, std::int64_t n);

/// {x : x is odd} in Z/m.
CyclicSet odd_residues(std::int64_t modulus);

void to_json(nlohmann::json& j, const CyclicSet& set);
void from_json(const nlohmann::json& j, CyclicSet& set);

}  // namespace solfree
