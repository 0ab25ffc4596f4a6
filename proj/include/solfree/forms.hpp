#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace solfree {

/// L(x) = c_1 x_1 + ... + c_t x_t with nonzero integer coefficients, t >= 2.
/// Variable order is positional and never canonicalised.
class LinearForm {
public:
    LinearForm() = default;
    explicit LinearForm(std::vector<std::int64_t> coeffs);

    const std::vector<std::int64_t>& coeffs() const { return coeffs_; }
    std::size_t arity() const { return coeffs_.size(); }
    std::int64_t operator[](std::size_t i) const { return coeffs_[i]; }

    /// Sum of coefficients; zero means translation-invariant.
    std::int64_t coefficient_sum() const;
    std::int64_t max_abs_coeff() const;
    /// Forms in two variables parse but the transference/removal machinery needs t >= 3.
    bool supported_for_pipeline() const { return arity() >= 3; }

    std::string to_string() const;

    friend bool operator==(const LinearForm&, const LinearForm&) = default;

private:
    std::vector<std::int64_t> coeffs_;
};

/// Finite, non-empty list of forms. Duplicates are kept and reported.
class FormFamily {
public:
    FormFamily() = default;
    explicit FormFamily(std::vector<LinearForm> forms);

    const std::vector<LinearForm>& forms() const { return forms_; }
    std::size_t size() const { return forms_.size(); }
    const LinearForm& operator[](std::size_t i) const { return forms_[i]; }
    auto begin() const { return forms_.begin(); }
    auto end() const { return forms_.end(); }

    bool has_duplicates() const;
    std::size_t max_arity() const;

private:
    std::vector<LinearForm> forms_;
};

/// Parses "x1+x2-x3", "2x1+3x2-2x3", "-x2+x1+x3" or "[1,-2,1]".
LinearForm parse_form(std::string_view text);

bool is_invariant(const LinearForm& form);

struct ContentReduction {
    LinearForm primitive;
    std::int64_t content = 1;
};
/// L = content * primitive with primitive having coprime coefficients.
ContentReduction content_reduce(const LinearForm& form);

bool has_coprime_coefficients(const LinearForm& form);

struct MultiplierHeight {
    std::int64_t height = 0;
    /// Lexicographically smallest n with sum n_i c_i = 1 and sum |n_i| = height.
    std::vector<std::int64_t> witness;
};

/// Minimum of sum |n_i| over integer vectors with sum n_i c_i = 1.
/// Throws DomainError for non-coprime coefficients.
MultiplierHeight multiplier_height(const LinearForm& form);

/// max(h(L), |c_1|, ..., |c_t|).
std::int64_t k_admissibility_threshold(const LinearForm& form);

/// Either a modulus m >= 1 (the group Z/m) or the circle T.
struct Carrier {
    std::int64_t modulus = 0;  // 0 encodes T
    static Carrier circle() { return Carrier{0}; }
    static Carrier cyclic(std::int64_t m) { return Carrier{m}; }
    bool is_circle() const { return modulus == 0; }
};

/// Every coefficient is a surjective dilation on the carrier.
bool is_admissible(const LinearForm& form, Carrier carrier);
inline bool is_admissible(const LinearForm& form, std::int64_t modulus) {
    return is_admissible(form, Carrier::cyclic(modulus));
}

/// s_L = |c_1| + ... + |c_t|.
std::int64_t weight_s(const LinearForm& form);

/// x_1 + ... + x_{t-1} - x_t.
LinearForm ones_form(std::size_t arity);

/// True when the form is +-(1,1,-1) up to a permutation of variables.
bool is_schur_form(const LinearForm& form);

void to_json(nlohmann::json& j, const LinearForm& form);
void from_json(const nlohmann::json& j, LinearForm& form);

/// Family file format: JSON array of coefficient arrays.
FormFamily family_from_json(const nlohmann::json& j);
nlohmann::json family_to_json(const FormFamily& family);

}  // namespace solfree
