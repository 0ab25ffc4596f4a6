#include "solfree/cyclic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "solfree/error.hpp"

namespace solfree {

CyclicSet::CyclicSet(std::int64_t modulus) : modulus_(modulus) {
    if (modulus < 1) throw DomainError("modulus must be positive");
    bits_.assign(static_cast<std::size_t>(modulus), 0);
}

CyclicSet CyclicSet::from_members(std::int64_t modulus, std::span<const std::int64_t> members) {
    CyclicSet s(modulus);
    for (auto x : members) s.insert(x);
    return s;
}

CyclicSet CyclicSet::full(std::int64_t modulus) {
    CyclicSet s(modulus);
    std::fill(s.bits_.begin(), s.bits_.end(), 1);
    return s;
}

std::size_t CyclicSet::size() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::int64_t> CyclicSet::members() const {
    std::vector<std::int64_t> out;
    for (std::size_t x = 0; x < bits_.size(); ++x)
        if (bits_[x]) out.push_back(static_cast<std::int64_t>(x));
    return out;
}

Rational CyclicSet::density() const { return make_rational(static_cast<std::int64_t>(size()), modulus_); }

CyclicSet CyclicSet::shifted(std::int64_t r) const {
    CyclicSet out(modulus_);
    for (auto x : members()) out.insert(x + r);
    return out;
}

CyclicSet CyclicSet::minus(const CyclicSet& other) const {
    if (other.modulus_ != modulus_) throw DomainError("set difference across different moduli");
    CyclicSet out = *this;
    for (std::size_t x = 0; x < bits_.size(); ++x)
        if (other.bits_[x]) out.bits_[x] = 0;
    return out;
}

CyclicFunction::CyclicFunction(std::int64_t modulus, std::vector<Rational> values)
    : modulus_(modulus), values_(std::move(values)) {
    if (modulus < 1) throw DomainError("modulus must be positive");
    if (values_.size() != static_cast<std::size_t>(modulus))
        throw DomainError("function length does not match modulus");
    for (const auto& v : values_)
        if (v < 0 || v > 1) throw DomainError("function values must lie in [0,1], got " + to_string(v));
}

CyclicFunction CyclicFunction::indicator(const CyclicSet& set) {
    std::vector<Rational> v(set.bitmap().size());
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = set.bitmap()[x] ? 1 : 0;
    return CyclicFunction(set.modulus(), std::move(v));
}

CyclicFunction CyclicFunction::constant(std::int64_t modulus, const Rational& value) {
    return CyclicFunction(modulus, std::vector<Rational>(static_cast<std::size_t>(modulus), value));
}

Rational CyclicFunction::mean() const {
    Rational s = 0;
    for (const auto& v : values_) s += v;
    return s / modulus_;
}

std::vector<double> CyclicFunction::to_doubles() const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(v.get_d());
    return out;
}

CyclicSpectrum dft(const CyclicFunction& f) {
    auto values = f.to_doubles();
    return dft(f.modulus(), values);
}

CyclicSpectrum dft(std::int64_t modulus, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(modulus)) throw DomainError("length does not match modulus");
    return CyclicSpectrum{modulus, dft_values(values)};
}

namespace {

std::int64_t common_modulus(std::span<const CyclicSet> sets, std::size_t arity) {
    if (sets.size() != arity)
        throw DomainError("expected " + std::to_string(arity) + " sets, got " + std::to_string(sets.size()));
    const std::int64_t m = sets.front().modulus();
    for (const auto& s : sets)
        if (s.modulus() != m) throw DomainError("sets live in different cyclic groups");
    return m;
}

void require_last_unit(const LinearForm& form, std::int64_t m) {
    if (std::gcd(form.coeffs().back(), m) != 1)
        throw DomainError("last coefficient " + std::to_string(form.coeffs().back()) + " is not a unit mod " +
                          std::to_string(m) + "; ker L does not have m^(t-1) elements");
}

BigInt power(std::int64_t base, std::size_t exp) {
    BigInt r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

using Count = unsigned __int128;

// dist[y] = #{(x_1..x_k) in A_1 x ... x A_k : sum c_i x_i = y mod m}
std::vector<Count> sum_distribution(const LinearForm& form, std::span<const CyclicSet> sets, std::size_t k,
                                    std::int64_t m) {
    std::vector<Count> dist(static_cast<std::size_t>(m), 0);
    dist[0] = 1;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<Count> next(dist.size(), 0);
        const auto members = sets[i].members();
        for (std::size_t y = 0; y < dist.size(); ++y) {
            if (dist[y] == 0) continue;
            for (auto x : members) {
                auto z = static_cast<std::size_t>(mod_floor(static_cast<std::int64_t>(y) + form[i] * x, m));
                next[z] += dist[y];
            }
        }
        dist = std::move(next);
    }
    return dist;
}

}  // namespace

Rational solution_count_bruteforce(const LinearForm& form, std::span<const CyclicSet> sets) {
    const std::size_t t = form.arity();
    const std::int64_t m = common_modulus(sets, t);
    require_last_unit(form, m);
    const std::int64_t inv_last = m == 1 ? 0 : mod_inverse(form.coeffs().back(), m);

    std::vector<std::vector<std::int64_t>> members;
    for (const auto& s : sets) members.push_back(s.members());

    std::uint64_t count = 0;
    std::vector<std::size_t> idx(t - 1, 0);
    for (std::size_t i = 0; i + 1 < t; ++i)
        if (members[i].empty()) return Rational(0);
    while (true) {
        std::int64_t partial = 0;
        for (std::size_t i = 0; i + 1 < t; ++i) partial = mod_floor(partial + form[i] * members[i][idx[i]], m);
        std::int64_t last = mod_floor(-partial * inv_last, m);
        if (sets[t - 1].contains(last)) ++count;
        std::size_t pos = 0;
        while (pos + 1 < t && ++idx[pos] == members[pos].size()) idx[pos++] = 0;
        if (pos + 1 == t) break;
    }
    Rational q(BigInt(static_cast<unsigned long>(count)), power(m, t - 1));
    q.canonicalize();
    return q;
}

BigInt solution_count(const LinearForm& form, std::span<const CyclicSet> sets) {
    const std::size_t t = form.arity();
    const std::int64_t m = common_modulus(sets, t);
    auto dist = sum_distribution(form, sets, t, m);
    return to_bigint(dist[0]);
}

Rational solution_measure_convolution(const LinearForm& form, std::span<const CyclicSet> sets) {
    const std::size_t t = form.arity();
    const std::int64_t m = common_modulus(sets, t);
    require_last_unit(form, m);
    Rational q(solution_count(form, sets), power(m, t - 1));
    q.canonicalize();
    return q;
}

Rational solution_measure_convolution(const LinearForm& form, std::span<const CyclicFunction> functions) {
    const std::size_t t = form.arity();
    if (functions.size() != t) throw DomainError("expected one function per variable");
    const std::int64_t m = functions.front().modulus();
    for (const auto& f : functions)
        if (f.modulus() != m) throw DomainError("functions live in different cyclic groups");
    require_last_unit(form, m);

    std::vector<Rational> dist(static_cast<std::size_t>(m), Rational(0));
    dist[0] = 1;
    for (std::size_t i = 0; i + 1 < t; ++i) {
        std::vector<Rational> next(dist.size(), Rational(0));
        const auto& vals = functions[i].values();
        for (std::size_t y = 0; y < dist.size(); ++y) {
            if (sgn(dist[y]) == 0) continue;
            for (std::size_t x = 0; x < vals.size(); ++x) {
                if (sgn(vals[x]) == 0) continue;
                auto z = static_cast<std::size_t>(
                    mod_floor(static_cast<std::int64_t>(y) + form[i] * static_cast<std::int64_t>(x), m));
                next[z] += dist[y] * vals[x];
            }
        }
        dist = std::move(next);
    }
    Rational total = 0;
    const auto& last = functions[t - 1].values();
    for (std::size_t x = 0; x < last.size(); ++x) {
        if (sgn(last[x]) == 0) continue;
        auto y = static_cast<std::size_t>(mod_floor(-form.coeffs().back() * static_cast<std::int64_t>(x), m));
        total += dist[y] * last[x];
    }
    return total / Rational(power(m, t - 1));
}

std::complex<double> solution_measure_spectral(const LinearForm& form, std::span<const CyclicSpectrum> spectra) {
    const std::size_t t = form.arity();
    if (spectra.size() != t) throw DomainError("expected one spectrum per variable");
    const std::int64_t m = spectra.front().modulus;
    for (const auto& s : spectra)
        if (s.modulus != m || s.coefficients.size() != static_cast<std::size_t>(m))
            throw DomainError("spectra live in different cyclic groups");
    if (!is_admissible(form, m))
        throw DomainError("form " + form.to_string() + " is not admissible mod " + std::to_string(m));

    std::complex<double> total = 0;
    for (std::int64_t g = 0; g < m; ++g) {
        std::complex<double> term = 1;
        for (std::size_t i = 0; i < t; ++i)
            term *= spectra[i].coefficients[static_cast<std::size_t>(mod_floor(form[i] * g, m))];
        total += term;
    }
    return total;
}

double solution_measure_approx(const LinearForm& form, std::int64_t modulus,
                               std::span<const std::vector<double>> values) {
    std::vector<CyclicSpectrum> spectra;
    for (const auto& v : values) spectra.push_back(dft(modulus, v));
    return solution_measure_spectral(form, spectra).real();
}

double u2_norm(const CyclicFunction& f) {
    auto v = f.to_doubles();
    return u2_norm(v);
}

double u2_norm(std::span<const double> values) {
    auto coeffs = dft_values(values);
    double s = 0;
    for (const auto& z : coeffs) {
        double a = std::norm(z);
        s += a * a;
    }
    return std::pow(s, 0.25);
}

double l2_norm(std::span<const double> values) {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s / static_cast<double>(values.size()));
}

namespace {

FreeCheck is_free_exclude_constant(const LinearForm& form, std::span<const CyclicSet> sets, std::int64_t m) {
    const std::size_t t = form.arity();
    std::vector<std::vector<std::int64_t>> members;
    for (const auto& s : sets) members.push_back(s.members());
    for (const auto& mem : members)
        if (mem.empty()) return {};
    std::vector<std::size_t> idx(t, 0);
    while (true) {
        std::int64_t sum = 0;
        bool constant = true;
        for (std::size_t i = 0; i < t; ++i) {
            sum = mod_floor(sum + form[i] * members[i][idx[i]], m);
            constant = constant && members[i][idx[i]] == members[0][idx[0]];
        }
        if (sum == 0 && !constant) {
            FreeCheck out{false, 0, {}};
            for (std::size_t i = 0; i < t; ++i) out.witness.push_back(members[i][idx[i]]);
            return out;
        }
        std::size_t pos = t;
        for (std::size_t i = 0; i < t; ++i) {
            if (++idx[i] < members[i].size()) {
                pos = i;
                break;
            }
            idx[i] = 0;
        }
        if (pos == t) return {};
    }
}

}  // namespace

FreeCheck is_free(const LinearForm& form, std::span<const CyclicSet> sets, SolutionFilter filter) {
    const std::size_t t = form.arity();
    const std::int64_t m = common_modulus(sets, t);
    if (filter == SolutionFilter::exclude_constant) return is_free_exclude_constant(form, sets, m);

    // layers[k] = residues reachable as c_1 x_1 + ... + c_k x_k
    std::vector<std::vector<std::uint8_t>> layers(t + 1, std::vector<std::uint8_t>(static_cast<std::size_t>(m), 0));
    layers[0][0] = 1;
    std::vector<std::vector<std::int64_t>> members;
    for (const auto& s : sets) members.push_back(s.members());
    for (std::size_t k = 0; k < t; ++k) {
        for (std::size_t y = 0; y < layers[k].size(); ++y) {
            if (!layers[k][y]) continue;
            for (auto x : members[k])
                layers[k + 1][static_cast<std::size_t>(mod_floor(static_cast<std::int64_t>(y) + form[k] * x, m))] = 1;
        }
    }
    if (!layers[t][0]) return {};

    FreeCheck out{false, 0, std::vector<std::int64_t>(t, 0)};
    std::int64_t target = 0;
    for (std::size_t k = t; k-- > 0;) {
        for (auto x : members[k]) {
            std::int64_t rest = mod_floor(target - form[k] * x, m);
            if (layers[k][static_cast<std::size_t>(rest)]) {
                out.witness[k] = x;
                target = rest;
                break;
            }
        }
    }
    return out;
}

FreeCheck is_free(const FormFamily& family, const CyclicSet& set, SolutionFilter filter) {
    for (std::size_t i = 0; i < family.size(); ++i) {
        std::vector<CyclicSet> sets(family[i].arity(), set);
        auto check = is_free(family[i], sets, filter);
        if (!check.free) {
            check.form_index = i;
            return check;
        }
    }
    return {};
}

CyclicSet dilate_set(const CyclicSet& set, std::int64_t n) {
    CyclicSet out(set.modulus());
    for (auto x : set.members()) out.insert(mod_floor(n, set.modulus()) * x);
    return out;
}

CyclicSet odd_residues(std::int64_t modulus) {
    CyclicSet out(modulus);
    for (std::int64_t x = 1; x < modulus; x += 2) out.insert(x);
    return out;
}

void to_json(nlohmann::json& j, const CyclicSet& set) {
    j = nlohmann::json{{"m", set.modulus()}, {"members", set.members()}};
}

void from_json(const nlohmann::json& j, CyclicSet& set) {
    auto m = j.at("m").get<std::int64_t>();
    auto members = j.at("members").get<std::vector<std::int64_t>>();
    set = CyclicSet::from_members(m, members);
}

}  // namespace solfree
