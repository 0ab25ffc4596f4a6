#include "solfree/forms.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "solfree/error.hpp"

namespace solfree {

LinearForm::LinearForm(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2) throw DomainError("a linear form needs at least two variables");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        if (coeffs_[i] == 0) throw DomainError("coefficient c" + std::to_string(i + 1) + " is zero");
}

std::int64_t LinearForm::coefficient_sum() const {
    return std::accumulate(coeffs_.begin(), coeffs_.end(), std::int64_t{0});
}

std::int64_t LinearForm::max_abs_coeff() const {
    std::int64_t m = 0;
    for (auto c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

std::string LinearForm::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        std::int64_t c = coeffs_[i];
        if (i == 0) {
            if (c == -1) os << '-';
            else if (c != 1) os << c;
        } else {
            os << (c < 0 ? '-' : '+');
            if (std::abs(c) != 1) os << std::abs(c);
        }
        os << 'x' << (i + 1);
    }
    return os.str();
}

FormFamily::FormFamily(std::vector<LinearForm> forms) : forms_(std::move(forms)) {
    if (forms_.empty()) throw DomainError("a form family must contain at least one form");
}

bool FormFamily::has_duplicates() const {
    std::set<std::vector<std::int64_t>> seen;
    for (const auto& f : forms_)
        if (!seen.insert(f.coeffs()).second) return true;
    return false;
}

std::size_t FormFamily::max_arity() const {
    std::size_t t = 0;
    for (const auto& f : forms_) t = std::max(t, f.arity());
    return t;
}

namespace {

class FormParser {
public:
    explicit FormParser(std::string_view text) : s_(text) {}

    LinearForm parse() {
        skip_ws();
        if (peek() == '[') return parse_list();
        std::vector<std::pair<std::size_t, std::int64_t>> terms;
        bool first = true;
        while (true) {
            skip_ws();
            int sign = 1;
            if (peek() == '+' || peek() == '-') {
                sign = get() == '-' ? -1 : 1;
                skip_ws();
            } else if (!first) {
                fail("expected '+' or '-'");
            }
            terms.push_back(parse_term(sign));
            first = false;
            skip_ws();
            if (at_end()) break;
        }
        std::size_t t = terms.size();
        std::vector<std::int64_t> coeffs(t, 0);
        std::vector<bool> used(t, false);
        for (auto [index, c] : terms) {
            if (index < 1 || index > t)
                throw ParseError("variable index x" + std::to_string(index) + " outside 1.." + std::to_string(t));
            if (used[index - 1]) throw ParseError("variable x" + std::to_string(index) + " used twice");
            used[index - 1] = true;
            coeffs[index - 1] = c;
        }
        if (t < 2) throw ParseError("a linear form needs at least two variables");
        return LinearForm(std::move(coeffs));
    }

private:
    std::pair<std::size_t, std::int64_t> parse_term(int sign) {
        std::int64_t k = 1;
        if (std::isdigit(static_cast<unsigned char>(peek()))) k = parse_uint();
        skip_ws();
        if (get() != 'x') fail("expected 'x'");
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected variable index");
        auto index = static_cast<std::size_t>(parse_uint());
        if (k == 0) throw ParseError("zero coefficient on x" + std::to_string(index));
        return {index, sign * k};
    }

    LinearForm parse_list() {
        get();
        std::vector<std::int64_t> coeffs;
        while (true) {
            skip_ws();
            int sign = 1;
            if (peek() == '-' || peek() == '+') sign = get() == '-' ? -1 : 1;
            if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected integer");
            std::int64_t c = sign * parse_uint();
            if (c == 0) throw ParseError("zero coefficient at position " + std::to_string(coeffs.size() + 1));
            coeffs.push_back(c);
            skip_ws();
            char ch = get();
            if (ch == ']') break;
            if (ch != ',') fail("expected ',' or ']'");
        }
        skip_ws();
        if (!at_end()) fail("trailing characters");
        if (coeffs.size() < 2) throw ParseError("a linear form needs at least two variables");
        return LinearForm(std::move(coeffs));
    }

    std::int64_t parse_uint() {
        std::int64_t v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) fail("integer too large");
            v = v * 10 + (get() - '0');
        }
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("form syntax error at column " + std::to_string(pos_ + 1) + ": " + msg +
                         " (grammar: term (('+'|'-') term)* with term [k]x<i>, or [c1,c2,...])");
    }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }
    char get() { return at_end() ? '\0' : s_[pos_++]; }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// Minimal number of unit steps +-c_j (j in coeffs) reaching each value in [-bound, bound].
// -1 marks unreachable values.
std::vector<std::int64_t> step_distances(const std::vector<std::int64_t>& coeffs, std::int64_t bound) {
    const std::size_t width = static_cast<std::size_t>(2 * bound + 1);
    std::vector<std::int64_t> dist(width, -1);
    std::deque<std::int64_t> queue;
    dist[static_cast<std::size_t>(bound)] = 0;
    queue.push_back(0);
    while (!queue.empty()) {
        std::int64_t v = queue.front();
        queue.pop_front();
        std::int64_t d = dist[static_cast<std::size_t>(v + bound)];
        for (auto c : coeffs) {
            for (std::int64_t w : {v + c, v - c}) {
                if (w < -bound || w > bound) continue;
                auto& slot = dist[static_cast<std::size_t>(w + bound)];
                if (slot < 0) {
                    slot = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    return dist;
}

}  // namespace

LinearForm parse_form(std::string_view text) { return FormParser(text).parse(); }

bool is_invariant(const LinearForm& form) { return form.coefficient_sum() == 0; }

ContentReduction content_reduce(const LinearForm& form) {
    std::int64_t g = 0;
    for (auto c : form.coeffs()) g = std::gcd(g, c);
    std::vector<std::int64_t> reduced;
    reduced.reserve(form.arity());
    for (auto c : form.coeffs()) reduced.push_back(c / g);
    return {LinearForm(std::move(reduced)), g};
}

bool has_coprime_coefficients(const LinearForm& form) { return content_reduce(form).content == 1; }

MultiplierHeight multiplier_height(const LinearForm& form) {
    if (!has_coprime_coefficients(form))
        throw DomainError("multiplier height needs coprime coefficients: " + form.to_string());
    const auto& c = form.coeffs();
    const std::int64_t m = form.max_abs_coeff();

    // A minimal representation of 1 can be ordered so every partial sum stays in [-m, m].
    auto full = step_distances(c, m);
    const std::int64_t height = full[static_cast<std::size_t>(1 + m)];
    if (height < 0) throw DomainError("1 is not representable by " + form.to_string());

    // Any target met while fixing a prefix has |target| <= 1 + height*m, and its minimal
    // representation stays within m of [min(0,target), max(0,target)].
    const std::int64_t bound = (height + 1) * m + 1;
    const std::size_t t = c.size();
    std::vector<std::vector<std::int64_t>> suffix(t + 1);
    for (std::size_t k = 0; k <= t; ++k)
        suffix[k] = step_distances(std::vector<std::int64_t>(c.begin() + static_cast<std::ptrdiff_t>(k), c.end()), bound);

    MultiplierHeight out{height, std::vector<std::int64_t>(t, 0)};
    std::int64_t target = 1, budget = height;
    for (std::size_t i = 0; i < t; ++i) {
        bool placed = false;
        for (std::int64_t n = -budget; n <= budget && !placed; ++n) {
            std::int64_t rest = target - n * c[i];
            std::int64_t left = budget - std::abs(n);
            if (rest < -bound || rest > bound) continue;
            if (suffix[i + 1][static_cast<std::size_t>(rest + bound)] == left) {
                out.witness[i] = n;
                target = rest;
                budget = left;
                placed = true;
            }
        }
        if (!placed) throw DomainError("internal: witness reconstruction failed for " + form.to_string());
    }
    return out;
}

std::int64_t k_admissibility_threshold(const LinearForm& form) {
    return std::max(multiplier_height(form).height, form.max_abs_coeff());
}

bool is_admissible(const LinearForm& form, Carrier carrier) {
    if (carrier.is_circle()) return true;
    for (auto c : form.coeffs())
        if (std::gcd(c, carrier.modulus) != 1) return false;
    return true;
}

std::int64_t weight_s(const LinearForm& form) {
    std::int64_t s = 0;
    for (auto c : form.coeffs()) s += std::abs(c);
    return s;
}

LinearForm ones_form(std::size_t arity) {
    std::vector<std::int64_t> c(arity, 1);
    c.back() = -1;
    return LinearForm(std::move(c));
}

bool is_schur_form(const LinearForm& form) {
    if (form.arity() != 3) return false;
    auto c = form.coeffs();
    if (form.coefficient_sum() < 0)
        for (auto& x : c) x = -x;
    std::sort(c.begin(), c.end());
    return c == std::vector<std::int64_t>{-1, 1, 1};
}

void to_json(nlohmann::json& j, const LinearForm& form) { j = form.coeffs(); }

void from_json(const nlohmann::json& j, LinearForm& form) {
    if (!j.is_array()) throw ParseError("a linear form is a JSON array of integers");
    std::vector<std::int64_t> c;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ParseError("form coefficients must be integers");
        c.push_back(v.get<std::int64_t>());
    }
    form = LinearForm(std::move(c));
}

FormFamily family_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("a family file is a JSON array of coefficient arrays");
    std::vector<LinearForm> forms;
    for (const auto& f : j) forms.push_back(f.get<LinearForm>());
    if (forms.empty()) throw ParseError("empty form family");
    return FormFamily(std::move(forms));
}

nlohmann::json family_to_json(const FormFamily& family) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& f : family) j.push_back(f);
    return j;
}

}  // namespace solfree
