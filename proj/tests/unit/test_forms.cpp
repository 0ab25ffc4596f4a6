#include <doctest.h>

#include <numeric>
#include <random>

#include "solfree/error.hpp"
#include "solfree/forms.hpp"

using namespace solfree;

namespace {

// Smallest sum |n_i| with sum n_i c_i = 1, by brute force over a box.
std::int64_t brute_height(const std::vector<std::int64_t>& c, std::int64_t bound) {
    std::int64_t best = -1;
    std::vector<std::int64_t> n(c.size(), -bound);
    while (true) {
        std::int64_t dot = 0, norm = 0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            dot += n[i] * c[i];
            norm += std::abs(n[i]);
        }
        if (dot == 1 && (best < 0 || norm < best)) best = norm;
        std::size_t pos = 0;
        while (pos < n.size() && ++n[pos] > bound) n[pos++] = -bound;
        if (pos == n.size()) break;
    }
    return best;
}

}  // namespace

TEST_CASE("parse_form reads the DSL") {
    CHECK(parse_form("x1+x2-x3").coeffs() == std::vector<std::int64_t>{1, 1, -1});
    CHECK(parse_form("2x1+3x2-2x3").coeffs() == std::vector<std::int64_t>{2, 3, -2});
    CHECK(parse_form("x1-2x2+x3").coeffs() == std::vector<std::int64_t>{1, -2, 1});
    CHECK(parse_form("-x2 + 4x1 + x3").coeffs() == std::vector<std::int64_t>{4, -1, 1});
    CHECK(parse_form("[3,5,-7]").coeffs() == std::vector<std::int64_t>{3, 5, -7});
}

TEST_CASE("parse_form rejects malformed input") {
    CHECK_THROWS_AS(parse_form("x1+0x2-x3"), ParseError);
    CHECK_THROWS_AS(parse_form("x1+x3"), ParseError);
    CHECK_THROWS_AS(parse_form("x1+x1"), ParseError);
    CHECK_THROWS_AS(parse_form("x1+y2"), ParseError);
    CHECK_THROWS_AS(parse_form(""), ParseError);
    CHECK_THROWS_AS(parse_form("[1,0,2]"), ParseError);
}

TEST_CASE("two-variable forms parse but are flagged") {
    auto L = parse_form("x1-x2");
    CHECK(L.arity() == 2);
    CHECK_FALSE(L.supported_for_pipeline());
    CHECK(parse_form("x1+x2-x3").supported_for_pipeline());
}

TEST_CASE("invariance") {
    CHECK(is_invariant(LinearForm({1, -2, 1})));
    CHECK_FALSE(is_invariant(LinearForm({1, 1, -1})));
    CHECK_FALSE(is_invariant(LinearForm({2, 3, -2})));
}

TEST_CASE("content reduction") {
    auto r = content_reduce(LinearForm({2, 4, -2}));
    CHECK(r.primitive == LinearForm({1, 2, -1}));
    CHECK(r.content == 2);
    CHECK(content_reduce(LinearForm({1, 1, -1})).content == 1);
    auto s = content_reduce(LinearForm({6, -9, 15}));
    CHECK(s.primitive == LinearForm({2, -3, 5}));
    CHECK(s.content == 3);
    CHECK(content_reduce(s.primitive).content == 1);
}

TEST_CASE("multiplier height and k threshold") {
    CHECK(multiplier_height(LinearForm({1, 1, -1})).height == 1);
    CHECK(multiplier_height(LinearForm({2, 3, -2})).height == 2);
    CHECK(multiplier_height(LinearForm({3, 5, -7})).height == 3);
    CHECK(k_admissibility_threshold(LinearForm({1, 1, -1})) == 1);
    CHECK(k_admissibility_threshold(LinearForm({2, 3, -2})) == 3);
    CHECK(k_admissibility_threshold(LinearForm({3, 5, -7})) == 7);
    CHECK_THROWS_AS(multiplier_height(LinearForm({2, 4, -2})), DomainError);
}

TEST_CASE("multiplier height agrees with brute force and its witness") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t t = 3 + rng() % 2;
        std::vector<std::int64_t> c(t);
        for (auto& x : c) {
            x = static_cast<std::int64_t>(rng() % 9) + 1;
            if (rng() & 1) x = -x;
        }
        std::int64_t g = 0;
        for (auto x : c) g = std::gcd(g, x);
        if (g != 1) continue;
        LinearForm L(c);
        auto h = multiplier_height(L);
        std::int64_t dot = 0, norm = 0;
        for (std::size_t i = 0; i < t; ++i) {
            dot += h.witness[i] * c[i];
            norm += std::abs(h.witness[i]);
        }
        CHECK(dot == 1);
        CHECK(norm == h.height);
        CHECK(h.height == brute_height(c, 5));
        bool has_unit = std::any_of(c.begin(), c.end(), [](auto x) { return std::abs(x) == 1; });
        CHECK((h.height == 1) == has_unit);
    }
}

TEST_CASE("admissibility") {
    LinearForm L({2, 3, -2});
    CHECK_FALSE(is_admissible(L, 4));
    CHECK(is_admissible(L, 5));
    CHECK(is_admissible(L, Carrier::circle()));
    for (std::int64_t p : {5, 7, 11, 13, 101}) CHECK(is_admissible(LinearForm({3, 5, -7}), p) == (p != 5 && p != 7));
}

TEST_CASE("weights") {
    CHECK(weight_s(LinearForm({1, 1, -1})) == 3);
    CHECK(weight_s(LinearForm({1, 1, -3})) == 5);
    CHECK(weight_s(LinearForm({2, 3, -2})) == 7);
}

TEST_CASE("schur forms and JSON") {
    CHECK(is_schur_form(LinearForm({1, 1, -1})));
    CHECK(is_schur_form(LinearForm({-1, 1, 1})));
    CHECK(is_schur_form(LinearForm({1, -1, -1})));
    CHECK_FALSE(is_schur_form(LinearForm({1, 2, -1})));

    nlohmann::json j = nlohmann::json::parse("[[1,1,-1],[2,3,-2],[1,1,-1]]");
    FormFamily F = family_from_json(j);
    CHECK(F.size() == 3);
    CHECK(F.has_duplicates());
    CHECK(family_to_json(F) == j);
    CHECK_THROWS_AS(family_from_json(nlohmann::json::array()), ParseError);
}
