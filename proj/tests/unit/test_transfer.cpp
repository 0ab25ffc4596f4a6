#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "solfree/error.hpp"
#include "solfree/transfer.hpp"

using namespace solfree;

namespace {

CyclicSet interval(std::int64_t p, std::int64_t lo, std::int64_t hi) {
    CyclicSet s(p);
    for (std::int64_t x = lo; x <= hi; ++x) s.insert(x);
    return s;
}

}  // namespace

TEST_CASE("regularize keeps the large coefficients") {
    auto c = regularize(CyclicFunction::constant(31, Rational(2, 7)), 0.01, 10);
    CHECK(c.function.support_size() == 1);
    CHECK(c.function.mean == Rational(2, 7));
    CHECK(c.l2_residual == doctest::Approx(0.0));

    const std::int64_t p = 101;
    auto f = CyclicFunction::indicator(interval(p, 0, (p - 1) / 2));
    auto r = regularize(f, 0.05, 64);
    CHECK(r.function.coefficients.count(0));
    CHECK(r.function.coefficients.count(1));
    CHECK(r.function.coefficients.count(p - 1));
    CHECK(r.function.mean == f.mean());

    auto full = regularize(f, 0.0, static_cast<std::size_t>(p));
    CHECK(full.l2_residual < 1e-12);
    for (std::int64_t x = 0; x < p; ++x) CHECK(full.function.value_at_residue(x) == doctest::Approx(f[x].get_d()));

    CHECK_THROWS_AS(regularize(f, 0.05, 0), DomainError);
}

TEST_CASE("regularize caps the support symmetrically") {
    auto f = CyclicFunction::indicator(interval(97, 33, 64));
    auto r = regularize(f, 0.0, 9);
    CHECK(r.function.support_size() <= 9);
    for (auto g : r.function.support()) CHECK(r.function.coefficients.count(mod_floor(-g, 97)));
}

TEST_CASE("regularized solution measure deltas are reported") {
    FormFamily sf({LinearForm({1, 1, -1})});
    auto f = CyclicFunction::indicator(interval(61, 21, 40));
    auto r = regularize(f, 0.02, 61, &sf);
    REQUIRE(r.form_deltas.size() == 1);
    std::vector<CyclicSet> sets(3, interval(61, 21, 40));
    double exact = solution_measure_convolution(LinearForm({1, 1, -1}), sets).get_d();
    double spectral = spectral_solution_measure(LinearForm({1, 1, -1}), r.function).real();
    CHECK(r.form_deltas[0] == doctest::Approx(std::abs(exact - spectral)).epsilon(1e-6));
}

TEST_CASE("Freiman maps from Z/p into the integers") {
    std::vector<std::int64_t> small{0, 1, 2};
    auto m = find_iso_modp_to_int(small, 2, 101);
    CHECK(m.lambda == 1);
    CHECK(verify_freiman(m));

    std::vector<std::int64_t> spread{0, 1, 50};
    auto d = find_iso_modp_to_int(spread, 2, 101);
    CHECK(d.lambda == 2);
    CHECK(d(0) == 0);
    CHECK(d(1) == 2);
    CHECK(d(50) == -1);

    std::vector<std::int64_t> no_zero{1, 2};
    CHECK_THROWS_AS(find_iso_modp_to_int(no_zero, 2, 101), DomainError);
    CHECK_THROWS_AS(find_iso_modp_to_int(small, 2, 100), DomainError);
}

TEST_CASE("Freiman verification rejects collapsing maps") {
    FreimanMap bad;
    bad.source = Carrier::circle();
    bad.target = Carrier::cyclic(3);
    bad.k = 2;
    bad.pairs = {{0, 0}, {1, 1}, {2, 2}};
    CHECK_FALSE(verify_freiman(bad));

    // a + b = c + d exhaustively in both directions
    std::vector<std::int64_t> r{0, 3, 7, 12, 20};
    auto m = find_iso_int_to_modn(r, 2, 81);
    for (auto a : r)
        for (auto b : r)
            for (auto c : r)
                for (auto e : r)
                    CHECK((a + b == c + e) == (mod_floor(m(a) + m(b), 81) == mod_floor(m(c) + m(e), 81)));
}

TEST_CASE("reduction from the integers to Z/N") {
    std::vector<std::int64_t> a{0, 1, 2};
    CHECK(verify_freiman(find_iso_int_to_modn(a, 2, 101)));
    std::vector<std::int64_t> b{0, 3, 10};
    CHECK(verify_freiman(find_iso_int_to_modn(b, 3, 61)));
    std::vector<std::int64_t> c{0, 30};
    CHECK_THROWS_AS(find_iso_int_to_modn(c, 2, 100), DomainError);
}

TEST_CASE("product sets") {
    std::vector<std::int64_t> r{-1, 0, 1};
    CHECK(build_product_set(r, 1, Carrier::circle()) == r);
    CHECK(build_product_set(r, 2, Carrier::circle()) == std::vector<std::int64_t>{-2, -1, 0, 1, 2});
    std::vector<std::int64_t> s{0, 1, 5, 96};
    for (std::int64_t h = 1; h <= 3; ++h)
        CHECK(build_product_set(s, h, Carrier::cyclic(97)).size() <= static_cast<std::size_t>(std::pow(4, h)));
}

TEST_CASE("spectrum transfer preserves solution measures under a 2-isomorphism") {
    const std::int64_t p = 101;
    auto f = CyclicFunction::indicator(interval(p, 34, 67));
    auto r = regularize(f, 0.0, 3);
    auto lift = find_iso_modp_to_int(r.function.support(), 2, p);
    auto g = transfer_spectrum(r.function, lift);
    CHECK(g.mean == r.function.mean);
    CHECK(g.group.is_circle());
    for (const auto& L : {LinearForm({1, 1, -1}), LinearForm({2, -1, -1}), LinearForm({1, 1, 1})}) {
        auto a = spectral_solution_measure(L, r.function);
        auto b = spectral_solution_measure(L, g);
        CHECK(std::abs(a - b) < 1e-12);
    }

    auto constant = regularize(CyclicFunction::constant(p, Rational(1, 4)), 0.01, 5);
    auto t = transfer_spectrum(constant.function, lift);
    CHECK(t.support_size() == 1);
    CHECK(t.mean == Rational(1, 4));
}

TEST_CASE("a 1-isomorphism changes the solution measure") {
    const std::int64_t p = 101;
    auto r = regularize(CyclicFunction::indicator(interval(p, 0, 30)), 0.0, 5);
    REQUIRE(r.function.coefficients.count(2));
    FreimanMap broken;
    broken.source = Carrier::cyclic(p);
    broken.target = Carrier::circle();
    broken.k = 1;
    broken.pairs = {{0, 0}, {1, 1}, {p - 1, -1}, {2, 5}, {p - 2, -5}};
    CHECK(verify_freiman(broken));
    broken.k = 2;
    CHECK_FALSE(verify_freiman(broken));
    auto g = transfer_spectrum(r.function, broken);
    LinearForm L({2, -1, -1});
    CHECK(std::abs(spectral_solution_measure(L, r.function) - spectral_solution_measure(L, g)) > 1e-4);
}

TEST_CASE("transfer_spectrum rejects a bad domain") {
    auto r = regularize(CyclicFunction::indicator(interval(31, 0, 9)), 0.0, 5);
    FreimanMap partial;
    partial.source = Carrier::cyclic(31);
    partial.target = Carrier::circle();
    partial.pairs = {{0, 0}, {1, 1}};
    CHECK_THROWS_AS(transfer_spectrum(r.function, partial), DomainError);
}

TEST_CASE("range correction") {
    std::vector<Rational> ok{Rational(1, 3), Rational(1, 2), 0, 1};
    auto same = range_correct(ok, Rational(11, 24));
    CHECK(same.values == ok);
    CHECK(same.l2_distance == 0);

    std::vector<double> high(8, 1.2);
    CHECK_THROWS_AS(range_correct(high), DomainError);

    std::vector<double> wave(64);
    for (std::size_t i = 0; i < wave.size(); ++i)
        wave[i] = 0.5 + 0.6 * std::cos(2 * std::numbers::pi * (static_cast<double>(i) + 0.5) / 64);
    auto out = range_correct(wave, Rational(1, 2));
    Rational sum = 0;
    for (const auto& v : out.values) {
        CHECK(v >= 0);
        CHECK(v <= 1);
        sum += v;
    }
    CHECK(sum / 64 == Rational(1, 2));
    CHECK(out.clipped > 0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.4, 0.5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> v(1 + rng() % 40);
        for (auto& x : v) x = n(rng);
        Rational mean = make_rational(1 + static_cast<std::int64_t>(rng() % 9), 10);
        auto r = range_correct(v, mean);
        Rational s = 0;
        for (const auto& x : r.values) {
            CHECK(x >= 0);
            CHECK(x <= 1);
            s += x;
        }
        CHECK(s / static_cast<long>(v.size()) == mean);
    }
}

TEST_CASE("pipeline on constants") {
    FormFamily sf({LinearForm({1, 1, -1})});
    auto up = transfer_pipeline(CyclicFunction::constant(97, Rational(1, 3)), sf);
    CHECK(up.function.mean() == Rational(1, 3));
    for (const auto& v : up.function.values()) CHECK(v == Rational(1, 3));
    for (const auto& r : up.report.per_form) CHECK(r.delta == doctest::Approx(0.0));

    auto down = transfer_pipeline(GridFunction::constant(6, Rational(2, 5)), 101, sf);
    CHECK(down.function.mean() == Rational(2, 5));
    for (const auto& v : down.function.values()) CHECK(v == Rational(2, 5));
    CHECK_FALSE(down.report.bounds_flag);
}

TEST_CASE("pipeline from a sum-free interval") {
    FormFamily sf({LinearForm({1, 1, -1})});
    auto f = CyclicFunction::indicator(interval(97, 33, 64));
    auto up = transfer_pipeline(f, sf);
    CHECK(up.function.mean() == Rational(32, 97));
    CHECK(up.report.alpha == Rational(32, 97));
    REQUIRE(up.report.per_form.size() == 1);
    CHECK(up.report.per_form[0].t_target < 0.02);
    auto j = up.report.to_json();
    CHECK(j.contains("lambda"));
    CHECK(j.contains("bounds_flag"));
    CHECK(j.at("alpha") == "32/97");

    auto down = transfer_pipeline(GridFunction::indicator(GridSet::from_cells(3, {1})), 1009, sf);
    CHECK(down.function.mean() == Rational(1, 3));
    CHECK(down.report.per_form[0].t_target < 0.02);
}
