#include <doctest.h>

#include "solfree/error.hpp"
#include "solfree/extremal.hpp"

using namespace solfree;

namespace {

// Largest free subset by plain subset enumeration.
std::size_t max_free_bruteforce(const FormFamily& F, std::int64_t m, SolutionFilter filter = SolutionFilter::all) {
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
        auto size = static_cast<std::size_t>(__builtin_popcount(mask));
        if (size <= best) continue;
        CyclicSet s(m);
        for (std::int64_t x = 0; x < m; ++x)
            if (mask >> x & 1U) s.insert(x);
        if (is_free(F, s, filter).free) best = size;
    }
    return best;
}

const FormFamily kSumFree({LinearForm({1, 1, -1})});

}  // namespace

TEST_CASE("exact maxima for sum-free sets") {
    auto seven = max_free_exact(kSumFree, 7);
    CHECK(seven.size == 2);
    CHECK(seven.optimal);
    CHECK(is_free(kSumFree, seven.witness).free);
    auto eleven = max_free_exact(kSumFree, 11);
    CHECK(eleven.size == 4);
    CHECK(eleven.upper_bound == std::optional<std::size_t>(4));
    CHECK(cauchy_davenport_bound(kSumFree, 12) == std::nullopt);
    CHECK(cauchy_davenport_bound(FormFamily({LinearForm({1, 2, -1})}), 13) == std::nullopt);
}

TEST_CASE("branch and bound agrees with subset enumeration") {
    const std::vector<FormFamily> families{
        FormFamily({LinearForm({1, 2, -1})}),
        FormFamily({LinearForm({1, 1, -3})}),
        FormFamily({LinearForm({1, 1, -1}), LinearForm({1, 2, -2})}),
        FormFamily({LinearForm({2, 3, -1})}),
    };
    for (const auto& F : families)
        for (std::int64_t m = 3; m <= 16; ++m) {
            ExactSearchOptions opts;
            opts.heuristic_iterations = 50;
            auto r = max_free_exact(F, m, opts);
            CHECK(r.optimal);
            CHECK(r.size == max_free_bruteforce(F, m));
            CHECK(r.witness.size() == r.size);
            CHECK(is_free(F, r.witness).free);
        }
}

TEST_CASE("invariant forms") {
    FormFamily roth({LinearForm({1, -2, 1})});
    CHECK(max_free_exact(roth, 7).size == 0);
    ExactSearchOptions opts;
    opts.filter = SolutionFilter::exclude_constant;
    auto r = max_free_exact(roth, 7, opts);
    CHECK(r.size == 3);
    CHECK(r.size == max_free_bruteforce(roth, 7, SolutionFilter::exclude_constant));
    CHECK(max_free_exact(roth, 13, opts).size == max_free_bruteforce(roth, 13, SolutionFilter::exclude_constant));
}

TEST_CASE("heuristic search") {
    auto big = max_free_heuristic(kSumFree, 97, 2000, 1);
    CHECK(big.size >= 32);
    CHECK(is_free(kSumFree, big.witness).free);
    auto again = max_free_heuristic(kSumFree, 97, 2000, 1);
    CHECK(again.witness == big.witness);
    FormFamily F({LinearForm({1, 2, -1})});
    for (std::int64_t m = 5; m <= 31; m += 2) CHECK(max_free_heuristic(F, m, 5000, 3).size == max_free_exact(F, m).size);
}

TEST_CASE("interval construction on the torus") {
    auto c = torus_interval_construction(kSumFree);
    CHECK(c.density == Rational(1, 3));
    CHECK(c.translate == Rational(1, 2));
    CHECK(c.witness == GridSet::from_cells(3, {1}));
    CHECK(c.certificate.free);

    auto d = torus_interval_construction(FormFamily({LinearForm({1, 1, -3})}));
    CHECK(d.density == Rational(1, 5));
    CHECK(d.witness.measure() == Rational(1, 5));
    CHECK(is_free_grid(FormFamily({LinearForm({1, 1, -3})}), d.witness, d.semantics).free);

    CHECK_THROWS_AS(torus_interval_construction(FormFamily({LinearForm({1, -2, 1})})), DomainError);

    FormFamily two({LinearForm({2, 3, -1}), LinearForm({1, 1, 1})});
    auto e = torus_interval_construction(two);
    CHECK(e.density == Rational(1, 9));
    CHECK(e.certificate.free);
}

TEST_CASE("grid searches") {
    auto three = torus_max_free_grid(kSumFree, 3, SearchMethod::exact);
    CHECK(three.density == Rational(1, 3));
    CHECK(three.witness == GridSet::from_cells(3, {1}));
    auto six = torus_max_free_grid(kSumFree, 6, SearchMethod::exact);
    CHECK(six.density == Rational(1, 3));
    CHECK(six.witness == GridSet::from_cells(6, {2, 3}));
    auto ten = torus_max_free_grid(FormFamily({LinearForm({1, 1, -3})}), 10, SearchMethod::exact);
    CHECK(ten.density >= Rational(1, 5));
    CHECK_THROWS_AS(torus_max_free_grid(kSumFree, 30, SearchMethod::exact), DomainError);
    auto h = torus_max_free_grid(kSumFree, 30, SearchMethod::heuristic);
    CHECK(is_free_grid(kSumFree, h.witness).free);
}

TEST_CASE("discretised interval") {
    auto c = torus_interval_construction(kSumFree);
    auto a = discretize_interval(c, 1009);
    CHECK(a.size() == 336);
    CHECK(a.members().front() == 337);
    CHECK(is_free(kSumFree, a).free);
}

TEST_CASE("convergence table") {
    ConvergenceConfig cfg;
    cfg.grid_resolution = 6;
    cfg.jobs = 2;
    auto t = convergence_experiment(kSumFree, {5, 7, 11, 13, 17, 19, 23}, cfg);
    const std::vector<Rational> expect{Rational(2, 5), Rational(2, 7), Rational(4, 11), Rational(4, 13),
                                       Rational(6, 17), Rational(6, 19), Rational(8, 23)};
    REQUIRE(t.rows.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(t.rows[i].density == expect[i]);
        CHECK(t.rows[i].exact);
    }
    CHECK(t.torus_lb == std::optional<Rational>(Rational(1, 3)));
    auto csv = t.to_csv();
    CHECK(csv.rfind("p,density_num,density_den,exact,lower_heuristic,upper_bound,torus_lb_num,torus_lb_den,elapsed_ms", 0) == 0);
    CHECK(csv.find("\n11,4,11,true,") != std::string::npos);
    auto svg = t.to_svg();
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);

    ConvergenceConfig inv;
    inv.grid_resolution = 0;
    inv.filter = SolutionFilter::exclude_constant;
    auto roth = convergence_experiment(FormFamily({LinearForm({1, -2, 1})}), {5, 7, 11, 13, 17, 19, 23}, inv);
    CHECK_FALSE(roth.torus_lb.has_value());
    CHECK(roth.rows.back().density < roth.rows.front().density);
}

TEST_CASE("odd residues") {
    for (const auto& row : odd_residue_demo({5, 7, 11, 13})) {
        CHECK(row.sum_free);
        CHECK(row.density == Rational(1, 2));
        CHECK(row.modulus == 2 * row.p);
    }
}
