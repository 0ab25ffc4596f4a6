#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "solfree/cyclic.hpp"
#include "solfree/extremal.hpp"
#include "solfree/forms.hpp"
#include "solfree/removal.hpp"
#include "solfree/rounding.hpp"
#include "solfree/torus.hpp"
#include "solfree/transfer.hpp"

using namespace solfree;

namespace {

using Clock = std::chrono::steady_clock;

// Criterion outcome plus a one-line summary of what was measured.
struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> body;
};

// ---------------------------------------------------------------------------
// Independent oracles

std::int64_t mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

std::int64_t inverse_mod(std::int64_t a, std::int64_t m) {
    a = mod(a, m);
    for (std::int64_t x = 1; x < m; ++x)
        if (a * x % m == 1) return x;
    return 0;
}

bool sum_free_naive(const std::vector<std::uint8_t>& in, std::int64_t m) {
    for (std::int64_t x = 0; x < m; ++x) {
        if (!in[x]) continue;
        for (std::int64_t y = 0; y < m; ++y)
            if (in[y] && in[mod(x + y, m)]) return false;
    }
    return true;
}

// Largest sum-free subset of Z/p by depth-first search with a size bound.
class SumFreeSearch {
public:
    explicit SumFreeSearch(std::int64_t p) : p_(p), in_(p, 0) {}

    std::size_t run() {
        dfs(1, 0);
        return best_;
    }

private:
    bool can_add(std::int64_t x) const {
        if (in_[mod(2 * x, p_)]) return false;
        for (std::int64_t y = 1; y < p_; ++y) {
            if (!in_[y]) continue;
            if (in_[mod(x + y, p_)] || in_[mod(x - y, p_)] || in_[mod(y - x, p_)]) return false;
        }
        return mod(2 * x, p_) != x;
    }

    void dfs(std::int64_t next, std::size_t size) {
        if (size > best_) best_ = size;
        for (std::int64_t x = next; x < p_; ++x) {
            if (size + static_cast<std::size_t>(p_ - x) <= best_) return;
            if (!can_add(x)) continue;
            in_[x] = 1;
            dfs(x + 1, size + 1);
            in_[x] = 0;
        }
    }

    std::int64_t p_;
    std::vector<std::uint8_t> in_;
    std::size_t best_ = 0;
};

// (1/p^(t-1)) * sum over x_1..x_{t-1} with x_t solved from L(x) = 0.
double solution_measure_naive(const LinearForm& L, std::int64_t p, const std::vector<std::vector<double>>& f) {
    const std::size_t t = L.arity();
    const std::int64_t inv = inverse_mod(L[t - 1], p);
    std::vector<std::int64_t> x(t - 1, 0);
    double total = 0;
    while (true) {
        std::int64_t s = 0;
        double prod = 1;
        for (std::size_t i = 0; i + 1 < t; ++i) {
            s += L[i] * x[i];
            prod *= f[i][x[i]];
        }
        total += prod * f[t - 1][mod(-s % p * inv, p)];
        std::size_t k = 0;
        while (k + 1 < t && ++x[k] == p) x[k++] = 0;
        if (k + 1 == t) break;
    }
    return total / std::pow(static_cast<double>(p), static_cast<double>(t - 1));
}

double u2_naive(const std::vector<double>& f) {
    const auto m = static_cast<std::int64_t>(f.size());
    double acc = 0;
    for (std::int64_t g = 0; g < m; ++g) {
        std::complex<double> c = 0;
        for (std::int64_t x = 0; x < m; ++x)
            c += f[x] * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(g * x % m) / static_cast<double>(m));
        acc += std::pow(std::abs(c) / static_cast<double>(m), 4);
    }
    return std::pow(acc, 0.25);
}

double l2_naive(const std::vector<double>& f) {
    double acc = 0;
    for (double v : f) acc += v * v;
    return std::sqrt(acc / static_cast<double>(f.size()));
}

BigInt eulerian_recurrence(std::int64_t n, std::int64_t k) {
    std::vector<BigInt> row{1};
    for (std::int64_t m = 2; m <= n; ++m) {
        std::vector<BigInt> next(static_cast<std::size_t>(m), 0);
        for (std::int64_t j = 0; j < m; ++j) {
            if (j < m - 1) next[j] += BigInt(static_cast<long>(j + 1)) * row[j];
            if (j > 0) next[j] += BigInt(static_cast<long>(m - j)) * row[j - 1];
        }
        row = std::move(next);
    }
    return k >= 0 && k < static_cast<std::int64_t>(row.size()) ? row[k] : BigInt(0);
}

GridSet random_grid(std::mt19937_64& rng, std::int64_t n) {
    GridSet s(n);
    for (std::int64_t j = 0; j < n; ++j)
        if (rng() % 2) s.insert_cell(j);
    return s;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

const LinearForm kSchur({1, 1, -1});
const FormFamily kSumFree({kSchur});

// ---------------------------------------------------------------------------

Outcome sum_free_table() {
    Outcome o;
    for (std::int64_t p : {5, 7, 11, 13, 17, 19, 23, 29, 31}) {
        auto r = max_free_exact(kSumFree, p);
        const auto expect = static_cast<std::size_t>((p + 1) / 3);
        const std::size_t oracle = SumFreeSearch(p).run();
        const Rational d = make_rational(static_cast<std::int64_t>(r.size), p);
        bool ok = r.optimal && r.size == expect && r.size == oracle && is_free(kSumFree, r.witness).free;
        ok = ok && d <= make_rational(p + 1, 3 * p);
        if (p >= 11) ok = ok && std::abs(d.get_d() - 1.0 / 3) <= 1.0 / static_cast<double>(p);
        if (!ok) {
            o.pass = false;
            o.detail += " p=" + std::to_string(p) + " got " + std::to_string(r.size) + " oracle " + std::to_string(oracle);
        }
    }
    if (o.pass) o.detail = "p=5..31 match floor((p+1)/3)/p and DFS oracle";
    return o;
}

Outcome eulerian_identity() {
    Outcome o;
    std::mt19937_64 rng(2);
    std::size_t checked = 0;
    for (std::int64_t t : {3, 4}) {
        BigInt fact = 1;
        for (std::int64_t k = 2; k < t; ++k) fact *= static_cast<unsigned long>(k);
        const LinearForm ones = ones_form(static_cast<std::size_t>(t));
        for (std::int64_t n : {4, 6, 8})
            for (int trial = 0; trial < 100; ++trial) {
                std::vector<GridSet> sets;
                for (std::int64_t i = 0; i < t; ++i) sets.push_back(random_grid(rng, n));
                Rational lhs = solution_measure_grid(ones, sets);

                // shifted counts on Z/n, weighted by Eulerian numbers
                Rational rhs = 0;
                for (std::int64_t r = 0; r + 2 <= t; ++r) {
                    std::int64_t count = 0;
                    std::vector<std::int64_t> j(static_cast<std::size_t>(t), 0);
                    while (true) {
                        bool in = true;
                        std::int64_t s = r;
                        for (std::int64_t i = 0; i < t; ++i) {
                            in = in && sets[i].contains_cell(j[i]);
                            s += (i + 1 < t ? 1 : -1) * j[i];
                        }
                        if (in && mod(s, n) == 0) ++count;
                        std::int64_t k = 0;
                        while (k < t && ++j[k] == n) j[k++] = 0;
                        if (k == t) break;
                    }
                    BigInt denom = 1;
                    for (std::int64_t i = 1; i < t; ++i) denom *= static_cast<unsigned long>(n);
                    rhs += Rational(eulerian_recurrence(t - 1, r) * count, denom);
                }
                rhs /= Rational(fact);
                rhs.canonicalize();
                ++checked;
                if (lhs != rhs) {
                    o.pass = false;
                    o.detail = "t=" + std::to_string(t) + " N=" + std::to_string(n) + ": " + to_string(lhs) +
                               " != " + to_string(rhs);
                    return o;
                }
            }
    }
    o.detail = std::to_string(checked) + " tuples, exact equality";
    return o;
}

Outcome dilation_sandwich() {
    Outcome o;
    std::mt19937_64 rng(3);
    const LinearForm ones({1, 1, 1});
    std::size_t checked = 0;
    for (const auto& L : {LinearForm({2, 3, -1}), LinearForm({2, -1, -1}), LinearForm({3, 1, -2})}) {
        std::int64_t prod = 1;
        for (auto c : L.coeffs()) prod *= std::abs(c);
        for (int trial = 0; trial < 100; ++trial) {
            const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 6);
            std::vector<GridSet> a, ca;
            for (std::size_t i = 0; i < 3; ++i) {
                a.push_back(random_grid(rng, n));
                ca.push_back(dilate_image(a.back(), L[i]));
            }
            Rational tl = solution_measure_grid(L, a);
            Rational t1 = solution_measure_grid(ones, ca);
            ++checked;
            if (!(tl <= t1 && t1 <= tl * prod)) {
                o.pass = false;
                o.detail = L.to_string() + ": T_L=" + to_string(tl) + " T_1=" + to_string(t1);
                return o;
            }
        }
    }
    o.detail = std::to_string(checked) + " triples";
    return o;
}

Outcome spectral_formula() {
    Outcome o;
    std::mt19937_64 rng(4);
    const std::vector<std::int64_t> primes{5, 7, 11, 13, 17, 23, 31, 41, 53, 61, 71, 83, 97, 101};
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t p = primes[rng() % primes.size()];
        const std::size_t t = (p > 61 || trial % 2) ? 3 : 4;
        std::vector<std::int64_t> c(t);
        for (auto& x : c) {
            do x = static_cast<std::int64_t>(rng() % 9) - 4;
            while (x == 0 || mod(x, p) == 0);
        }
        LinearForm L(c);
        std::vector<std::vector<double>> ind;
        std::vector<CyclicSpectrum> spectra;
        for (std::size_t i = 0; i < t; ++i) {
            CyclicSet s(p);
            for (std::int64_t x = 0; x < p; ++x)
                if (rng() % 3 == 0) s.insert(x);
            std::vector<double> v(static_cast<std::size_t>(p));
            for (std::int64_t x = 0; x < p; ++x) v[x] = s.contains(x) ? 1 : 0;
            ind.push_back(v);
            spectra.push_back(dft(CyclicFunction::indicator(s)));
        }
        const double spectral = solution_measure_spectral(L, spectra).real();
        worst = std::max(worst, std::abs(spectral - solution_measure_naive(L, p, ind)));
    }
    o.pass = worst <= 1e-9;
    o.detail = "200 instances, max error " + fmt(worst);
    return o;
}

Outcome von_neumann() {
    Outcome o;
    std::mt19937_64 rng(5);
    std::size_t checked = 0;
    double tightest = 0;
    for (std::int64_t p : {17, 31, 61}) {
        const int trials = p == 61 ? 334 : 333;
        for (int trial = 0; trial < trials; ++trial) {
            const std::size_t t = (p == 61 && trial % 3) ? 3 : 3 + static_cast<std::size_t>(trial % 2);
            std::vector<std::int64_t> c(t);
            for (auto& x : c) {
                do x = static_cast<std::int64_t>(rng() % 11) - 5;
                while (x == 0);
            }
            LinearForm L(c);
            std::vector<std::vector<double>> f(t, std::vector<double>(static_cast<std::size_t>(p)));
            std::vector<CyclicFunction> exact;
            for (auto& fi : f) {
                std::vector<Rational> q(fi.size());
                for (std::size_t x = 0; x < fi.size(); ++x) {
                    q[x] = make_rational(static_cast<std::int64_t>(rng() % 11), 10);
                    fi[x] = q[x].get_d();
                }
                exact.emplace_back(p, q);
            }
            const double tl = std::abs(solution_measure_convolution(L, exact).get_d());
            const double naive = std::abs(solution_measure_naive(L, p, f));
            double bound = std::numeric_limits<double>::infinity();
            double l2_all = 1;
            for (std::size_t i = 0; i < t; ++i) {
                double b = u2_naive(f[i]);
                for (std::size_t j = 0; j < t; ++j)
                    if (j != i) b *= l2_naive(f[j]);
                bound = std::min(bound, b);
                l2_all *= l2_naive(f[i]);
            }
            ++checked;
            tightest = std::max(tightest, tl / bound);
            if (std::abs(tl - naive) > 1e-9 || tl > bound + 1e-12 || bound > l2_all + 1e-12) {
                o.pass = false;
                o.detail = "p=" + std::to_string(p) + " " + L.to_string() + " T=" + fmt(tl) + " bound=" + fmt(bound);
                return o;
            }
        }
    }
    o.detail = std::to_string(checked) + " tuples, max T/bound " + fmt(tightest);
    return o;
}

Outcome end_to_end() {
    Outcome o;
    const LinearForm& L = kSchur;

    auto ex = max_free_exact(kSumFree, 97);
    auto up = transfer_pipeline(CyclicFunction::indicator(ex.witness), kSumFree);
    RoundingOptions ro;
    ro.seed = 1;
    auto rounded = round_to_set(up.function, ro);
    std::vector<GridSet> one{rounded.set};
    auto removed = removal_on_torus(L, one);
    const GridSet& torus_set = removed.remainders[0];
    const Rational forward = torus_set.measure();
    const bool forward_ok = ex.size == 32 && removed.remainder_free && is_free_grid(kSumFree, torus_set).free &&
                            forward >= make_rational(32, 97) - make_rational(2, 25);

    auto source = GridSet::from_interval(make_rational(1, 3), make_rational(2, 3));
    auto down = transfer_pipeline(GridFunction::indicator(source), 1009, kSumFree);
    auto rc = round_to_set(down.function, ro);
    std::vector<CyclicSet> single{rc.set};
    auto g = greedy_removal_cyclic(L, single);
    const CyclicSet cyclic_set = rc.set.minus(g.removed[0]);
    const Rational reverse = cyclic_set.density();
    const bool reverse_ok =
        sum_free_naive(cyclic_set.bitmap(), 1009) && reverse >= make_rational(1, 3) - make_rational(1, 20);

    auto direct = discretize_interval(torus_interval_construction(kSumFree), 1009);
    const bool direct_ok =
        sum_free_naive(direct.bitmap(), 1009) && direct.density() >= make_rational(1, 3) - make_rational(3, 1009);

    o.pass = forward_ok && reverse_ok && direct_ok;
    o.detail = "Z/97->T measure " + fmt(forward.get_d()) + (forward_ok ? "" : " (fail)") + ", T->Z/1009 density " +
               fmt(reverse.get_d()) + (reverse_ok ? "" : " (fail)") + ", direct " + to_string(direct.density()) +
               (direct_ok ? "" : " (fail)");
    return o;
}

Outcome interval_construction() {
    Outcome o;
    std::mt19937_64 rng(7);
    int done = 0;
    while (done < 20) {
        const std::size_t forms = 1 + rng() % 3;
        std::vector<LinearForm> list;
        for (std::size_t k = 0; k < forms; ++k) {
            std::vector<std::int64_t> c(2 + rng() % 3);
            do {
                for (auto& x : c) {
                    do x = static_cast<std::int64_t>(rng() % 9) - 4;
                    while (x == 0);
                }
            } while (is_invariant(LinearForm(c)));
            list.emplace_back(c);
        }
        FormFamily F(list);
        std::int64_t s = 0;
        for (const auto& L : F) s += weight_s(L);
        auto r = torus_interval_construction(F);

        // the open arc (-1/2s, 1/2s) - y is L-free iff no integer lies in the open
        // interval L(arc^t) = (-y sigma - s_L/2s, -y sigma + s_L/2s)
        bool arc_free = true;
        for (const auto& L : F) {
            Rational centre = -r.translate * L.coefficient_sum();
            Rational half = make_rational(weight_s(L), 2 * s);
            mpz_class lo;
            Rational left = centre - half;
            mpz_fdiv_q(lo.get_mpz_t(), left.get_num_mpz_t(), left.get_den_mpz_t());
            if (Rational(lo + 1) < centre + half) arc_free = false;
        }
        const bool ok = r.density == make_rational(1, s) && r.witness.measure() == r.density &&
                        r.certificate.free && is_free_grid(F, r.witness, r.semantics).free && arc_free;
        if (!ok) {
            o.pass = false;
            o.detail = "family with s=" + std::to_string(s) + " density " + to_string(r.density);
            return o;
        }
        ++done;
    }
    o.detail = "20 families, density 1/s with certificates";
    return o;
}

Outcome rounding() {
    Outcome o;
    const auto f = CyclicFunction::constant(10007, make_rational(1, 2));
    const FormFamily forms({kSchur, LinearForm({2, 3, -1}), LinearForm({1, 1, 1, -2})});
    int good = 0;
    bool inequalities = true;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        RoundingOptions ro;
        ro.seed = seed;
        ro.keep_draws = true;
        auto r = round_to_set(f, ro);
        if (r.u2_distance <= 0.15) ++good;
        for (const auto& draw : r.draws)
            if (!rounding_stability_report(f, draw, forms).all_hold()) inequalities = false;
    }
    o.pass = good >= 45 && inequalities;
    o.detail = std::to_string(good) + "/50 seeds within 0.15, mean and T_L gap bounds " +
               (inequalities ? "held on all 1000 draws" : "violated");
    return o;
}

std::size_t min_removal_bruteforce(const LinearForm& L, const CyclicSet& a) {
    auto members = a.members();
    const std::size_t n = members.size();
    std::size_t best = n;
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        auto removed = static_cast<std::size_t>(__builtin_popcount(mask));
        if (removed >= best) continue;
        CyclicSet keep(a.modulus());
        for (std::size_t i = 0; i < n; ++i)
            if (!(mask >> i & 1U)) keep.insert(members[i]);
        if (is_free(FormFamily({L}), keep).free) best = removed;
    }
    return best;
}

Outcome removal() {
    Outcome o;
    std::mt19937_64 rng(9);
    const std::vector<LinearForm> forms{kSchur, LinearForm({1, 2, -1}), LinearForm({1, 1, 1}), LinearForm({2, 3, -1}),
                                        LinearForm({1, 1, 1, -1})};
    std::size_t instances = 0, lifts = 0;
    double worst_ratio = 0;
    for (std::int64_t m = 5; m <= 20; ++m)
        for (const auto& L : forms) {
            if (!is_admissible(L, m)) continue;
            for (int trial = 0; trial < 3; ++trial) {
                CyclicSet a(m);
                for (std::int64_t x = 0; x < m; ++x)
                    if (rng() % 2) a.insert(x);
                if (a.size() > 12) continue;
                std::vector<CyclicSet> one{a};
                auto exact = exact_min_removal(L, one);
                auto g = greedy_removal_cyclic(L, one);
                ++instances;
                CyclicSet rest = a;
                for (const auto& e : g.removed) rest = rest.minus(e);
                const bool ok = exact.size == min_removal_bruteforce(L, a) && is_free(FormFamily({L}), rest).free &&
                                g.total() <= 3 * exact.size;
                if (exact.size) worst_ratio = std::max(worst_ratio, static_cast<double>(g.total()) / exact.size);
                if (!ok) {
                    o.pass = false;
                    o.detail = L.to_string() + " on Z/" + std::to_string(m) + ": greedy " +
                               std::to_string(g.total()) + " exact " + std::to_string(exact.size);
                    return o;
                }
            }

            // lifting to T for x1 + ... + x(t-1) - xt on random grid sets
            const std::size_t t = L.arity();
            std::vector<CyclicSet> bases;
            std::vector<GridSet> sets;
            for (std::size_t i = 0; i < t; ++i) {
                CyclicSet b(m);
                for (std::int64_t x = 0; x < m; ++x)
                    if (rng() % 2) b.insert(x);
                bases.push_back(b);
                sets.push_back(GridSet::from_cyclic(b));
            }
            std::vector<RemovalConstraint> cons;
            for (std::int64_t r = 0; r + 2 <= static_cast<std::int64_t>(t); ++r) {
                RemovalConstraint c{ones_form(t), {}, std::vector<std::int64_t>(t, 0)};
                for (std::size_t i = 0; i < t; ++i) c.base.push_back(i);
                c.shift.back() = r;
                cons.push_back(c);
            }
            auto g = greedy_removal(bases, cons);
            std::vector<std::vector<CyclicSet>> per_shift(t - 1, g.removed);
            auto lifted = lift_removal_to_torus(sets, per_shift);
            std::vector<GridSet> rest;
            for (std::size_t i = 0; i < t; ++i) rest.push_back(set_difference(sets[i], lifted.removed[i]));
            ++lifts;
            if (!lifted.certified || !is_free_grid(ones_form(t), rest).free) {
                o.pass = false;
                o.detail = "lift failed on Z/" + std::to_string(m);
                return o;
            }
        }
    o.detail = std::to_string(instances) + " instances (worst greedy/exact " + fmt(worst_ratio) + "), " +
               std::to_string(lifts) + " lifts certified";
    return o;
}

Outcome u2_on_torus() {
    Outcome o;
    const double half = u2_norm_grid(GridFunction::indicator(GridSet::from_cells(2, {0})));
    const double expect = std::pow(1.0 / 12, 0.25);
    o.pass = std::abs(half - expect) <= 1e-6;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 32);
        std::vector<Rational> v(static_cast<std::size_t>(n));
        std::vector<double> d(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = make_rational(static_cast<std::int64_t>(rng() % 101), 100);
            d[i] = v[i].get_d();
        }
        if (u2_norm_grid(GridFunction(n, v)) > l2_naive(d) + 1e-9) o.pass = false;
    }
    o.detail = "U2(1_[0,1/2)) = " + fmt(half) + " vs " + fmt(expect) + ", U2 <= l2 on 200 functions";
    return o;
}

Outcome odd_residues_composite() {
    Outcome o;
    for (std::int64_t p : {5, 7, 11, 13}) {
        CyclicSet odd = odd_residues(2 * p);
        bool ok = odd.density() == make_rational(1, 2) && sum_free_naive(odd.bitmap(), 2 * p) &&
                  is_free(kSumFree, odd).free;
        for (std::int64_t x = 0; x < 2 * p; ++x) ok = ok && odd.contains(x) == (x % 2 == 1);
        if (!ok) {
            o.pass = false;
            o.detail += " p=" + std::to_string(p);
        }
    }
    if (o.pass) o.detail = "Z/10, Z/14, Z/22, Z/26 odd residues sum-free, density 1/2";
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "sum-free densities on Z/p", sum_free_table},
        {2, "Eulerian identity", eulerian_identity},
        {3, "dilation sandwich", dilation_sandwich},
        {4, "spectral solution formula", spectral_formula},
        {5, "generalized von Neumann", von_neumann},
        {6, "end-to-end pipeline", end_to_end},
        {7, "interval construction", interval_construction},
        {8, "randomized rounding", rounding},
        {9, "removal surrogate", removal},
        {10, "U2 norm on T", u2_on_torus},
        {11, "odd residues in Z/2p", odd_residues_composite},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " [" << ms
                  << " ms]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
