#include "solfree/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

#include "solfree/error.hpp"

namespace solfree {

GridOptions GridOptions::from_environment() {
    GridOptions opts;
    if (const char* env = std::getenv("SOLFREE_RESOLUTION_CAP"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ParseError(std::string("SOLFREE_RESOLUTION_CAP must be a positive integer, got '") + env + "'");
        opts.resolution_cap = v;
    }
    return opts;
}

GridSet::GridSet(std::int64_t resolution) : resolution_(resolution) {
    if (resolution < 1) throw DomainError("grid resolution must be positive");
    bits_.assign(static_cast<std::size_t>(resolution), 0);
}

GridSet GridSet::from_cells(std::int64_t resolution, std::span<const std::int64_t> cells) {
    GridSet g(resolution);
    for (auto j : cells) {
        if (j < 0 || j >= resolution) throw DomainError("cell index outside 0.." + std::to_string(resolution - 1));
        g.insert_cell(j);
    }
    return g;
}

GridSet GridSet::full(std::int64_t resolution) {
    GridSet g(resolution);
    std::fill(g.bits_.begin(), g.bits_.end(), 1);
    return g;
}

namespace {

Rational frac(const Rational& x) {
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return x - fl;
}

BigInt floor_of(const Rational& x) {
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return fl;
}

std::int64_t to_i64(const BigInt& v) {
    if (!v.fits_slong_p()) throw DomainError("integer overflow in grid arithmetic");
    return v.get_si();
}

std::int64_t common_resolution(std::span<const GridSet> sets, const GridOptions& options) {
    std::int64_t n = 1;
    for (const auto& s : sets) {
        n = std::lcm(n, s.resolution());
        if (n > options.resolution_cap)
            throw DomainError("common resolution " + std::to_string(n) + " exceeds the cap " +
                              std::to_string(options.resolution_cap));
    }
    return n;
}

void check_cap(std::int64_t n, const GridOptions& options) {
    if (n > options.resolution_cap)
        throw DomainError("resolution " + std::to_string(n) + " exceeds the cap " +
                          std::to_string(options.resolution_cap));
}

// Source cell (at resolution n) of cell k at resolution n|c| under x -> c x.
std::int64_t preimage_source(std::int64_t k, std::int64_t c, std::int64_t n) {
    return c > 0 ? mod_floor(k, n) : mod_floor(-k - 1, n);
}

std::uint64_t saturating_product(std::span<const std::uint64_t> xs) {
    unsigned __int128 p = 1;
    for (auto x : xs) {
        p *= x;
        if (p > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(p);
}

}  // namespace

GridSet GridSet::from_interval(const Rational& a, const Rational& b) {
    Rational len = b - a;
    if (len < 0 || len > 1) throw DomainError("interval length must lie in [0,1]");
    Rational fa = frac(a);
    Rational fb = frac(b);
    std::int64_t n = std::lcm(to_i64(fa.get_den()), to_i64(fb.get_den()));
    GridSet g(n);
    if (len == 1) return full(n);
    std::int64_t start = to_i64(floor_of(fa * n));
    std::int64_t count = to_i64(floor_of(len * n));
    for (std::int64_t k = 0; k < count; ++k) g.insert_cell(start + k);
    return g;
}

bool GridSet::contains_point(const Rational& x) const {
    return contains_cell(to_i64(floor_of(frac(x) * resolution_)));
}

std::size_t GridSet::cell_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::int64_t> GridSet::cells() const {
    std::vector<std::int64_t> out;
    for (std::size_t j = 0; j < bits_.size(); ++j)
        if (bits_[j]) out.push_back(static_cast<std::int64_t>(j));
    return out;
}

Rational GridSet::measure() const { return make_rational(static_cast<std::int64_t>(cell_count()), resolution_); }

CyclicSet GridSet::as_cyclic() const { return CyclicSet::from_members(resolution_, cells()); }

GridSet GridSet::from_cyclic(const CyclicSet& set) { return from_cells(set.modulus(), set.members()); }

GridFunction::GridFunction(std::int64_t resolution, std::vector<Rational> values)
    : resolution_(resolution), values_(std::move(values)) {
    if (resolution < 1) throw DomainError("grid resolution must be positive");
    if (values_.size() != static_cast<std::size_t>(resolution))
        throw DomainError("number of cell values does not match the resolution");
    for (const auto& v : values_)
        if (v < 0 || v > 1) throw DomainError("step function values must lie in [0,1], got " + to_string(v));
}

GridFunction GridFunction::indicator(const GridSet& set) {
    std::vector<Rational> v(set.bitmap().size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = set.bitmap()[j] ? 1 : 0;
    return GridFunction(set.resolution(), std::move(v));
}

GridFunction GridFunction::constant(std::int64_t resolution, const Rational& value) {
    return GridFunction(resolution, std::vector<Rational>(static_cast<std::size_t>(resolution), value));
}

Rational GridFunction::mean() const {
    Rational s = 0;
    for (const auto& v : values_) s += v;
    return s / resolution_;
}

std::vector<double> GridFunction::to_doubles() const {
    std::vector<double> out;
    for (const auto& v : values_) out.push_back(v.get_d());
    return out;
}

GridSet refine(const GridSet& set, std::int64_t factor) {
    if (factor < 1) throw DomainError("refinement factor must be positive");
    GridSet out(set.resolution() * factor);
    for (auto j : set.cells())
        for (std::int64_t k = 0; k < factor; ++k) out.insert_cell(j * factor + k);
    return out;
}

GridSet refine_to(const GridSet& set, std::int64_t resolution) {
    if (resolution % set.resolution() != 0)
        throw DomainError("resolution " + std::to_string(resolution) + " is not a multiple of " +
                          std::to_string(set.resolution()));
    return refine(set, resolution / set.resolution());
}

GridSet set_union(const GridSet& a, const GridSet& b) {
    std::int64_t n = std::lcm(a.resolution(), b.resolution());
    GridSet ra = refine_to(a, n), rb = refine_to(b, n);
    for (auto j : rb.cells()) ra.insert_cell(j);
    return ra;
}

GridSet set_difference(const GridSet& a, const GridSet& b) {
    std::int64_t n = std::lcm(a.resolution(), b.resolution());
    GridSet ra = refine_to(a, n), rb = refine_to(b, n);
    for (auto j : rb.cells()) ra.erase_cell(j);
    return ra;
}

GridSet dilation_preimage(const GridSet& set, std::int64_t c) {
    if (c == 0) throw DomainError("dilation by zero");
    const std::int64_t n = set.resolution();
    const std::int64_t fine = n * std::abs(c);
    GridSet out(fine);
    for (std::int64_t k = 0; k < fine; ++k)
        if (set.contains_cell(preimage_source(k, c, n))) out.insert_cell(k);
    return out;
}

GridSet dilate_image(const GridSet& set, std::int64_t c) {
    if (c == 0) throw DomainError("dilation by zero");
    const std::int64_t n = set.resolution();
    GridSet out(n);
    const std::int64_t span = std::min(std::abs(c), n);
    for (auto j : set.cells()) {
        std::int64_t start = c > 0 ? c * j : c * (j + 1);
        for (std::int64_t k = 0; k < span; ++k) out.insert_cell(start + k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Generalised Eulerian weights

namespace {

BigInt pow_big(const BigInt& base, std::size_t e) {
    BigInt r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e));
    return r;
}

std::unique_ptr<EulerianWeightTable> build_weight_table(std::vector<std::int64_t> d) {
    const std::size_t n = d.size();
    if (n == 0) throw DomainError("Eulerian weights need at least one coefficient");
    if (n > 24) throw DomainError("too many coefficients for inclusion-exclusion");
    std::int64_t shift = 0, total = 0;
    BigInt denom = 1;
    for (auto c : d) {
        if (c == 0) throw DomainError("zero coefficient in Eulerian weight");
        if (c < 0) shift += -c;
        total += std::abs(c);
        denom *= std::abs(c);
    }
    for (std::size_t k = 2; k <= n; ++k) denom *= static_cast<unsigned long>(k);

    // corner sums with inclusion-exclusion signs
    std::vector<std::pair<std::int64_t, int>> corners;
    corners.reserve(std::size_t{1} << n);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::int64_t s = 0;
        int sign = 1;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) {
                s += std::abs(d[i]);
                sign = -sign;
            }
        corners.emplace_back(s, sign);
    }
    // G(s) = n! prod|d_i| Vol{sum |d_i| w_i <= s}
    auto G = [&](std::int64_t s) {
        BigInt acc = 0;
        for (auto [corner, sign] : corners) {
            if (s <= corner) continue;
            BigInt term = pow_big(BigInt(static_cast<long>(s - corner)), n);
            if (sign > 0) acc += term;
            else acc -= term;
        }
        return acc;
    };

    auto table = std::make_unique<EulerianWeightTable>();
    table->coeffs = std::move(d);
    table->first_index = -shift;
    BigInt prev = G(0);
    for (std::int64_t s = 1; s <= total; ++s) {
        BigInt cur = G(s);
        Rational w(cur - prev, denom);
        w.canonicalize();
        table->weights.push_back(w);
        prev = cur;
    }
    return table;
}

}  // namespace

Rational EulerianWeightTable::at(std::int64_t m) const {
    std::int64_t k = m - first_index;
    if (k < 0 || k >= static_cast<std::int64_t>(weights.size())) return Rational(0);
    return weights[static_cast<std::size_t>(k)];
}

const EulerianWeightTable& eulerian_weights(std::span<const std::int64_t> d) {
    static std::mutex mutex;
    static std::map<std::vector<std::int64_t>, std::unique_ptr<EulerianWeightTable>> cache;
    std::vector<std::int64_t> key(d.begin(), d.end());
    std::sort(key.begin(), key.end());
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_weight_table(key)).first;
    return *it->second;
}

Rational eulerian_weight(std::span<const std::int64_t> d, std::int64_t m) { return eulerian_weights(d).at(m); }

BigInt eulerian_number(std::int64_t n, std::int64_t k) {
    if (n < 0 || k < 0) return 0;
    if (n == 0) return k == 0 ? 1 : 0;
    std::vector<BigInt> row{1};  // n = 1
    for (std::int64_t len = 2; len <= n; ++len) {
        std::vector<BigInt> next(static_cast<std::size_t>(len), 0);
        for (std::int64_t j = 0; j < len; ++j) {
            BigInt v = 0;
            if (j < static_cast<std::int64_t>(row.size())) v += BigInt(static_cast<long>(j + 1)) * row[static_cast<std::size_t>(j)];
            if (j >= 1) v += BigInt(static_cast<long>(len - j)) * row[static_cast<std::size_t>(j - 1)];
            next[static_cast<std::size_t>(j)] = v;
        }
        row = std::move(next);
    }
    return k < static_cast<std::int64_t>(row.size()) ? row[static_cast<std::size_t>(k)] : BigInt(0);
}

// ---------------------------------------------------------------------------
// Solution measures on T

Rational solution_measure_grid(const LinearForm& form, std::span<const GridSet> sets, const GridOptions& options) {
    const std::size_t t = form.arity();
    if (sets.size() != t) throw DomainError("expected one grid set per variable");
    const std::int64_t n0 = common_resolution(sets, options);
    const std::int64_t ct = form.coeffs().back();
    const std::int64_t fine = n0 * std::abs(ct);
    check_cap(fine, options);

    using Count = unsigned __int128;
    std::vector<Count> dist(static_cast<std::size_t>(fine), 0);
    dist[0] = 1;
    std::vector<std::int64_t> d;
    for (std::size_t i = 0; i + 1 < t; ++i) {
        d.push_back(-form[i]);
        GridSet b = dilation_preimage(refine_to(sets[i], n0), ct);
        const auto cells = b.cells();
        std::vector<Count> next(dist.size(), 0);
        for (std::size_t y = 0; y < dist.size(); ++y) {
            if (dist[y] == 0) continue;
            for (auto cell : cells)
                next[static_cast<std::size_t>(mod_floor(static_cast<std::int64_t>(y) + d.back() * cell, fine))] += dist[y];
        }
        dist = std::move(next);
    }
    const GridSet last = refine_to(sets[t - 1], fine);
    const auto& table = eulerian_weights(d);

    Rational total = 0;
    for (std::size_t k = 0; k < table.weights.size(); ++k) {
        const std::int64_t m = table.first_index + static_cast<std::int64_t>(k);
        Count hits = 0;
        for (std::size_t y = 0; y < dist.size(); ++y)
            if (dist[y] != 0 && last.contains_cell(static_cast<std::int64_t>(y) + m)) hits += dist[y];
        if (hits != 0) total += table.weights[k] * Rational(to_bigint(hits));
    }
    BigInt norm = pow_big(BigInt(static_cast<long>(fine)), t - 1);
    return total / Rational(norm);
}

double solution_measure_grid_approx(const LinearForm& form, std::int64_t resolution,
                                    std::span<const std::vector<double>> cell_values, const GridOptions& options) {
    const std::size_t t = form.arity();
    if (cell_values.size() != t) throw DomainError("expected one step function per variable");
    for (const auto& v : cell_values)
        if (v.size() != static_cast<std::size_t>(resolution)) throw DomainError("cell values do not match the resolution");
    const std::int64_t ct = form.coeffs().back();
    const std::int64_t fine = resolution * std::abs(ct);
    check_cap(fine, options);

    std::vector<double> dist(static_cast<std::size_t>(fine), 0.0);
    dist[0] = 1.0;
    std::vector<std::int64_t> d;
    for (std::size_t i = 0; i + 1 < t; ++i) {
        d.push_back(-form[i]);
        std::vector<double> next(dist.size(), 0.0);
        for (std::int64_t k = 0; k < fine; ++k) {
            double w = cell_values[i][static_cast<std::size_t>(preimage_source(k, ct, resolution))];
            if (w == 0.0) continue;
            for (std::size_t y = 0; y < dist.size(); ++y) {
                if (dist[y] == 0.0) continue;
                next[static_cast<std::size_t>(mod_floor(static_cast<std::int64_t>(y) + d.back() * k, fine))] += dist[y] * w;
            }
        }
        dist = std::move(next);
    }
    const auto& table = eulerian_weights(d);
    const std::int64_t factor = fine / resolution;
    double total = 0.0;
    for (std::size_t k = 0; k < table.weights.size(); ++k) {
        const std::int64_t m = table.first_index + static_cast<std::int64_t>(k);
        double acc = 0.0;
        for (std::size_t y = 0; y < dist.size(); ++y) {
            if (dist[y] == 0.0) continue;
            std::int64_t cell = mod_floor(static_cast<std::int64_t>(y) + m, fine) / factor;
            acc += dist[y] * cell_values[t - 1][static_cast<std::size_t>(cell)];
        }
        total += table.weights[k].get_d() * acc;
    }
    return total / std::pow(static_cast<double>(fine), static_cast<double>(t - 1));
}

EulerianIdentity eulerian_identity_check(const LinearForm& form, std::span<const GridSet> sets,
                                         const GridOptions& options) {
    const std::size_t t = form.arity();
    if (form != ones_form(t)) throw DomainError("the Eulerian identity is stated for x1+...+x(t-1)-xt");
    if (sets.size() != t) throw DomainError("expected one grid set per variable");
    const std::int64_t n = common_resolution(sets, options);

    EulerianIdentity out;
    out.lhs = solution_measure_grid(form, sets, options);

    std::vector<CyclicSet> discrete;
    for (const auto& s : sets) discrete.push_back(refine_to(s, n).as_cyclic());
    const CyclicSet last = discrete.back();
    Rational acc = 0;
    for (std::int64_t r = 0; r + 2 <= static_cast<std::int64_t>(t); ++r) {
        discrete.back() = last.shifted(-r);
        acc += Rational(eulerian_number(static_cast<std::int64_t>(t) - 1, r)) *
               solution_measure_convolution(form, discrete);
    }
    BigInt fact = 1;
    for (std::size_t k = 2; k < t; ++k) fact *= static_cast<unsigned long>(k);
    out.rhs = acc / Rational(fact);
    return out;
}

// ---------------------------------------------------------------------------
// Pointwise freeness on T

namespace {

struct SignSums {
    std::int64_t negative = 0;  // sum of negative coefficients
    std::int64_t positive = 0;  // sum of positive coefficients
};

std::vector<std::vector<std::uint8_t>> sumset_layers(const LinearForm& form, std::int64_t n,
                                                     const std::vector<std::vector<std::int64_t>>& members) {
    const std::size_t t = form.arity();
    std::vector<std::vector<std::uint8_t>> layers(t + 1, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
    layers[0][0] = 1;
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t y = 0; y < layers[k].size(); ++y) {
            if (!layers[k][y]) continue;
            for (auto a : members[k])
                layers[k + 1][static_cast<std::size_t>(mod_floor(static_cast<std::int64_t>(y) + form[k] * a, n))] = 1;
        }
    return layers;
}

std::vector<std::int64_t> backtrack(const LinearForm& form, std::int64_t n,
                                    const std::vector<std::vector<std::uint8_t>>& layers,
                                    const std::vector<std::vector<std::int64_t>>& members, std::int64_t target) {
    std::vector<std::int64_t> cells(form.arity(), 0);
    for (std::size_t k = form.arity(); k-- > 0;)
        for (auto a : members[k]) {
            std::int64_t rest = mod_floor(target - form[k] * a, n);
            if (layers[k][static_cast<std::size_t>(rest)]) {
                cells[k] = a;
                target = rest;
                break;
            }
        }
    return cells;
}

// Offsets v in [0,1) (open coordinates strictly inside) with sum c_i v_i = m.
std::vector<Rational> offsets_for(const LinearForm& form, const std::vector<bool>& is_open, std::int64_t m) {
    std::vector<Rational> v(form.arity(), Rational(0));
    SignSums sums;
    for (std::size_t i = 0; i < form.arity(); ++i) {
        if (!is_open[i]) continue;
        if (form[i] > 0) sums.positive += form[i];
        else sums.negative += form[i];
    }
    if (sums.positive == 0 && sums.negative == 0) return v;
    Rational lambda;
    if (sums.negative == 0) lambda = make_rational(m, sums.positive);
    else if (sums.positive == 0) lambda = make_rational(m, sums.negative);
    else lambda = make_rational(m - sums.negative, sums.positive - sums.negative);
    for (std::size_t i = 0; i < form.arity(); ++i) {
        if (!is_open[i]) continue;
        bool mixed = sums.positive != 0 && sums.negative != 0;
        v[i] = (mixed && form[i] < 0) ? Rational(1 - lambda) : lambda;
    }
    return v;
}

GridFreeCheck make_witness(const LinearForm& form, std::int64_t n, std::vector<std::int64_t> cells,
                           const std::vector<bool>& is_open, std::int64_t m) {
    GridFreeCheck out;
    out.free = false;
    out.resolution = n;
    auto v = offsets_for(form, is_open, m);
    for (std::size_t i = 0; i < cells.size(); ++i) out.witness_point.push_back((Rational(cells[i]) + v[i]) / n);
    out.witness_cells = std::move(cells);
    return out;
}

}  // namespace

namespace detail {

GridFreeCheck is_free_grid_by_classes(const LinearForm& form, std::int64_t resolution,
                                      std::span<const CyclicSet> open_cells, std::span<const CyclicSet> points) {
    const std::size_t t = form.arity();
    if (open_cells.size() != t || points.size() != t) throw DomainError("expected one class pair per variable");
    if (t > 20) throw DomainError("too many variables for class enumeration");
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < t; ++i) counts.push_back(open_cells[i].size());
    const std::uint64_t covered = saturating_product(counts);

    for (std::size_t pattern = 0; pattern < (std::size_t{1} << t); ++pattern) {
        std::vector<bool> is_open(t);
        std::vector<std::vector<std::int64_t>> members(t);
        SignSums sums;
        bool any_open = false, empty = false;
        for (std::size_t i = 0; i < t; ++i) {
            is_open[i] = (pattern >> i & 1U) == 0;
            members[i] = is_open[i] ? open_cells[i].members() : points[i].members();
            empty = empty || members[i].empty();
            if (is_open[i]) {
                any_open = true;
                if (form[i] > 0) sums.positive += form[i];
                else sums.negative += form[i];
            }
        }
        if (empty) continue;
        auto layers = sumset_layers(form, resolution, members);
        std::int64_t lo = any_open ? sums.negative + 1 : 0;
        std::int64_t hi = any_open ? sums.positive - 1 : 0;
        for (std::int64_t m = lo; m <= hi; ++m) {
            std::int64_t target = mod_floor(-m, resolution);
            if (!layers[t][static_cast<std::size_t>(target)]) continue;
            auto out = make_witness(form, resolution, backtrack(form, resolution, layers, members, target), is_open, m);
            out.tuples_covered = covered;
            return out;
        }
    }
    GridFreeCheck out;
    out.resolution = resolution;
    out.tuples_covered = covered;
    return out;
}

}  // namespace detail

GridFreeCheck is_free_grid(const LinearForm& form, std::span<const GridSet> sets, CellSemantics semantics,
                           const GridOptions& options) {
    const std::size_t t = form.arity();
    if (sets.size() != t) throw DomainError("expected one grid set per variable");
    const std::int64_t n = common_resolution(sets, options);
    std::vector<GridSet> refined;
    for (const auto& s : sets) refined.push_back(refine_to(s, n));

    if (semantics == CellSemantics::interior) {
        std::vector<CyclicSet> open, points;
        for (const auto& s : refined) {
            open.push_back(s.as_cyclic());
            CyclicSet p(n);
            for (auto j : s.cells())
                if (s.contains_cell(j - 1)) p.insert(j);
            points.push_back(std::move(p));
        }
        return detail::is_free_grid_by_classes(form, n, open, points);
    }

    // Half-open cells: the offsets v range over [0,1)^t, so sum c_i v_i attains the
    // integers strictly between the negative and positive coefficient sums, plus 0
    // when all coefficients share a sign.
    SignSums sums;
    for (auto c : form.coeffs()) (c > 0 ? sums.positive : sums.negative) += c;
    std::int64_t lo = sums.negative + 1, hi = sums.positive - 1;
    if (sums.negative == 0) lo = 0;
    if (sums.positive == 0) hi = 0;

    std::vector<std::vector<std::int64_t>> members;
    std::vector<std::uint64_t> counts;
    for (const auto& s : refined) {
        members.push_back(s.cells());
        counts.push_back(members.back().size());
    }
    GridFreeCheck out;
    out.resolution = n;
    out.tuples_covered = saturating_product(counts);
    for (const auto& mem : members)
        if (mem.empty()) return out;
    auto layers = sumset_layers(form, n, members);
    for (std::int64_t m = lo; m <= hi; ++m) {
        std::int64_t target = mod_floor(-m, n);
        if (!layers[t][static_cast<std::size_t>(target)]) continue;
        std::vector<bool> is_open(t, true);
        auto w = make_witness(form, n, backtrack(form, n, layers, members, target), is_open, m);
        w.tuples_covered = out.tuples_covered;
        return w;
    }
    return out;
}

GridFreeCheck is_free_grid(const FormFamily& family, const GridSet& set, CellSemantics semantics,
                           const GridOptions& options) {
    GridFreeCheck total;
    total.resolution = set.resolution();
    for (std::size_t i = 0; i < family.size(); ++i) {
        std::vector<GridSet> sets(family[i].arity(), set);
        auto check = is_free_grid(family[i], sets, semantics, options);
        if (!check.free) {
            check.form_index = i;
            return check;
        }
        total.tuples_covered += check.tuples_covered;
    }
    return total;
}

// ---------------------------------------------------------------------------
// U^2 norm of step functions

namespace {

// w[r] = sum over |k| <= K n, k = r mod n, of sinc^4(pi k / n)
const std::vector<double>& sinc4_weights(std::int64_t n, std::int64_t K) {
    static std::mutex mutex;
    static std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(n, K);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    w[0] = 1.0;
    const double pi = std::numbers::pi;
    for (std::int64_t k = 1; k <= K * n; ++k) {
        if (k % n == 0) continue;
        double x = pi * static_cast<double>(k) / static_cast<double>(n);
        double s = std::sin(x) / x;
        double s4 = s * s * s * s;
        w[static_cast<std::size_t>(k % n)] += s4;
        w[static_cast<std::size_t>(mod_floor(-k, n))] += s4;
    }
    return cache.emplace(key, std::move(w)).first->second;
}

}  // namespace

double u2_norm_step(std::span<const double> cell_values, double tol) {
    if (!(tol > 0)) throw DomainError("tolerance must be positive");
    const auto n = static_cast<std::int64_t>(cell_values.size());
    auto coeffs = dft_values(cell_values);
    double dmax = 0;
    for (const auto& z : coeffs) dmax = std::max(dmax, std::abs(z));
    if (dmax == 0) return 0.0;
    // sum_{|k| > K n} |f^(k)|^4 <= 2 dmax^4 n / (3 pi^4 K^3)
    const double pi4 = std::pow(std::numbers::pi, 4);
    double k_real = std::cbrt(2.0 * std::pow(dmax, 4) * static_cast<double>(n) / (3.0 * pi4 * tol));
    auto K = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k_real)));
    // round up to a power of two so repeated calls share cached weights
    std::int64_t K2 = 1;
    while (K2 < K) K2 <<= 1;
    const auto& w = sinc4_weights(n, K2);
    double s = 0;
    for (std::size_t r = 0; r < coeffs.size(); ++r) {
        double a = std::norm(coeffs[r]);
        s += a * a * w[r];
    }
    return std::pow(s, 0.25);
}

double u2_norm_grid(const GridFunction& f, double tol) {
    auto v = f.to_doubles();
    return u2_norm_step(v, tol);
}

double l2_norm_step(std::span<const double> cell_values) { return l2_norm(cell_values); }

void to_json(nlohmann::json& j, const GridSet& set) {
    std::vector<std::int64_t> cells;
    for (auto c : set.cells()) cells.push_back(c + 1);
    j = nlohmann::json{{"N", set.resolution()}, {"cells", cells}};
}

void from_json(const nlohmann::json& j, GridSet& set) {
    auto n = j.at("N").get<std::int64_t>();
    std::vector<std::int64_t> cells;
    for (auto c : j.at("cells").get<std::vector<std::int64_t>>()) {
        if (c < 1 || c > n) throw ParseError("cell number " + std::to_string(c) + " outside 1.." + std::to_string(n));
        cells.push_back(c - 1);
    }
    set = GridSet::from_cells(n, cells);
}

}  // namespace solfree
