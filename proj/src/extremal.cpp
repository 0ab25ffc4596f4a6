#include "solfree/extremal.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "solfree/error.hpp"
#include "solfree/hypergraph.hpp"
#include "solfree/transfer.hpp"

namespace solfree {

namespace {

// Add/swap local search for a large independent set of a hypergraph.
class LocalSearch {
public:
    LocalSearch(const Hypergraph& g, std::uint64_t seed) : g_(g), rng_(seed) {
        const std::size_t n = g.vertex_count;
        incident_.resize(n);
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            for (auto v : g.edges[e]) incident_[v].push_back(static_cast<std::uint32_t>(e));
        inside_.assign(g.edges.size(), 0);
        in_.assign(n, 0);
        conf_.assign(n, 0);
        banned_.assign(n, 0);
        tabu_until_.assign(n, 0);
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            if (g.edges[e].size() == 1) banned_[g.edges[e][0]] = 1;
    }

    // Adds v if no edge would be completed.
    bool try_add(std::uint32_t v) {
        if (in_[v] || banned_[v] || conf_[v] != 0) return false;
        add(v);
        return true;
    }

    std::vector<std::uint32_t> run(std::size_t iterations) {
        record();
        const std::size_t n = g_.vertex_count;
        std::vector<std::uint32_t> pool;
        for (std::size_t it = 1; it <= iterations; ++it) {
            pool.clear();
            for (std::uint32_t v = 0; v < n; ++v)
                if (!in_[v] && !banned_[v] && conf_[v] == 0 && tabu_until_[v] < it) pool.push_back(v);
            if (!pool.empty()) {
                add(pool[rng_() % pool.size()]);
            } else {
                for (std::uint32_t v = 0; v < n; ++v)
                    if (!in_[v] && !banned_[v] && tabu_until_[v] < it) pool.push_back(v);
                if (pool.empty()) continue;
                const std::uint32_t v = pool[rng_() % pool.size()];
                for (auto e : incident_[v]) {
                    const auto& edge = g_.edges[e];
                    if (inside_[e] + 1 != edge.size()) continue;
                    std::vector<std::uint32_t> inner;
                    for (auto u : edge)
                        if (u != v && in_[u]) inner.push_back(u);
                    const std::uint32_t u = inner[rng_() % inner.size()];
                    remove(u);
                    tabu_until_[u] = it + 5 + rng_() % 10;
                }
                add(v);
            }
            if (size_ > best_.size()) record();
        }
        std::sort(best_.begin(), best_.end());
        return best_;
    }

private:
    std::uint32_t outside_vertex(std::uint32_t e) const {
        for (auto w : g_.edges[e])
            if (!in_[w]) return w;
        throw std::logic_error("edge has no outside vertex");
    }

    void add(std::uint32_t v) {
        in_[v] = 1;
        ++size_;
        for (auto e : incident_[v])
            if (++inside_[e] + 1 == g_.edges[e].size()) ++conf_[outside_vertex(e)];
    }

    void remove(std::uint32_t v) {
        for (auto e : incident_[v]) {
            if (inside_[e] + 1 == g_.edges[e].size()) --conf_[outside_vertex(e)];
            --inside_[e];
        }
        in_[v] = 0;
        --size_;
    }

    void record() {
        best_.clear();
        for (std::uint32_t v = 0; v < g_.vertex_count; ++v)
            if (in_[v]) best_.push_back(v);
    }

    const Hypergraph& g_;
    std::mt19937_64 rng_;
    std::vector<std::vector<std::uint32_t>> incident_;
    std::vector<std::uint32_t> inside_, conf_;
    std::vector<std::uint8_t> in_, banned_;
    std::vector<std::size_t> tabu_until_;
    std::vector<std::uint32_t> best_;
    std::size_t size_ = 0;
};

std::vector<std::uint32_t> longest_free_run(const Hypergraph& g) {
    std::vector<std::uint32_t> best;
    const auto n = static_cast<std::uint32_t>(g.vertex_count);
    for (std::uint32_t start = 0; start < n; ++start) {
        LocalSearch probe(g, 0);
        std::vector<std::uint32_t> run;
        for (std::uint32_t k = 0; k < n; ++k) {
            const std::uint32_t v = (start + k) % n;
            if (!probe.try_add(v)) break;
            run.push_back(v);
        }
        if (run.size() > best.size()) best = run;
    }
    return best;
}

std::vector<std::uint32_t> heuristic_on(const Hypergraph& g, std::size_t iterations, std::uint64_t seed) {
    LocalSearch search(g, seed);
    for (auto v : longest_free_run(g)) search.try_add(v);
    return search.run(iterations);
}

CyclicSet to_cyclic(std::int64_t m, const std::vector<std::uint32_t>& vs) {
    CyclicSet s(m);
    for (auto v : vs) s.insert(v);
    return s;
}

}  // namespace

std::optional<std::size_t> cauchy_davenport_bound(const FormFamily& family, std::int64_t modulus) {
    if (!is_prime(modulus)) return std::nullopt;
    for (const auto& form : family)
        if (is_schur_form(form)) return static_cast<std::size_t>((modulus + 1) / 3);
    return std::nullopt;
}

HeuristicResult max_free_heuristic(const FormFamily& family, std::int64_t modulus, std::size_t iterations,
                                   std::uint64_t seed, SolutionFilter filter) {
    Hypergraph g = solution_hypergraph(family, modulus, filter);
    auto best = heuristic_on(g, iterations, seed);
    HeuristicResult out{best.size(), to_cyclic(modulus, best)};
    if (!is_free(family, out.witness, filter).free) throw std::logic_error("heuristic produced a set with solutions");
    return out;
}

MaxFreeResult max_free_exact(const FormFamily& family, std::int64_t modulus, const ExactSearchOptions& options) {
    const auto deadline = std::chrono::steady_clock::now() + options.time_limit;
    Hypergraph g = solution_hypergraph(family, modulus, options.filter);
    auto best = heuristic_on(g, options.heuristic_iterations, options.seed);

    MaxFreeResult out;
    out.heuristic_size = best.size();
    if (options.filter == SolutionFilter::all) out.upper_bound = cauchy_davenport_bound(family, modulus);

    bool complete = true;
    if (!out.upper_bound || best.size() < *out.upper_bound) {
        // A free set containing an element of gcd class d can be dilated by a unit
        // so that it contains d itself; classes below d are handled by earlier branches.
        for (std::int64_t d = 1; d <= modulus; ++d) {
            if (modulus % d != 0) continue;
            MisOptions opts;
            opts.deadline = deadline;
            opts.incumbent = best;
            opts.upper_bound = out.upper_bound;
            opts.forced = {static_cast<std::uint32_t>(d % modulus)};
            opts.allowed.assign(g.vertex_count, 0);
            for (std::int64_t x = 0; x < modulus; ++x)
                if (std::gcd(x, modulus) >= d) opts.allowed[static_cast<std::size_t>(x)] = 1;
            auto r = maximum_independent_set(g, opts);
            out.nodes += r.nodes;
            if (r.improved) best = r.vertices;
            if (!r.optimal) {
                complete = false;
                break;
            }
            if (out.upper_bound && best.size() >= *out.upper_bound) break;
        }
    }
    out.size = best.size();
    out.witness = to_cyclic(modulus, best);
    out.optimal = complete;
    if (!is_free(family, out.witness, options.filter).free) throw std::logic_error("search produced a set with solutions");
    return out;
}

namespace {

Rational frac(const Rational& x) {
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return x - Rational(fl);
}

Rational ceil_of(const Rational& x) {
    BigInt c;
    mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return Rational(c);
}

// Smallest-denominator rational in [l, r], smallest value among those.
Rational simplest_in(const Rational& l, const Rational& r) {
    for (long q = 1;; ++q) {
        Rational k = ceil_of(l * q);
        Rational cand = k / q;
        if (cand <= r) return cand;
    }
}

struct Arc {
    Rational left;
    Rational length;  // open arc (left, left + length), length <= 1
    bool contains(const Rational& y) const {
        Rational d = frac(y - left);
        return d > 0 && d < length;
    }
};

}  // namespace

IntervalConstruction torus_interval_construction(const FormFamily& family, const GridOptions& options) {
    std::int64_t s = 0;
    for (const auto& form : family) {
        if (is_invariant(form))
            throw DomainError("form " + form.to_string() + " is translation-invariant; the interval construction needs sum c_i != 0");
        s += weight_s(form);
    }
    // y is excluded when sigma y lies within s_L/2s of an integer
    std::vector<Arc> arcs;
    for (const auto& form : family) {
        const std::int64_t a = std::abs(form.coefficient_sum());
        const Rational w = make_rational(weight_s(form), 2 * s);
        for (std::int64_t j = 0; j < a; ++j) arcs.push_back({frac(Rational((j - w) / a)), Rational(2 * w / a)});
    }
    std::set<Rational> cuts{Rational(0)};
    for (const auto& arc : arcs) {
        cuts.insert(arc.left);
        cuts.insert(frac(arc.left + arc.length));
    }
    auto allowed = [&](const Rational& y) {
        return std::none_of(arcs.begin(), arcs.end(), [&](const Arc& arc) { return arc.contains(y); });
    };
    std::vector<Rational> pts(cuts.begin(), cuts.end());
    std::optional<Rational> best;
    auto offer = [&](const Rational& y) {
        Rational v = frac(y);
        if (!best || v.get_den() < best->get_den() || (v.get_den() == best->get_den() && v < *best)) best = v;
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Rational lo = pts[i];
        const Rational hi = i + 1 < pts.size() ? pts[i + 1] : pts[0] + 1;
        if (allowed(Rational((lo + hi) / 2))) {
            offer(simplest_in(lo, hi));
        } else if (allowed(lo)) {
            offer(lo);
        }
    }
    if (!best) throw DomainError("no admissible translate found");

    IntervalConstruction out;
    out.translate = *best;
    out.density = make_rational(1, s);
    const Rational centre = frac(-out.translate);
    out.left = centre - make_rational(1, 2 * s);
    out.right = centre + make_rational(1, 2 * s);
    out.witness = GridSet::from_interval(out.left, out.right);
    if (out.witness.measure() != out.density) throw std::logic_error("interval witness has the wrong measure");

    out.certificate = is_free_grid(family, out.witness, CellSemantics::half_open, options);
    if (!out.certificate.free) {
        out.semantics = CellSemantics::interior;
        out.certificate = is_free_grid(family, out.witness, CellSemantics::interior, options);
        if (!out.certificate.free) throw std::logic_error("interval construction failed its certificate");
    }
    return out;
}

GridMaxFree torus_max_free_grid(const FormFamily& family, std::int64_t resolution, SearchMethod method,
                                std::uint64_t seed, std::chrono::milliseconds time_limit) {
    if (method == SearchMethod::exact && resolution > 24)
        throw DomainError("exact grid search is limited to resolution 24");
    Hypergraph g = grid_solution_hypergraph(family, resolution);
    auto best = heuristic_on(g, 20000, seed);
    GridMaxFree out;
    if (method == SearchMethod::exact) {
        MisOptions opts;
        opts.deadline = std::chrono::steady_clock::now() + time_limit;
        opts.incumbent = best;
        auto r = maximum_independent_set(g, opts);
        best = r.vertices;
        out.optimal = r.optimal;
    }
    std::vector<std::int64_t> cells(best.begin(), best.end());
    out.witness = GridSet::from_cells(resolution, cells);
    out.density = out.witness.measure();
    if (!is_free_grid(family, out.witness).free) throw std::logic_error("grid search produced a set with solutions");
    return out;
}

CyclicSet discretize_interval(const IntervalConstruction& construction, std::int64_t p) {
    CyclicSet out(p);
    const Rational length = construction.right - construction.left;
    for (std::int64_t x = 0; x < p; ++x) {
        Rational d = frac(make_rational(x, p) - construction.left);
        bool in = construction.semantics == CellSemantics::half_open ? d < length : (d > 0 && d < length);
        if (in) out.insert(x);
    }
    return out;
}

ConvergenceTable convergence_experiment(const FormFamily& family, const std::vector<std::int64_t>& primes,
                                        const ConvergenceConfig& config) {
    ConvergenceTable table;
    table.family = family;

    std::optional<IntervalConstruction> interval;
    if (std::none_of(family.begin(), family.end(), [](const LinearForm& f) { return is_invariant(f); })) {
        interval = torus_interval_construction(family);
        table.torus_lb = interval->density;
    }
    if (config.grid_resolution > 0) {
        auto method = config.grid_resolution <= 24 ? SearchMethod::exact : SearchMethod::heuristic;
        auto grid = torus_max_free_grid(family, config.grid_resolution, method, config.seed, config.time_limit_per_prime);
        if (!table.torus_lb || grid.density > *table.torus_lb) table.torus_lb = grid.density;
    }

    table.rows.resize(primes.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < primes.size(); i = next++) {
            try {
                const auto start = std::chrono::steady_clock::now();
                const std::int64_t p = primes[i];
                ExactSearchOptions opts;
                opts.time_limit = config.time_limit_per_prime;
                opts.filter = config.filter;
                opts.heuristic_iterations = config.heuristic_iterations;
                opts.seed = config.seed;
                auto r = max_free_exact(family, p, opts);
                ConvergenceRow& row = table.rows[i];
                row.p = p;
                row.density = make_rational(static_cast<std::int64_t>(r.size), p);
                row.exact = r.optimal;
                row.lower_heuristic = r.heuristic_size;
                row.upper_bound = r.upper_bound;
                row.torus_lb = table.torus_lb;
                if (interval) {
                    CyclicSet a = discretize_interval(*interval, p);
                    if (is_free(family, a, config.filter).free) row.discretized = a.density();
                }
                row.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(primes.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

std::string ConvergenceTable::to_csv() const {
    std::ostringstream os;
    os << "p,density_num,density_den,exact,lower_heuristic,upper_bound,torus_lb_num,torus_lb_den,elapsed_ms,"
          "discretized_num,discretized_den\n";
    for (const auto& r : rows) {
        os << r.p << ',' << r.density.get_num() << ',' << r.density.get_den() << ',' << (r.exact ? "true" : "false") << ','
           << r.lower_heuristic << ',';
        if (r.upper_bound) os << *r.upper_bound;
        os << ',';
        if (r.torus_lb) os << r.torus_lb->get_num() << ',' << r.torus_lb->get_den();
        else os << ',';
        os << ',' << r.elapsed_ms << ',';
        if (r.discretized) os << r.discretized->get_num() << ',' << r.discretized->get_den();
        else os << ',';
        os << '\n';
    }
    return os.str();
}

std::string ConvergenceTable::to_svg() const {
    const double width = 640, height = 400, margin = 50;
    double pmin = 0, pmax = 1, ymax = 0.5;
    if (!rows.empty()) {
        pmin = static_cast<double>(rows.front().p);
        pmax = static_cast<double>(rows.front().p);
        for (const auto& r : rows) {
            pmin = std::min(pmin, static_cast<double>(r.p));
            pmax = std::max(pmax, static_cast<double>(r.p));
            ymax = std::max(ymax, r.density.get_d());
        }
    }
    if (torus_lb) ymax = std::max(ymax, torus_lb->get_d());
    ymax = std::ceil(ymax * 10 + 0.5) / 10;
    if (pmax == pmin) pmax = pmin + 1;
    auto sx = [&](double p) { return margin + (p - pmin) / (pmax - pmin) * (width - 2 * margin); };
    auto sy = [&](double y) { return height - margin - y / ymax * (height - 2 * margin); };

    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << sy(0) << "\" x2=\"" << width - margin << "\" y2=\"" << sy(0)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << sy(0) << "\" x2=\"" << margin << "\" y2=\"" << sy(ymax)
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        double y = ymax * k / 5;
        os << "<text x=\"" << margin - 8 << "\" y=\"" << sy(y) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
           << std::setprecision(2) << y << "</text>\n";
    }
    for (const auto& r : rows)
        os << "<text x=\"" << sx(static_cast<double>(r.p)) << "\" y=\"" << sy(0) + 16
           << "\" font-size=\"11\" text-anchor=\"middle\">" << r.p << "</text>\n";
    if (torus_lb) {
        os << "<line x1=\"" << margin << "\" y1=\"" << sy(torus_lb->get_d()) << "\" x2=\"" << width - margin
           << "\" y2=\"" << sy(torus_lb->get_d()) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
        os << "<text x=\"" << width - margin << "\" y=\"" << sy(torus_lb->get_d()) - 6
           << "\" font-size=\"11\" text-anchor=\"end\">T lower bound " << solfree::to_string(*torus_lb) << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& r : rows) os << sx(static_cast<double>(r.p)) << ',' << sy(r.density.get_d()) << ' ';
    os << "\"/>\n";
    for (const auto& r : rows)
        os << "<circle cx=\"" << sx(static_cast<double>(r.p)) << "\" cy=\"" << sy(r.density.get_d())
           << "\" r=\"3\" fill=\"" << (r.exact ? "steelblue" : "orange") << "\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12 << "\" font-size=\"12\" text-anchor=\"middle\">p</text>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">max F-free density in Z/p</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::vector<OddResidueRow> odd_residue_demo(const std::vector<std::int64_t>& primes) {
    const FormFamily sum_free({LinearForm({1, 1, -1})});
    std::vector<OddResidueRow> rows;
    for (auto p : primes) {
        OddResidueRow row;
        row.p = p;
        row.modulus = 2 * p;
        CyclicSet odd = odd_residues(row.modulus);
        row.density = odd.density();
        row.sum_free = is_free(sum_free, odd).free;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace solfree
