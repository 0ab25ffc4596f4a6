#include "solfree/hypergraph.hpp"

#include <algorithm>
#include <numeric>

#include "solfree/error.hpp"

namespace solfree {

void Hypergraph::normalize() {
    for (auto& e : edges) {
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<std::vector<std::size_t>> by_first(vertex_count);
    std::vector<std::vector<std::uint32_t>> kept;
    for (auto& e : edges) {
        bool redundant = false;
        for (auto v : e) {
            for (auto idx : by_first[v]) {
                const auto& f = kept[idx];
                if (std::includes(e.begin(), e.end(), f.begin(), f.end())) {
                    redundant = true;
                    break;
                }
            }
            if (redundant) break;
        }
        if (redundant) continue;
        by_first[e.front()].push_back(kept.size());
        kept.push_back(std::move(e));
    }
    edges = std::move(kept);
}

bool Hypergraph::is_independent(std::span<const std::uint32_t> vertices) const {
    std::vector<std::uint8_t> in(vertex_count, 0);
    for (auto v : vertices) in[v] = 1;
    for (const auto& e : edges)
        if (std::all_of(e.begin(), e.end(), [&](auto v) { return in[v] != 0; })) return false;
    return true;
}

namespace {

// Calls visit(x) for every tuple x in Z/m^t with L(x) = 0 and x_i in members[i].
template <class Visit>
void enumerate_solutions(const LinearForm& form, std::int64_t m, const std::vector<CyclicSet>& sets, Visit visit,
                         std::int64_t target = 0) {
    const std::size_t t = form.arity();
    const std::int64_t ct = mod_floor(form[t - 1], m);
    const std::int64_t g = std::gcd(ct, m);
    const std::int64_t step = m / g;
    const std::int64_t inv = step == 1 ? 0 : mod_inverse(ct / g, step);

    double work = 1;
    for (std::size_t i = 0; i + 1 < t; ++i) work *= static_cast<double>(sets[i].size());
    if (work > 5e7) throw DomainError("solution hypergraph too large to enumerate");

    std::vector<std::vector<std::int64_t>> members;
    for (const auto& s : sets) members.push_back(s.members());
    std::vector<std::int64_t> x(t, 0);
    std::vector<std::size_t> idx(t - 1, 0);
    for (const auto& mem : members)
        if (mem.empty()) return;
    while (true) {
        std::int64_t s = 0;
        for (std::size_t i = 0; i + 1 < t; ++i) {
            x[i] = members[i][idx[i]];
            s = mod_floor(s + mod_floor(form[i], m) * x[i], m);
        }
        std::int64_t rhs = mod_floor(target - s, m);
        if (rhs % g == 0) {
            std::int64_t x0 = step == 1 ? 0 : mod_floor((rhs / g) * inv, step);
            for (std::int64_t k = 0; k < g; ++k) {
                x[t - 1] = x0 + k * step;
                if (sets[t - 1].contains(x[t - 1])) visit(x);
            }
        }
        std::size_t pos = 0;
        while (pos + 1 < t && ++idx[pos] == members[pos].size()) idx[pos++] = 0;
        if (pos + 1 == t) break;
    }
}

}  // namespace

Hypergraph solution_hypergraph(const FormFamily& family, std::int64_t modulus, SolutionFilter filter) {
    if (modulus < 1) throw DomainError("modulus must be positive");
    Hypergraph g;
    g.vertex_count = static_cast<std::size_t>(modulus);
    for (const auto& form : family) {
        std::vector<CyclicSet> sets(form.arity(), CyclicSet::full(modulus));
        enumerate_solutions(form, modulus, sets, [&](const std::vector<std::int64_t>& x) {
            if (filter == SolutionFilter::exclude_constant &&
                std::all_of(x.begin(), x.end(), [&](auto v) { return v == x[0]; }))
                return;
            std::vector<std::uint32_t> e;
            for (auto v : x) e.push_back(static_cast<std::uint32_t>(v));
            g.edges.push_back(std::move(e));
        });
    }
    g.normalize();
    return g;
}

Hypergraph solution_hypergraph(const LinearForm& form, std::span<const CyclicSet> sets) {
    if (sets.size() != form.arity()) throw DomainError("expected one set per variable");
    const std::int64_t m = sets[0].modulus();
    for (const auto& s : sets)
        if (s.modulus() != m) throw DomainError("sets live in different groups");
    Hypergraph g;
    g.vertex_count = static_cast<std::size_t>(m) * sets.size();
    std::vector<CyclicSet> copy(sets.begin(), sets.end());
    enumerate_solutions(form, m, copy, [&](const std::vector<std::int64_t>& x) {
        std::vector<std::uint32_t> e;
        for (std::size_t i = 0; i < x.size(); ++i) e.push_back(static_cast<std::uint32_t>(static_cast<std::int64_t>(i) * m + x[i]));
        g.edges.push_back(std::move(e));
    });
    g.normalize();
    return g;
}

Hypergraph grid_solution_hypergraph(const FormFamily& family, std::int64_t resolution) {
    if (resolution < 1) throw DomainError("resolution must be positive");
    Hypergraph g;
    g.vertex_count = static_cast<std::size_t>(resolution);
    for (const auto& form : family) {
        std::int64_t neg = 0, pos = 0;
        for (auto c : form.coeffs()) (c > 0 ? pos : neg) += c;
        const std::int64_t lo = neg == 0 ? 0 : neg + 1;
        const std::int64_t hi = pos == 0 ? 0 : pos - 1;
        std::vector<CyclicSet> sets(form.arity(), CyclicSet::full(resolution));
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(resolution), 0);
        for (std::int64_t m = lo; m <= hi; ++m) {
            const std::int64_t target = mod_floor(-m, resolution);
            if (seen[static_cast<std::size_t>(target)]) continue;
            seen[static_cast<std::size_t>(target)] = 1;
            enumerate_solutions(
                form, resolution, sets,
                [&](const std::vector<std::int64_t>& x) {
                    std::vector<std::uint32_t> e;
                    for (auto v : x) e.push_back(static_cast<std::uint32_t>(v));
                    g.edges.push_back(std::move(e));
                },
                target);
        }
    }
    g.normalize();
    return g;
}

namespace {

class BranchAndBound {
public:
    BranchAndBound(const Hypergraph& g, const MisOptions& opts) : g_(g), opts_(opts) {
        const std::size_t n = g.vertex_count;
        incident_.resize(n);
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            for (auto v : g.edges[e]) incident_[v].push_back(static_cast<std::uint32_t>(e));
        in_set_.assign(n, 0);
        cand_.assign(n, 1);
        inside_.assign(g.edges.size(), 0);
        used_.assign(n, 0);
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0U);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](auto a, auto b) { return incident_[a].size() > incident_[b].size(); });
        by_size_.resize(g.edges.size());
        std::iota(by_size_.begin(), by_size_.end(), 0U);  // edges are already sorted by size
        best_ = opts.incumbent;
        std::sort(best_.begin(), best_.end());
    }

    MisResult run() {
        MisResult result;
        const std::size_t n = g_.vertex_count;
        for (std::size_t v = 0; v < n; ++v)
            if (!opts_.allowed.empty() && !opts_.allowed[v]) cand_[v] = 0;
        for (const auto& e : g_.edges)
            if (e.size() == 1) cand_[e[0]] = 0;

        std::size_t cur = 0;
        for (auto v : opts_.forced) {
            if (v >= n) throw DomainError("forced vertex out of range");
            if (in_set_[v]) continue;
            if (!cand_[v]) {
                result.vertices = best_;
                result.optimal = true;
                return result;
            }
            cand_[v] = 0;
            std::vector<std::uint32_t> removed;
            include(v, removed);
            ++cur;
        }
        std::size_t count = static_cast<std::size_t>(std::count(cand_.begin(), cand_.end(), std::uint8_t{1}));
        if (!reached_bound()) search(cur, count);
        result.vertices = best_;
        result.improved = improved_;
        result.optimal = !timed_out_;
        result.nodes = nodes_;
        return result;
    }

private:
    bool reached_bound() const { return opts_.upper_bound && best_.size() >= *opts_.upper_bound; }

    // Adds v and removes every candidate that would now complete an edge.
    void include(std::uint32_t v, std::vector<std::uint32_t>& removed) {
        in_set_[v] = 1;
        chosen_.push_back(v);
        for (auto e : incident_[v]) {
            if (++inside_[e] + 1 != g_.edges[e].size()) continue;
            for (auto u : g_.edges[e])
                if (!in_set_[u] && cand_[u]) {
                    cand_[u] = 0;
                    removed.push_back(u);
                }
        }
    }

    void exclude(std::uint32_t v, const std::vector<std::uint32_t>& removed) {
        for (auto u : removed) cand_[u] = 1;
        for (auto e : incident_[v]) --inside_[e];
        in_set_[v] = 0;
        chosen_.pop_back();
    }

    // Disjoint edges whose uncovered vertices are all candidates each cost one candidate.
    std::size_t packing() {
        std::size_t packed = 0;
        std::vector<std::uint32_t> touched;
        for (auto e : by_size_) {
            const auto& edge = g_.edges[e];
            bool live = true;
            std::size_t residual = 0;
            for (auto u : edge) {
                if (in_set_[u]) continue;
                if (!cand_[u] || used_[u]) {
                    live = false;
                    break;
                }
                ++residual;
            }
            if (!live || residual < 2) continue;
            for (auto u : edge)
                if (!in_set_[u]) {
                    used_[u] = 1;
                    touched.push_back(u);
                }
            ++packed;
        }
        for (auto u : touched) used_[u] = 0;
        return packed;
    }

    void search(std::size_t cur, std::size_t count) {
        if (timed_out_ || reached_bound()) return;
        if ((++nodes_ & 1023U) == 0 && opts_.deadline && std::chrono::steady_clock::now() > *opts_.deadline) {
            timed_out_ = true;
            return;
        }
        if (cur > best_.size()) {
            best_ = chosen_;
            std::sort(best_.begin(), best_.end());
            improved_ = true;
            if (reached_bound()) return;
        }
        if (count == 0) return;
        if (cur + count <= best_.size()) return;
        if (cur + count - packing() <= best_.size()) return;

        std::uint32_t v = 0;
        for (auto u : order_)
            if (cand_[u]) {
                v = u;
                break;
            }
        cand_[v] = 0;
        std::vector<std::uint32_t> removed;
        include(v, removed);
        search(cur + 1, count - 1 - removed.size());
        exclude(v, removed);
        search(cur, count - 1);
        cand_[v] = 1;
    }

    const Hypergraph& g_;
    const MisOptions& opts_;
    std::vector<std::vector<std::uint32_t>> incident_;
    std::vector<std::uint8_t> in_set_, cand_, used_;
    std::vector<std::uint32_t> inside_;
    std::vector<std::uint32_t> order_, by_size_;
    std::vector<std::uint32_t> chosen_, best_;
    std::uint64_t nodes_ = 0;
    bool timed_out_ = false;
    bool improved_ = false;
};

}  // namespace

MisResult maximum_independent_set(const Hypergraph& graph, const MisOptions& options) {
    if (!options.allowed.empty() && options.allowed.size() != graph.vertex_count)
        throw DomainError("allowed mask has the wrong length");
    if (!graph.is_independent(options.incumbent)) throw DomainError("incumbent is not independent");
    BranchAndBound bb(graph, options);
    return bb.run();
}

}  // namespace solfree
