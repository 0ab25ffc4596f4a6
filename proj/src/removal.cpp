#include "solfree/removal.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "solfree/error.hpp"
#include "solfree/hypergraph.hpp"

namespace solfree {

std::size_t GreedyRemoval::total() const {
    std::size_t n = 0;
    for (const auto& r : removed) n += r.size();
    return n;
}

namespace {

using Count = unsigned __int128;

std::vector<Count> add_coordinate(const std::vector<Count>& dist, std::int64_t c, const std::vector<std::int64_t>& members,
                                  std::int64_t m) {
    std::vector<Count> next(dist.size(), 0);
    for (std::size_t y = 0; y < dist.size(); ++y) {
        if (dist[y] == 0) continue;
        for (auto x : members) next[static_cast<std::size_t>(mod_floor(static_cast<std::int64_t>(y) + c * x, m))] += dist[y];
    }
    return next;
}

// Adds to incidence[base][x] the number of solutions through each coordinate value;
// returns the number of solutions.
Count accumulate_incidence(const RemovalConstraint& con, const std::vector<CyclicSet>& bases, std::int64_t m,
                           std::vector<std::vector<Count>>& incidence) {
    const std::size_t t = con.form.arity();
    std::vector<std::vector<std::int64_t>> members(t);
    for (std::size_t i = 0; i < t; ++i) members[i] = bases[con.base[i]].shifted(-con.shift[i]).members();

    std::vector<Count> unit(static_cast<std::size_t>(m), 0);
    unit[0] = 1;
    std::vector<std::vector<Count>> prefix(t + 1), suffix(t + 1);
    prefix[0] = unit;
    for (std::size_t i = 0; i < t; ++i) prefix[i + 1] = add_coordinate(prefix[i], con.form[i], members[i], m);
    suffix[t] = unit;
    for (std::size_t i = t; i-- > 0;) suffix[i] = add_coordinate(suffix[i + 1], con.form[i], members[i], m);

    const Count total = prefix[t][0];
    if (total == 0) return 0;
    for (std::size_t i = 0; i < t; ++i) {
        for (auto y : members[i]) {
            const std::int64_t need = mod_floor(-con.form[i] * y, m);
            Count through = 0;
            for (std::int64_t a = 0; a < m; ++a) {
                const Count left = prefix[i][static_cast<std::size_t>(a)];
                if (left == 0) continue;
                through += left * suffix[i + 1][static_cast<std::size_t>(mod_floor(need - a, m))];
            }
            incidence[con.base[i]][static_cast<std::size_t>(mod_floor(y + con.shift[i], m))] += through;
        }
    }
    return total;
}

}  // namespace

GreedyRemoval greedy_removal(std::span<const CyclicSet> bases, std::span<const RemovalConstraint> constraints) {
    if (bases.empty()) throw DomainError("no base sets");
    const std::int64_t m = bases[0].modulus();
    for (const auto& b : bases)
        if (b.modulus() != m) throw DomainError("base sets live in different cyclic groups");
    for (const auto& c : constraints) {
        if (c.base.size() != c.form.arity() || c.shift.size() != c.form.arity())
            throw DomainError("constraint layout does not match its form");
        for (auto b : c.base)
            if (b >= bases.size()) throw DomainError("constraint refers to a missing base set");
    }

    std::vector<CyclicSet> current(bases.begin(), bases.end());
    GreedyRemoval out;
    for (const auto& b : bases) out.removed.emplace_back(b.modulus());

    while (true) {
        std::vector<std::vector<Count>> incidence(current.size(), std::vector<Count>(static_cast<std::size_t>(m), 0));
        Count solutions = 0;
        for (const auto& con : constraints) solutions += accumulate_incidence(con, current, m, incidence);
        if (solutions == 0) break;

        Count best = 0;
        std::size_t best_base = 0;
        std::int64_t best_x = -1;
        for (std::int64_t x = 0; x < m; ++x)
            for (std::size_t j = 0; j < current.size(); ++j)
                if (incidence[j][static_cast<std::size_t>(x)] > best) {
                    best = incidence[j][static_cast<std::size_t>(x)];
                    best_base = j;
                    best_x = x;
                }
        current[best_base].erase(best_x);
        out.removed[best_base].insert(best_x);
        ++out.rounds;
    }
    return out;
}

GreedyRemoval greedy_removal_cyclic(const LinearForm& form, std::span<const CyclicSet> sets) {
    const std::size_t t = form.arity();
    if (sets.size() != 1 && sets.size() != t) throw DomainError("expected one set or one set per variable");
    const std::int64_t m = sets[0].modulus();
    if (!is_admissible(form, m)) throw DomainError("form " + form.to_string() + " is not admissible mod " + std::to_string(m));
    RemovalConstraint con{form, std::vector<std::size_t>(t, 0), std::vector<std::int64_t>(t, 0)};
    if (sets.size() == t)
        for (std::size_t i = 0; i < t; ++i) con.base[i] = i;
    return greedy_removal(sets, std::span<const RemovalConstraint>(&con, 1));
}

ExactRemoval exact_min_removal(const LinearForm& form, std::span<const CyclicSet> sets) {
    const std::size_t t = form.arity();
    if (sets.size() != 1 && sets.size() != t) throw DomainError("expected one set or one set per variable");
    const std::int64_t m = sets[0].modulus();
    if (m > 20) throw DomainError("exact removal is limited to moduli up to 20");

    ExactRemoval out;
    MisOptions opts;
    if (sets.size() == 1) {
        Hypergraph g = solution_hypergraph(FormFamily({form}), m);
        opts.allowed.assign(g.vertex_count, 0);
        for (auto x : sets[0].members()) opts.allowed[static_cast<std::size_t>(x)] = 1;
        auto mis = maximum_independent_set(g, opts);
        CyclicSet kept = CyclicSet::from_members(m, std::vector<std::int64_t>(mis.vertices.begin(), mis.vertices.end()));
        out.removed.push_back(sets[0].minus(kept));
        out.size = out.removed[0].size();
        return out;
    }
    Hypergraph g = solution_hypergraph(form, sets);
    opts.allowed.assign(g.vertex_count, 0);
    for (std::size_t i = 0; i < t; ++i)
        for (auto x : sets[i].members()) opts.allowed[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(x)] = 1;
    auto mis = maximum_independent_set(g, opts);
    std::vector<CyclicSet> kept(t, CyclicSet(m));
    for (auto v : mis.vertices) kept[v / static_cast<std::size_t>(m)].insert(static_cast<std::int64_t>(v % static_cast<std::size_t>(m)));
    for (std::size_t i = 0; i < t; ++i) {
        out.removed.push_back(sets[i].minus(kept[i]));
        out.size += out.removed.back().size();
    }
    return out;
}

LiftedRemoval lift_removal_to_torus(std::span<const GridSet> sets, std::span<const std::vector<CyclicSet>> per_shift) {
    const std::size_t t = sets.size();
    if (t < 3) throw DomainError("lifting needs at least three variables");
    if (per_shift.size() != t - 1) throw DomainError("expected removals for shifts 0.." + std::to_string(t - 2));
    std::int64_t n = 1;
    for (const auto& s : sets) n = std::lcm(n, s.resolution());
    const LinearForm ones = ones_form(t);

    std::vector<CyclicSet> base, removal(t, CyclicSet(n));
    for (const auto& s : sets) base.push_back(refine_to(s, n).as_cyclic());
    for (const auto& shift : per_shift) {
        if (shift.size() != t) throw DomainError("expected one removal set per variable");
        for (std::size_t i = 0; i < t; ++i) {
            if (shift[i].modulus() != n) throw DomainError("removal sets must live in Z/" + std::to_string(n));
            for (auto x : shift[i].members()) removal[i].insert(x);
        }
    }
    std::vector<CyclicSet> rest;
    for (std::size_t i = 0; i < t; ++i) rest.push_back(base[i].minus(removal[i]));
    const CyclicSet last = rest.back();
    for (std::int64_t r = 0; r + 2 <= static_cast<std::int64_t>(t); ++r) {
        rest.back() = last.shifted(-r);
        if (!is_free(ones, rest).free)
            throw DomainError("shifted instance r=" + std::to_string(r) + " still has solutions after removal");
    }

    LiftedRemoval out;
    std::vector<GridSet> remainders;
    for (std::size_t i = 0; i < t; ++i) {
        out.removed.push_back(GridSet::from_cyclic(removal[i]));
        remainders.push_back(set_difference(sets[i], out.removed.back()));
    }
    auto check = is_free_grid(ones, remainders);
    if (!check.free) throw DomainError("lifted remainder is not free on T");
    out.certified = true;
    out.tuples_checked = check.tuples_covered;
    return out;
}

namespace {

struct Orientation {
    int sign = 1;
    std::size_t pivot = 0;
    std::size_t reflections = std::numeric_limits<std::size_t>::max();
};

Orientation orient(const LinearForm& form) {
    Orientation best;
    for (int s : {1, -1})
        for (std::size_t q = 0; q < form.arity(); ++q) {
            if (s * form[q] >= 0) continue;
            std::size_t refl = 0;
            for (std::size_t i = 0; i < form.arity(); ++i)
                if (i != q && s * form[i] < 0) ++refl;
            if (refl < best.reflections) best = {s, q, refl};
        }
    if (best.reflections == std::numeric_limits<std::size_t>::max()) {
        // all coefficients share a sign: flip and reflect all but the pivot
        best = {form[0] > 0 ? -1 : 1, 0, form.arity() - 1};
    }
    return best;
}

}  // namespace

TorusRemoval removal_on_torus(const LinearForm& form, std::span<const GridSet> sets, const Rational& epsilon,
                              const GridOptions& options) {
    const std::size_t t = form.arity();
    if (t < 3) throw DomainError("removal on T needs at least three variables");
    const bool single = sets.size() == 1;
    if (!single && sets.size() != t) throw DomainError("expected one set or one set per variable");
    std::vector<GridSet> input(t, sets[0]);
    if (!single) input.assign(sets.begin(), sets.end());

    std::int64_t n = 1;
    for (const auto& s : input) n = std::lcm(n, s.resolution());
    if (n > options.resolution_cap) throw DomainError("resolution exceeds the cap");
    for (auto& s : input) s = refine_to(s, n);

    const Orientation o = orient(form);
    TorusRemoval out;
    out.form = form;
    out.resolution = n;
    out.target = epsilon;
    for (std::size_t i = 0; i < t; ++i) out.dilations.push_back(i == o.pivot ? -o.sign * form[i] : o.sign * form[i]);

    // coordinates of the ones-form instance: non-pivots in order, pivot last
    std::vector<std::size_t> perm;
    for (std::size_t i = 0; i < t; ++i)
        if (i != o.pivot) perm.push_back(i);
    perm.push_back(o.pivot);

    std::vector<CyclicSet> bases;
    std::vector<std::size_t> base_of(t);
    std::map<std::int64_t, std::size_t> by_dilation;
    for (std::size_t i = 0; i < t; ++i) {
        if (single) {
            auto [it, inserted] = by_dilation.try_emplace(out.dilations[i], bases.size());
            base_of[i] = it->second;
            if (!inserted) continue;
        } else {
            base_of[i] = bases.size();
        }
        bases.push_back(dilate_image(input[i], out.dilations[i]).as_cyclic());
    }

    // one greedy pass per shift r, each on what the previous passes left
    const LinearForm ones = ones_form(t);
    std::vector<std::vector<CyclicSet>> per_shift;
    std::vector<CyclicSet> current = bases;
    for (std::int64_t r = 0; r + 2 <= static_cast<std::int64_t>(t); ++r) {
        RemovalConstraint con{ones, {}, std::vector<std::int64_t>(t, 0)};
        for (auto i : perm) con.base.push_back(base_of[i]);
        con.shift.back() = r;
        auto g = greedy_removal(current, std::span<const RemovalConstraint>(&con, 1));
        std::vector<CyclicSet> shift_removal;
        for (auto i : perm) shift_removal.push_back(g.removed[base_of[i]]);
        per_shift.push_back(std::move(shift_removal));
        for (std::size_t b = 0; b < current.size(); ++b) current[b] = current[b].minus(g.removed[b]);
    }

    std::vector<GridSet> lift_sets;
    for (auto i : perm) lift_sets.push_back(GridSet::from_cyclic(bases[base_of[i]]));
    auto lifted = lift_removal_to_torus(lift_sets, per_shift);

    // pull back E_i = e_i^{-1} F_i, restricted to A_i
    std::vector<GridSet> removed(t);
    for (std::size_t k = 0; k < t; ++k) {
        const std::size_t i = perm[k];
        GridSet pre = dilation_preimage(lifted.removed[k], out.dilations[i]);
        GridSet a = refine_to(input[i], pre.resolution());
        removed[i] = set_difference(a, set_difference(a, pre));
    }

    auto certify = [&](std::vector<GridSet>& remainders) {
        remainders.clear();
        if (single) {
            GridSet r = input[0];
            for (const auto& e : removed) r = set_difference(r, e);
            remainders.push_back(r);
            return is_free_grid(FormFamily({form}), r, CellSemantics::half_open, options);
        }
        for (std::size_t i = 0; i < t; ++i) remainders.push_back(set_difference(input[i], removed[i]));
        return is_free_grid(form, remainders, CellSemantics::half_open, options);
    };

    auto check = certify(out.remainders);
    const std::size_t repair_limit = 1u << 20;
    while (!check.free && out.repairs < repair_limit) {
        for (std::size_t i = 0; i < t; ++i) {
            GridSet cell = GridSet::from_cells(check.resolution, {check.witness_cells[i]});
            removed[i] = set_union(removed[i], cell);
            if (single) break;
        }
        ++out.repairs;
        check = certify(out.remainders);
    }
    out.removed = std::move(removed);
    out.remainder_free = check.free;
    out.witness_checked = check.tuples_covered;
    if (single) {
        out.removed_measure = input[0].measure() - out.remainders[0].measure();
    } else {
        for (std::size_t i = 0; i < t; ++i) out.removed_measure += input[i].measure() - out.remainders[i].measure();
    }
    return out;
}

nlohmann::json TorusRemoval::certificate() const {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& e : removed) cells.push_back(e);
    return nlohmann::json{{"form", form},
                          {"N", resolution},
                          {"removed_cells", cells},
                          {"removed_measure", to_string(removed_measure)},
                          {"repairs", repairs},
                          {"remainder_free", remainder_free},
                          {"witness_checked", witness_checked}};
}

}  // namespace solfree
