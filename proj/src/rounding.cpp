#include "solfree/rounding.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "solfree/error.hpp"

namespace solfree {

namespace {

constexpr double kSlack = 1e-12;

std::mt19937_64 trial_engine(std::uint64_t seed, std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(seq);
}

// Uniform in [0,1) from the top 53 bits, identical on every platform.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class Result, class MakeSet>
Result best_of(const std::vector<double>& p, const RoundingOptions& options, MakeSet make_set,
               double (*distance)(std::span<const double>)) {
    if (options.trials < 1) throw DomainError("at least one trial is required");
    Result out;
    out.u2_distance = std::numeric_limits<double>::infinity();
    std::vector<double> diff(p.size());
    std::vector<std::uint8_t> bits(p.size());
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        auto rng = trial_engine(options.seed, trial);
        for (std::size_t x = 0; x < p.size(); ++x) {
            bits[x] = uniform(rng) < p[x] ? 1 : 0;
            diff[x] = p[x] - bits[x];
        }
        const double d = distance(diff);
        out.trial_distances.push_back(d);
        auto set = make_set(bits);
        if (options.keep_draws) out.draws.push_back(set);
        if (d < out.u2_distance) {
            out.u2_distance = d;
            out.best_trial = trial;
            out.set = std::move(set);
        }
    }
    return out;
}

double cyclic_distance(std::span<const double> v) { return u2_norm(v); }
double grid_distance(std::span<const double> v) { return u2_norm_step(v); }

std::vector<std::int64_t> members_of(const std::vector<std::uint8_t>& bits) {
    std::vector<std::int64_t> out;
    for (std::size_t x = 0; x < bits.size(); ++x)
        if (bits[x]) out.push_back(static_cast<std::int64_t>(x));
    return out;
}

}  // namespace

CyclicRounding round_to_set(const CyclicFunction& f, const RoundingOptions& options) {
    const auto p = f.to_doubles();
    return best_of<CyclicRounding>(
        p, options, [&](const auto& bits) { return CyclicSet::from_members(f.modulus(), members_of(bits)); },
        cyclic_distance);
}

GridRounding round_to_set(const GridFunction& f, const RoundingOptions& options) {
    const auto p = f.to_doubles();
    return best_of<GridRounding>(
        p, options, [&](const auto& bits) { return GridSet::from_cells(f.resolution(), members_of(bits)); },
        grid_distance);
}

bool StabilityReport::all_hold() const {
    if (!mean_gap_holds) return false;
    for (const auto& e : per_form)
        if (!e.holds) return false;
    return true;
}

nlohmann::json StabilityReport::to_json() const {
    nlohmann::json forms = nlohmann::json::array();
    for (const auto& e : per_form)
        forms.push_back({{"form", e.form}, {"T_source", e.t_function}, {"T_target", e.t_set}, {"delta", e.delta},
                         {"bound", e.bound}, {"holds", e.holds}});
    return {{"mean_gap", mean_gap}, {"u2_distance", u2_distance}, {"mean_gap_holds", mean_gap_holds},
            {"per_form", forms}, {"bounds_flag", !all_hold()}};
}

namespace {

StabilityReport start_report(const std::vector<double>& f, const std::vector<double>& a, bool grid) {
    StabilityReport r;
    std::vector<double> diff(f.size());
    double gap = 0;
    for (std::size_t x = 0; x < f.size(); ++x) {
        diff[x] = f[x] - a[x];
        gap += diff[x];
    }
    r.mean_gap = std::abs(gap / static_cast<double>(f.size()));
    r.u2_distance = grid ? u2_norm_step(diff) : u2_norm(diff);
    r.mean_gap_holds = r.mean_gap <= r.u2_distance + kSlack;
    return r;
}

void add_entry(StabilityReport& r, const LinearForm& form, double tf, double ta) {
    StabilityEntry e;
    e.form = form;
    e.t_function = tf;
    e.t_set = ta;
    e.delta = std::abs(tf - ta);
    e.bound = static_cast<double>(form.arity()) * r.u2_distance;
    e.holds = e.delta <= e.bound + kSlack;
    r.per_form.push_back(e);
}

}  // namespace

StabilityReport rounding_stability_report(const CyclicFunction& f, const CyclicSet& set, const FormFamily& forms) {
    if (f.modulus() != set.modulus()) throw DomainError("function and set live in different groups");
    const auto fv = f.to_doubles();
    const auto av = CyclicFunction::indicator(set).to_doubles();
    auto r = start_report(fv, av, false);
    for (const auto& form : forms) {
        if (!is_admissible(form, f.modulus()))
            throw DomainError("form " + form.to_string() + " is not admissible mod " + std::to_string(f.modulus()));
        std::vector<std::vector<double>> fa(form.arity(), fv), aa(form.arity(), av);
        add_entry(r, form, solution_measure_approx(form, f.modulus(), fa), solution_measure_approx(form, f.modulus(), aa));
    }
    return r;
}

StabilityReport rounding_stability_report(const GridFunction& f, const GridSet& set, const FormFamily& forms) {
    if (f.resolution() != set.resolution()) throw DomainError("function and set use different resolutions");
    const auto fv = f.to_doubles();
    const auto av = GridFunction::indicator(set).to_doubles();
    auto r = start_report(fv, av, true);
    for (const auto& form : forms) {
        std::vector<std::vector<double>> fa(form.arity(), fv);
        std::vector<GridSet> sets(form.arity(), set);
        add_entry(r, form, solution_measure_grid_approx(form, f.resolution(), fa),
                  solution_measure_grid(form, sets).get_d());
    }
    return r;
}

}  // namespace solfree
