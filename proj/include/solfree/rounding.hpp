#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "solfree/cyclic.hpp"
#include "solfree/forms.hpp"
#include "solfree/torus.hpp"

namespace solfree {

struct RoundingOptions {
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    bool keep_draws = false;  ///< also return every trial's set
};

struct CyclicRounding {
    CyclicSet set;
    double u2_distance = 0;  ///< ||f - 1_A||_{U^2}
    std::size_t best_trial = 0;
    std::vector<double> trial_distances;
    std::vector<CyclicSet> draws;
};

struct GridRounding {
    GridSet set;
    double u2_distance = 0;
    std::size_t best_trial = 0;
    std::vector<double> trial_distances;
    std::vector<GridSet> draws;
};

/// Best of independent Bernoulli roundings, x kept with probability f(x).
/// Trial i draws from a generator seeded by (seed, i).
CyclicRounding round_to_set(const CyclicFunction& f, const RoundingOptions& options = {});
/// Same with whole cells as the Bernoulli units.
GridRounding round_to_set(const GridFunction& f, const RoundingOptions& options = {});

struct StabilityEntry {
    LinearForm form;
    double t_function = 0;
    double t_set = 0;
    double delta = 0;
    double bound = 0;  ///< t ||f - 1_A||_{U^2}
    bool holds = false;
};

struct StabilityReport {
    double mean_gap = 0;
    double u2_distance = 0;
    bool mean_gap_holds = false;
    std::vector<StabilityEntry> per_form;
    bool all_hold() const;
    nlohmann::json to_json() const;
};

/// |int f - mu(A)| and |T_L(f) - T_L(A)| against the U^2 bounds.
StabilityReport rounding_stability_report(const CyclicFunction& f, const CyclicSet& set, const FormFamily& forms);
StabilityReport rounding_stability_report(const GridFunction& f, const GridSet& set, const FormFamily& forms);

}  // namespace solfree
