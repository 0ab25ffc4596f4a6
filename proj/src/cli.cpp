#include "solfree/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "solfree/cyclic.hpp"
#include "solfree/error.hpp"
#include "solfree/extremal.hpp"
#include "solfree/forms.hpp"
#include "solfree/removal.hpp"
#include "solfree/rounding.hpp"
#include "solfree/torus.hpp"
#include "solfree/transfer.hpp"

namespace solfree::cli {

namespace {

constexpr const char* kGrammar = R"(set specs:
  members:<list>                residues of Z/p, e.g. members:0,3,5
  cells:<list>                  1-based cells of the grid, e.g. cells:1,2
  interval:<p>/<q>,<r>/<s>      [p/q, r/s) on T, or {x : x/p in [p/q, r/s)} in Z/p
groups:
  --group zp <p> | --group grid <N>
forms:
  linear forms such as "2x1+3x2-2x3"; family files are JSON arrays of coefficient arrays)";

struct Group {
    bool grid = false;
    std::int64_t n = 0;
};

std::int64_t parse_int(const std::string& s, const char* what) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ParseError(std::string("expected an integer for ") + what + ", got '" + s + "'");
    }
    if (pos != s.size()) throw ParseError(std::string("expected an integer for ") + what + ", got '" + s + "'");
    return v;
}

std::vector<std::int64_t> parse_int_list(const std::string& s, const char* what) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_int(item, what));
    return out;
}

Group parse_group(const std::vector<std::string>& g) {
    if (g.size() != 2) throw ParseError("--group takes two values: zp <p> or grid <N>");
    Group out;
    if (g[0] == "zp") out.grid = false;
    else if (g[0] == "grid") out.grid = true;
    else throw ParseError("unknown group '" + g[0] + "', expected zp or grid");
    out.n = parse_int(g[1], "the group size");
    if (out.n < 1) throw ParseError("the group size must be positive");
    return out;
}

// "zp:<p>" or "torus"
Group parse_carrier(const std::string& s) {
    if (s == "torus" || s == "T") return {true, 0};
    if (s.rfind("zp:", 0) == 0) {
        std::int64_t p = parse_int(s.substr(3), "the modulus");
        if (p < 2) throw ParseError("modulus must be at least 2");
        return {false, p};
    }
    throw ParseError("expected zp:<p> or torus, got '" + s + "'");
}

std::pair<Rational, Rational> parse_interval(const std::string& body) {
    auto comma = body.find(',');
    if (comma == std::string::npos) throw ParseError("interval spec needs two endpoints");
    return {parse_rational(body.substr(0, comma)), parse_rational(body.substr(comma + 1))};
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw ParseError("malformed set spec '" + spec + "'");
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

CyclicSet cyclic_set(const std::string& spec, std::int64_t m) {
    auto [kind, body] = split_spec(spec);
    if (kind == "members") {
        auto xs = parse_int_list(body, "a residue");
        return CyclicSet::from_members(m, xs);
    }
    if (kind == "interval") {
        auto [a, b] = parse_interval(body);
        CyclicSet s(m);
        for (std::int64_t x = 0; x < m; ++x) {
            Rational q = make_rational(x, m);
            if (q >= a && q < b) s.insert(x);
        }
        return s;
    }
    throw ParseError("set spec '" + spec + "' does not describe a subset of Z/" + std::to_string(m));
}

// resolution 0 lets an interval pick its own grid
GridSet grid_set(const std::string& spec, std::int64_t resolution) {
    auto [kind, body] = split_spec(spec);
    if (kind == "cells") {
        if (resolution < 1) throw ParseError("cells:<list> needs a grid resolution");
        std::vector<std::int64_t> cells;
        for (auto c : parse_int_list(body, "a cell")) {
            if (c < 1 || c > resolution)
                throw ParseError("cell " + std::to_string(c) + " outside 1.." + std::to_string(resolution));
            cells.push_back(c - 1);
        }
        return GridSet::from_cells(resolution, cells);
    }
    if (kind == "interval") {
        auto [a, b] = parse_interval(body);
        GridSet s = GridSet::from_interval(a, b);
        if (resolution < 1) return s;
        if (resolution % s.resolution() != 0)
            throw DomainError("interval endpoints do not lie on the grid of resolution " + std::to_string(resolution));
        return refine_to(s, resolution);
    }
    throw ParseError("set spec '" + spec + "' does not describe a grid set");
}

FormFamily load_family(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read family file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("family file '" + path + "' is not valid JSON: " + e.what());
    }
    return family_from_json(j);
}

FormFamily family_of(const std::string& path, const std::vector<std::string>& forms) {
    if (!path.empty() && !forms.empty()) throw ParseError("give either --family or --form, not both");
    if (!path.empty()) return load_family(path);
    if (forms.empty()) throw ParseError("a family is required: --family <file> or --form <dsl>");
    std::vector<LinearForm> out;
    for (const auto& f : forms) out.push_back(parse_form(f));
    return FormFamily(std::move(out));
}

std::string join(const std::vector<std::int64_t>& xs, std::int64_t offset = 0) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(xs[i] + offset);
    }
    return s;
}

std::string describe(const CyclicSet& s) { return "members:" + join(s.members()); }
std::string describe(const GridSet& s) {
    return "cells:" + join(s.cells(), 1) + " (N=" + std::to_string(s.resolution()) + ")";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

CyclicFunction cyclic_function(const std::string& spec, std::int64_t m);
GridFunction grid_function(const std::string& spec, std::int64_t n);

std::vector<Rational> load_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read values file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("values file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw ParseError("values file must hold a JSON array");
    std::vector<Rational> out;
    for (const auto& v : j) {
        if (v.is_string()) out.push_back(parse_rational(v.get<std::string>()));
        else if (v.is_number_integer()) out.push_back(make_rational(v.get<std::int64_t>()));
        else if (v.is_number()) out.push_back(rational_from_double(v.get<double>()));
        else throw ParseError("values must be numbers or rational strings");
    }
    return out;
}

CyclicFunction cyclic_function(const std::string& spec, std::int64_t m) {
    auto [kind, body] = split_spec(spec);
    if (kind == "constant") return CyclicFunction::constant(m, parse_rational(body));
    if (kind == "values") return CyclicFunction(m, load_values(body));
    return CyclicFunction::indicator(cyclic_set(spec, m));
}

GridFunction grid_function(const std::string& spec, std::int64_t n) {
    auto [kind, body] = split_spec(spec);
    if (kind == "constant") return GridFunction::constant(n, parse_rational(body));
    if (kind == "values") return GridFunction(n, load_values(body));
    return GridFunction::indicator(grid_set(spec, n));
}

template <class Set>
std::vector<Set> expand(std::vector<Set> sets, std::size_t arity) {
    if (sets.size() == 1) sets.assign(arity, sets[0]);
    if (sets.size() != arity)
        throw ParseError("give one --set, or one per variable (" + std::to_string(arity) + ")");
    return sets;
}

struct Context {
    std::ostream& out;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    GridOptions grid = GridOptions::from_environment();
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solution-free sets for linear forms on Z/p and the circle"};
    app.footer(kGrammar);
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    app.add_option("--seed", seed, "random seed")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();

    // form info
    auto* form_cmd = app.add_subcommand("form", "inspect a linear form");
    form_cmd->require_subcommand(1);
    auto* info_cmd = form_cmd->add_subcommand("info", "print the invariants of a form");
    std::string info_form;
    bool info_json = false;
    info_cmd->add_option("form", info_form, "form such as 2x1+3x2-2x3")->required();
    info_cmd->add_flag("--json", info_json, "emit JSON");

    // measure
    auto* measure_cmd = app.add_subcommand("measure", "exact solution measure T_L(A_1,...,A_t)");
    std::vector<std::string> m_group, m_sets;
    std::string m_form;
    measure_cmd->add_option("--group", m_group, "zp <p> | grid <N>")->expected(2)->required();
    measure_cmd->add_option("--form", m_form, "linear form")->required();
    measure_cmd->add_option("--set", m_sets, "set spec, once or once per variable")->required();

    // free-check
    auto* free_cmd = app.add_subcommand("free-check", "decide whether a set is F-free");
    std::vector<std::string> f_group, f_forms;
    std::string f_family, f_set, f_semantics = "half-open";
    bool f_exclude = false;
    free_cmd->add_option("--group", f_group, "zp <p> | grid <N>")->expected(2)->required();
    free_cmd->add_option("--family", f_family, "family JSON file");
    free_cmd->add_option("--form", f_forms, "linear form (repeatable)");
    free_cmd->add_option("--set", f_set, "set spec")->required();
    free_cmd->add_option("--semantics", f_semantics, "grid cells: half-open | interior")
        ->check(CLI::IsMember({"half-open", "interior"}));
    free_cmd->add_flag("--exclude-constant", f_exclude, "ignore constant tuples (Z/p only)");

    // maxfree
    auto* max_cmd = app.add_subcommand("maxfree", "largest F-free subset of Z/m");
    std::string x_family;
    std::vector<std::string> x_forms;
    std::int64_t x_modulus = 0;
    double x_limit = 60;
    std::size_t x_iters = 20000;
    bool x_heuristic = false, x_exclude = false;
    max_cmd->add_option("--family", x_family, "family JSON file");
    max_cmd->add_option("--form", x_forms, "linear form (repeatable)");
    max_cmd->add_option("--modulus", x_modulus, "m")->required()->check(CLI::PositiveNumber);
    max_cmd->add_option("--time-limit", x_limit, "seconds")->capture_default_str();
    max_cmd->add_option("--iterations", x_iters, "local search iterations")->capture_default_str();
    max_cmd->add_flag("--heuristic", x_heuristic, "local search only");
    max_cmd->add_flag("--exclude-constant", x_exclude, "ignore constant tuples");

    // torus-lb
    auto* lb_cmd = app.add_subcommand("torus-lb", "lower bounds for the circle");
    std::string l_family;
    std::vector<std::string> l_forms;
    std::int64_t l_grid = 0;
    lb_cmd->add_option("--family", l_family, "family JSON file");
    lb_cmd->add_option("--form", l_forms, "linear form (repeatable)");
    lb_cmd->add_option("--grid", l_grid, "also search grid sets at this resolution");

    // transfer
    auto* tr_cmd = app.add_subcommand("transfer", "move a function between Z/p and T");
    std::string t_from, t_to, t_set, t_family;
    std::vector<std::string> t_forms;
    std::int64_t t_resolution = 0, t_target = 0, t_maxfreq = 64;
    double t_eps = 0.05;
    std::optional<double> t_threshold;
    std::size_t t_support = 24;
    bool t_round = false;
    tr_cmd->add_option("--from", t_from, "zp:<p> | torus")->required();
    tr_cmd->add_option("--to", t_to, "torus | zp:<p>")->required();
    tr_cmd->add_option("--set", t_set, "set or function spec on the source")->required();
    tr_cmd->add_option("--resolution", t_resolution, "grid resolution of a torus source");
    tr_cmd->add_option("--target-resolution", t_target, "grid resolution of a torus target");
    tr_cmd->add_option("--eps", t_eps, "epsilon")->capture_default_str();
    tr_cmd->add_option("--threshold", t_threshold, "spectral threshold (default eps/4)");
    tr_cmd->add_option("--max-support", t_support, "largest spectral support kept")->capture_default_str();
    tr_cmd->add_option("--max-frequency", t_maxfreq, "torus source frequency window")->capture_default_str();
    tr_cmd->add_option("--family", t_family, "family JSON file (default sum-free)");
    tr_cmd->add_option("--form", t_forms, "linear form (repeatable)");
    tr_cmd->add_flag("--round", t_round, "also round the result to a set");

    // round
    auto* rd_cmd = app.add_subcommand("round", "Bernoulli rounding of a [0,1]-valued function");
    std::vector<std::string> r_group, r_forms;
    std::string r_function, r_family;
    std::size_t r_trials = 20;
    rd_cmd->add_option("--group", r_group, "zp <p> | grid <N>")->expected(2)->required();
    rd_cmd->add_option("--function", r_function, "constant:<q> | values:<file.json> | a set spec")->required();
    rd_cmd->add_option("--trials", r_trials, "draws")->capture_default_str();
    rd_cmd->add_option("--family", r_family, "family for the stability report");
    rd_cmd->add_option("--form", r_forms, "linear form (repeatable)");

    // remove
    auto* rm_cmd = app.add_subcommand("remove", "delete a small part of the sets to destroy all solutions");
    std::vector<std::string> v_group, v_sets;
    std::string v_form, v_eps = "0";
    bool v_exact = false;
    rm_cmd->add_option("--group", v_group, "zp <p> | grid <N>")->expected(2)->required();
    rm_cmd->add_option("--form", v_form, "linear form")->required();
    rm_cmd->add_option("--set", v_sets, "set spec, once or once per variable")->required();
    rm_cmd->add_option("--eps", v_eps, "target removal measure (reported)");
    rm_cmd->add_flag("--exact", v_exact, "also compute the minimum removal (Z/m, m <= 20)");

    // converge
    auto* cv_cmd = app.add_subcommand("converge", "maximal F-free densities over primes");
    std::string c_family, c_out, c_primes;
    std::vector<std::string> c_forms;
    double c_limit = 60;
    std::int64_t c_grid = 12;
    bool c_exclude = false;
    cv_cmd->add_option("--family", c_family, "family JSON file");
    cv_cmd->add_option("--form", c_forms, "linear form (repeatable)");
    cv_cmd->add_option("--primes", c_primes, "comma-separated primes")->required();
    cv_cmd->add_option("--out", c_out, "directory for table.csv and table.svg");
    cv_cmd->add_option("--time-limit", c_limit, "seconds per prime")->capture_default_str();
    cv_cmd->add_option("--grid", c_grid, "grid resolution for the torus bound, 0 to skip")->capture_default_str();
    cv_cmd->add_flag("--exclude-constant", c_exclude, "ignore constant tuples");

    // odd-residues
    auto* odd_cmd = app.add_subcommand("odd-residues", "odd residues of Z/2p are sum-free");
    std::string o_primes;
    odd_cmd->add_option("--primes", o_primes, "comma-separated primes")->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().back();
        err << sub->help();
        return 2;
    }

    try {
        Context ctx{out, seed, jobs};
        if (form_cmd->parsed()) {
            LinearForm L = parse_form(info_form);
            auto cr = content_reduce(L);
            std::string h = "undefined";
            if (has_coprime_coefficients(L)) h = std::to_string(multiplier_height(L).height);
            if (info_json) {
                nlohmann::json j{{"form", L.to_string()},
                                 {"coefficients", L.coeffs()},
                                 {"t", L.arity()},
                                 {"invariant", is_invariant(L)},
                                 {"content", cr.content},
                                 {"h", h},
                                 {"s_L", weight_s(L)},
                                 {"k_threshold", k_admissibility_threshold(L)}};
                out << j.dump(2) << "\n";
            } else {
                out << "form=" << L.to_string() << "\n"
                    << "t=" << L.arity() << "\n"
                    << "invariant=" << boolean(is_invariant(L)) << "\n"
                    << "content=" << cr.content << "\n"
                    << "h=" << h << "\n"
                    << "s_L=" << weight_s(L) << "\n"
                    << "k-threshold=" << k_admissibility_threshold(L) << "\n";
            }
        } else if (measure_cmd->parsed()) {
            Group g = parse_group(m_group);
            LinearForm L = parse_form(m_form);
            if (g.grid) {
                std::vector<GridSet> sets;
                for (const auto& s : m_sets) sets.push_back(grid_set(s, g.n));
                sets = expand(std::move(sets), L.arity());
                out << to_string(solution_measure_grid(L, sets, ctx.grid)) << "\n";
            } else {
                std::vector<CyclicSet> sets;
                for (const auto& s : m_sets) sets.push_back(cyclic_set(s, g.n));
                sets = expand(std::move(sets), L.arity());
                out << to_string(solution_measure_convolution(L, sets)) << "\n";
            }
        } else if (free_cmd->parsed()) {
            Group g = parse_group(f_group);
            FormFamily F = family_of(f_family, f_forms);
            if (g.grid) {
                if (f_exclude) throw ParseError("--exclude-constant applies to Z/p only");
                auto sem = f_semantics == "interior" ? CellSemantics::interior : CellSemantics::half_open;
                auto r = is_free_grid(F, grid_set(f_set, g.n), sem, ctx.grid);
                out << "free=" << boolean(r.free) << "\n";
                if (!r.free) {
                    out << "form=" << F[r.form_index].to_string() << "\n"
                        << "resolution=" << r.resolution << "\n"
                        << "witness_cells=" << join(r.witness_cells, 1) << "\n"
                        << "witness_point=";
                    for (std::size_t i = 0; i < r.witness_point.size(); ++i)
                        out << (i ? "," : "") << to_string(r.witness_point[i]);
                    out << "\n";
                }
            } else {
                auto filter = f_exclude ? SolutionFilter::exclude_constant : SolutionFilter::all;
                auto r = is_free(F, cyclic_set(f_set, g.n), filter);
                out << "free=" << boolean(r.free) << "\n";
                if (!r.free)
                    out << "form=" << F[r.form_index].to_string() << "\n"
                        << "witness=" << join(r.witness) << "\n";
            }
        } else if (max_cmd->parsed()) {
            FormFamily F = family_of(x_family, x_forms);
            auto filter = x_exclude ? SolutionFilter::exclude_constant : SolutionFilter::all;
            if (x_heuristic) {
                auto r = max_free_heuristic(F, x_modulus, x_iters, seed, filter);
                out << "size=" << r.size << "\n"
                    << "density=" << to_string(r.witness.density()) << "\n"
                    << "optimal=unknown\n"
                    << "witness=" << describe(r.witness) << "\n";
            } else {
                ExactSearchOptions opts;
                opts.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(x_limit * 1000));
                opts.filter = filter;
                opts.heuristic_iterations = x_iters;
                opts.seed = seed;
                auto r = max_free_exact(F, x_modulus, opts);
                out << "size=" << r.size << "\n"
                    << "density=" << to_string(r.witness.density()) << "\n"
                    << "optimal=" << boolean(r.optimal) << "\n"
                    << "upper_bound=" << (r.upper_bound ? std::to_string(*r.upper_bound) : "") << "\n"
                    << "witness=" << describe(r.witness) << "\n";
            }
        } else if (lb_cmd->parsed()) {
            FormFamily F = family_of(l_family, l_forms);
            auto c = torus_interval_construction(F, ctx.grid);
            out << "density=" << to_string(c.density) << "\n"
                << "translate=" << to_string(c.translate) << "\n"
                << "interval=(" << to_string(c.left) << "," << to_string(c.right) << ")\n"
                << "semantics=" << (c.semantics == CellSemantics::half_open ? "half-open" : "interior") << "\n"
                << "witness=" << describe(c.witness) << "\n"
                << "certified=" << boolean(c.certificate.free) << "\n";
            if (l_grid > 0) {
                auto method = l_grid <= 24 ? SearchMethod::exact : SearchMethod::heuristic;
                auto gr = torus_max_free_grid(F, l_grid, method, seed);
                out << "grid_density=" << to_string(gr.density) << "\n"
                    << "grid_optimal=" << boolean(gr.optimal) << "\n"
                    << "grid_witness=" << describe(gr.witness) << "\n";
            }
        } else if (tr_cmd->parsed()) {
            Group from = parse_carrier(t_from), to = parse_carrier(t_to);
            if (from.grid == to.grid) throw ParseError("transfer goes from zp:<p> to torus or back");
            FormFamily F = (t_family.empty() && t_forms.empty()) ? FormFamily({LinearForm({1, 1, -1})})
                                                                 : family_of(t_family, t_forms);
            TransferConfig cfg;
            cfg.epsilon = t_eps;
            cfg.threshold = t_threshold;
            cfg.max_support = t_support;
            cfg.max_frequency = t_maxfreq;
            cfg.target_resolution = t_target;
            RoundingOptions ro;
            ro.seed = seed;
            if (!from.grid) {
                auto r = transfer_pipeline(cyclic_function(t_set, from.n), F, cfg);
                out << "mean=" << to_string(r.function.mean()) << "\n"
                    << "resolution=" << r.function.resolution() << "\n"
                    << "report=" << r.report.to_json().dump() << "\n";
                if (t_round) {
                    auto rr = round_to_set(r.function, ro);
                    out << "rounded=" << describe(rr.set) << "\n"
                        << "rounded_measure=" << to_string(rr.set.measure()) << "\n"
                        << "u2_distance~=" << rr.u2_distance << "\n";
                }
            } else {
                GridSet src = grid_set(t_set, t_resolution);
                auto r = transfer_pipeline(GridFunction::indicator(src), to.n, F, cfg);
                out << "mean=" << to_string(r.function.mean()) << "\n"
                    << "report=" << r.report.to_json().dump() << "\n";
                if (t_round) {
                    auto rr = round_to_set(r.function, ro);
                    out << "rounded=" << describe(rr.set) << "\n"
                        << "rounded_density=" << to_string(rr.set.density()) << "\n"
                        << "u2_distance~=" << rr.u2_distance << "\n";
                }
            }
        } else if (rd_cmd->parsed()) {
            Group g = parse_group(r_group);
            FormFamily F = (r_family.empty() && r_forms.empty()) ? FormFamily({LinearForm({1, 1, -1})})
                                                                 : family_of(r_family, r_forms);
            RoundingOptions ro;
            ro.trials = r_trials;
            ro.seed = seed;
            if (g.grid) {
                GridFunction f = grid_function(r_function, g.n);
                auto r = round_to_set(f, ro);
                out << "set=" << describe(r.set) << "\n"
                    << "measure=" << to_string(r.set.measure()) << "\n"
                    << "u2_distance~=" << r.u2_distance << "\n"
                    << "stability=" << rounding_stability_report(f, r.set, F).to_json().dump() << "\n";
            } else {
                CyclicFunction f = cyclic_function(r_function, g.n);
                auto r = round_to_set(f, ro);
                out << "set=" << describe(r.set) << "\n"
                    << "density=" << to_string(r.set.density()) << "\n"
                    << "u2_distance~=" << r.u2_distance << "\n"
                    << "stability=" << rounding_stability_report(f, r.set, F).to_json().dump() << "\n";
            }
        } else if (rm_cmd->parsed()) {
            Group g = parse_group(v_group);
            LinearForm L = parse_form(v_form);
            if (g.grid) {
                std::vector<GridSet> sets;
                for (const auto& s : v_sets) sets.push_back(grid_set(s, g.n));
                if (sets.size() != 1) sets = expand(std::move(sets), L.arity());
                auto r = removal_on_torus(L, sets, parse_rational(v_eps), ctx.grid);
                out << "removed_measure=" << to_string(r.removed_measure) << "\n"
                    << "remainder_free=" << boolean(r.remainder_free) << "\n"
                    << "certificate=" << r.certificate().dump() << "\n";
            } else {
                std::vector<CyclicSet> sets;
                for (const auto& s : v_sets) sets.push_back(cyclic_set(s, g.n));
                if (sets.size() != 1) sets = expand(std::move(sets), L.arity());
                auto r = greedy_removal_cyclic(L, sets);
                out << "removed=" << r.total() << "\n";
                for (std::size_t i = 0; i < r.removed.size(); ++i) {
                    out << "E" << i + 1 << "=" << describe(r.removed[i]) << "\n"
                        << "A" << i + 1 << "'=" << describe(sets[i].minus(r.removed[i])) << "\n";
                }
                if (v_exact) out << "exact_minimum=" << exact_min_removal(L, sets).size << "\n";
            }
        } else if (cv_cmd->parsed()) {
            FormFamily F = family_of(c_family, c_forms);
            ConvergenceConfig cfg;
            cfg.time_limit_per_prime = std::chrono::milliseconds(static_cast<std::int64_t>(c_limit * 1000));
            cfg.seed = seed == 0 ? 1 : seed;
            cfg.grid_resolution = c_grid;
            cfg.filter = c_exclude ? SolutionFilter::exclude_constant : SolutionFilter::all;
            cfg.jobs = jobs;
            auto primes = parse_int_list(c_primes, "a prime");
            for (auto p : primes)
                if (!is_prime(p)) throw DomainError(std::to_string(p) + " is not prime");
            auto table = convergence_experiment(F, primes, cfg);
            const std::string csv = table.to_csv();
            out << csv;
            if (!c_out.empty()) {
                std::filesystem::create_directories(c_out);
                std::ofstream(std::filesystem::path(c_out) / "table.csv") << csv;
                std::ofstream(std::filesystem::path(c_out) / "table.svg") << table.to_svg();
            }
        } else if (odd_cmd->parsed()) {
            out << "p,modulus,density,sum_free\n";
            for (const auto& row : odd_residue_demo(parse_int_list(o_primes, "a prime")))
                out << row.p << ',' << row.modulus << ',' << to_string(row.density) << ',' << boolean(row.sum_free) << "\n";
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n\n" << kGrammar << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace solfree::cli
