#include "solfree/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

#include "solfree/error.hpp"

namespace solfree {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t centred(std::int64_t x, std::int64_t m) {
    std::int64_t r = mod_floor(x, m);
    return 2 * r > m ? r - m : r;
}

std::int64_t canonical(std::int64_t gamma, const Carrier& group) {
    return group.is_circle() ? gamma : mod_floor(gamma, group.modulus);
}

std::int64_t as_integer_frequency(std::int64_t gamma, const Carrier& group) {
    return group.is_circle() ? gamma : centred(gamma, group.modulus);
}

}  // namespace

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<std::int64_t> SpectralFunction::support() const {
    std::vector<std::int64_t> out;
    for (const auto& [g, c] : coefficients) out.push_back(g);
    return out;
}

double SpectralFunction::value_at_residue(std::int64_t x) const {
    if (group.is_circle()) throw DomainError("value_at_residue needs a function on Z/p");
    double s = 0;
    for (const auto& [g, c] : coefficients) {
        double angle = kTwoPi * static_cast<double>(mod_floor(g * x, group.modulus)) / static_cast<double>(group.modulus);
        s += c.real() * std::cos(angle) - c.imag() * std::sin(angle);
    }
    return s;
}

double SpectralFunction::value_at_point(double x) const {
    if (!group.is_circle()) throw DomainError("value_at_point needs a function on T");
    double s = 0;
    for (const auto& [g, c] : coefficients) {
        double angle = kTwoPi * std::fmod(static_cast<double>(g) * x, 1.0);
        s += c.real() * std::cos(angle) - c.imag() * std::sin(angle);
    }
    return s;
}

double SpectralFunction::derivative_mass() const {
    double s = 0;
    for (const auto& [g, c] : coefficients)
        s += std::abs(static_cast<double>(as_integer_frequency(g, group))) * std::abs(c);
    return s;
}

std::complex<double> spectral_solution_measure(const LinearForm& form, const SpectralFunction& f) {
    const auto& coeffs = f.coefficients;
    auto lookup = [&](std::int64_t gamma) -> const std::complex<double>* {
        auto it = coeffs.find(canonical(gamma, f.group));
        return it == coeffs.end() ? nullptr : &it->second;
    };
    std::set<std::int64_t> candidates;
    const std::int64_t c1 = form[0];
    for (const auto& [s, c] : coeffs) {
        if (f.group.is_circle()) {
            if (s % c1 == 0) candidates.insert(s / c1);
        } else {
            const std::int64_t p = f.group.modulus;
            if (std::gcd(mod_floor(c1, p), p) != 1) throw DomainError("coefficient is not a unit mod " + std::to_string(p));
            candidates.insert(mod_floor(mod_inverse(mod_floor(c1, p), p) * s, p));
        }
    }
    std::complex<double> total = 0;
    for (auto gamma : candidates) {
        std::complex<double> term = 1;
        for (auto c : form.coeffs()) {
            const auto* v = lookup(c * gamma);
            if (v == nullptr) {
                term = 0;
                break;
            }
            term *= *v;
        }
        total += term;
    }
    return total;
}

namespace {

struct Candidate {
    std::int64_t gamma;  // representative, 0 < gamma (centred)
    double magnitude;
};

template <class CoefficientAt>
Regularized truncate(Carrier group, const Rational& mean, std::int64_t max_gamma, double threshold,
                     std::size_t max_support, CoefficientAt coefficient_at) {
    if (max_support < 1) throw DomainError("support cap must be at least 1");
    if (threshold < 0) throw DomainError("threshold must be non-negative");
    std::vector<Candidate> kept;
    Regularized out;
    double dropped_energy = 0;
    for (std::int64_t g = 1; g <= max_gamma; ++g) {
        const double mag = std::abs(coefficient_at(g));
        const bool self_paired = !group.is_circle() && 2 * g == group.modulus;
        const double energy = mag * mag * (self_paired ? 1.0 : 2.0);
        if (mag >= threshold) {
            kept.push_back({g, mag});
        } else {
            dropped_energy += energy;
            if (mag > 0) out.dropped += self_paired ? 1 : 2;
        }
    }
    std::stable_sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        return a.magnitude != b.magnitude ? a.magnitude > b.magnitude : a.gamma < b.gamma;
    });
    SpectralFunction f;
    f.group = group;
    f.mean = mean;
    f.coefficients[0] = mean.get_d();
    for (const auto& c : kept) {
        const bool self_paired = !group.is_circle() && 2 * c.gamma == group.modulus;
        const std::size_t need = self_paired ? 1 : 2;
        const auto value = coefficient_at(c.gamma);
        if (f.coefficients.size() + need > max_support) {
            dropped_energy += c.magnitude * c.magnitude * static_cast<double>(need);
            if (c.magnitude > 0) out.dropped += need;
            continue;
        }
        f.coefficients[canonical(c.gamma, group)] = value;
        if (!self_paired) f.coefficients[canonical(-c.gamma, group)] = std::conj(value);
    }
    out.function = std::move(f);
    out.l2_residual = std::sqrt(dropped_energy);
    return out;
}

}  // namespace

Regularized regularize(const CyclicFunction& f, double threshold, std::size_t max_support, const FormFamily* forms) {
    const std::int64_t p = f.modulus();
    const auto values = f.to_doubles();
    const auto spectrum = dft_values(values);
    auto out = truncate(Carrier::cyclic(p), f.mean(), p / 2, threshold, max_support,
                        [&](std::int64_t g) { return spectrum[static_cast<std::size_t>(g)]; });
    if (forms != nullptr) {
        for (const auto& form : *forms) {
            std::vector<std::vector<double>> args(form.arity(), values);
            double before = solution_measure_approx(form, p, args);
            double after = spectral_solution_measure(form, out.function).real();
            out.form_deltas.push_back(std::abs(before - after));
        }
    }
    return out;
}

Regularized regularize(const GridFunction& f, double threshold, std::size_t max_support, std::int64_t max_frequency,
                       const FormFamily* forms) {
    const std::int64_t n = f.resolution();
    const auto values = f.to_doubles();
    const auto d = dft_values(values);
    // f^(k) = D(k mod N) * N (1 - e(-k/N)) / (2 pi i k)
    auto coefficient_at = [&](std::int64_t k) -> std::complex<double> {
        if (k % n == 0) return 0.0;
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        std::complex<double> u = (1.0 - std::polar(1.0, -theta)) * static_cast<double>(n) /
                                 std::complex<double>(0.0, kTwoPi * static_cast<double>(k));
        return d[static_cast<std::size_t>(mod_floor(k, n))] * u;
    };
    auto out = truncate(Carrier::circle(), f.mean(), max_frequency, threshold, max_support, coefficient_at);
    // Parseval on T: the residual is what the kept coefficients do not account for
    double total = 0;
    for (double v : values) total += v * v;
    total /= static_cast<double>(n);
    double kept = 0;
    for (const auto& [k, c] : out.function.coefficients) kept += std::norm(c);
    out.l2_residual = std::sqrt(std::max(0.0, total - kept));
    if (forms != nullptr) {
        for (const auto& form : *forms) {
            std::vector<std::vector<double>> args(form.arity(), values);
            double before = solution_measure_grid_approx(form, n, args);
            double after = spectral_solution_measure(form, out.function).real();
            out.form_deltas.push_back(std::abs(before - after));
        }
    }
    return out;
}

std::int64_t FreimanMap::operator()(std::int64_t gamma) const {
    auto it = pairs.find(canonical(gamma, source));
    if (it == pairs.end()) throw DomainError("frequency " + std::to_string(gamma) + " outside the map's domain");
    return it->second;
}

bool verify_freiman(const FreimanMap& map) {
    std::vector<std::int64_t> dom, img;
    for (const auto& [a, b] : map.pairs) {
        dom.push_back(a);
        img.push_back(b);
    }
    {
        std::set<std::int64_t> distinct;
        for (auto b : img) distinct.insert(canonical(b, map.target));
        if (distinct.size() != img.size()) return false;
    }
    const std::size_t n = dom.size();
    const auto k = static_cast<std::size_t>(map.k);
    if (n == 0) return true;
    double combos = 1;
    for (std::size_t i = 1; i <= k; ++i) combos = combos * static_cast<double>(n + i - 1) / static_cast<double>(i);
    if (combos > 1e7) throw DomainError("too many k-multisets to verify the Freiman property");

    auto reduce = [](std::int64_t s, const Carrier& g) { return g.is_circle() ? s : mod_floor(s, g.modulus); };
    std::unordered_map<std::int64_t, std::int64_t> forward, backward;
    std::vector<std::size_t> idx(k, 0);
    while (true) {
        std::int64_t a = 0, b = 0;
        for (auto i : idx) {
            a += dom[i];
            b += img[i];
        }
        a = reduce(a, map.source);
        b = reduce(b, map.target);
        auto [fit, fnew] = forward.try_emplace(a, b);
        if (!fnew && fit->second != b) return false;
        auto [bit, bnew] = backward.try_emplace(b, a);
        if (!bnew && bit->second != a) return false;
        // next non-decreasing index tuple
        std::size_t pos = k;
        while (pos > 0 && idx[pos - 1] == n - 1) --pos;
        if (pos == 0) break;
        const std::size_t v = idx[pos - 1] + 1;
        for (std::size_t j = pos - 1; j < k; ++j) idx[j] = v;
    }
    return true;
}

FreimanMap find_iso_modp_to_int(std::span<const std::int64_t> frequencies, std::int64_t k, std::int64_t p) {
    if (!is_prime(p)) throw DomainError(std::to_string(p) + " is not prime");
    if (k < 1) throw DomainError("k must be positive");
    std::set<std::int64_t> r;
    for (auto g : frequencies) r.insert(mod_floor(g, p));
    if (!r.count(0)) throw DomainError("frequency set must contain 0");
    for (std::int64_t lambda = 1; lambda < p; ++lambda) {
        bool ok = true;
        for (auto g : r)
            if (2 * k * std::abs(centred(lambda * g, p)) >= p) {
                ok = false;
                break;
            }
        if (!ok) continue;
        FreimanMap map;
        map.source = Carrier::cyclic(p);
        map.target = Carrier::circle();
        map.k = k;
        map.lambda = lambda;
        for (auto g : r) map.pairs[g] = centred(lambda * g, p);
        if (!verify_freiman(map)) throw DomainError("dilation lift failed Freiman verification");
        return map;
    }
    double bound = std::pow(2.0 * static_cast<double>(k), static_cast<double>(r.size()));
    throw DomainError("no dilation maps the " + std::to_string(r.size()) + " frequencies into (-p/2k, p/2k); p = " +
                      std::to_string(p) + " while (2k)^n = " + std::to_string(bound));
}

FreimanMap find_iso_int_to_modn(std::span<const std::int64_t> frequencies, std::int64_t k, std::int64_t n) {
    if (n < 1) throw DomainError("modulus must be positive");
    if (k < 1) throw DomainError("k must be positive");
    std::set<std::int64_t> a(frequencies.begin(), frequencies.end());
    if (!a.count(0)) throw DomainError("frequency set must contain 0");
    const std::int64_t diam = *a.rbegin() - *a.begin();
    if (2 * k * diam >= n)
        throw DomainError("2k diam(A) = " + std::to_string(2 * k * diam) + " is not below N = " + std::to_string(n));
    FreimanMap map;
    map.source = Carrier::circle();
    map.target = Carrier::cyclic(n);
    map.k = k;
    for (auto g : a) map.pairs[g] = mod_floor(g, n);
    if (!verify_freiman(map)) throw DomainError("reduction failed Freiman verification");
    return map;
}

std::vector<std::int64_t> build_product_set(std::span<const std::int64_t> frequencies, std::int64_t h, Carrier group) {
    if (h < 1) throw DomainError("h must be at least 1");
    std::set<std::int64_t> base;
    for (auto g : frequencies) base.insert(canonical(g, group));
    std::set<std::int64_t> q = base;
    for (std::int64_t step = 1; step < h; ++step) {
        std::set<std::int64_t> next;
        for (auto a : q)
            for (auto b : base) next.insert(canonical(a + b, group));
        q = std::move(next);
    }
    return {q.begin(), q.end()};
}

SpectralFunction transfer_spectrum(const SpectralFunction& fprime, const FreimanMap& map) {
    if (fprime.group.modulus != map.source.modulus) throw DomainError("map source does not match the function's group");
    if (!map.contains(0) || canonical(map(0), map.target) != 0) throw DomainError("Freiman map must send 0 to 0");
    SpectralFunction g;
    g.group = map.target;
    g.mean = fprime.mean;
    for (const auto& [gamma, c] : fprime.coefficients) {
        if (!map.contains(gamma))
            throw DomainError("support frequency " + std::to_string(gamma) + " escapes the map's domain");
        g.coefficients[canonical(map(gamma), map.target)] = c;
    }
    return g;
}

Sampled sample_on_grid(const SpectralFunction& g, std::int64_t resolution) {
    if (!g.group.is_circle()) throw DomainError("grid sampling needs a function on T");
    if (resolution < 1) throw DomainError("resolution must be positive");
    Sampled out;
    out.values.resize(static_cast<std::size_t>(resolution));
    for (std::int64_t j = 0; j < resolution; ++j)
        out.values[static_cast<std::size_t>(j)] =
            g.value_at_point((static_cast<double>(j) + 0.5) / static_cast<double>(resolution));
    out.error_bound = kTwoPi * g.derivative_mass() / (2.0 * static_cast<double>(resolution));
    return out;
}

std::vector<double> values_on_cyclic(const SpectralFunction& g) {
    if (g.group.is_circle()) throw DomainError("expected a function on Z/m");
    std::vector<double> out(static_cast<std::size_t>(g.group.modulus));
    for (std::int64_t x = 0; x < g.group.modulus; ++x) out[static_cast<std::size_t>(x)] = g.value_at_residue(x);
    return out;
}

RangeCorrected range_correct(std::span<const Rational> values, const Rational& mean) {
    if (values.empty()) throw DomainError("nothing to correct");
    if (mean < 0 || mean > 1) throw DomainError("mean " + to_string(mean) + " lies outside [0,1]");
    RangeCorrected out;
    out.values.assign(values.begin(), values.end());
    Rational sum = 0;
    for (auto& v : out.values) {
        if (v < 0 || v > 1) ++out.clipped;
        if (v < 0) v = 0;
        if (v > 1) v = 1;
        sum += v;
    }
    Rational target = mean;
    target.canonicalize();
    target *= static_cast<long>(values.size());
    while (sum != target) {
        const bool raise = sum < target;
        std::vector<std::size_t> slack;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            if (raise ? out.values[i] < 1 : out.values[i] > 0) slack.push_back(i);
        if (slack.empty()) throw DomainError("no room left to restore the mean");
        const Rational step = (target - sum) / static_cast<long>(slack.size());
        for (auto i : slack) {
            out.values[i] += step;
            if (out.values[i] > 1) out.values[i] = 1;
            if (out.values[i] < 0) out.values[i] = 0;
        }
        sum = 0;
        for (const auto& v : out.values) sum += v;
        ++out.passes;
    }
    double acc = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double d = Rational(out.values[i] - values[i]).get_d();
        acc += d * d;
    }
    out.l2_distance = std::sqrt(acc / static_cast<double>(values.size()));
    return out;
}

RangeCorrected range_correct(std::span<const double> values, const Rational& mean) {
    std::vector<Rational> exact;
    exact.reserve(values.size());
    for (double v : values) exact.push_back(rational_from_double(v));
    return range_correct(std::span<const Rational>(exact), mean);
}

RangeCorrected range_correct(std::span<const double> values) {
    if (values.empty()) throw DomainError("nothing to correct");
    Rational sum = 0;
    for (double v : values) sum += rational_from_double(v);
    return range_correct(values, Rational(sum / static_cast<long>(values.size())));
}

nlohmann::json TransferReport::to_json() const {
    nlohmann::json forms = nlohmann::json::array();
    for (const auto& f : per_form)
        forms.push_back({{"form", f.form}, {"T_source", f.t_source}, {"T_target", f.t_target}, {"delta", f.delta},
                         {"bound", f.bound}});
    return {{"alpha", solfree::to_string(alpha)},
            {"support_size", support_size},
            {"product_size", product_size},
            {"k", k},
            {"h", h},
            {"lambda", lambda},
            {"l2_residual", l2_residual},
            {"sampling_error", sampling_error},
            {"range_l2", range_l2},
            {"per_form", forms},
            {"bounds_flag", bounds_flag}};
}

namespace {

struct PipelineParams {
    std::int64_t k = 2;
    std::int64_t h = 1;
};

PipelineParams pipeline_params(const FormFamily& forms, const TransferConfig& config, std::int64_t p) {
    PipelineParams out;
    std::int64_t height = 1;
    for (const auto& form : forms) {
        if (!form.supported_for_pipeline()) throw DomainError("form " + form.to_string() + " has fewer than three variables");
        if (!has_coprime_coefficients(form)) throw DomainError("form " + form.to_string() + " has a common factor");
        if (!is_admissible(form, p)) throw DomainError("form " + form.to_string() + " is not admissible mod " + std::to_string(p));
        out.k = std::max(out.k, k_admissibility_threshold(form));
        height = std::max(height, multiplier_height(form).height);
    }
    out.h = config.height.value_or(height);
    return out;
}

void fill_form_report(TransferReport& report, const FormFamily& forms, double epsilon,
                      const std::vector<double>& source, const std::vector<double>& target) {
    const double alpha = report.alpha.get_d();
    for (std::size_t i = 0; i < forms.size(); ++i) {
        FormReport r;
        r.form = forms[i];
        r.t_source = source[i];
        r.t_target = target[i];
        r.delta = std::abs(source[i] - target[i]);
        const double t = static_cast<double>(forms[i].arity());
        r.bound = t * epsilon * std::pow(alpha, t - 2);
        report.bounds_flag = report.bounds_flag || r.delta > r.bound;
        report.per_form.push_back(r);
    }
}

}  // namespace

TransferToTorus transfer_pipeline(const CyclicFunction& f, const FormFamily& forms, const TransferConfig& config) {
    const std::int64_t p = f.modulus();
    if (!is_prime(p)) throw DomainError("source modulus " + std::to_string(p) + " is not prime");
    const auto params = pipeline_params(forms, config, p);
    const double threshold = config.threshold.value_or(config.epsilon / 4);

    auto reg = regularize(f, threshold, config.max_support);
    auto q = build_product_set(reg.function.support(), params.h, Carrier::cyclic(p));
    auto phi = find_iso_modp_to_int(q, params.k, p);
    auto g = transfer_spectrum(reg.function, phi);

    const std::int64_t n = config.target_resolution > 0 ? config.target_resolution : 12 * p;
    auto sampled = sample_on_grid(g, n);
    auto corrected = range_correct(std::span<const double>(sampled.values), f.mean());

    TransferToTorus out{GridFunction(n, corrected.values), {}};
    auto& report = out.report;
    report.alpha = f.mean();
    report.support_size = reg.function.support_size();
    report.product_size = q.size();
    report.k = params.k;
    report.h = params.h;
    report.lambda = phi.lambda;
    report.l2_residual = reg.l2_residual;
    report.sampling_error = sampled.error_bound;
    report.range_l2 = corrected.l2_distance;

    std::vector<double> source, target;
    const auto target_values = out.function.to_doubles();
    for (const auto& form : forms) {
        std::vector<CyclicFunction> args(form.arity(), f);
        source.push_back(solution_measure_convolution(form, args).get_d());
        std::vector<std::vector<double>> grid_args(form.arity(), target_values);
        target.push_back(solution_measure_grid_approx(form, n, grid_args));
    }
    fill_form_report(report, forms, config.epsilon, source, target);
    return out;
}

TransferToCyclic transfer_pipeline(const GridFunction& f, std::int64_t p, const FormFamily& forms,
                                   const TransferConfig& config) {
    if (!is_prime(p)) throw DomainError("target modulus " + std::to_string(p) + " is not prime");
    const auto params = pipeline_params(forms, config, p);
    const double threshold = config.threshold.value_or(config.epsilon / 4);

    auto reg = regularize(f, threshold, config.max_support, config.max_frequency);
    auto q = build_product_set(reg.function.support(), params.h, Carrier::circle());
    auto phi = find_iso_int_to_modn(q, params.k, p);
    auto g = transfer_spectrum(reg.function, phi);

    auto values = values_on_cyclic(g);
    auto corrected = range_correct(std::span<const double>(values), f.mean());

    TransferToCyclic out{CyclicFunction(p, corrected.values), {}};
    auto& report = out.report;
    report.alpha = f.mean();
    report.support_size = reg.function.support_size();
    report.product_size = q.size();
    report.k = params.k;
    report.h = params.h;
    report.lambda = phi.lambda;
    report.l2_residual = reg.l2_residual;
    report.range_l2 = corrected.l2_distance;

    std::vector<double> source, target;
    const auto source_values = f.to_doubles();
    const auto target_values = out.function.to_doubles();
    for (const auto& form : forms) {
        std::vector<std::vector<double>> grid_args(form.arity(), source_values);
        source.push_back(solution_measure_grid_approx(form, f.resolution(), grid_args));
        std::vector<std::vector<double>> args(form.arity(), target_values);
        target.push_back(solution_measure_approx(form, p, args));
    }
    fill_form_report(report, forms, config.epsilon, source, target);
    return out;
}

}  // namespace solfree
