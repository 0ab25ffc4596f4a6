#include <complex>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "solfree/cyclic.hpp"

namespace solfree {

namespace {

// FFTW planning is not thread-safe; execution with new-array execute is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<std::complex<double>> transform(std::vector<std::complex<double>> data, int sign) {
    const int n = static_cast<int>(data.size());
    if (n == 0) return data;
    std::vector<std::complex<double>> out(data.size());
    auto* in_ptr = reinterpret_cast<fftw_complex*>(data.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, in_ptr, out_ptr, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> dft_values(std::span<const double> values) {
    std::vector<std::complex<double>> data(values.begin(), values.end());
    return dft_values(std::span<const std::complex<double>>(data));
}

std::vector<std::complex<double>> dft_values(std::span<const std::complex<double>> values) {
    auto out = transform(std::vector<std::complex<double>>(values.begin(), values.end()), FFTW_FORWARD);
    const double scale = 1.0 / static_cast<double>(values.size());
    for (auto& z : out) z *= scale;
    return out;
}

std::vector<std::complex<double>> inverse_dft_values(std::span<const std::complex<double>> coefficients) {
    return transform(std::vector<std::complex<double>>(coefficients.begin(), coefficients.end()), FFTW_BACKWARD);
}

}  // namespace solfree
