#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lemmarec/tensor.hpp"

namespace lemmarec {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t checked_elements = 0;
    bool passed = false;
};

// Compares the tape gradient of a scalar-valued function against central
// finite differences at each (sampled) element of x. The relative error floor
// keeps finite-difference noise on near-zero gradients from dominating.
template <class S, class F>
GradCheckReport grad_check(F f, Tensor<S> x, double h, double tolerance,
                           std::size_t max_elements = std::numeric_limits<std::size_t>::max(),
                           std::uint64_t sample_seed = 0) {
    Tensor<S> y = f(x);
    if (y.size() != 1) {
        throw ShapeError("grad_check needs a scalar-valued function, got " + format_shape(y.shape()));
    }
    x.zero_grad();
    y.backward();
    std::vector<S> tape_grad = x.grad();
    if (tape_grad.empty()) tape_grad.assign(x.size(), S(0));

    std::vector<std::size_t> indices;
    if (x.size() <= max_elements) {
        indices.resize(x.size());
        for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    } else {
        Rng rng(sample_seed ^ 0x9c0ffee1ULL);
        for (std::size_t i = 0; i < max_elements; ++i) {
            indices.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(x.size()) - 1)));
        }
    }

    GradCheckReport report;
    report.checked_elements = indices.size();
    auto& values = x.value_mut();
    for (std::size_t i : indices) {
        const S original = values[i];
        double plus, minus;
        {
            NoGradGuard no_grad;
            values[i] = original + static_cast<S>(h);
            plus = static_cast<double>(f(x).item());
            values[i] = original - static_cast<S>(h);
            minus = static_cast<double>(f(x).item());
            values[i] = original;
        }
        const double fd = (plus - minus) / (2.0 * h);
        const double tape = static_cast<double>(tape_grad[i]);
        const double denom = std::max({std::abs(fd), std::abs(tape), 1e-3});
        report.max_rel_error = std::max(report.max_rel_error, std::abs(fd - tape) / denom);
    }
    report.passed = report.max_rel_error <= tolerance;
    return report;
}

}  // namespace lemmarec
