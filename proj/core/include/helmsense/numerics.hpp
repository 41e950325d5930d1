#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace helmsense {

// Least-squares slope of log|y| against log x. Pairs with y == 0 are
// dropped (they carry no rate information). Requires at least two
// usable samples.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    int samples_used = 0;
};

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Slope of the fit, or `fallback` when fewer than two samples are usable
// (an identically zero series carries no rate).
double fit_loglog_slope_or(const std::vector<double>& x, const std::vector<double>& y,
                           double fallback);

// Adaptive Gauss-Kronrod (7/15) quadrature to an absolute tolerance.
// Splits the worst interval first; intended for smooth 1D integrands.
double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-12,
                          int max_subdivisions = 2000);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to preallocated slots indexed by i so the outcome is
// deterministic regardless of scheduling. threads <= 1 runs inline.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// Worker cap from HELMSENSE_THREADS (falls back to hardware concurrency).
int worker_count();

}  // namespace helmsense
