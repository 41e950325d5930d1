#include "helmsense/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <queue>
#include <thread>

#include "helmsense/errors.hpp"

namespace helmsense {

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw ConfigError("fit_loglog", "x and y sizes differ");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) throw ConfigError("fit_loglog", "x values must be positive");
        if (y[i] == 0.0) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(std::abs(y[i])));
    }
    if (lx.size() < 2)
        throw NumericalError("fit_loglog", "fewer than two nonzero samples");
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30)
        throw NumericalError("fit_loglog", "degenerate abscissae");
    SlopeFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.samples_used = static_cast<int>(lx.size());
    return fit;
}

double fit_loglog_slope_or(const std::vector<double>& x, const std::vector<double>& y,
                           double fallback) {
    int usable = 0;
    for (double v : y)
        if (v != 0.0) ++usable;
    if (usable < 2) return fallback;
    return fit_loglog(x, y).slope;
}

namespace {

// Kronrod 15-point nodes/weights on [-1,1]; the embedded Gauss-7 rule uses
// the odd-indexed nodes.
constexpr double kr_nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kr_weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double g7_weights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double v = f(mid + half * kr_nodes[i]);
        kron += kr_weights[i] * v;
        if (i % 2 == 1) gauss += g7_weights[i / 2] * v;
    }
    kron *= half;
    gauss *= half;
    return Panel{a, b, kron, std::abs(kron - gauss)};
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, int max_subdivisions) {
    if (!(b > a)) {
        if (a == b) return 0.0;
        return -adaptive_integrate(f, b, a, abs_tol, max_subdivisions);
    }
    std::priority_queue<Panel> panels;
    panels.push(evaluate_panel(f, a, b));
    double total_error = panels.top().error;
    double total_value = panels.top().value;
    int splits = 0;
    while (total_error > abs_tol && splits < max_subdivisions) {
        Panel worst = panels.top();
        panels.pop();
        total_error -= worst.error;
        total_value -= worst.value;
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        total_error += left.error + right.error;
        total_value += left.value + right.value;
        panels.push(left);
        panels.push(right);
        ++splits;
    }
    if (total_error > abs_tol * 100.0)
        throw NumericalError("adaptive_integrate", "quadrature did not converge");
    return total_value;
}

int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("HELMSENSE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace helmsense
