#pragma once

#include <string>

#include "helmsense/geometry.hpp"

namespace helmsense {

// Analytic data set of one tracking problem: wavenumber, source, target
// potential (the tracking vector is its gradient) and tracking target.
// Callables must be evaluable anywhere in the domain of interest.
struct ProblemData {
    double k = 0.0;
    double gamma = 1.0;  // source contrast inside a perturbation set

    ScalarFn f;
    VectorFn grad_f;
    ScalarFn eta_tilde;        // target potential
    VectorFn grad_eta_tilde;   // the tracking vector A
    MatrixFn hess_eta_tilde;   // needed for grad(A . V)
    ScalarFn eta_d;
    VectorFn grad_eta_d;

    Vec tracking_vector(const Vec& x) const { return grad_eta_tilde(x); }

    // Finite-difference spot check of every gradient callable at
    // `n_points` seeded random points of the domain (forward step 1e-6,
    // relative tolerance 1e-5). Throws ConfigError on mismatch.
    void validate(const Domain& domain, int n_points = 10, unsigned seed = 7u) const;
};

// Named built-in data sets used by the CLI and the test suites:
//   zero       all functions vanish
//   constant   f = 1, everything else zero
//   tracking1d the 1D benchmark set (odd polynomial source, linear target)
//   trig2d     trigonometric source with a quadratic target potential
//   poly2d     polynomial source, bilinear target potential
ProblemData make_data_preset(const std::string& name, double k, double gamma = 1.0);

// Velocity presets: zero, bump1d (boundary-fixing 1 - x^2), dilation,
// rotation, translate_x.
VelocityField make_velocity_preset(const std::string& name);

}  // namespace helmsense
