#pragma once

#include <array>
#include <optional>
#include <vector>

#include "helmsense/states.hpp"

namespace helmsense {

// Derivative of the tracking functional under the transport family
// T_s = id + s V, together with the remainder of the averaged-adjoint
// route and finite-difference validation series.
struct ShapeSensitivityReport {
    double dJ = 0.0;
    // Volume-integral contributions, in order: pullback-derivative
    // tracking term, transported-target term, L2 tracking terms,
    // adjoint bilinear terms, source terms. Sums to dJ.
    std::array<double, 5> terms{};
    std::vector<std::pair<double, double>> remainder_samples;    // (s, R(s))
    std::vector<std::pair<double, double>> state_delta_samples;  // (s, ||eta^s-eta0||_H1)
    std::vector<std::pair<double, double>> fd_samples;           // (s, quotient)
    double fd_error_slope = 0.0;   // |dJ - quotient| against s
    double remainder_slope = 0.0;  // |R(s)| against s
    double coercivity_margin = 0.0;
};

// Tracking functional of a discrete state, optionally restricted to
// elements whose centroid passes the filter.
double eval_J(const FemField& eta, const ProblemData& data,
              const std::optional<std::function<bool(const Vec&)>>& restriction = {});

// Closed-form derivative at s = 0 (solves the state and adjoint itself).
ShapeSensitivityReport shape_derivative(const MeshPtr& mesh, const ProblemData& data,
                                        const VelocityField& velocity,
                                        const SolveOptions& options = {});

// (J(Omega_s) - J(Omega)) / s per s, with J(Omega_s) evaluated on the
// fixed mesh through the change of variables.
std::vector<std::pair<double, double>> fd_shape_check(const MeshPtr& mesh,
                                                      const ProblemData& data,
                                                      const VelocityField& velocity,
                                                      const std::vector<double>& s_list,
                                                      const SolveOptions& options = {});

// Remainder assembled line by line from its simplified form.
std::vector<std::pair<double, double>> remainder_R_shape(const MeshPtr& mesh,
                                                         const ProblemData& data,
                                                         const VelocityField& velocity,
                                                         const std::vector<double>& s_list,
                                                         const SolveOptions& options = {});

// Same quantity through the unsimplified averaged-adjoint definition;
// agrees with remainder_R_shape up to solver roundoff and serves as the
// independent algebraic route in the tests.
std::vector<std::pair<double, double>> remainder_R_shape_via_definition(
    const MeshPtr& mesh, const ProblemData& data, const VelocityField& velocity,
    const std::vector<double>& s_list, const SolveOptions& options = {});

// Full driver: derivative, finite-difference and remainder series, fitted
// slopes and the coercivity-margin diagnostic 1 - k^2 c(Omega) beta.
ShapeSensitivityReport analyze_shape(const Domain& domain, const MeshPtr& mesh,
                                     const ProblemData& data, const VelocityField& velocity,
                                     const std::vector<double>& s_list,
                                     const SolveOptions& options = {});

}  // namespace helmsense
