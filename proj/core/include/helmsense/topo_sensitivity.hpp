#pragma once

#include <optional>
#include <vector>

#include "helmsense/shape_sensitivity.hpp"

namespace helmsense {

enum class TopoVariant { source, dirichlet_hole, neumann_hole };
enum class TrendVerdict { converged, diverged, inconclusive };

struct TopoSeriesRow {
    double r = 0.0;
    double s = 0.0;  // alpha_{N-d} r^{N-d}
    double l0 = 0.0;
    double l1 = 0.0;
};

struct TopoSensitivityReport {
    TopoVariant variant = TopoVariant::source;
    double closed_form_part = 0.0;  // derivative of the parametrized Lagrangian at 0
    std::optional<double> l_hat;    // hole variants, set only when the series converges
    std::optional<double> dJ;
    std::vector<TopoSeriesRow> hole_series;
    std::vector<std::pair<double, double>> remainder_samples;  // (s, R(s))
    std::vector<std::pair<double, double>> fd_samples;         // (s, quotient)
    double remainder_slope = 0.0;
    TrendVerdict trend = TrendVerdict::inconclusive;
    bool divergence_flag = false;
};

// Source-contrast perturbation: closed-form part (1-gamma) int_E f p0 dH^d
// (point evaluation for d = 0), remainder R(s) = ||(eta^s-eta0)/sqrt(s)||^2_H1
// and the finite-difference series (J_gamma - J)/s per dilation radius.
TopoSensitivityReport topo_source(const MeshPtr& mesh, const ProblemData& data,
                                  const RectifiableSet& set, const std::vector<double>& r_list,
                                  const SolveOptions& options = {});

// Hole perturbation with a Dirichlet or Neumann condition on the hole
// boundary, remeshing the domain for every radius.
TopoSensitivityReport topo_hole(const Domain& domain, const ProblemData& data,
                                const RectifiableSet& set, HoleBC bc,
                                const std::vector<double>& r_list, double h,
                                const SolveOptions& options = {});

// l0 = H1(Omega_r)-norm squared of (eta_r - eta0)/sqrt(s); l1 the signed
// hole-boundary term -(1/s) int grad p0 . grad d_E (eta_r - eta0). All
// fields must live on the hole mesh (interpolate the background ones).
std::pair<double, double> l0_l1(const FemField& eta_r, const FemField& eta0,
                                const FemField& p0, const RectifiableSet& set, double r);

struct CorrectorProbeResult {
    std::vector<std::pair<double, double>> samples;  // (s, ||(eta^s-eta0)/s||_H1)
    double max_min_ratio = 0.0;  // over the smallest sampled decade
    // Growth of the quotient toward s -> 0 within that decade, relative
    // to its value at the decade's largest s. Decay keeps this at <= 1;
    // the verdict flags only growth (a decaying quotient is trivially
    // bounded even though its max/min ratio is large).
    double growth_ratio = 0.0;
    bool bounded = false;  // growth_ratio <= 3
};

// Boundedness probe of the first-order corrector quotient for the
// transport family ...
CorrectorProbeResult corrector_bound_probe(const MeshPtr& mesh, const ProblemData& data,
                                           const TransportMap& map,
                                           const std::vector<double>& s_list,
                                           const SolveOptions& options = {});

// ... and for the source-perturbation family (s = alpha_{N-d} r^{N-d}).
CorrectorProbeResult corrector_bound_probe(const MeshPtr& mesh, const ProblemData& data,
                                           const RectifiableSet& set,
                                           const std::vector<double>& r_list,
                                           const SolveOptions& options = {});

}  // namespace helmsense
