#include "helmsense/shape_sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "helmsense/errors.hpp"
#include "helmsense/numerics.hpp"

namespace helmsense {

double eval_J(const FemField& eta, const ProblemData& data,
              const std::optional<std::function<bool(const Vec&)>>& restriction) {
    const Mesh& m = *eta.mesh;
    double total = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
        if (restriction && !(*restriction)(m.element_centroid(e))) continue;
        const Vec grad = eta.gradient_in_element(e);
        const QuadRule rule = element_quadrature(m, e);
        for (int q = 0; q < rule.n; ++q) {
            const Vec& x = rule.points[q];
            const double mismatch = eta.value_in_element(e, x) - data.eta_d(x);
            total += rule.weights[q] * ((grad - data.tracking_vector(x)).squaredNorm() +
                                        mismatch * mismatch);
        }
    }
    return total;
}

namespace {

// Gradient of the transported target potential, D T_s^T (A o T_s).
Vec transported_target_gradient(const ProblemData& data, const TransportMap& map, double s,
                                const Vec& x) {
    return map.jacobian_matrix(s, x).transpose() * data.tracking_vector(map.transport(s, x));
}

// Tracking functional of the transported problem on the fixed mesh.
double pulled_back_tracking(const FemField& eta_s, const ProblemData& data,
                            const TransportMap& map, double s) {
    const Mesh& m = *eta_s.mesh;
    double total = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
        const Vec grad = eta_s.gradient_in_element(e);
        const QuadRule rule = element_quadrature(m, e);
        for (int q = 0; q < rule.n; ++q) {
            const Vec& x = rule.points[q];
            const Mat b = map.pullback(s, x);
            const double js = map.jacobian_det(s, x);
            const Vec gmis = grad - transported_target_gradient(data, map, s, x);
            const double vmis = eta_s.value_in_element(e, x) - data.eta_d(map.transport(s, x));
            total += rule.weights[q] * (gmis.dot(b * gmis) + vmis * vmis * js);
        }
    }
    return total;
}

}  // namespace

ShapeSensitivityReport shape_derivative(const MeshPtr& mesh, const ProblemData& data,
                                        const VelocityField& velocity,
                                        const SolveOptions& options) {
    const FemField eta0 = solve_direct(mesh, data, options);
    const FemField p0 = solve_adjoint(mesh, data, eta0, options);
    const TransportMap map{velocity};

    ShapeSensitivityReport report;
    const Mesh& m = *mesh;
    for (int e = 0; e < m.element_count(); ++e) {
        const Vec ge = eta0.gradient_in_element(e);
        const Vec gp = p0.gradient_in_element(e);
        const QuadRule rule = element_quadrature(m, e);
        for (int q = 0; q < rule.n; ++q) {
            const Vec& x = rule.points[q];
            const double w = rule.weights[q];
            const Mat bprime = map.pullback_derivative_zero(x);
            const double div = velocity.divergence(x);
            const Vec v = velocity.value(x);
            const Vec gmis = ge - data.tracking_vector(x);
            const double vmis = eta0.value_in_element(e, x) - data.eta_d(x);
            const Vec grad_av =
                data.hess_eta_tilde(x) * v + velocity.jacobian(x).transpose() * data.tracking_vector(x);

            report.terms[0] += w * gmis.dot(bprime * gmis);
            report.terms[1] += w * (-2.0) * gmis.dot(grad_av);
            report.terms[2] += w * (vmis * vmis * div - 2.0 * vmis * data.grad_eta_d(x).dot(v));
            report.terms[3] += w * (gp.dot(bprime * ge) -
                                    data.k * data.k * eta0.value_in_element(e, x) *
                                        p0.value_in_element(e, x) * div);
            report.terms[4] += w * (-(data.f(x) * div + data.grad_f(x).dot(v)) *
                                    p0.value_in_element(e, x));
        }
    }
    for (double t : report.terms) report.dJ += t;
    return report;
}

std::vector<std::pair<double, double>> fd_shape_check(const MeshPtr& mesh,
                                                      const ProblemData& data,
                                                      const VelocityField& velocity,
                                                      const std::vector<double>& s_list,
                                                      const SolveOptions& options) {
    const TransportMap map{velocity};
    const FemField eta0 = solve_direct_pullback(mesh, data, map, 0.0, options);
    const double j0 = pulled_back_tracking(eta0, data, map, 0.0);
    std::vector<std::pair<double, double>> out(s_list.size());
    for (std::size_t i = 0; i < s_list.size(); ++i) {
        const double s = s_list[i];
        const FemField eta_s = solve_direct_pullback(mesh, data, map, s, options);
        out[i] = {s, (pulled_back_tracking(eta_s, data, map, s) - j0) / s};
    }
    return out;
}

namespace {

struct RemainderFields {
    FemField eta0, p0;
};

double remainder_lines(const FemField& eta_s, const RemainderFields& f,
                       const ProblemData& data, const TransportMap& map, double s) {
    const Mesh& m = *eta_s.mesh;
    double total = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
        const Vec g_s = eta_s.gradient_in_element(e);
        const Vec g_0 = f.eta0.gradient_in_element(e);
        const Vec g_avg = 0.5 * (g_s + g_0);
        const Vec g_diff = g_s - g_0;
        const Vec g_q = g_diff / s;
        const Vec g_p = f.p0.gradient_in_element(e);
        const QuadRule rule = element_quadrature(m, e);
        for (int q = 0; q < rule.n; ++q) {
            const Vec& x = rule.points[q];
            const double w = rule.weights[q];
            const double u_s = eta_s.value_in_element(e, x);
            const double u_0 = f.eta0.value_in_element(e, x);
            const double avg = 0.5 * (u_s + u_0);
            const double diff = u_s - u_0;
            const double qv = diff / s;
            const Mat b_rate = (map.pullback(s, x) - Mat::Identity()) / s;
            const double j_rate = (map.jacobian_det(s, x) - 1.0) / s;
            const Vec target_s = transported_target_gradient(data, map, s, x);
            const double eta_d_s = data.eta_d(map.transport(s, x));

            total += w * (2.0 * (b_rate * (g_avg - target_s)).dot(g_diff) +
                          s * g_q.squaredNorm());
            total += w * (2.0 * j_rate * (avg - eta_d_s) * diff -
                          2.0 * (target_s - data.tracking_vector(x)).dot(g_q));
            total += w * (-2.0 * (eta_d_s - data.eta_d(x)) * qv + s * qv * qv);
            total += w * ((b_rate * g_p).dot(g_diff) -
                          data.k * data.k * j_rate * f.p0.value_in_element(e, x) * diff);
        }
    }
    return total;
}

double remainder_definition(const FemField& eta_s, const RemainderFields& f,
                            const ProblemData& data, const TransportMap& map, double s) {
    const Mesh& m = *eta_s.mesh;
    double total = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
        const Vec g_avg = 0.5 * (eta_s.gradient_in_element(e) + f.eta0.gradient_in_element(e));
        const Vec g_q = (eta_s.gradient_in_element(e) - f.eta0.gradient_in_element(e)) / s;
        const Vec g_p = f.p0.gradient_in_element(e);
        const QuadRule rule = element_quadrature(m, e);
        for (int q = 0; q < rule.n; ++q) {
            const Vec& x = rule.points[q];
            const double w = rule.weights[q];
            const double avg = 0.5 * (eta_s.value_in_element(e, x) + f.eta0.value_in_element(e, x));
            const double qv = (eta_s.value_in_element(e, x) - f.eta0.value_in_element(e, x)) / s;
            const Mat b = map.pullback(s, x);
            const double js = map.jacobian_det(s, x);
            const Vec target_s = transported_target_gradient(data, map, s, x);
            const double eta_d_s = data.eta_d(map.transport(s, x));

            total += w * (2.0 * (b * (g_avg - target_s)).dot(g_q) +
                          2.0 * (avg - eta_d_s) * qv * js);
            total += w * ((b * g_p).dot(g_q) -
                          data.k * data.k * f.p0.value_in_element(e, x) * qv * js);
        }
    }
    return total;
}

std::vector<std::pair<double, double>> remainder_series(
    const MeshPtr& mesh, const ProblemData& data, const VelocityField& velocity,
    const std::vector<double>& s_list, const SolveOptions& options, bool via_definition) {
    const TransportMap map{velocity};
    RemainderFields fields{solve_direct_pullback(mesh, data, map, 0.0, options),
                           FemField{}};
    fields.p0 = solve_adjoint(mesh, data, fields.eta0, options);
    std::vector<std::pair<double, double>> out(s_list.size());
    for (std::size_t i = 0; i < s_list.size(); ++i) {
        const double s = s_list[i];
        const FemField eta_s = solve_direct_pullback(mesh, data, map, s, options);
        if ((eta_s.values - fields.eta0.values).isZero(0.0)) {
            out[i] = {s, 0.0};  // transported state identical; every line vanishes
            continue;
        }
        out[i] = {s, via_definition ? remainder_definition(eta_s, fields, data, map, s)
                                    : remainder_lines(eta_s, fields, data, map, s)};
    }
    return out;
}

}  // namespace

std::vector<std::pair<double, double>> remainder_R_shape(const MeshPtr& mesh,
                                                         const ProblemData& data,
                                                         const VelocityField& velocity,
                                                         const std::vector<double>& s_list,
                                                         const SolveOptions& options) {
    return remainder_series(mesh, data, velocity, s_list, options, false);
}

std::vector<std::pair<double, double>> remainder_R_shape_via_definition(
    const MeshPtr& mesh, const ProblemData& data, const VelocityField& velocity,
    const std::vector<double>& s_list, const SolveOptions& options) {
    return remainder_series(mesh, data, velocity, s_list, options, true);
}

ShapeSensitivityReport analyze_shape(const Domain& domain, const MeshPtr& mesh,
                                     const ProblemData& data, const VelocityField& velocity,
                                     const std::vector<double>& s_list,
                                     const SolveOptions& options) {
    std::vector<double> sorted = s_list;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());

    ShapeSensitivityReport report = shape_derivative(mesh, data, velocity, options);
    report.fd_samples = fd_shape_check(mesh, data, velocity, sorted, options);
    report.remainder_samples = remainder_R_shape(mesh, data, velocity, sorted, options);

    const TransportMap map{velocity};
    const FemField eta0 = solve_direct_pullback(mesh, data, map, 0.0, options);
    for (double s : sorted) {
        const FemField eta_s = solve_direct_pullback(mesh, data, map, s, options);
        FemField diff(eta0.mesh, eta_s.values - eta0.values);
        report.state_delta_samples.emplace_back(s, norms(diff).h1());
    }

    std::vector<double> xs, err, rr;
    for (const auto& [s, qv] : report.fd_samples) {
        xs.push_back(s);
        err.push_back(std::abs(qv - report.dJ));
    }
    for (const auto& [s, r] : report.remainder_samples) rr.push_back(std::abs(r));
    report.fd_error_slope = fit_loglog_slope_or(xs, err, 0.0);
    report.remainder_slope = fit_loglog_slope_or(xs, rr, 0.0);

    // beta: upper bound of the pullback spectrum and of J_s over the mesh
    // and the sampled s range (diagnostic only).
    double beta = 1.0;
    for (int e = 0; e < mesh->element_count(); ++e) {
        const Vec c = mesh->element_centroid(e);
        for (double s : sorted) {
            const Mat b = map.pullback(s, c);
            const Eigen::SelfAdjointEigenSolver<Mat> eig(b);
            beta = std::max({beta, eig.eigenvalues().maxCoeff(), map.jacobian_det(s, c)});
        }
    }
    report.coercivity_margin = 1.0 - data.k * data.k * domain.poincare_constant() * beta;
    return report;
}

}  // namespace helmsense
