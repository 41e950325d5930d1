#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace helmsense {

// The library works in 1 or 2 spatial dimensions with a single code path:
// 1D data lives in the first coordinate of a Vector2d and every map keeps
// the second coordinate as the identity. Determinants, traces and
// divergences then specialize correctly without branching.
using Vec = Eigen::Vector2d;
using Mat = Eigen::Matrix2d;

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;
using MatrixFn = std::function<Mat(const Vec&)>;

// Volume of the unit ball in R^m, m in {1, 2}.
double unit_ball_volume(int m);

// ---------------------------------------------------------------------------
// Domain

struct Domain {
    enum class Kind { interval, rectangle, disk };

    Kind kind = Kind::interval;
    int dim = 1;
    // interval: [lo.x, hi.x]; rectangle: [lo, hi] box; disk: center/radius.
    Vec lo = Vec::Zero();
    Vec hi = Vec::Zero();
    Vec center = Vec::Zero();
    double radius = 0.0;

    static Domain interval(double a, double b);
    static Domain rectangle(const Vec& lo, const Vec& hi);
    static Domain disk(const Vec& center, double radius);

    double volume() const;
    bool contains(const Vec& x) const;
    // Distance from an interior point to the outer boundary (clearance).
    double boundary_distance(const Vec& x) const;
    // 1/sqrt(lambda_1) of the Dirichlet Laplacian; analytic per shape.
    double poincare_constant() const;
};

// ---------------------------------------------------------------------------
// Velocity fields and the transport family T_s(X) = X + s V(X)

struct VelocityField {
    VectorFn value;
    MatrixFn jacobian;
    ScalarFn divergence;

    static VelocityField zero();
    // Builds divergence as the trace of the supplied Jacobian.
    static VelocityField from_value_and_jacobian(VectorFn v, MatrixFn dv);

    // Spot checks div == tr(DV) and a finite difference of the value
    // against DV at the given points. Throws ConfigError on mismatch.
    void check_consistency(const std::vector<Vec>& points) const;
};

struct TransportMap {
    VelocityField velocity;

    Vec transport(double s, const Vec& x) const;        // T_s(x)
    Vec displacement(double s, const Vec& x) const;     // T_s(x) - x
    Mat jacobian_matrix(double s, const Vec& x) const;  // DT_s = I + s DV
    double jacobian_det(double s, const Vec& x) const;  // J_s = det DT_s

    // B(s) = J_s DT_s^{-1} DT_s^{-T}; symmetric positive definite for
    // small s. Throws SingularJacobianError when |J_s| < 1e-12.
    Mat pullback(double s, const Vec& x) const;

    // d/ds B(s) at s = 0: div V I - DV - DV^T.
    Mat pullback_derivative_zero(const Vec& x) const;

    // Largest s below which J_s stays positive at all sample points
    // (infinity when DV never shrinks orientation).
    double positive_jacobian_threshold(const std::vector<Vec>& points) const;
};

// ---------------------------------------------------------------------------
// Rectifiable perturbation sets: a point (d = 0) or a polyline (d = 1)

struct RectifiableSet {
    int d = 0;                  // Hausdorff dimension, 0 or 1
    Vec point = Vec::Zero();    // d == 0
    std::vector<Vec> polyline;  // d == 1, at least two vertices

    static RectifiableSet point_at(const Vec& x);
    static RectifiableSet polyline_through(std::vector<Vec> vertices);

    // H^d measure: 1 for a point, total length for a polyline.
    double measure() const;

    // (d_E(x), grad d_E(x)); the gradient is zero on E itself.
    std::pair<double, Vec> distance(const Vec& x) const;

    // Nearest point on E.
    Vec project(const Vec& x) const;

    // Volume parameter of the r-dilation, s = alpha_{N-d} r^{N-d}.
    double dilation_volume(double r, int ambient_dim) const;

    // Same set with polyline segments subdivided to at most max_len, so
    // the segment-wise quadrature resolves integrands that are only
    // piecewise smooth (discrete fields). Points are returned unchanged.
    RectifiableSet refined(double max_len) const;
};

// Integral of g over E against H^d: point evaluation for d = 0, composite
// 3-point Gauss-Legendre along the polyline for d = 1.
double hd_integral(const RectifiableSet& set, const ScalarFn& g);

}  // namespace helmsense
