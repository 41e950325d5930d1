#include "helmsense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "helmsense/errors.hpp"

namespace helmsense {

double unit_ball_volume(int m) {
    switch (m) {
        case 1: return 2.0;
        case 2: return M_PI;
        default: throw ConfigError("unit_ball_volume", "dimension must be 1 or 2");
    }
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::interval(double a, double b) {
    if (!(b > a)) throw ConfigError("Domain::interval", "requires b > a");
    Domain d;
    d.kind = Kind::interval;
    d.dim = 1;
    d.lo = Vec(a, 0.0);
    d.hi = Vec(b, 0.0);
    return d;
}

Domain Domain::rectangle(const Vec& lo, const Vec& hi) {
    if (!(hi.x() > lo.x()) || !(hi.y() > lo.y()))
        throw ConfigError("Domain::rectangle", "requires positive side lengths");
    Domain d;
    d.kind = Kind::rectangle;
    d.dim = 2;
    d.lo = lo;
    d.hi = hi;
    return d;
}

Domain Domain::disk(const Vec& center, double radius) {
    if (!(radius > 0.0)) throw ConfigError("Domain::disk", "requires positive radius");
    Domain d;
    d.kind = Kind::disk;
    d.dim = 2;
    d.center = center;
    d.radius = radius;
    return d;
}

double Domain::volume() const {
    switch (kind) {
        case Kind::interval: return hi.x() - lo.x();
        case Kind::rectangle: return (hi.x() - lo.x()) * (hi.y() - lo.y());
        case Kind::disk: return M_PI * radius * radius;
    }
    return 0.0;
}

bool Domain::contains(const Vec& x) const {
    switch (kind) {
        case Kind::interval: return x.x() >= lo.x() && x.x() <= hi.x();
        case Kind::rectangle:
            return x.x() >= lo.x() && x.x() <= hi.x() && x.y() >= lo.y() &&
                   x.y() <= hi.y();
        case Kind::disk: return (x - center).norm() <= radius;
    }
    return false;
}

double Domain::boundary_distance(const Vec& x) const {
    switch (kind) {
        case Kind::interval:
            return std::min(x.x() - lo.x(), hi.x() - x.x());
        case Kind::rectangle:
            return std::min(std::min(x.x() - lo.x(), hi.x() - x.x()),
                            std::min(x.y() - lo.y(), hi.y() - x.y()));
        case Kind::disk: return radius - (x - center).norm();
    }
    return 0.0;
}

double Domain::poincare_constant() const {
    switch (kind) {
        case Kind::interval: return (hi.x() - lo.x()) / M_PI;
        case Kind::rectangle: {
            const double lx = hi.x() - lo.x();
            const double ly = hi.y() - lo.y();
            return 1.0 / (M_PI * std::sqrt(1.0 / (lx * lx) + 1.0 / (ly * ly)));
        }
        case Kind::disk: {
            // First zero of the Bessel function J0.
            constexpr double j01 = 2.404825557695773;
            return radius / j01;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// VelocityField

VelocityField VelocityField::zero() {
    VelocityField v;
    v.value = [](const Vec&) { return Vec::Zero().eval(); };
    v.jacobian = [](const Vec&) { return Mat::Zero().eval(); };
    v.divergence = [](const Vec&) { return 0.0; };
    return v;
}

VelocityField VelocityField::from_value_and_jacobian(VectorFn v, MatrixFn dv) {
    VelocityField field;
    field.value = std::move(v);
    field.jacobian = std::move(dv);
    field.divergence = [jac = field.jacobian](const Vec& x) {
        return jac(x).trace();
    };
    return field;
}

void VelocityField::check_consistency(const std::vector<Vec>& points) const {
    const double fd_step = 1e-6;
    for (const Vec& x : points) {
        const Mat dv = jacobian(x);
        const double div = divergence(x);
        if (std::abs(div - dv.trace()) > 1e-10 * (1.0 + std::abs(div)))
            throw ConfigError("VelocityField::check_consistency",
                              "divergence does not match trace of the Jacobian");
        for (int j = 0; j < 2; ++j) {
            Vec e = Vec::Zero();
            e[j] = fd_step;
            const Vec fd = (value(x + e) - value(x - e)) / (2.0 * fd_step);
            const Vec col = dv.col(j);
            if ((fd - col).norm() > 1e-5 * (1.0 + col.norm()))
                throw ConfigError("VelocityField::check_consistency",
                                  "finite difference of V does not match DV");
        }
    }
}

// ---------------------------------------------------------------------------
// TransportMap

Vec TransportMap::transport(double s, const Vec& x) const {
    if (s < 0.0) throw ConfigError("transport", "requires s >= 0");
    if (s == 0.0) return x;
    return x + s * velocity.value(x);
}

Vec TransportMap::displacement(double s, const Vec& x) const {
    return transport(s, x) - x;
}

Mat TransportMap::jacobian_matrix(double s, const Vec& x) const {
    return Mat::Identity() + s * velocity.jacobian(x);
}

double TransportMap::jacobian_det(double s, const Vec& x) const {
    return jacobian_matrix(s, x).determinant();
}

Mat TransportMap::pullback(double s, const Vec& x) const {
    const Mat dt = jacobian_matrix(s, x);
    const double det = dt.determinant();
    if (std::abs(det) < 1e-12)
        throw SingularJacobianError("pullback_matrix",
                                    "transport Jacobian is singular at this point");
    const Mat inv = dt.inverse();
    return det * inv * inv.transpose();
}

Mat TransportMap::pullback_derivative_zero(const Vec& x) const {
    const Mat dv = velocity.jacobian(x);
    return velocity.divergence(x) * Mat::Identity() - dv - dv.transpose();
}

double TransportMap::positive_jacobian_threshold(const std::vector<Vec>& points) const {
    // J_s(x) = 1 + s tr DV + s^2 det DV; the valid range ends at the
    // smallest positive root over the sample set.
    double threshold = std::numeric_limits<double>::infinity();
    for (const Vec& x : points) {
        const Mat dv = velocity.jacobian(x);
        const double b = dv.trace();
        const double c = dv.determinant();
        double root = std::numeric_limits<double>::infinity();
        if (std::abs(c) < 1e-14) {
            if (b < 0.0) root = -1.0 / b;
        } else {
            const double disc = b * b - 4.0 * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                for (double cand : {(-b - sq) / (2.0 * c), (-b + sq) / (2.0 * c)})
                    if (cand > 0.0) root = std::min(root, cand);
            }
        }
        threshold = std::min(threshold, root);
    }
    return threshold;
}

// ---------------------------------------------------------------------------
// RectifiableSet

RectifiableSet RectifiableSet::point_at(const Vec& x) {
    RectifiableSet set;
    set.d = 0;
    set.point = x;
    return set;
}

RectifiableSet RectifiableSet::polyline_through(std::vector<Vec> vertices) {
    if (vertices.size() < 2)
        throw ConfigError("RectifiableSet::polyline_through",
                          "polyline needs at least two vertices");
    RectifiableSet set;
    set.d = 1;
    set.polyline = std::move(vertices);
    if (set.measure() <= 0.0)
        throw ConfigError("RectifiableSet::polyline_through",
                          "polyline has zero length");
    return set;
}

double RectifiableSet::measure() const {
    if (d == 0) return 1.0;
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i)
        len += (polyline[i + 1] - polyline[i]).norm();
    return len;
}

namespace {

Vec closest_point_on_segment(const Vec& a, const Vec& b, const Vec& x) {
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return a;
    const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

}  // namespace

Vec RectifiableSet::project(const Vec& x) const {
    if (d == 0) return point;
    double best = std::numeric_limits<double>::infinity();
    Vec proj = polyline.front();
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const Vec cand = closest_point_on_segment(polyline[i], polyline[i + 1], x);
        const double dist = (x - cand).norm();
        if (dist < best) {
            best = dist;
            proj = cand;
        }
    }
    return proj;
}

std::pair<double, Vec> RectifiableSet::distance(const Vec& x) const {
    const Vec p = project(x);
    const double dist = (x - p).norm();
    if (dist <= 1e-12) return {dist, Vec::Zero()};
    return {dist, ((x - p) / dist).eval()};
}

double RectifiableSet::dilation_volume(double r, int ambient_dim) const {
    if (!(r > 0.0)) throw ConfigError("dilation_volume", "requires r > 0");
    const int codim = ambient_dim - d;
    if (codim < 1) throw ConfigError("dilation_volume", "set dimension too large");
    return unit_ball_volume(codim) * std::pow(r, codim);
}

RectifiableSet RectifiableSet::refined(double max_len) const {
    if (d == 0) return *this;
    if (!(max_len > 0.0)) throw ConfigError("RectifiableSet::refined", "requires max_len > 0");
    std::vector<Vec> out;
    out.push_back(polyline.front());
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const Vec a = polyline[i], b = polyline[i + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / max_len)));
        for (int j = 1; j <= pieces; ++j)
            out.push_back(a + (b - a) * (static_cast<double>(j) / pieces));
    }
    return polyline_through(std::move(out));
}

double hd_integral(const RectifiableSet& set, const ScalarFn& g) {
    if (set.d == 0) return g(set.point);
    // 3-point Gauss-Legendre per segment, exact through degree 5.
    constexpr double node = 0.7745966692414834;  // sqrt(3/5)
    constexpr double w0 = 8.0 / 9.0, w1 = 5.0 / 9.0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < set.polyline.size(); ++i) {
        const Vec a = set.polyline[i];
        const Vec b = set.polyline[i + 1];
        const double half = 0.5 * (b - a).norm();
        const Vec mid = 0.5 * (a + b);
        const Vec dir = 0.5 * (b - a);
        total += half * (w0 * g(mid) + w1 * g(mid - node * dir) + w1 * g(mid + node * dir));
    }
    return total;
}

}  // namespace helmsense
