#include "helmsense/problem.hpp"

#include <cmath>
#include <random>

#include "helmsense/errors.hpp"
#include "helmsense/oracle1d.hpp"

namespace helmsense {

void ProblemData::validate(const Domain& domain, int n_points, unsigned seed) const {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(domain.lo.x(), domain.hi.x());
    std::uniform_real_distribution<double> uy(domain.lo.y(), domain.hi.y());
    const double step = 1e-6, tol = 1e-5;

    auto check_gradient = [&](const ScalarFn& fn, const VectorFn& grad, const Vec& x,
                              const char* what) {
        const Vec g = grad(x);
        for (int j = 0; j < domain.dim; ++j) {
            Vec e = Vec::Zero();
            e[j] = step;
            const double fd = (fn(x + e) - fn(x)) / step;
            if (std::abs(fd - g[j]) > tol * (1.0 + std::abs(g[j])))
                throw ConfigError("ProblemData::validate",
                                  std::string(what) + " gradient fails the spot check");
        }
    };
    for (int i = 0; i < n_points; ++i) {
        Vec x(ux(rng), domain.dim == 2 ? uy(rng) : 0.0);
        if (domain.kind == Domain::Kind::disk)
            x = domain.center + 0.5 * domain.radius * Vec(std::cos(i * 2.39996), std::sin(i * 2.39996));
        check_gradient(f, grad_f, x, "source");
        check_gradient(eta_tilde, grad_eta_tilde, x, "target potential");
        check_gradient(eta_d, grad_eta_d, x, "tracking target");
    }
}

namespace {

ProblemData zero_data(double k, double gamma) {
    ProblemData d;
    d.k = k;
    d.gamma = gamma;
    d.f = [](const Vec&) { return 0.0; };
    d.grad_f = [](const Vec&) { return Vec::Zero().eval(); };
    d.eta_tilde = d.f;
    d.grad_eta_tilde = d.grad_f;
    d.hess_eta_tilde = [](const Vec&) { return Mat::Zero().eval(); };
    d.eta_d = d.f;
    d.grad_eta_d = d.grad_f;
    return d;
}

}  // namespace

ProblemData make_data_preset(const std::string& name, double k, double gamma) {
    if (name == "zero") return zero_data(k, gamma);
    if (name == "constant") {
        ProblemData d = zero_data(k, gamma);
        d.f = [](const Vec&) { return 1.0; };
        return d;
    }
    if (name == "tracking1d") return oracle1d_problem_data(k, gamma);
    if (name == "trig2d") {
        ProblemData d = zero_data(k, gamma);
        d.f = [](const Vec& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()) + 0.5; };
        d.grad_f = [](const Vec& x) {
            return Vec(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                       M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
        };
        d.eta_tilde = [](const Vec& x) { return 0.15 * (x.x() * x.x() - x.y() * x.y()); };
        d.grad_eta_tilde = [](const Vec& x) { return Vec(0.3 * x.x(), -0.3 * x.y()); };
        d.hess_eta_tilde = [](const Vec&) {
            Mat m = Mat::Zero();
            m(0, 0) = 0.3;
            m(1, 1) = -0.3;
            return m;
        };
        d.eta_d = [](const Vec& x) { return 0.25 * x.x(); };
        d.grad_eta_d = [](const Vec&) { return Vec(0.25, 0.0); };
        return d;
    }
    if (name == "poly2d") {
        ProblemData d = zero_data(k, gamma);
        d.f = [](const Vec& x) { return 1.0 + x.x() * x.y(); };
        d.grad_f = [](const Vec& x) { return Vec(x.y(), x.x()); };
        d.eta_tilde = [](const Vec& x) { return 0.2 * x.x() * x.y(); };
        d.grad_eta_tilde = [](const Vec& x) { return Vec(0.2 * x.y(), 0.2 * x.x()); };
        d.hess_eta_tilde = [](const Vec&) {
            Mat m = Mat::Zero();
            m(0, 1) = m(1, 0) = 0.2;
            return m;
        };
        d.eta_d = [](const Vec& x) { return 0.25 * (x.x() + x.y()); };
        d.grad_eta_d = [](const Vec&) { return Vec(0.25, 0.25); };
        return d;
    }
    throw ConfigError("make_data_preset", "unknown data preset '" + name + "'");
}

VelocityField make_velocity_preset(const std::string& name) {
    if (name == "zero") return VelocityField::zero();
    if (name == "bump1d") {
        return VelocityField::from_value_and_jacobian(
            [](const Vec& x) { return Vec(1.0 - x.x() * x.x(), 0.0); },
            [](const Vec& x) {
                Mat m = Mat::Zero();
                m(0, 0) = -2.0 * x.x();
                return m;
            });
    }
    if (name == "dilation") {
        return VelocityField::from_value_and_jacobian(
            [](const Vec& x) { return x; }, [](const Vec&) { return Mat::Identity().eval(); });
    }
    if (name == "dilation1d") {
        return VelocityField::from_value_and_jacobian(
            [](const Vec& x) { return Vec(x.x(), 0.0); },
            [](const Vec&) {
                Mat m = Mat::Zero();
                m(0, 0) = 1.0;
                return m;
            });
    }
    if (name == "rotation") {
        return VelocityField::from_value_and_jacobian(
            [](const Vec& x) { return Vec(x.y(), -x.x()); },
            [](const Vec&) {
                Mat m = Mat::Zero();
                m(0, 1) = 1.0;
                m(1, 0) = -1.0;
                return m;
            });
    }
    if (name == "translate_x") {
        return VelocityField::from_value_and_jacobian(
            [](const Vec&) { return Vec(1.0, 0.0); }, [](const Vec&) { return Mat::Zero().eval(); });
    }
    throw ConfigError("make_velocity_preset", "unknown velocity preset '" + name + "'");
}

}  // namespace helmsense
