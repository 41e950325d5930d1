// Acceptance suite: one check per numbered criterion, each printing a
// pass/fail line with the measured numbers. Exits nonzero when any
// criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "helmsense/errors.hpp"
#include "helmsense/numerics.hpp"
#include "helmsense/oracle1d.hpp"
#include "helmsense/topo_sensitivity.hpp"

using namespace helmsense;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[criterion %2d] %s  %s  (%s)\n", number, ok ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// 4-point Gauss error of a 1D field against a closed form.
std::pair<double, double> field_error(const FemField& field,
                                      const std::function<double(double)>& exact,
                                      const std::function<double(double)>& exact_prime) {
    const Mesh& m = *field.mesh;
    const double gp[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                          0.8611363115940526};
    const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                          0.3478548451374538};
    double l2sq = 0.0, h1sq = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
        const double x0 = m.nodes[m.elements[e].v[0]].x();
        const double x1 = m.nodes[m.elements[e].v[1]].x();
        const double half = 0.5 * (x1 - x0), mid = 0.5 * (x0 + x1);
        const double ge = field.gradient_in_element(e).x();
        for (int q = 0; q < 4; ++q) {
            const double x = mid + half * gp[q];
            const double w = half * gw[q];
            const double ev = field.value_in_element(e, Vec(x, 0.0)) - exact(x);
            const double eg = ge - exact_prime(x);
            l2sq += w * ev * ev;
            h1sq += w * eg * eg;
        }
    }
    return {std::sqrt(l2sq), std::sqrt(h1sq)};
}

// --------------------------------------------------------------------------

void criterion_1_oracle_convergence() {
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const Oracle1DConfig cfg{2.0, 0.1};
    std::vector<double> hs, eta_l2, eta_h1, p_l2, p_h1;
    for (int lvl = 3; lvl <= 7; ++lvl) {
        const double h = std::pow(2.0, -lvl);
        const auto mesh = generate_mesh(Domain::interval(-1, 1), h);
        const FemField eta0 = solve_direct(mesh, data);
        const FemField p0 = solve_adjoint(mesh, data, eta0);
        const auto [el2, eh1] = field_error(
            eta0, [&](double x) { return eta0_exact(cfg, x); },
            [&](double x) { return eta0_prime_exact(cfg, x); });
        const auto [pl2, ph1] = field_error(
            p0, [&](double x) { return p0_exact(cfg, x).first; },
            [&](double x) { return p0_exact(cfg, x).second; });
        hs.push_back(h);
        eta_l2.push_back(el2);
        eta_h1.push_back(eh1);
        p_l2.push_back(pl2);
        p_h1.push_back(ph1);
    }
    const double s_el2 = fit_loglog(hs, eta_l2).slope;
    const double s_eh1 = fit_loglog(hs, eta_h1).slope;
    const double s_pl2 = fit_loglog(hs, p_l2).slope;
    const double s_ph1 = fit_loglog(hs, p_h1).slope;
    const bool ok = std::abs(s_el2 - 2.0) <= 0.2 && std::abs(s_eh1 - 1.0) <= 0.2 &&
                    std::abs(s_pl2 - 2.0) <= 0.2 && std::abs(s_ph1 - 1.0) <= 0.2;
    report(1, "state and adjoint converge to the 1D closed forms", ok,
           "eta L2 " + fmt(s_el2) + ", eta H1 " + fmt(s_eh1) + ", p L2 " + fmt(s_pl2) +
               ", p H1 " + fmt(s_ph1));
}

struct ShapeCase {
    std::string name;
    Domain domain;
    double h;
    std::string preset;
    VelocityField velocity;
};

// An off-center rectangle so the rotational field genuinely deforms the
// domain, and a quarter-strength dilation so the transported family stays
// an O(1) perturbation over the sampled s range.
std::vector<ShapeCase> make_shape_cases() {
    const Domain rect = Domain::rectangle(Vec(-0.8, -1.0), Vec(1.2, 0.7));
    VelocityField quarter_dilation = VelocityField::from_value_and_jacobian(
        [](const Vec& x) { return (0.25 * x).eval(); },
        [](const Vec&) { return (0.25 * Mat::Identity()).eval(); });
    std::vector<ShapeCase> cases;
    cases.push_back({"interval/tracking1d/bump1d", Domain::interval(-1, 1), 1.0 / 128.0,
                     "tracking1d", make_velocity_preset("bump1d")});
    cases.push_back({"rectangle/trig2d/rotation", rect, 0.1, "trig2d",
                     make_velocity_preset("rotation")});
    cases.push_back({"rectangle/poly2d/dilation", rect, 0.1, "poly2d", quarter_dilation});
    cases.push_back({"interval/tracking1d/translate", Domain::interval(-1, 1), 1.0 / 128.0,
                     "tracking1d", make_velocity_preset("translate_x")});
    return cases;
}

void criteria_2_3_shape_derivative_and_remainder() {
    const std::vector<double> s_list{1e-1, 1e-2, 1e-3, 1e-4};
    bool ok2 = true, ok3 = true;
    std::string detail2, detail3;
    for (const auto& c : make_shape_cases()) {
        const auto mesh = generate_mesh(c.domain, c.h);
        const ProblemData data = make_data_preset(c.preset, 2.0);
        const auto report_ = analyze_shape(c.domain, mesh, data, c.velocity, s_list);
        std::vector<double> xs, errs;
        double q_at_1e3 = 0.0;
        for (const auto& [s, q] : report_.fd_samples) {
            xs.push_back(s);
            errs.push_back(std::abs(q - report_.dJ));
            if (std::abs(s - 1e-3) < 1e-15) q_at_1e3 = q;
        }
        const double slope = fit_loglog(xs, errs).slope;
        // Error at s = 1e-3 relative to the derivative, floored at 1 the
        // way the remainder criterion floors its bound: the family with a
        // boundary-fixing velocity has dJ = 0 identically.
        const double rel =
            std::abs(q_at_1e3 - report_.dJ) / std::max(1.0, std::abs(report_.dJ));
        if (slope < 0.9 || rel > 1e-2) ok2 = false;
        detail2 += c.name + ": slope " + fmt(slope) + " rel " + fmt(rel) + "; ";

        const double r_min = report_.remainder_samples.back().second;
        const double bound = 1e-3 * std::max(1.0, std::abs(report_.dJ));
        bool decreasing = true;
        for (std::size_t i = 0; i + 1 < report_.remainder_samples.size(); ++i)
            if (std::abs(report_.remainder_samples[i + 1].second) >
                std::abs(report_.remainder_samples[i].second) * 1.01)
                decreasing = false;
        if (std::abs(r_min) > bound || !decreasing) ok3 = false;
        detail3 += c.name + ": |R(smin)| " + fmt(std::abs(r_min)) + " bound " + fmt(bound) + "; ";
    }
    // V = 0 must produce an exactly zero remainder series.
    {
        const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 64.0);
        const ProblemData data = make_data_preset("tracking1d", 2.0);
        const auto rs = remainder_R_shape(mesh, data, VelocityField::zero(), s_list);
        for (const auto& [s, r] : rs)
            if (r != 0.0) ok3 = false;
        detail3 += "V=0: R identically zero";
    }
    report(2, "shape derivative matches finite differences", ok2, detail2);
    report(3, "averaged-adjoint remainder vanishes", ok3, detail3);
}

void criterion_4_source_scaling() {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 128.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0, 0.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
    const std::vector<double> radii{0.1, 0.05, 0.025, 0.0125, 0.00625};

    std::vector<double> svals, deltas;
    for (double r : radii) {
        const MeshPtr prepared = refine_for_source(mesh, e, r);
        const FemField eta0 = solve_direct(prepared, data);
        const FemField eta_s = solve_source_perturbed_prepared(prepared, data, e, r);
        svals.push_back(2.0 * r);
        deltas.push_back(norms(FemField(prepared, eta_s.values - eta0.values)).h1());
    }
    const double delta_slope = fit_loglog(svals, deltas).slope;
    const auto topo = topo_source(mesh, data, e, radii);
    const bool ok = delta_slope >= 0.9 && topo.remainder_slope >= 0.9;
    report(4, "source family obeys the first-order estimate", ok,
           "state-delta slope " + fmt(delta_slope) + ", remainder slope " +
               fmt(topo.remainder_slope));
}

void criterion_5_point_source_derivative() {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 256.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
    const std::vector<double> radii{0.1, 0.05, 0.025, 0.0125};
    bool ok = true;
    std::string detail;
    for (double gamma : {0.0, 0.5, 2.0}) {
        const ProblemData data = make_data_preset("tracking1d", 2.0, gamma);
        const auto rep = topo_source(mesh, data, e, radii);
        const double q = rep.fd_samples.back().second;
        const double rel = std::abs(q - rep.closed_form_part) /
                           std::max(std::abs(rep.closed_form_part), 1e-14);
        if (rel > 0.05) ok = false;
        detail += "gamma=" + fmt(gamma) + ": rel " + fmt(rel) + "; ";
    }
    {
        const ProblemData data = make_data_preset("tracking1d", 2.0, 1.0);
        const auto rep = topo_source(mesh, data, e, radii);
        bool zero = rep.closed_form_part == 0.0;
        for (const auto& [s, q] : rep.fd_samples) zero = zero && q == 0.0;
        if (!zero) ok = false;
        detail += "gamma=1: exactly zero";
    }
    report(5, "point-source derivative matches the quotient", ok, detail);
}

void criterion_6_series_reproduction() {
    const double h = 1.0 / 8192.0;
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
    const Domain dom = Domain::interval(-1, 1);
    const Oracle1DConfig cfg{2.0, 0.1};

    const auto background = generate_mesh(dom, h);
    const FemField eta0 = solve_direct(background, data);
    const FemField p0 = solve_adjoint(background, data, eta0);

    bool ok = true;
    std::string detail;
    for (double r : {0.2, 0.1, 0.05}) {
        const auto rows = remainder_series_exact(cfg, {r});
        const auto holed = generate_mesh(dom, h, std::make_pair(e, r));
        const FemField eta_r = solve_hole(holed, data, HoleBC::dirichlet);
        const auto [l0, l1] =
            l0_l1(eta_r, interpolate(eta0, holed), interpolate(p0, holed), e, r);
        const double rel = std::abs(l0 - rows[0].l0) / std::abs(rows[0].l0);
        if (rel > 1e-4 || std::abs(l1) > 1e-10 || std::abs(rows[0].l1) > 1e-10) ok = false;
        detail += "r=" + fmt(r) + ": l0 rel " + fmt(rel) + " |l1| " + fmt(std::abs(l1)) + "; ";
    }
    // Trend of the closed-form series against the stated blow-up: the
    // measured trend is recorded either way, disagreement is a valid
    // documented outcome.
    const auto oracle = oracle1d_report(cfg, {0.2, 0.1, 0.05, 0.025, 0.0125});
    const bool flag_consistent = oracle.trend_diverges == (oracle.r_trend_slope < -0.1);
    if (!flag_consistent) ok = false;
    detail += "R(r) slope " + fmt(oracle.r_trend_slope) +
              (oracle.trend_diverges ? " (diverges: agrees with the stated blow-up)"
                                     : " (decays: disagrees with the stated blow-up;"
                                       " recorded outcome)");
    report(6, "1D benchmark series reproduced", ok, detail);
}

void criterion_7_pullback_algebra() {
    bool ok = true;
    std::string detail;
    const TransportMap dil2{make_velocity_preset("dilation")};
    const TransportMap dil1{make_velocity_preset("dilation1d")};
    const Vec x2(0.37, -0.21), x1(0.42, 0.0);

    ok = ok && (dil2.pullback(0.0, x2) - Mat::Identity()).norm() == 0.0;
    for (double s : {0.02, 0.05, 0.1, 0.2}) {
        ok = ok && (dil2.pullback(s, x2) - Mat::Identity()).norm() <= 1e-12;
        ok = ok && std::abs(dil1.pullback(s, x1)(0, 0) - 1.0 / (1.0 + s)) <= 1e-12;
    }
    detail += "B(0)=I exact, dilation closed forms to 1e-12; ";

    VelocityField shear = VelocityField::from_value_and_jacobian(
        [](const Vec& x) { return Vec(0.4 * x.y() + 0.2 * x.x() * x.x(), -0.3 * x.x()); },
        [](const Vec& x) {
            Mat m;
            m << 0.4 * x.x(), 0.4, -0.3, 0.0;
            return m;
        });
    VelocityField stretch = VelocityField::from_value_and_jacobian(
        [](const Vec& x) { return Vec(0.5 * x.x(), -0.2 * x.y() + 0.3 * x.x() * x.y()); },
        [](const Vec& x) {
            Mat m;
            m << 0.5, 0.0, 0.3 * x.y(), -0.2 + 0.3 * x.x();
            return m;
        });
    for (const TransportMap& map : {TransportMap{shear}, TransportMap{stretch}}) {
        std::vector<double> svals{1e-1, 1e-2, 1e-3, 1e-4}, errs;
        for (double s : svals)
            errs.push_back(
                ((map.pullback(s, x2) - Mat::Identity()) / s - map.pullback_derivative_zero(x2))
                    .norm());
        const double slope = fit_loglog(svals, errs).slope;
        if (slope < 0.8 || slope > 1.2) ok = false;
        detail += "rate slope " + fmt(slope) + "; ";
    }
    report(7, "pullback algebra closed forms and rates", ok, detail);
}

void criterion_8_trivial_invariants() {
    bool ok = true;
    std::string detail;

    // V = 0 kills the derivative exactly.
    const auto mesh1 = generate_mesh(Domain::interval(-1, 1), 1.0 / 64.0);
    const ProblemData tracking = make_data_preset("tracking1d", 2.0);
    ok = ok && shape_derivative(mesh1, tracking, VelocityField::zero()).dJ == 0.0;
    detail += "V=0 dJ=0; ";

    // Perfectly matched discrete data annihilates the adjoint.
    {
        const FemField eta0 = solve_direct(mesh1, tracking);
        ProblemData matched = tracking;
        matched.eta_d = [eta0](const Vec& x) { return eta0.eval(x).first; };
        matched.grad_eta_tilde = [eta0](const Vec& x) { return eta0.eval(x).second; };
        const FemField p0 = solve_adjoint(mesh1, matched, eta0);
        ok = ok && p0.values.norm() == 0.0;
        detail += "matched data p0=0; ";
    }

    // Tracking the exact solution: J decays at second order.
    {
        const Oracle1DConfig cfg{2.0, 0.1};
        ProblemData matched = tracking;
        matched.eta_d = [cfg](const Vec& x) { return eta0_exact(cfg, x.x()); };
        matched.grad_eta_d = [cfg](const Vec& x) {
            return Vec(eta0_prime_exact(cfg, x.x()), 0.0);
        };
        matched.eta_tilde = matched.eta_d;
        matched.grad_eta_tilde = matched.grad_eta_d;
        std::vector<double> hs, js;
        for (int lvl = 3; lvl <= 6; ++lvl) {
            const double h = std::pow(2.0, -lvl);
            const auto mesh = generate_mesh(Domain::interval(-1, 1), h);
            hs.push_back(h);
            js.push_back(eval_J(solve_direct(mesh, matched), matched));
        }
        const double slope = fit_loglog(hs, js).slope;
        if (std::abs(slope - 2.0) > 0.2) ok = false;
        detail += "J(h) slope " + fmt(slope) + "; ";
    }

    // Zero data: every hole-variant output is exactly zero.
    {
        const ProblemData zero = make_data_preset("zero", 2.0);
        const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
        for (HoleBC bc : {HoleBC::dirichlet, HoleBC::neumann}) {
            const auto rep =
                topo_hole(Domain::interval(-1, 1), zero, e, bc, {0.2, 0.1, 0.05}, 0.02);
            ok = ok && rep.closed_form_part == 0.0 && rep.dJ.has_value() && *rep.dJ == 0.0;
            for (const auto& row : rep.hole_series)
                ok = ok && row.l0 == 0.0 && row.l1 == 0.0;
        }
        detail += "zero data holes all zero";
    }
    report(8, "trivial invariants", ok, detail);
}

void criterion_9_corrector_bound() {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 128.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0, 0.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
    const auto probe = corrector_bound_probe(
        mesh, data, e, std::vector<double>{0.1, 0.05, 0.025, 0.0125, 0.00625});
    const bool ok = probe.bounded && probe.max_min_ratio <= 3.0;
    report(9, "corrector quotient stays bounded", ok,
           "max/min over the last decade " + fmt(probe.max_min_ratio) + ", verdict " +
               (probe.bounded ? "bounded" : "unbounded"));
}

void criterion_10_resonance_guard() {
    bool ok = true;
    std::string detail;
    for (int lvl = 4; lvl <= 7; ++lvl) {
        const double h = std::pow(2.0, -lvl);
        const auto mesh = generate_mesh(Domain::interval(-1, 1), h);
        const ProblemData data = make_data_preset("constant", M_PI / 2.0);
        bool threw = false;
        try {
            solve_direct(mesh, data);
        } catch (const ResonanceError&) {
            threw = true;
        }
        if (!threw) ok = false;
        detail += "h=2^-" + std::to_string(lvl) + (threw ? " raised; " : " SILENT; ");
    }
    report(10, "resonant wavenumber is refused", ok, detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1_oracle_convergence();
    criteria_2_3_shape_derivative_and_remainder();
    criterion_4_source_scaling();
    criterion_5_point_source_derivative();
    criterion_6_series_reproduction();
    criterion_7_pullback_algebra();
    criterion_8_trivial_invariants();
    criterion_9_corrector_bound();
    criterion_10_resonance_guard();
    std::printf("%s (%d failing)\n", failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
                failures);
    return failures == 0 ? 0 : 1;
}
