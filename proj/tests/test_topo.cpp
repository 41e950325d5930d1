#include <doctest.h>

#include <cmath>

#include "helmsense/numerics.hpp"
#include "helmsense/oracle1d.hpp"
#include "helmsense/topo_sensitivity.hpp"

using namespace helmsense;

TEST_CASE("source variant with gamma = 1 produces identically zero output") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 32.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0, 1.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
    const auto report = topo_source(mesh, data, e, {0.1, 0.05, 0.025});
    CHECK(report.closed_form_part == 0.0);
    CHECK(*report.dJ == 0.0);
    for (const auto& [s, r] : report.remainder_samples) CHECK(r == 0.0);
    for (const auto& [s, q] : report.fd_samples) CHECK(q == 0.0);
}

TEST_CASE("source variant: vanishing source at the point kills the derivative") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 32.0);
    ProblemData data = make_data_preset("tracking1d", 2.0, 0.5);
    const Vec x0(0.0, 0.0);  // the benchmark source -x vanishes at 0
    const auto report = topo_source(mesh, data, RectifiableSet::point_at(x0), {0.1, 0.05});
    CHECK(report.closed_form_part == 0.0);
}

TEST_CASE("source remainder is a nonnegative scaled norm with unit slope") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 64.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0, 0.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
    const auto report = topo_source(mesh, data, e, {0.1, 0.05, 0.025, 0.0125});
    for (const auto& [s, r] : report.remainder_samples) CHECK(r >= 0.0);
    CHECK(report.remainder_slope >= 0.9);
    CHECK(!report.divergence_flag);
}

TEST_CASE("source derivative matches the finite-difference series") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 128.0);
    for (double gamma : {0.0, 0.5, 2.0}) {
        const ProblemData data = make_data_preset("tracking1d", 2.0, gamma);
        const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
        const auto report = topo_source(mesh, data, e, {0.1, 0.05, 0.025, 0.0125});
        const double quotient = report.fd_samples.back().second;
        CHECK(std::abs(quotient - report.closed_form_part) <=
              0.05 * std::abs(report.closed_form_part));
    }
}

TEST_CASE("point derivative agrees with the adjoint closed form") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 256.0);
    const double gamma = 0.5;
    const ProblemData data = make_data_preset("tracking1d", 2.0, gamma);
    const Oracle1DConfig cfg{2.0, 0.1};
    const auto report =
        topo_source(mesh, data, RectifiableSet::point_at(Vec(0.5, 0.0)), {0.1, 0.05});
    const double expected = (1.0 - gamma) * (-0.5) * p0_exact(cfg, 0.5).first;
    CHECK(report.closed_form_part == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("l0_l1: equal fields give zero, l1 flips sign with the adjoint") {
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
    const double r = 0.2;
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 0.05, std::make_pair(e, r));
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const FemField eta_r = solve_hole(mesh, data, HoleBC::dirichlet);

    const auto background = generate_mesh(Domain::interval(-1, 1), 0.05);
    const FemField eta0_bg = solve_direct(background, data);
    const FemField p0_bg = solve_adjoint(background, data, eta0_bg);
    const FemField eta0 = interpolate(eta0_bg, mesh);
    const FemField p0 = interpolate(p0_bg, mesh);

    const auto [l0_same, l1_same] = l0_l1(eta_r, eta_r, p0, e, r);
    CHECK(l0_same == 0.0);
    CHECK(l1_same == 0.0);

    const auto [l0, l1] = l0_l1(eta_r, eta0, p0, e, r);
    CHECK(l0 > 0.0);
    const FemField p0_neg(mesh, (-p0.values).eval());
    const auto [l0b, l1b] = l0_l1(eta_r, eta0, p0_neg, e, r);
    CHECK(l0b == l0);
    CHECK(l1b == -l1);
}

TEST_CASE("1D hole series reproduces the closed-form norms") {
    // Fine mesh so the discrete difference quotient tracks the closed
    // form to 1e-6 relative.
    const double h = 1.0 / 8192.0;
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
    const Domain dom = Domain::interval(-1, 1);

    const auto background = generate_mesh(dom, h);
    const FemField eta0_bg = solve_direct(background, data);
    const FemField p0_bg = solve_adjoint(background, data, eta0_bg);

    const double r = 0.1;
    const Oracle1DConfig cfg{2.0, r};
    const auto rows = remainder_series_exact(cfg, {r});
    const auto holed = generate_mesh(dom, h, std::make_pair(e, r));
    const FemField eta_r = solve_hole(holed, data, HoleBC::dirichlet);
    const auto [l0, l1] = l0_l1(eta_r, interpolate(eta0_bg, holed), interpolate(p0_bg, holed),
                                e, r);
    CHECK(l0 == doctest::Approx(rows[0].l0).epsilon(1e-6));
    CHECK(std::abs(l1 - rows[0].l1) <= 1e-8);
}

TEST_CASE("hole variants with zero data output zero") {
    const Domain dom = Domain::interval(-1, 1);
    const ProblemData data = make_data_preset("zero", 2.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
    for (HoleBC bc : {HoleBC::dirichlet, HoleBC::neumann}) {
        const auto report = topo_hole(dom, data, e, bc, {0.2, 0.1, 0.05}, 0.02);
        CHECK(report.closed_form_part == 0.0);
        for (const auto& row : report.hole_series) {
            CHECK(row.l0 == 0.0);
            CHECK(row.l1 == 0.0);
        }
        CHECK(!report.divergence_flag);
        REQUIRE(report.dJ.has_value());
        CHECK(*report.dJ == 0.0);
    }
}

TEST_CASE("1D Dirichlet hole: trend matches the oracle series") {
    const Domain dom = Domain::interval(-1, 1);
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
    const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
    const auto report = topo_hole(dom, data, e, HoleBC::dirichlet, radii, 1.0 / 512.0);

    const Oracle1DConfig cfg{2.0, 0.1};
    const auto oracle = oracle1d_report(cfg, radii);
    // The closed-form series decays; the measured series must agree on
    // the verdict (no divergence flag) and track l0 + l1 per radius.
    CHECK(report.divergence_flag == oracle.trend_diverges);
    REQUIRE(report.hole_series.size() == oracle.rows.size());
    for (std::size_t i = 0; i < oracle.rows.size(); ++i) {
        CHECK(std::abs(report.hole_series[i].l1) < 1e-8);
        CHECK(report.hole_series[i].l0 ==
              doctest::Approx(oracle.rows[i].l0).epsilon(2e-3));
    }
}

TEST_CASE("2D hole reports complete without errors for both conditions") {
    const Domain dom = Domain::rectangle(Vec(-1, -1), Vec(1, 1));
    const ProblemData data = make_data_preset("trig2d", 2.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.2, 0.1));
    for (HoleBC bc : {HoleBC::dirichlet, HoleBC::neumann}) {
        const auto report = topo_hole(dom, data, e, bc, {0.3, 0.2, 0.13}, 0.08);
        CHECK(report.hole_series.size() == 3);
        for (const auto& row : report.hole_series) CHECK(row.l0 >= 0.0);
        CHECK(std::isfinite(report.closed_form_part));
    }
}

TEST_CASE("2D segment source: derivative matches the arc-length formula") {
    const Domain dom = Domain::rectangle(Vec(-1, -1), Vec(1, 1));
    const auto mesh = generate_mesh(dom, 0.05);
    const ProblemData data = make_data_preset("trig2d", 2.0, 0.5);
    const RectifiableSet seg =
        RectifiableSet::polyline_through({Vec(-0.3, 0.2), Vec(0.4, 0.2)});
    // Radii stay above the mesh scale; below it the thin dilation strip
    // outruns the P1 resolution.
    const auto report = topo_source(mesh, data, seg, {0.12, 0.08, 0.04});

    // Independent route: (1 - gamma) int_E f p0 dH^1 with a dense rule.
    const FemField eta0 = solve_direct(mesh, data);
    const FemField p0 = solve_adjoint(mesh, data, eta0);
    double dense = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const Vec x(-0.3 + 0.7 * (i + 0.5) / n, 0.2);
        dense += 0.7 / n * data.f(x) * p0.eval(x).first;
    }
    dense *= (1.0 - data.gamma);
    CHECK(report.closed_form_part == doctest::Approx(dense).epsilon(1e-6));
    // Finite-difference series approaches the same value.
    const double q = report.fd_samples.back().second;
    CHECK(std::abs(q - report.closed_form_part) <=
          0.08 * std::abs(report.closed_form_part));
    CHECK(std::abs(report.fd_samples.front().second - report.closed_form_part) >
          std::abs(q - report.closed_form_part));
}

TEST_CASE("corrector probe: zero family is bounded at zero") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 32.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0);
    const auto probe = corrector_bound_probe(mesh, data, TransportMap{VelocityField::zero()},
                                             std::vector<double>{1e-1, 3e-2, 1e-2});
    for (const auto& [s, q] : probe.samples) CHECK(q == 0.0);
    CHECK(probe.bounded);
}

TEST_CASE("corrector probe: a decaying quotient is bounded, not flagged") {
    // At a point where the source vanishes the state difference shrinks
    // faster than s, so the quotient decays; that widens max/min but is
    // the opposite of unboundedness.
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 64.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0, 0.0);
    const RectifiableSet e = RectifiableSet::point_at(Vec(0.0, 0.0));
    const auto probe =
        corrector_bound_probe(mesh, data, e, std::vector<double>{0.2, 0.1, 0.05, 0.025});
    CHECK(probe.growth_ratio <= 1.0 + 1e-9);
    CHECK(probe.bounded);
    // The quotients really do decay across the decade.
    CHECK(probe.samples.back().second < probe.samples.front().second);
}

TEST_CASE("corrector probe: transported and source families stay bounded") {
    const auto mesh = generate_mesh(Domain::interval(-1, 1), 1.0 / 64.0);
    const ProblemData data = make_data_preset("tracking1d", 2.0, 0.0);
    const auto pullback = corrector_bound_probe(
        mesh, data, TransportMap{make_velocity_preset("bump1d")},
        std::vector<double>{1e-1, 5e-2, 2e-2, 1e-2});
    CHECK(pullback.bounded);
    CHECK(pullback.max_min_ratio <= 3.0);

    const RectifiableSet e = RectifiableSet::point_at(Vec(0.5, 0.0));
    const auto source =
        corrector_bound_probe(mesh, data, e, std::vector<double>{0.1, 0.05, 0.02, 0.01});
    CHECK(source.bounded);
}
