#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "helmsense/errors.hpp"
#include "helmsense/numerics.hpp"
#include "helmsense/oracle1d.hpp"
#include "helmsense/topo_sensitivity.hpp"

namespace helmsense::cli {

namespace {

using nlohmann::json;

constexpr unsigned kValidationSeed = 7u;

struct ExperimentConfig {
    Domain domain = Domain::interval(-1.0, 1.0);
    double k = 2.0;
    double gamma = 1.0;
    std::string data_preset = "tracking1d";
    std::string velocity_preset = "zero";
    std::vector<double> s_grid;
    std::vector<double> r_grid;
    RectifiableSet set = RectifiableSet::point_at(Vec(0.0, 0.0));
    bool has_set = false;
    HoleBC bc = HoleBC::dirichlet;
    double h = 0.01;
    int levels = 5;
    std::string outdir = "out";
};

void require_decreasing_positive(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw ConfigError("config", std::string(name) + " grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0))
            throw ConfigError("config", std::string(name) + " grid must be positive");
        if (i > 0 && !(grid[i] < grid[i - 1]))
            throw ConfigError("config", std::string(name) + " grid must be strictly decreasing");
    }
}

Domain parse_domain(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "interval") return Domain::interval(j.at("a").get<double>(), j.at("b").get<double>());
    if (kind == "rectangle")
        return Domain::rectangle(Vec(j.at("x0").get<double>(), j.at("y0").get<double>()),
                                 Vec(j.at("x1").get<double>(), j.at("y1").get<double>()));
    if (kind == "disk")
        return Domain::disk(Vec(j.at("cx").get<double>(), j.at("cy").get<double>()),
                            j.at("radius").get<double>());
    throw ConfigError("config", "unknown domain kind '" + kind + "'");
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    try {
        ExperimentConfig cfg;
        const json& problem = j.at("problem");
        cfg.domain = parse_domain(problem.at("domain"));
        cfg.k = problem.at("k").get<double>();
        if (problem.contains("gamma")) cfg.gamma = problem.at("gamma").get<double>();
        if (problem.contains("preset")) cfg.data_preset = problem.at("preset").get<std::string>();

        if (j.contains("perturbation")) {
            const json& pert = j.at("perturbation");
            if (pert.contains("velocity"))
                cfg.velocity_preset = pert.at("velocity").get<std::string>();
            if (pert.contains("s_grid")) cfg.s_grid = pert.at("s_grid").get<std::vector<double>>();
            if (pert.contains("r_grid")) cfg.r_grid = pert.at("r_grid").get<std::vector<double>>();
            if (pert.contains("bc")) {
                const std::string bc = pert.at("bc").get<std::string>();
                if (bc == "dirichlet") cfg.bc = HoleBC::dirichlet;
                else if (bc == "neumann") cfg.bc = HoleBC::neumann;
                else throw ConfigError("config", "unknown bc '" + bc + "'");
            }
            if (pert.contains("set")) {
                const json& set = pert.at("set");
                const int d = set.at("dim").get<int>();
                if (d == 0) {
                    const auto pt = set.at("point").get<std::vector<double>>();
                    cfg.set = RectifiableSet::point_at(
                        Vec(pt.at(0), pt.size() > 1 ? pt.at(1) : 0.0));
                } else if (d == 1) {
                    std::vector<Vec> vertices;
                    for (const auto& v : set.at("vertices"))
                        vertices.push_back(Vec(v.at(0).get<double>(), v.at(1).get<double>()));
                    cfg.set = RectifiableSet::polyline_through(std::move(vertices));
                } else {
                    throw ConfigError("config", "set dimension must be 0 or 1");
                }
                cfg.has_set = true;
            }
        }
        if (j.contains("discretization")) {
            const json& disc = j.at("discretization");
            if (disc.contains("h")) cfg.h = disc.at("h").get<double>();
            if (disc.contains("levels")) cfg.levels = disc.at("levels").get<int>();
        }
        if (j.contains("output") && j.at("output").contains("outdir"))
            cfg.outdir = j.at("output").at("outdir").get<std::string>();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("missing or malformed field: ") + e.what());
    }
}

std::string fmt(double v) {
    if (v == 0.0) return "0";  // normalize the sign of zero
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class OutputWriter {
public:
    explicit OutputWriter(const std::string& outdir) : outdir_(outdir) {
        std::filesystem::create_directories(outdir);
    }
    std::ofstream csv(const std::string& name) {
        std::ofstream out(outdir_ + "/" + name);
        if (!out) throw ConfigError("output", "cannot write to " + outdir_);
        return out;
    }
    std::string path(const std::string& name) const { return outdir_ + "/" + name; }
    void summary_line(const std::string& key, const std::string& value) {
        summary_ << key << ": " << value << '\n';
    }
    void summary_line(const std::string& key, double value) { summary_line(key, fmt(value)); }
    void flush_summary() {
        std::ofstream out(outdir_ + "/summary.txt");
        if (!out) throw ConfigError("output", "cannot write to " + outdir_);
        out << summary_.str();
    }

private:
    std::string outdir_;
    std::ostringstream summary_;
};

ProblemData make_data(const ExperimentConfig& cfg) {
    ProblemData data = make_data_preset(cfg.data_preset, cfg.k, cfg.gamma);
    data.validate(cfg.domain, 10, kValidationSeed);
    return data;
}

void run_direct(const ExperimentConfig& cfg, OutputWriter& out, bool with_adjoint) {
    const ProblemData data = make_data(cfg);
    const MeshPtr mesh = generate_mesh(cfg.domain, cfg.h);
    const FemField eta0 = solve_direct(mesh, data);
    write_mesh_file(out.path("mesh.txt"), *mesh);

    if (with_adjoint) {
        const FemField p0 = solve_adjoint(mesh, data, eta0);
        auto csv = out.csv("adjoint.csv");
        write_field_csv(csv, p0);
        out.summary_line("p0_l2", norms(p0).l2);
    } else {
        auto csv = out.csv("direct.csv");
        write_field_csv(csv, eta0);
    }
    out.summary_line("J", eval_J(eta0, data));
    out.summary_line("nodes", static_cast<double>(mesh->node_count()));
}

void run_shape(const ExperimentConfig& cfg, OutputWriter& out) {
    if (cfg.s_grid.empty()) throw ConfigError("config", "shape requires an s_grid");
    require_decreasing_positive(cfg.s_grid, "s");
    const ProblemData data = make_data(cfg);
    const MeshPtr mesh = generate_mesh(cfg.domain, cfg.h);
    const VelocityField velocity = make_velocity_preset(cfg.velocity_preset);
    const auto report = analyze_shape(cfg.domain, mesh, data, velocity, cfg.s_grid);

    auto csv = out.csv("shape.csv");
    csv << "s,fd_quotient,abs_error,remainder,state_delta_h1\n";
    for (std::size_t i = 0; i < report.fd_samples.size(); ++i) {
        csv << fmt(report.fd_samples[i].first) << ',' << fmt(report.fd_samples[i].second) << ','
            << fmt(std::abs(report.fd_samples[i].second - report.dJ)) << ','
            << fmt(report.remainder_samples[i].second) << ','
            << fmt(report.state_delta_samples[i].second) << '\n';
    }
    out.summary_line("dJ", report.dJ);
    const char* term_names[5] = {"term_pullback_tracking", "term_transported_target",
                                 "term_l2_tracking", "term_adjoint_bilinear", "term_source"};
    for (int i = 0; i < 5; ++i) out.summary_line(term_names[i], report.terms[i]);
    out.summary_line("fd_error_slope", report.fd_error_slope);
    out.summary_line("remainder_slope", report.remainder_slope);
    out.summary_line("coercivity_margin", report.coercivity_margin);
    const double r_min = report.remainder_samples.back().second;
    const bool remainder_ok = std::abs(r_min) <= 1e-3 * std::max(1.0, std::abs(report.dJ));
    out.summary_line("verdict_remainder_vanishes", remainder_ok ? "pass" : "fail");
    out.summary_line("verdict_fd_slope", report.fd_error_slope >= 0.9 || report.dJ == 0.0
                                             ? "pass"
                                             : "fail");
}

void run_topo_source(const ExperimentConfig& cfg, OutputWriter& out) {
    if (!cfg.has_set) throw ConfigError("config", "topo-source requires a perturbation set");
    require_decreasing_positive(cfg.r_grid, "r");
    const ProblemData data = make_data(cfg);
    const MeshPtr mesh = generate_mesh(cfg.domain, cfg.h);
    const auto report = topo_source(mesh, data, cfg.set, cfg.r_grid);

    auto csv = out.csv("topo-source.csv");
    csv << "r,s,fd_quotient,remainder\n";
    for (std::size_t i = 0; i < cfg.r_grid.size(); ++i) {
        csv << fmt(cfg.r_grid[i]) << ',' << fmt(report.fd_samples[i].first) << ','
            << fmt(report.fd_samples[i].second) << ','
            << fmt(report.remainder_samples[i].second) << '\n';
    }
    out.summary_line("D_T_J", report.closed_form_part);
    out.summary_line("remainder_slope", report.remainder_slope);

    const auto probe = corrector_bound_probe(mesh, data, cfg.set, cfg.r_grid);
    out.summary_line("corrector_max_min_ratio", probe.max_min_ratio);
    out.summary_line("corrector_growth_ratio", probe.growth_ratio);
    out.summary_line("verdict_corrector", probe.bounded ? "bounded" : "unbounded");
}

void run_topo_hole(const ExperimentConfig& cfg, OutputWriter& out) {
    if (!cfg.has_set) throw ConfigError("config", "topo-hole requires a perturbation set");
    require_decreasing_positive(cfg.r_grid, "r");
    const ProblemData data = make_data(cfg);
    const auto report = topo_hole(cfg.domain, data, cfg.set, cfg.bc, cfg.r_grid, cfg.h);

    auto csv = out.csv("topo-hole.csv");
    csv << "r,s,l0,l1,l0_plus_l1\n";
    for (const auto& row : report.hole_series)
        csv << fmt(row.r) << ',' << fmt(row.s) << ',' << fmt(row.l0) << ',' << fmt(row.l1)
            << ',' << fmt(row.l0 + row.l1) << '\n';
    out.summary_line("closed_form_part", report.closed_form_part);
    out.summary_line("bc", cfg.bc == HoleBC::dirichlet ? "dirichlet" : "neumann");
    out.summary_line("trend", report.trend == TrendVerdict::converged    ? "converged"
                              : report.trend == TrendVerdict::diverged   ? "diverged"
                                                                         : "inconclusive");
    if (report.l_hat) out.summary_line("l_hat", *report.l_hat);
    if (report.dJ) out.summary_line("dJ", *report.dJ);
    out.summary_line("divergence_flag", report.divergence_flag ? "true" : "false");
}

void run_oracle1d(const ExperimentConfig& cfg, OutputWriter& out) {
    require_decreasing_positive(cfg.r_grid, "r");
    if (cfg.domain.kind != Domain::Kind::interval)
        throw ConfigError("config", "oracle1d requires an interval domain");
    const Oracle1DConfig ocfg{cfg.k, cfg.r_grid.front()};
    const auto report = oracle1d_report(ocfg, cfg.r_grid);

    auto csv = out.csv("oracle1d.csv");
    csv << "r,l0,l1,R\n";
    for (const auto& row : report.rows)
        csv << fmt(row.r) << ',' << fmt(row.l0) << ',' << fmt(row.l1) << ',' << fmt(row.R)
            << '\n';
    out.summary_line("r_trend_slope", report.r_trend_slope);
    out.summary_line("series_diverges", report.trend_diverges ? "true" : "false");
    out.summary_line("displayed_norms_agree", report.display_agrees ? "true" : "false");
    // The stated blow-up of the remainder series is compared against the
    // measured trend of the same closed forms; a mismatch is recorded,
    // not patched over.
    out.summary_line("divergence_claim_matches_series",
                     report.trend_diverges ? "true" : "false");
}

void run_convergence(const ExperimentConfig& cfg, OutputWriter& out) {
    if (cfg.domain.kind != Domain::Kind::interval || cfg.data_preset != "tracking1d")
        throw ConfigError("config",
                          "convergence requires the interval domain with the tracking1d preset");
    if (cfg.levels < 2) throw ConfigError("config", "convergence requires at least 2 levels");
    const ProblemData data = make_data(cfg);
    const Oracle1DConfig ocfg{cfg.k, 0.1};

    struct Row {
        double h, eta_l2, eta_h1, p_l2, p_h1;
    };
    std::vector<Row> rows(cfg.levels);
    const int workers = worker_count();
    parallel_for(cfg.levels, workers, [&](int lvl) {
        const double h = cfg.h / std::pow(2.0, lvl);
        const MeshPtr mesh = generate_mesh(cfg.domain, h);
        const FemField eta0 = solve_direct(mesh, data);
        const FemField p0 = solve_adjoint(mesh, data, eta0);
        auto errs = [&](const FemField& u, auto exact, auto exact_prime) {
            double l2 = 0.0, h1 = 0.0;
            for (int e = 0; e < mesh->element_count(); ++e) {
                const QuadRule rule = element_quadrature(*mesh, e);
                const double ge = u.gradient_in_element(e).x();
                for (int q = 0; q < rule.n; ++q) {
                    const double x = rule.points[q].x();
                    const double ev = u.value_in_element(e, rule.points[q]) - exact(x);
                    const double eg = ge - exact_prime(x);
                    l2 += rule.weights[q] * ev * ev;
                    h1 += rule.weights[q] * eg * eg;
                }
            }
            return std::make_pair(std::sqrt(l2), std::sqrt(h1));
        };
        const auto [el2, eh1] = errs(
            eta0, [&](double x) { return eta0_exact(ocfg, x); },
            [&](double x) { return eta0_prime_exact(ocfg, x); });
        const auto [pl2, ph1] = errs(
            p0, [&](double x) { return p0_exact(ocfg, x).first; },
            [&](double x) { return p0_exact(ocfg, x).second; });
        rows[lvl] = {h, el2, eh1, pl2, ph1};
    });

    auto csv = out.csv("convergence.csv");
    csv << "h,eta_l2,eta_h1,p_l2,p_h1\n";
    std::vector<double> hs, e2, e1, p2, p1;
    for (const Row& r : rows) {
        csv << fmt(r.h) << ',' << fmt(r.eta_l2) << ',' << fmt(r.eta_h1) << ',' << fmt(r.p_l2)
            << ',' << fmt(r.p_h1) << '\n';
        hs.push_back(r.h);
        e2.push_back(r.eta_l2);
        e1.push_back(r.eta_h1);
        p2.push_back(r.p_l2);
        p1.push_back(r.p_h1);
    }
    out.summary_line("workers", static_cast<double>(workers));
    out.summary_line("eta_l2_slope", fit_loglog(hs, e2).slope);
    out.summary_line("eta_h1_slope", fit_loglog(hs, e1).slope);
    out.summary_line("p_l2_slope", fit_loglog(hs, p2).slope);
    out.summary_line("p_h1_slope", fit_loglog(hs, p1).slope);
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Shape and topological sensitivity experiments for the Helmholtz tracking "
                 "functional"};
    app.require_subcommand(1);
    std::string config_path, outdir_override;
    double h_override = 0.0;

    app.set_help_flag("--help", "print usage");
    const std::vector<std::string> names = {"direct",    "adjoint",  "shape",      "topo-source",
                                            "topo-hole", "oracle1d", "convergence"};
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->set_help_flag("--help", "print usage");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--h", h_override, "mesh size override");
        sub->add_option("--outdir", outdir_override, "output directory override");
    }

    try {
        std::vector<const char*> argv{"helmsense"};
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 2;
    }

    try {
        ExperimentConfig cfg = parse_config(config_path);
        if (h_override > 0.0) cfg.h = h_override;
        if (!outdir_override.empty()) cfg.outdir = outdir_override;

        OutputWriter out(cfg.outdir);
        const std::string sub = app.get_subcommands().front()->get_name();
        out.summary_line("subcommand", sub);
        out.summary_line("preset", cfg.data_preset);
        out.summary_line("k", cfg.k);
        out.summary_line("h", cfg.h);
        out.summary_line("seed", static_cast<double>(kValidationSeed));

        if (sub == "direct") run_direct(cfg, out, false);
        else if (sub == "adjoint") run_direct(cfg, out, true);
        else if (sub == "shape") run_shape(cfg, out);
        else if (sub == "topo-source") run_topo_source(cfg, out);
        else if (sub == "topo-hole") run_topo_hole(cfg, out);
        else if (sub == "oracle1d") run_oracle1d(cfg, out);
        else if (sub == "convergence") run_convergence(cfg, out);
        out.flush_summary();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical error in " << e.operation() << ": " << e.what() << '\n';
        return 3;
    }
}

}  // namespace helmsense::cli
