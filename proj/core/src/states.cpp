#include "helmsense/states.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "helmsense/errors.hpp"

namespace helmsense {

FemField solve_direct_pullback(const MeshPtr& mesh, const ProblemData& data,
                               const TransportMap& map, double s,
                               const SolveOptions& options) {
    MatrixFn coeff = [&map, s](const Vec& x) { return map.pullback(s, x); };
    ScalarFn weight = [&map, s](const Vec& x) {
        const double j = map.jacobian_det(s, x);
        if (!(j > 0.0))
            throw SingularJacobianError("solve_direct_pullback",
                                        "transport Jacobian not positive on the mesh");
        return j;
    };
    ScalarFn source = [&map, &data, s](const Vec& x) { return data.f(map.transport(s, x)); };
    LinearSystem sys = assemble(mesh, data.k, coeff, weight, source);
    sys.constrain(BoundaryTag::outer);
    return solve(sys, options);
}

FemField solve_direct(const MeshPtr& mesh, const ProblemData& data,
                      const SolveOptions& options) {
    return solve_direct_pullback(mesh, data, TransportMap{VelocityField::zero()}, 0.0,
                                 options);
}

FemField solve_adjoint(const MeshPtr& mesh, const ProblemData& data, const FemField& eta0,
                       const SolveOptions& options) {
    if (eta0.mesh.get() != mesh.get())
        throw ConfigError("solve_adjoint", "state lives on a different mesh");
    LinearSystem sys = assemble(mesh, data.k, std::optional<MatrixFn>{},
                                std::optional<ScalarFn>{}, ScalarFn([](const Vec&) { return 0.0; }));
    sys.rhs = assemble_gradient_rhs(
        *mesh,
        [&](int e, const Vec& x) {
            return (-2.0 * (eta0.gradient_in_element(e) - data.tracking_vector(x))).eval();
        },
        [&](int e, const Vec& x) {
            return -2.0 * (eta0.value_in_element(e, x) - data.eta_d(x));
        });
    sys.constrain(BoundaryTag::outer);
    return solve(sys, options);
}

MeshPtr refine_for_source(const MeshPtr& mesh, const RectifiableSet& set, double r) {
    if (mesh->dim == 2) return mesh;
    if (set.d != 0)
        throw ConfigError("refine_for_source", "1D perturbation sets must be points");
    const double x0 = set.point.x();
    std::vector<double> pts;
    pts.reserve(mesh->nodes.size() + 8);
    for (const Vec& p : mesh->nodes) pts.push_back(p.x());
    const double lo = *std::min_element(pts.begin(), pts.end());
    const double hi = *std::max_element(pts.begin(), pts.end());
    if (x0 - r < lo || x0 + r > hi)
        throw MeshError("refine_for_source", "dilation reaches outside the mesh");
    // Element-aligned dilation with >= 4 interior elements (8 Gauss points).
    const int n_inside = 5;
    for (int i = 0; i <= n_inside; ++i)
        pts.push_back(x0 - r + 2.0 * r * i / n_inside);
    // Drop pre-existing points that nearly collide with the new ones.
    std::sort(pts.begin(), pts.end());
    std::vector<double> cleaned;
    for (double x : pts) {
        if (!cleaned.empty() && x - cleaned.back() < 1e-10) continue;
        cleaned.push_back(x);
    }
    return interval_mesh_from_breakpoints(std::move(cleaned));
}

namespace {

// Load assembly with the gamma mask, subdividing straddling elements in 2D
// until at least min_points quadrature points land inside the dilation.
Eigen::VectorXd masked_load(const Mesh& mesh, const ProblemData& data,
                            const RectifiableSet& set, double r, int min_points) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.node_count());
    const bool mask_active = data.gamma != 1.0;
    auto masked_f = [&](const Vec& x) {
        return mask_active && set.distance(x).first <= r ? data.gamma * data.f(x) : data.f(x);
    };

    int depth = 0, inside = 0;
    auto count_inside = [&](int subdivisions) {
        int count = 0;
        for (int e = 0; e < mesh.element_count(); ++e) {
            const QuadRule rule = element_quadrature(mesh, e);
            if (mesh.dim == 1 || subdivisions == 0) {
                for (int q = 0; q < rule.n; ++q)
                    if (set.distance(rule.points[q]).first <= r) ++count;
            }
        }
        return count;
    };
    if (mesh.dim == 1) {
        inside = count_inside(0);
        if (mask_active && inside < min_points)
            throw MeshError("solve_source_perturbed",
                            "dilation holds fewer than the required quadrature points");
        for (int e = 0; e < mesh.element_count(); ++e) {
            const auto& el = mesh.elements[e];
            const QuadRule rule = element_quadrature(mesh, e);
            double fe[2] = {};
            for (int q = 0; q < rule.n; ++q) {
                const auto bary = mesh.barycentric(e, rule.points[q]);
                const double fv = masked_f(rule.points[q]);
                for (int i = 0; i < 2; ++i) fe[i] += rule.weights[q] * fv * bary[i];
            }
            for (int i = 0; i < 2; ++i) rhs[el.v[i]] += fe[i];
        }
        return rhs;
    }

    // 2D: recursive midpoint subdivision of triangles that straddle the
    // dilation boundary; plain rule elsewhere.
    struct Tri {
        Vec a, b, c;
    };
    auto straddles = [&](int e) {
        const auto& el = mesh.elements[e];
        int in = 0;
        for (int i = 0; i < 3; ++i)
            if (set.distance(mesh.nodes[el.v[i]]).first <= r) ++in;
        if (in != 0 && in != 3) return true;
        const double dc = set.distance(mesh.element_centroid(e)).first;
        return std::abs(dc - r) < mesh.h;
    };
    for (depth = 2; mask_active && depth <= 7; ++depth) {
        inside = 0;
        for (int e = 0; e < mesh.element_count(); ++e) {
            const auto& el = mesh.elements[e];
            const int levels = straddles(e) ? depth : 0;
            std::vector<Tri> tris{{mesh.nodes[el.v[0]], mesh.nodes[el.v[1]], mesh.nodes[el.v[2]]}};
            for (int l = 0; l < levels; ++l) {
                std::vector<Tri> next;
                next.reserve(tris.size() * 4);
                for (const Tri& t : tris) {
                    const Vec ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
                    next.push_back({t.a, ab, ca});
                    next.push_back({ab, t.b, bc});
                    next.push_back({ca, bc, t.c});
                    next.push_back({ab, bc, ca});
                }
                tris = std::move(next);
            }
            for (const Tri& t : tris) {
                const Vec mids[3] = {0.5 * (t.a + t.b), 0.5 * (t.b + t.c), 0.5 * (t.c + t.a)};
                for (const Vec& x : mids)
                    if (set.distance(x).first <= r) ++inside;
            }
        }
        if (inside >= min_points) break;
    }
    if (mask_active && inside < min_points)
        throw MeshError("solve_source_perturbed",
                        "dilation too small for the load quadrature on this mesh");
    if (!mask_active) depth = 0;

    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& el = mesh.elements[e];
        const int levels = depth > 0 && straddles(e) ? depth : 0;
        std::vector<Tri> tris{{mesh.nodes[el.v[0]], mesh.nodes[el.v[1]], mesh.nodes[el.v[2]]}};
        for (int l = 0; l < levels; ++l) {
            std::vector<Tri> next;
            next.reserve(tris.size() * 4);
            for (const Tri& t : tris) {
                const Vec ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
                next.push_back({t.a, ab, ca});
                next.push_back({ab, t.b, bc});
                next.push_back({ca, bc, t.c});
                next.push_back({ab, bc, ca});
            }
            tris = std::move(next);
        }
        double fe[3] = {};
        for (const Tri& t : tris) {
            const double area = 0.5 * std::abs((t.b.x() - t.a.x()) * (t.c.y() - t.a.y()) -
                                               (t.c.x() - t.a.x()) * (t.b.y() - t.a.y()));
            const Vec mids[3] = {0.5 * (t.a + t.b), 0.5 * (t.b + t.c), 0.5 * (t.c + t.a)};
            for (const Vec& x : mids) {
                const auto bary = mesh.barycentric(e, x);
                const double fv = masked_f(x);
                for (int i = 0; i < 3; ++i) fe[i] += (area / 3.0) * fv * bary[i];
            }
        }
        for (int i = 0; i < 3; ++i) rhs[el.v[i]] += fe[i];
    }
    return rhs;
}

}  // namespace

FemField solve_source_perturbed_prepared(const MeshPtr& prepared, const ProblemData& data,
                                         const RectifiableSet& set, double r,
                                         const SolveOptions& options) {
    LinearSystem sys = assemble(prepared, data.k, std::optional<MatrixFn>{},
                                std::optional<ScalarFn>{}, ScalarFn([](const Vec&) { return 0.0; }));
    sys.rhs = masked_load(*prepared, data, set, r, 8);
    sys.constrain(BoundaryTag::outer);
    return solve(sys, options);
}

FemField solve_source_perturbed(const MeshPtr& mesh, const ProblemData& data,
                                const RectifiableSet& set, double r,
                                const SolveOptions& options) {
    return solve_source_perturbed_prepared(refine_for_source(mesh, set, r), data, set, r,
                                           options);
}

FemField solve_hole(const MeshPtr& mesh_with_hole, const ProblemData& data, HoleBC bc,
                    const SolveOptions& options) {
    if (!mesh_with_hole->has_tag(BoundaryTag::hole))
        throw ConfigError("solve_hole", "mesh carries no hole tag");
    LinearSystem sys = assemble(mesh_with_hole, data.k, std::optional<MatrixFn>{},
                                std::optional<ScalarFn>{}, data.f);
    sys.constrain(BoundaryTag::outer);
    if (bc == HoleBC::dirichlet) sys.constrain(BoundaryTag::hole);
    return solve(sys, options);
}

FemField extend_into_hole(const FemField& eta_r, const MeshPtr& hole_mesh,
                          const ProblemData& data, const SolveOptions& options) {
    LinearSystem sys = assemble(hole_mesh, data.k, std::optional<MatrixFn>{},
                                std::optional<ScalarFn>{}, data.f);
    // Dirichlet trace from the outer solution; the hole mesh places its
    // boundary nodes exactly on the outer mesh's hole nodes.
    const auto trace_ids = hole_mesh->tagged_nodes(BoundaryTag::hole);
    Eigen::VectorXd trace(trace_ids.size());
    for (std::size_t i = 0; i < trace_ids.size(); ++i)
        trace[static_cast<int>(i)] = eta_r.eval(hole_mesh->nodes[trace_ids[i]]).first;
    sys.constrain_nodes(trace_ids, trace);
    const FemField inner = solve(sys, options);

    std::vector<int> inner_to_merged;
    const MeshPtr merged = merge_meshes(*eta_r.mesh, *hole_mesh, &inner_to_merged);
    Eigen::VectorXd values = Eigen::VectorXd::Zero(merged->node_count());
    values.head(eta_r.values.size()) = eta_r.values;
    for (int i = 0; i < inner.values.size(); ++i) values[inner_to_merged[i]] = inner.values[i];
    return FemField(merged, std::move(values));
}

}  // namespace helmsense
