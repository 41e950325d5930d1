#include "helmsense/fem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "helmsense/errors.hpp"

namespace helmsense {

QuadRule element_quadrature(const Mesh& mesh, int e) {
    QuadRule rule;
    const auto& el = mesh.elements[e];
    if (mesh.dim == 1) {
        const double x0 = mesh.nodes[el.v[0]].x();
        const double x1 = mesh.nodes[el.v[1]].x();
        const double mid = 0.5 * (x0 + x1);
        const double half = 0.5 * (x1 - x0);
        const double g = half / std::sqrt(3.0);
        rule.n = 2;
        rule.points[0] = Vec(mid - g, 0.0);
        rule.points[1] = Vec(mid + g, 0.0);
        rule.weights[0] = rule.weights[1] = half;
        return rule;
    }
    const Vec a = mesh.nodes[el.v[0]], b = mesh.nodes[el.v[1]], c = mesh.nodes[el.v[2]];
    const double w = mesh.element_volume(e) / 3.0;
    rule.n = 3;
    rule.points[0] = 0.5 * (a + b);
    rule.points[1] = 0.5 * (b + c);
    rule.points[2] = 0.5 * (c + a);
    rule.weights[0] = rule.weights[1] = rule.weights[2] = w;
    return rule;
}

// ---------------------------------------------------------------------------
// FemField

FemField FemField::zero(MeshPtr m) {
    const int n = m->node_count();
    return FemField(std::move(m), Eigen::VectorXd::Zero(n));
}

double FemField::value_in_element(int e, const Vec& x) const {
    const auto& el = mesh->elements[e];
    const auto l = mesh->barycentric(e, x);
    double v = l[0] * values[el.v[0]] + l[1] * values[el.v[1]];
    if (mesh->dim == 2) v += l[2] * values[el.v[2]];
    return v;
}

Vec FemField::gradient_in_element(int e) const {
    const auto& el = mesh->elements[e];
    Vec g = values[el.v[0]] * mesh->basis_gradient(e, 0) +
            values[el.v[1]] * mesh->basis_gradient(e, 1);
    if (mesh->dim == 2) g += values[el.v[2]] * mesh->basis_gradient(e, 2);
    return g;
}

std::pair<double, Vec> FemField::eval(const Vec& x) const {
    const int e = mesh->locate(x);
    if (e < 0)
        throw EvalError("eval", "point outside the meshed region");
    return {value_in_element(e, x), gradient_in_element(e)};
}

// ---------------------------------------------------------------------------
// Assembly

LinearSystem assemble(const MeshPtr& mesh, double k,
                      const std::optional<MatrixFn>& matrix_coeff,
                      const std::optional<ScalarFn>& weight,
                      const ElementScalarFn& source) {
    if (k < 0.0) throw ConfigError("assemble", "requires k >= 0");
    const Mesh& m = *mesh;
    const int n = m.node_count();
    const int nv = m.dim == 1 ? 2 : 3;

    LinearSystem sys;
    sys.mesh = mesh;
    sys.k = k;
    sys.rhs = Eigen::VectorXd::Zero(n);
    sys.constrained.assign(n, 0);
    sys.constrained_values = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> stiff_trip, mass_trip;
    stiff_trip.reserve(static_cast<std::size_t>(m.element_count()) * nv * nv);
    mass_trip.reserve(stiff_trip.capacity());

    std::array<Vec, 3> grad{};
    std::array<double, 3> phi{};
    for (int e = 0; e < m.element_count(); ++e) {
        const auto& el = m.elements[e];
        for (int i = 0; i < nv; ++i) grad[i] = m.basis_gradient(e, i);
        const QuadRule rule = element_quadrature(m, e);

        double ke[3][3] = {};
        double me[3][3] = {};
        double fe[3] = {};
        for (int q = 0; q < rule.n; ++q) {
            const Vec& xq = rule.points[q];
            const double wq = rule.weights[q];
            const auto bary = m.barycentric(e, xq);
            for (int i = 0; i < nv; ++i) phi[i] = bary[i];

            const double rho = weight ? (*weight)(xq) : 1.0;
            if (matrix_coeff) {
                const Mat B = (*matrix_coeff)(xq);
                for (int i = 0; i < nv; ++i) {
                    const Vec Bg = B * grad[i];
                    for (int j = 0; j < nv; ++j) ke[i][j] += wq * Bg.dot(grad[j]);
                }
            } else {
                for (int i = 0; i < nv; ++i)
                    for (int j = 0; j < nv; ++j) ke[i][j] += wq * grad[i].dot(grad[j]);
            }
            for (int i = 0; i < nv; ++i) {
                for (int j = 0; j < nv; ++j) me[i][j] += wq * rho * phi[i] * phi[j];
                fe[i] += wq * rho * source(e, xq) * phi[i];
            }
        }
        for (int i = 0; i < nv; ++i) {
            sys.rhs[el.v[i]] += fe[i];
            for (int j = 0; j < nv; ++j) {
                stiff_trip.emplace_back(el.v[i], el.v[j], ke[i][j]);
                mass_trip.emplace_back(el.v[i], el.v[j], me[i][j]);
            }
        }
    }
    Eigen::SparseMatrix<double> stiffness(n, n);
    stiffness.setFromTriplets(stiff_trip.begin(), stiff_trip.end());
    sys.mass.resize(n, n);
    sys.mass.setFromTriplets(mass_trip.begin(), mass_trip.end());
    sys.matrix = stiffness - (k * k) * sys.mass;
    return sys;
}

LinearSystem assemble(const MeshPtr& mesh, double k,
                      const std::optional<MatrixFn>& matrix_coeff,
                      const std::optional<ScalarFn>& weight, const ScalarFn& source) {
    return assemble(mesh, k, matrix_coeff, weight,
                    [&source](int, const Vec& x) { return source(x); });
}

Eigen::VectorXd assemble_gradient_rhs(const Mesh& mesh, const ElementVectorFn& vec_term,
                                      const ElementScalarFn& scalar_term) {
    const int nv = mesh.dim == 1 ? 2 : 3;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.node_count());
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& el = mesh.elements[e];
        const QuadRule rule = element_quadrature(mesh, e);
        for (int q = 0; q < rule.n; ++q) {
            const Vec& xq = rule.points[q];
            const double wq = rule.weights[q];
            const Vec vt = vec_term(e, xq);
            const double st = scalar_term(e, xq);
            const auto bary = mesh.barycentric(e, xq);
            for (int i = 0; i < nv; ++i)
                rhs[el.v[i]] += wq * (vt.dot(mesh.basis_gradient(e, i)) + st * bary[i]);
        }
    }
    return rhs;
}

void LinearSystem::constrain(BoundaryTag tag, const ScalarFn& value) {
    const auto ids = mesh->tagged_nodes(tag);
    if (ids.empty())
        throw ConfigError("LinearSystem::constrain", "mesh carries no such boundary tag");
    for (int id : ids) {
        constrained[id] = 1;
        constrained_values[id] = value ? value(mesh->nodes[id]) : 0.0;
    }
}

void LinearSystem::constrain_nodes(const std::vector<int>& ids,
                                   const Eigen::VectorXd& values) {
    if (static_cast<int>(ids.size()) != values.size())
        throw ConfigError("LinearSystem::constrain_nodes", "size mismatch");
    for (std::size_t i = 0; i < ids.size(); ++i) {
        constrained[ids[i]] = 1;
        constrained_values[ids[i]] = values[static_cast<int>(i)];
    }
}

// ---------------------------------------------------------------------------
// Norms and boundary integrals

double FieldNorms::h1() const { return std::sqrt(l2 * l2 + h1_semi * h1_semi); }

FieldNorms norms(const FemField& field,
                 const std::optional<std::function<bool(const Vec&)>>& restriction) {
    const Mesh& m = *field.mesh;
    double l2sq = 0.0, h1sq = 0.0;
    for (int e = 0; e < m.element_count(); ++e) {
        if (restriction && !(*restriction)(m.element_centroid(e))) continue;
        const auto& el = m.elements[e];
        const double vol = m.element_volume(e);
        if (m.dim == 1) {
            const double u0 = field.values[el.v[0]], u1 = field.values[el.v[1]];
            l2sq += vol / 6.0 * (2.0 * u0 * u0 + 2.0 * u1 * u1 + 2.0 * u0 * u1);
        } else {
            const double u0 = field.values[el.v[0]], u1 = field.values[el.v[1]],
                         u2 = field.values[el.v[2]];
            const double sum = u0 + u1 + u2;
            l2sq += vol / 12.0 * (sum * sum + u0 * u0 + u1 * u1 + u2 * u2);
        }
        h1sq += vol * field.gradient_in_element(e).squaredNorm();
    }
    return {std::sqrt(l2sq), std::sqrt(h1sq)};
}

double boundary_integral(const FemField& field, const ScalarFn& weight, BoundaryTag tag) {
    const Mesh& m = *field.mesh;
    if (!m.has_tag(tag))
        throw ConfigError("boundary_integral", "unknown boundary tag for this mesh");
    double total = 0.0;
    for (std::size_t f = 0; f < m.facets.size(); ++f) {
        const auto& fa = m.facets[f];
        if (fa.tag != tag) continue;
        if (m.dim == 1) {
            const Vec& x = m.nodes[fa.v[0]];
            total += weight(x) * field.value_in_element(fa.element, x);
            continue;
        }
        // 2-point Gauss along the edge.
        const Vec a = m.nodes[fa.v[0]], b = m.nodes[fa.v[1]];
        const Vec mid = 0.5 * (a + b);
        const Vec half = 0.5 * (b - a);
        const double g = 1.0 / std::sqrt(3.0);
        const double w = half.norm();
        for (double t : {-g, g}) {
            const Vec x = mid + t * half;
            total += w * weight(x) * field.value_in_element(fa.element, x);
        }
    }
    return total;
}

FemField interpolate(const FemField& field, const MeshPtr& target) {
    Eigen::VectorXd values(target->node_count());
    for (int i = 0; i < target->node_count(); ++i)
        values[i] = field.eval(target->nodes[i]).first;
    return FemField(target, std::move(values));
}

// ---------------------------------------------------------------------------
// CSV

void write_field_csv(std::ostream& out, const FemField& field) {
    out << "node_index,value\n";
    char buf[64];
    for (int i = 0; i < field.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g\n", i, field.values[i]);
        out << buf;
    }
}

Eigen::VectorXd read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("node_index", 0) != 0)
        throw ConfigError("read_field_csv", "missing header");
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("read_field_csv", "bad row");
        const int idx = std::stoi(line.substr(0, comma));
        if (idx != static_cast<int>(vals.size()))
            throw ConfigError("read_field_csv", "rows out of order");
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
}

void write_field_csv_file(const std::string& path, const FemField& field) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_field_csv_file", "cannot open " + path);
    write_field_csv(out, field);
}

}  // namespace helmsense
