#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "helmsense/mesh.hpp"

namespace helmsense {

// The one quadrature rule shared by assembly, functionals and derivative
// formulas: 2-point Gauss per segment in 1D, the 3 edge midpoints in 2D.
// Exact for the quadratic products of P1 basis functions with constant
// coefficients; variable coefficients are sampled at these points.
struct QuadRule {
    int n = 0;
    std::array<Vec, 3> points{};
    std::array<double, 3> weights{};
};
QuadRule element_quadrature(const Mesh& mesh, int e);

// Scalar piecewise-linear field over a mesh.
struct FemField {
    MeshPtr mesh;
    Eigen::VectorXd values;

    FemField() = default;
    FemField(MeshPtr m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {}
    static FemField zero(MeshPtr m);

    double value_in_element(int e, const Vec& x) const;
    Vec gradient_in_element(int e) const;

    // Locates the containing element; throws EvalError outside the mesh.
    std::pair<double, Vec> eval(const Vec& x) const;
};

struct LinearSystem {
    MeshPtr mesh;
    double k = 0.0;
    Eigen::SparseMatrix<double> matrix;  // stiffness - k^2 mass, unconstrained
    Eigen::SparseMatrix<double> mass;    // volume-weighted mass alone
    Eigen::VectorXd rhs;
    std::vector<char> constrained;       // per node
    Eigen::VectorXd constrained_values;  // per node, meaningful where constrained

    void constrain(BoundaryTag tag, const ScalarFn& value = {});
    void constrain_nodes(const std::vector<int>& ids, const Eigen::VectorXd& values);
};

// Element-wise callables receive the element index so precomputed P1 data
// (gradients of discrete fields) can be used without point location.
using ElementScalarFn = std::function<double(int, const Vec&)>;
using ElementVectorFn = std::function<Vec(int, const Vec&)>;

// Bilinear form  a(u,v) = int matrix_coeff grad u . grad v
//                         - k^2 int weight u v,
// load           l(v)   = int weight source v.
// matrix_coeff defaults to the identity and weight to 1.
LinearSystem assemble(const MeshPtr& mesh, double k,
                      const std::optional<MatrixFn>& matrix_coeff,
                      const std::optional<ScalarFn>& weight,
                      const ElementScalarFn& source);
LinearSystem assemble(const MeshPtr& mesh, double k,
                      const std::optional<MatrixFn>& matrix_coeff,
                      const std::optional<ScalarFn>& weight, const ScalarFn& source);

// Right-hand side of the form  int vec_term . grad v + int scalar_term v.
Eigen::VectorXd assemble_gradient_rhs(const Mesh& mesh, const ElementVectorFn& vec_term,
                                      const ElementScalarFn& scalar_term);

struct SolveOptions {
    // Exact-singularity guard on the LDL^T pivots.
    double pivot_rel_tol = 1e-12;
    // Near-resonance guard: smallest |lambda - k^2| of the discrete pencil
    // relative to k^2, estimated by inverse iteration on the factorization.
    double resonance_margin_tol = 1e-2;
    bool check_resonance_margin = true;
    double residual_tol = 1e-10;
};

// Sparse direct solve of the constrained system. Throws ResonanceError
// when the pivot or margin guard fires, NumericalError when the residual
// exceeds residual_tol.
FemField solve(const LinearSystem& system, const SolveOptions& options = {});

struct FieldNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double h1() const;
};

// Element-exact integrals of the squared P1 field and its gradient,
// optionally restricted to elements whose centroid passes the filter.
FieldNorms norms(const FemField& field,
                 const std::optional<std::function<bool(const Vec&)>>& restriction = {});

// Facet-wise quadrature of weight * field over the tagged boundary. In 1D
// this is the plain sum over the tagged endpoint facets (H^0 counting
// measure); any orientation factor is the caller's business.
double boundary_integral(const FemField& field, const ScalarFn& weight, BoundaryTag tag);

// Nodal interpolation onto another mesh (source must cover its nodes).
FemField interpolate(const FemField& field, const MeshPtr& target);

// CSV exchange format: header "node_index,value", one row per node.
void write_field_csv(std::ostream& out, const FemField& field);
Eigen::VectorXd read_field_csv(std::istream& in);
void write_field_csv_file(const std::string& path, const FemField& field);

}  // namespace helmsense
