#include <Eigen/SparseCholesky>
#include <cstdio>
#include <cmath>

#include "helmsense/errors.hpp"
#include "helmsense/fem.hpp"

namespace helmsense {

namespace {

// Smallest-magnitude eigenvalue of the pencil (A, M) on the free nodes,
// via inverse iteration reusing the factorization of A. This measures how
// far k^2 sits from the nearest discrete Dirichlet eigenvalue.
double nearest_pencil_eigenvalue(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& ldlt,
                                 const Eigen::SparseMatrix<double>& a,
                                 const Eigen::SparseMatrix<double>& m) {
    const int n = static_cast<int>(a.rows());
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    x /= std::sqrt(x.dot(m * x));
    double mu = x.dot(a * x);
    for (int it = 0; it < 40; ++it) {
        Eigen::VectorXd y = ldlt.solve(m * x);
        const double scale = std::sqrt(y.dot(m * y));
        if (!(scale > 0.0) || !std::isfinite(scale)) break;
        x = y / scale;
        const double next = x.dot(a * x) / x.dot(m * x);
        if (std::abs(next - mu) < 1e-10 * (1.0 + std::abs(next))) {
            mu = next;
            break;
        }
        mu = next;
    }
    return mu;
}

}  // namespace

FemField solve(const LinearSystem& system, const SolveOptions& options) {
    const int n = static_cast<int>(system.matrix.rows());
    std::vector<int> free_index(n, -1);
    int n_free = 0;
    for (int i = 0; i < n; ++i)
        if (!system.constrained[i]) free_index[i] = n_free++;

    Eigen::VectorXd full(n);
    for (int i = 0; i < n; ++i)
        full[i] = system.constrained[i] ? system.constrained_values[i] : 0.0;
    if (n_free == 0) return FemField(system.mesh, std::move(full));

    // Reduced system: A_ff x_f = b_f - A_fc g_c, symmetry preserved.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(system.matrix.nonZeros());
    std::vector<Eigen::Triplet<double>> mass_trip;
    Eigen::VectorXd b(n_free);
    for (int i = 0; i < n; ++i)
        if (free_index[i] >= 0) b[free_index[i]] = system.rhs[i];
    for (int col = 0; col < n; ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (free_index[r] < 0) continue;
            if (free_index[col] >= 0)
                trip.emplace_back(free_index[r], free_index[col], it.value());
            else
                b[free_index[r]] -= it.value() * system.constrained_values[col];
        }
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.mass, col); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (free_index[r] >= 0 && free_index[col] >= 0)
                mass_trip.emplace_back(free_index[r], free_index[col], it.value());
        }
    }
    Eigen::SparseMatrix<double> a(n_free, n_free);
    a.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(a);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("solve", "sparse factorization failed");

    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double dmin = d.cwiseAbs().minCoeff();
    if (!(dmax > 0.0) || dmin < options.pivot_rel_tol * dmax)
        throw ResonanceError("solve",
                             "factorization pivot below the relative tolerance; k^2 "
                             "coincides with a discrete Dirichlet eigenvalue");

    if (options.check_resonance_margin && system.k > 0.0) {
        Eigen::SparseMatrix<double> m(n_free, n_free);
        m.setFromTriplets(mass_trip.begin(), mass_trip.end());
        const double mu = nearest_pencil_eigenvalue(ldlt, a, m);
        const double k2 = system.k * system.k;
        if (std::abs(mu) < options.resonance_margin_tol * k2)
            throw ResonanceError(
                "solve", "k^2 within discretization tolerance of a Dirichlet eigenvalue "
                         "(relative margin " + std::to_string(std::abs(mu) / k2) + ")");
    }

    Eigen::VectorXd x = ldlt.solve(b);
    if (b.norm() > 0.0) {
        // Normwise backward error; evaluating A x alone costs
        // eps * ||A|| ||x||, so the denominator must carry that scale.
        double a_inf = 0.0;
        Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(n_free);
        for (int col = 0; col < a.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
                row_abs[it.row()] += std::abs(it.value());
        a_inf = row_abs.maxCoeff();
        auto backward_error = [&]() {
            return (a * x - b).lpNorm<Eigen::Infinity>() /
                   (a_inf * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
        };
        double residual = backward_error();
        for (int it = 0; it < 3 && residual > 0.01 * options.residual_tol; ++it) {
            const Eigen::VectorXd correction = ldlt.solve(b - a * x);
            x += correction;
            const double next = backward_error();
            if (next >= residual) break;
            residual = next;
        }
        if (residual > options.residual_tol) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3e", residual);
            throw NumericalError("solve", std::string("solve backward error ") + buf +
                                              " exceeds tolerance");
        }
    }
    for (int i = 0; i < n; ++i)
        if (free_index[i] >= 0) full[i] = x[free_index[i]];
    return FemField(system.mesh, std::move(full));
}

}  // namespace helmsense
