#pragma once

#include "helmsense/fem.hpp"
#include "helmsense/problem.hpp"

namespace helmsense {

enum class HoleBC { dirichlet, neumann };

// Unperturbed state: -Delta eta - k^2 eta = f, eta = 0 on the outer
// boundary. Shares the assembly path of the pullback solver so the two
// agree bitwise at s = 0.
FemField solve_direct(const MeshPtr& mesh, const ProblemData& data,
                      const SolveOptions& options = {});

// Transported state on the fixed mesh: stiffness with B(s), mass and load
// weighted by J_s, source composed with T_s.
FemField solve_direct_pullback(const MeshPtr& mesh, const ProblemData& data,
                               const TransportMap& map, double s,
                               const SolveOptions& options = {});

// Adjoint of the tracking functional at the discrete state eta0.
FemField solve_adjoint(const MeshPtr& mesh, const ProblemData& data, const FemField& eta0,
                       const SolveOptions& options = {});

// Mesh preparation for the source-perturbation family: in 1D inserts
// breakpoints so the dilation boundary is element-aligned and at least 8
// quadrature points fall inside E_r; in 2D the mesh is kept and the load
// quadrature is subdivided instead (see solve_source_perturbed).
MeshPtr refine_for_source(const MeshPtr& mesh, const RectifiableSet& set, double r);

// State with the source multiplied by gamma inside E_r. The returned
// field lives on refine_for_source(mesh, set, r).
FemField solve_source_perturbed(const MeshPtr& mesh, const ProblemData& data,
                                const RectifiableSet& set, double r,
                                const SolveOptions& options = {});

// Same solve on a mesh that already went through refine_for_source, so
// companion states can share the identical mesh object.
FemField solve_source_perturbed_prepared(const MeshPtr& prepared, const ProblemData& data,
                                         const RectifiableSet& set, double r,
                                         const SolveOptions& options = {});

// State on a mesh that carries a hole tag: Dirichlet pins the hole nodes
// to zero, Neumann leaves them free (natural condition).
FemField solve_hole(const MeshPtr& mesh_with_hole, const ProblemData& data, HoleBC bc,
                    const SolveOptions& options = {});

// Solves the same operator inside the hole with Dirichlet data taken from
// the outer solution's trace and returns the merged field on the union
// mesh (continuous across the interface by construction).
FemField extend_into_hole(const FemField& eta_r, const MeshPtr& hole_mesh,
                          const ProblemData& data, const SolveOptions& options = {});

}  // namespace helmsense
