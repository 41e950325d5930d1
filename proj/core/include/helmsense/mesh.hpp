#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "helmsense/geometry.hpp"

namespace helmsense {

enum class BoundaryTag { outer, hole };

// Conforming simplicial mesh: segments in 1D, triangles in 2D. Immutable
// once finalize() has run; all queries are const and thread safe.
class Mesh {
public:
    struct Element {
        std::array<int, 3> v{-1, -1, -1};  // v[2] == -1 in 1D
    };
    struct Facet {
        std::array<int, 2> v{-1, -1};  // v[1] == -1 in 1D
        BoundaryTag tag = BoundaryTag::outer;
        int element = -1;  // the unique adjacent element
    };

    int dim = 1;
    double h = 0.0;
    std::vector<Vec> nodes;
    std::vector<Element> elements;
    std::vector<Facet> facets;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int element_count() const { return static_cast<int>(elements.size()); }

    double element_volume(int e) const;
    Vec element_centroid(int e) const;
    // Gradient of the nodal basis function of local vertex i on element e.
    Vec basis_gradient(int e, int i) const;
    // Barycentric coordinates of x in element e (2 or 3 entries used).
    std::array<double, 3> barycentric(int e, const Vec& x) const;

    double facet_measure(int f) const;  // 1 in 1D, edge length in 2D
    Vec facet_midpoint(int f) const;

    bool has_tag(BoundaryTag tag) const;
    std::vector<int> tagged_nodes(BoundaryTag tag) const;

    // Element containing x (within tolerance), or -1.
    int locate(const Vec& x) const;

    // Checks orientation, degeneracy and boundary consistency; throws
    // MeshError on violation. Builds the point-location index.
    void finalize();

private:
    double bucket_size_ = 0.0;
    Vec bbox_lo_ = Vec::Zero();
    int bucket_nx_ = 0, bucket_ny_ = 0;
    std::vector<std::vector<int>> buckets_;
    void build_buckets();
};

using MeshPtr = std::shared_ptr<const Mesh>;

// Generates a mesh of the domain with target size h, optionally carving a
// hole E_r around a rectifiable set. The hole boundary is tagged
// BoundaryTag::hole: in 1D the two nodes at the dilation endpoints, in 2D
// an inscribed polygon with max(16, ceil(2 pi r / h)) segments for a point
// hole and an offset contour for a segment hole.
MeshPtr generate_mesh(const Domain& domain, double h,
                      std::optional<std::pair<RectifiableSet, double>> hole = {});

// 1D mesh from explicit breakpoints (used for local refinement).
MeshPtr interval_mesh_from_breakpoints(std::vector<double> breakpoints,
                                       std::vector<double> hole_positions = {});

// Mesh of the hole interior E_r itself, with its boundary nodes placed on
// exactly the polygon used by generate_mesh so traces match node for node.
MeshPtr mesh_hole_interior(const Domain& domain, double h,
                           const RectifiableSet& set, double r);

// Glues two meshes that share boundary nodes (coordinates matched to a
// tolerance); shared facets disappear from the boundary list. Nodes of
// `a` keep their indices; b_to_merged, when given, receives the merged
// index of every node of `b`.
MeshPtr merge_meshes(const Mesh& a, const Mesh& b, std::vector<int>* b_to_merged = nullptr);

// Plain-text format: header "N <dim> <n_nodes> <n_elems> <n_bfacets>",
// then "v x [y]", "e i j [k]", "b i [j] <tag>" lines.
void write_mesh(std::ostream& out, const Mesh& mesh);
MeshPtr read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const Mesh& mesh);
MeshPtr read_mesh_file(const std::string& path);

namespace detail {
// Hole contour polygon (closed, counterclockwise) for a point or segment
// set; exposed for the interior mesher and tests.
std::vector<Vec> hole_contour(const RectifiableSet& set, double r, double h);
}  // namespace detail

}  // namespace helmsense
