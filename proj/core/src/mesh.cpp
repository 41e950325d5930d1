#include "helmsense/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "helmsense/errors.hpp"

namespace helmsense {

// ---------------------------------------------------------------------------
// Element geometry

double Mesh::element_volume(int e) const {
    const Element& el = elements[e];
    if (dim == 1) return nodes[el.v[1]].x() - nodes[el.v[0]].x();
    const Vec a = nodes[el.v[0]], b = nodes[el.v[1]], c = nodes[el.v[2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (c.x() - a.x()) * (b.y() - a.y()));
}

Vec Mesh::element_centroid(int e) const {
    const Element& el = elements[e];
    if (dim == 1) return 0.5 * (nodes[el.v[0]] + nodes[el.v[1]]);
    return (nodes[el.v[0]] + nodes[el.v[1]] + nodes[el.v[2]]) / 3.0;
}

Vec Mesh::basis_gradient(int e, int i) const {
    const Element& el = elements[e];
    if (dim == 1) {
        const double len = nodes[el.v[1]].x() - nodes[el.v[0]].x();
        return Vec(i == 0 ? -1.0 / len : 1.0 / len, 0.0);
    }
    // grad of barycentric coordinate i: perpendicular to the opposite edge.
    const Vec a = nodes[el.v[(i + 1) % 3]];
    const Vec b = nodes[el.v[(i + 2) % 3]];
    const double two_area = 2.0 * element_volume(e);
    return Vec(a.y() - b.y(), b.x() - a.x()) / two_area;
}

std::array<double, 3> Mesh::barycentric(int e, const Vec& x) const {
    const Element& el = elements[e];
    if (dim == 1) {
        const double x0 = nodes[el.v[0]].x(), x1 = nodes[el.v[1]].x();
        const double t = (x.x() - x0) / (x1 - x0);
        return {1.0 - t, t, 0.0};
    }
    const Vec a = nodes[el.v[0]], b = nodes[el.v[1]], c = nodes[el.v[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) -
                       (c.x() - a.x()) * (b.y() - a.y());
    const double l1 = ((x.x() - a.x()) * (c.y() - a.y()) -
                       (c.x() - a.x()) * (x.y() - a.y())) / det;
    const double l2 = ((b.x() - a.x()) * (x.y() - a.y()) -
                       (x.x() - a.x()) * (b.y() - a.y())) / det;
    return {1.0 - l1 - l2, l1, l2};
}

double Mesh::facet_measure(int f) const {
    if (dim == 1) return 1.0;
    const Facet& fa = facets[f];
    return (nodes[fa.v[1]] - nodes[fa.v[0]]).norm();
}

Vec Mesh::facet_midpoint(int f) const {
    const Facet& fa = facets[f];
    if (dim == 1) return nodes[fa.v[0]];
    return 0.5 * (nodes[fa.v[0]] + nodes[fa.v[1]]);
}

bool Mesh::has_tag(BoundaryTag tag) const {
    for (const Facet& f : facets)
        if (f.tag == tag) return true;
    return false;
}

std::vector<int> Mesh::tagged_nodes(BoundaryTag tag) const {
    std::set<int> ids;
    for (const Facet& f : facets) {
        if (f.tag != tag) continue;
        ids.insert(f.v[0]);
        if (f.v[1] >= 0) ids.insert(f.v[1]);
    }
    return {ids.begin(), ids.end()};
}

// ---------------------------------------------------------------------------
// Point location

void Mesh::build_buckets() {
    Vec lo = nodes.front(), hi = nodes.front();
    for (const Vec& p : nodes) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    bbox_lo_ = lo;
    bucket_size_ = std::max(2.0 * h, 1e-12);
    bucket_nx_ = std::max(1, static_cast<int>((hi.x() - lo.x()) / bucket_size_) + 1);
    bucket_ny_ = dim == 1 ? 1
                          : std::max(1, static_cast<int>((hi.y() - lo.y()) / bucket_size_) + 1);
    buckets_.assign(static_cast<std::size_t>(bucket_nx_) * bucket_ny_, {});
    for (int e = 0; e < element_count(); ++e) {
        Vec elo = nodes[elements[e].v[0]], ehi = elo;
        for (int i = 0; i < (dim == 1 ? 2 : 3); ++i) {
            const Vec& p = nodes[elements[e].v[i]];
            elo = elo.cwiseMin(p);
            ehi = ehi.cwiseMax(p);
        }
        const int ix0 = std::clamp(static_cast<int>((elo.x() - lo.x()) / bucket_size_), 0, bucket_nx_ - 1);
        const int ix1 = std::clamp(static_cast<int>((ehi.x() - lo.x()) / bucket_size_), 0, bucket_nx_ - 1);
        const int iy0 = dim == 1 ? 0 : std::clamp(static_cast<int>((elo.y() - lo.y()) / bucket_size_), 0, bucket_ny_ - 1);
        const int iy1 = dim == 1 ? 0 : std::clamp(static_cast<int>((ehi.y() - lo.y()) / bucket_size_), 0, bucket_ny_ - 1);
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix)
                buckets_[static_cast<std::size_t>(iy) * bucket_nx_ + ix].push_back(e);
    }
}

namespace {
bool inside_by_barycentric(const std::array<double, 3>& l, int dim, double tol) {
    for (int i = 0; i < (dim == 1 ? 2 : 3); ++i)
        if (l[i] < -tol) return false;
    return true;
}
}  // namespace

int Mesh::locate(const Vec& x) const {
    const double tol = 1e-10;
    if (!buckets_.empty()) {
        const int ix = std::clamp(static_cast<int>((x.x() - bbox_lo_.x()) / bucket_size_), 0, bucket_nx_ - 1);
        const int iy = dim == 1 ? 0 : std::clamp(static_cast<int>((x.y() - bbox_lo_.y()) / bucket_size_), 0, bucket_ny_ - 1);
        for (int e : buckets_[static_cast<std::size_t>(iy) * bucket_nx_ + ix])
            if (inside_by_barycentric(barycentric(e, x), dim, tol)) return e;
        // Points on bucket borders can hash to a neighbouring cell.
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int jx = ix + dx, jy = iy + dy;
                if (jx < 0 || jx >= bucket_nx_ || jy < 0 || jy >= bucket_ny_) continue;
                for (int e : buckets_[static_cast<std::size_t>(jy) * bucket_nx_ + jx])
                    if (inside_by_barycentric(barycentric(e, x), dim, tol)) return e;
            }
    }
    for (int e = 0; e < element_count(); ++e)
        if (inside_by_barycentric(barycentric(e, x), dim, tol)) return e;
    return -1;
}

// ---------------------------------------------------------------------------
// Validation

void Mesh::finalize() {
    if (nodes.empty() || elements.empty())
        throw MeshError("Mesh::finalize", "empty mesh");
    for (int e = 0; e < element_count(); ++e) {
        double vol = element_volume(e);
        if (dim == 2 && vol < 0.0) {
            std::swap(elements[e].v[1], elements[e].v[2]);
            vol = -vol;
        }
        if (vol <= 1e-14)
            throw MeshError("Mesh::finalize", "degenerate element " + std::to_string(e));
    }
    // Every boundary facet must match exactly one element side.
    std::map<std::pair<int, int>, std::vector<int>> side_count;
    for (int e = 0; e < element_count(); ++e) {
        const Element& el = elements[e];
        if (dim == 1) {
            side_count[{el.v[0], -1}].push_back(e);
            side_count[{el.v[1], -1}].push_back(e);
        } else {
            for (int i = 0; i < 3; ++i) {
                int a = el.v[i], b = el.v[(i + 1) % 3];
                if (a > b) std::swap(a, b);
                side_count[{a, b}].push_back(e);
            }
        }
    }
    for (Facet& f : facets) {
        std::pair<int, int> key;
        if (dim == 1) {
            key = {f.v[0], -1};
        } else {
            int a = f.v[0], b = f.v[1];
            if (a > b) std::swap(a, b);
            key = {a, b};
        }
        const auto it = side_count.find(key);
        if (it == side_count.end() || it->second.size() != 1)
            throw MeshError("Mesh::finalize",
                            "boundary facet does not belong to exactly one element");
        f.element = it->second.front();
    }
    // The tagged facets must cover the whole boundary.
    std::size_t boundary_sides = 0;
    for (const auto& [side, owners] : side_count)
        if (owners.size() == 1) ++boundary_sides;
    if (boundary_sides != facets.size())
        throw MeshError("Mesh::finalize", "boundary facets do not cover the boundary (" +
                                              std::to_string(facets.size()) + " tagged, " +
                                              std::to_string(boundary_sides) + " sides)");
    build_buckets();
}

// ---------------------------------------------------------------------------
// Structured generators

namespace {

MeshPtr finalize_mesh(Mesh&& mesh) {
    mesh.finalize();
    return std::make_shared<const Mesh>(std::move(mesh));
}

std::vector<double> uniform_breakpoints(double a, double b, double h) {
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
    std::vector<double> pts(n + 1);
    for (int i = 0; i <= n; ++i) pts[i] = a + (b - a) * i / n;
    return pts;
}

Mesh rectangle_mesh(const Vec& lo, const Vec& hi, double h) {
    const int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / h - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / h - 1e-9)));
    Mesh mesh;
    mesh.dim = 2;
    mesh.h = std::max((hi.x() - lo.x()) / nx, (hi.y() - lo.y()) / ny);
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.nodes.push_back(Vec(lo.x() + (hi.x() - lo.x()) * i / nx,
                                     lo.y() + (hi.y() - lo.y()) * j / ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            mesh.elements.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}});
            mesh.elements.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}});
        }
    for (int i = 0; i < nx; ++i) {
        mesh.facets.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::outer, -1});
        mesh.facets.push_back({{id(i, ny), id(i + 1, ny)}, BoundaryTag::outer, -1});
    }
    for (int j = 0; j < ny; ++j) {
        mesh.facets.push_back({{id(0, j), id(0, j + 1)}, BoundaryTag::outer, -1});
        mesh.facets.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::outer, -1});
    }
    return mesh;
}

Mesh disk_mesh(const Vec& center, double radius, double h) {
    const int nr = std::max(2, static_cast<int>(std::ceil(radius / h - 1e-9)));
    const int m = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * radius / h)));
    Mesh mesh;
    mesh.dim = 2;
    mesh.h = std::max(radius / nr, 2.0 * M_PI * radius / m);
    mesh.nodes.push_back(center);
    auto ring_id = [&](int ring, int j) { return 1 + (ring - 1) * m + (j % m); };
    for (int ring = 1; ring <= nr; ++ring) {
        const double rho = radius * ring / nr;
        for (int j = 0; j < m; ++j) {
            const double th = 2.0 * M_PI * j / m;
            mesh.nodes.push_back(center + rho * Vec(std::cos(th), std::sin(th)));
        }
    }
    for (int j = 0; j < m; ++j)
        mesh.elements.push_back({{0, ring_id(1, j), ring_id(1, j + 1)}});
    for (int ring = 1; ring < nr; ++ring)
        for (int j = 0; j < m; ++j) {
            mesh.elements.push_back({{ring_id(ring, j), ring_id(ring + 1, j), ring_id(ring + 1, j + 1)}});
            mesh.elements.push_back({{ring_id(ring, j), ring_id(ring + 1, j + 1), ring_id(ring, j + 1)}});
        }
    for (int j = 0; j < m; ++j)
        mesh.facets.push_back({{ring_id(nr, j), ring_id(nr, j + 1)}, BoundaryTag::outer, -1});
    return mesh;
}

}  // namespace

MeshPtr interval_mesh_from_breakpoints(std::vector<double> breakpoints,
                                       std::vector<double> hole_positions) {
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end(),
                                  [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                      breakpoints.end());
    if (breakpoints.size() < 2)
        throw MeshError("interval_mesh_from_breakpoints", "needs at least two points");
    Mesh mesh;
    mesh.dim = 1;
    mesh.h = 0.0;
    // Elements between consecutive breakpoints, skipping hole gaps.
    auto in_hole = [&](double mid) {
        for (std::size_t i = 0; i + 1 < hole_positions.size(); i += 2)
            if (mid > hole_positions[i] && mid < hole_positions[i + 1]) return true;
        return false;
    };
    for (double x : breakpoints) mesh.nodes.push_back(Vec(x, 0.0));
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double mid = 0.5 * (breakpoints[i] + breakpoints[i + 1]);
        if (in_hole(mid)) continue;
        mesh.elements.push_back({{static_cast<int>(i), static_cast<int>(i + 1), -1}});
        mesh.h = std::max(mesh.h, breakpoints[i + 1] - breakpoints[i]);
    }
    // Drop nodes interior to holes, remapping element indices.
    std::vector<int> remap(mesh.nodes.size(), -1);
    std::vector<Vec> kept;
    std::vector<char> used(mesh.nodes.size(), 0);
    for (const auto& el : mesh.elements) {
        used[el.v[0]] = 1;
        used[el.v[1]] = 1;
    }
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (used[i]) {
            remap[i] = static_cast<int>(kept.size());
            kept.push_back(mesh.nodes[i]);
        }
    for (auto& el : mesh.elements) {
        el.v[0] = remap[el.v[0]];
        el.v[1] = remap[el.v[1]];
    }
    mesh.nodes = std::move(kept);
    // Boundary facets: nodes adjacent to exactly one element.
    std::vector<int> adj(mesh.nodes.size(), 0);
    for (const auto& el : mesh.elements) {
        ++adj[el.v[0]];
        ++adj[el.v[1]];
    }
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (adj[i] != 1) continue;
        BoundaryTag tag = BoundaryTag::outer;
        for (double hp : hole_positions)
            if (std::abs(mesh.nodes[i].x() - hp) < 1e-12) tag = BoundaryTag::hole;
        mesh.facets.push_back({{i, -1}, tag, -1});
    }
    return finalize_mesh(std::move(mesh));
}

MeshPtr generate_mesh(const Domain& domain, double h,
                      std::optional<std::pair<RectifiableSet, double>> hole) {
    if (!(h > 0.0)) throw ConfigError("generate_mesh", "requires h > 0");
    if (hole) {
        const auto& [set, r] = *hole;
        if (!(r > 0.0)) throw ConfigError("generate_mesh", "requires hole radius > 0");
        // Clearance check: the dilation must sit at least h inside the domain.
        const std::vector<Vec> probes = set.d == 0 ? std::vector<Vec>{set.point} : set.polyline;
        for (const Vec& p : probes)
            if (domain.boundary_distance(p) < r + h)
                throw MeshError("generate_mesh", "hole too close to the outer boundary");
    }

    if (domain.dim == 1) {
        auto pts = uniform_breakpoints(domain.lo.x(), domain.hi.x(), h);
        std::vector<double> hole_pos;
        if (hole) {
            const auto& [set, r] = *hole;
            if (set.d != 0)
                throw MeshError("generate_mesh", "1D holes require a point set");
            hole_pos = {set.point.x() - r, set.point.x() + r};
            pts.push_back(hole_pos[0]);
            pts.push_back(hole_pos[1]);
            // Drop uniform points that collide with the exact hole endpoints.
            pts.erase(std::remove_if(pts.begin(), pts.end(),
                                     [&](double x) {
                                         return (std::abs(x - hole_pos[0]) < 1e-9 && x != hole_pos[0]) ||
                                                (std::abs(x - hole_pos[1]) < 1e-9 && x != hole_pos[1]);
                                     }),
                      pts.end());
        }
        return interval_mesh_from_breakpoints(std::move(pts), std::move(hole_pos));
    }

    Mesh background = domain.kind == Domain::Kind::disk
                          ? disk_mesh(domain.center, domain.radius, h)
                          : rectangle_mesh(domain.lo, domain.hi, h);
    if (!hole) return finalize_mesh(std::move(background));

    // Carve the hole and stitch the polygonal boundary (mesh_hole.cpp).
    MeshPtr carve_hole_2d(Mesh&& background, const RectifiableSet& set, double r);
    return carve_hole_2d(std::move(background), hole->first, hole->second);
}

// ---------------------------------------------------------------------------
// Merge

MeshPtr merge_meshes(const Mesh& a, const Mesh& b, std::vector<int>* b_to_merged) {
    if (a.dim != b.dim) throw MeshError("merge_meshes", "dimension mismatch");
    Mesh merged;
    merged.dim = a.dim;
    merged.h = std::max(a.h, b.h);
    merged.nodes = a.nodes;
    const double tol = 1e-9 * std::max(1.0, merged.h);

    auto key = [&](const Vec& p) {
        return std::make_pair(static_cast<long long>(std::llround(p.x() / tol)),
                              static_cast<long long>(std::llround(p.y() / tol)));
    };
    std::map<std::pair<long long, long long>, int> lookup;
    for (int i = 0; i < a.node_count(); ++i) lookup[key(a.nodes[i])] = i;

    std::vector<int> remap(b.node_count(), -1);
    for (int i = 0; i < b.node_count(); ++i) {
        const auto it = lookup.find(key(b.nodes[i]));
        if (it != lookup.end()) {
            remap[i] = it->second;
        } else {
            remap[i] = merged.node_count();
            merged.nodes.push_back(b.nodes[i]);
        }
    }
    if (b_to_merged) *b_to_merged = remap;
    merged.elements = a.elements;
    for (const auto& el : b.elements) {
        Mesh::Element copy = el;
        for (int i = 0; i < (b.dim == 1 ? 2 : 3); ++i) copy.v[i] = remap[copy.v[i]];
        merged.elements.push_back(copy);
    }
    // Keep only facets that remain on the merged boundary.
    auto side_key = [&](int x, int y) {
        if (x > y) std::swap(x, y);
        return std::make_pair(x, y);
    };
    std::map<std::pair<int, int>, int> sides;
    for (const auto& el : merged.elements) {
        if (merged.dim == 1) {
            ++sides[side_key(el.v[0], -1)];
            ++sides[side_key(el.v[1], -1)];
        } else {
            for (int i = 0; i < 3; ++i)
                ++sides[side_key(el.v[i], el.v[(i + 1) % 3])];
        }
    }
    auto keep = [&](const Mesh::Facet& f, const std::vector<int>* rm) {
        Mesh::Facet copy = f;
        if (rm) {
            copy.v[0] = (*rm)[copy.v[0]];
            if (copy.v[1] >= 0) copy.v[1] = (*rm)[copy.v[1]];
        }
        const auto it = sides.find(side_key(copy.v[0], copy.v[1] >= 0 ? copy.v[1] : -1));
        if (it != sides.end() && it->second == 1) merged.facets.push_back(copy);
    };
    for (const auto& f : a.facets) keep(f, nullptr);
    for (const auto& f : b.facets) keep(f, &remap);
    return finalize_mesh(std::move(merged));
}

// ---------------------------------------------------------------------------
// Text I/O

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << "N " << mesh.dim << ' ' << mesh.node_count() << ' '
        << mesh.element_count() << ' ' << mesh.facets.size() << '\n';
    out.precision(17);
    for (const Vec& p : mesh.nodes) {
        out << "v " << p.x();
        if (mesh.dim == 2) out << ' ' << p.y();
        out << '\n';
    }
    for (const auto& el : mesh.elements) {
        out << "e " << el.v[0] << ' ' << el.v[1];
        if (mesh.dim == 2) out << ' ' << el.v[2];
        out << '\n';
    }
    for (const auto& f : mesh.facets) {
        out << "b " << f.v[0];
        if (mesh.dim == 2) out << ' ' << f.v[1];
        out << ' ' << (f.tag == BoundaryTag::outer ? "outer" : "hole") << '\n';
    }
}

MeshPtr read_mesh(std::istream& in) {
    std::string tag;
    Mesh mesh;
    int n_nodes = 0, n_elems = 0, n_facets = 0;
    if (!(in >> tag >> mesh.dim >> n_nodes >> n_elems >> n_facets) || tag != "N")
        throw ConfigError("read_mesh", "bad header");
    if (mesh.dim != 1 && mesh.dim != 2)
        throw ConfigError("read_mesh", "dimension must be 1 or 2");
    mesh.nodes.reserve(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        double x = 0, y = 0;
        if (!(in >> tag >> x) || tag != "v") throw ConfigError("read_mesh", "bad node line");
        if (mesh.dim == 2 && !(in >> y)) throw ConfigError("read_mesh", "bad node line");
        mesh.nodes.push_back(Vec(x, y));
    }
    double hmax = 0.0;
    for (int i = 0; i < n_elems; ++i) {
        Mesh::Element el;
        if (!(in >> tag >> el.v[0] >> el.v[1]) || tag != "e")
            throw ConfigError("read_mesh", "bad element line");
        if (mesh.dim == 2 && !(in >> el.v[2])) throw ConfigError("read_mesh", "bad element line");
        mesh.elements.push_back(el);
        double extent = (mesh.nodes[el.v[1]] - mesh.nodes[el.v[0]]).norm();
        if (mesh.dim == 2)
            extent = std::max(extent, (mesh.nodes[el.v[2]] - mesh.nodes[el.v[0]]).norm());
        hmax = std::max(hmax, extent);
    }
    mesh.h = hmax;
    for (int i = 0; i < n_facets; ++i) {
        Mesh::Facet f;
        std::string kind;
        if (!(in >> tag >> f.v[0]) || tag != "b") throw ConfigError("read_mesh", "bad boundary line");
        if (mesh.dim == 2 && !(in >> f.v[1])) throw ConfigError("read_mesh", "bad boundary line");
        if (!(in >> kind)) throw ConfigError("read_mesh", "bad boundary line");
        if (kind == "outer") f.tag = BoundaryTag::outer;
        else if (kind == "hole") f.tag = BoundaryTag::hole;
        else throw ConfigError("read_mesh", "unknown boundary tag '" + kind + "'");
        mesh.facets.push_back(f);
    }
    mesh.finalize();
    return std::make_shared<const Mesh>(std::move(mesh));
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_mesh_file", "cannot open " + path);
    write_mesh(out, mesh);
}

MeshPtr read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("read_mesh_file", "cannot open " + path);
    return read_mesh(in);
}

}  // namespace helmsense
