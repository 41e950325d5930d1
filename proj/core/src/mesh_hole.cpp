#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "helmsense/errors.hpp"
#include "helmsense/mesh.hpp"

// 2D hole meshing: triangles too close to the dilation E_r are carved out
// of the background grid, and the annular gap between the polygonal hole
// contour and the carved cavity is stitched with a band of triangles that
// walks both loops by arc length.

namespace helmsense {

namespace detail {

std::vector<Vec> hole_contour(const RectifiableSet& set, double r, double h) {
    std::vector<Vec> poly;
    if (set.d == 0) {
        const int m = std::max<int>(16, static_cast<int>(std::ceil(2.0 * M_PI * r / h)));
        poly.reserve(m);
        for (int j = 0; j < m; ++j) {
            const double th = 2.0 * M_PI * j / m;
            poly.push_back(set.point + r * Vec(std::cos(th), std::sin(th)));
        }
        return poly;
    }
    if (set.polyline.size() != 2)
        throw MeshError("hole_contour",
                        "2D dilation meshing supports a point or a single segment");
    // Stadium: two offset sides plus semicircular caps.
    const Vec a = set.polyline[0], b = set.polyline[1];
    const Vec t = (b - a).normalized();
    const Vec n(-t.y(), t.x());
    const double len = (b - a).norm();
    const int m_side = std::max<int>(4, static_cast<int>(std::ceil(len / h)));
    const int m_cap = std::max<int>(8, static_cast<int>(std::ceil(M_PI * r / h)));
    auto arc = [&](const Vec& c, double th0, double th1) {
        for (int j = 0; j < m_cap; ++j) {
            const double th = th0 + (th1 - th0) * j / m_cap;
            poly.push_back(c + r * Vec(std::cos(th), std::sin(th)));
        }
    };
    const double base = std::atan2(t.y(), t.x());
    for (int j = 0; j < m_side; ++j)
        poly.push_back(a + (len * j / m_side) * t - r * n);
    arc(b, base - M_PI / 2.0, base + M_PI / 2.0);
    for (int j = 0; j < m_side; ++j)
        poly.push_back(b - (len * j / m_side) * t + r * n);
    arc(a, base + M_PI / 2.0, base + 3.0 * M_PI / 2.0);
    return poly;
}

}  // namespace detail

namespace {

double loop_signed_area(const std::vector<Vec>& loop) {
    double area = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec& p = loop[i];
        const Vec& q = loop[(i + 1) % loop.size()];
        area += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * area;
}

// Distance between the rectifiable set and a triangle, approximated by
// sampling the set at spacing h/4.
double set_triangle_distance(const RectifiableSet& set, const Vec& a, const Vec& b,
                             const Vec& c, double h) {
    std::vector<Vec> samples;
    if (set.d == 0) {
        samples.push_back(set.point);
    } else {
        for (std::size_t i = 0; i + 1 < set.polyline.size(); ++i) {
            const Vec p = set.polyline[i], q = set.polyline[i + 1];
            const int n = std::max(1, static_cast<int>(std::ceil((q - p).norm() / (0.25 * h))));
            for (int j = 0; j <= n; ++j) samples.push_back(p + (q - p) * (static_cast<double>(j) / n));
        }
    }
    auto seg_dist = [](const Vec& p, const Vec& u, const Vec& v) {
        const Vec uv = v - u;
        const double len2 = uv.squaredNorm();
        const double t = len2 == 0.0 ? 0.0 : std::clamp((p - u).dot(uv) / len2, 0.0, 1.0);
        return (p - (u + t * uv)).norm();
    };
    auto inside = [&](const Vec& p) {
        const double d1 = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
        const double d2 = (c - b).x() * (p - b).y() - (c - b).y() * (p - b).x();
        const double d3 = (a - c).x() * (p - c).y() - (a - c).y() * (p - c).x();
        const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
        const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
        return !(neg && pos);
    };
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& s : samples) {
        if (inside(s)) return 0.0;
        best = std::min({best, seg_dist(s, a, b), seg_dist(s, b, c), seg_dist(s, c, a)});
    }
    return best;
}

std::vector<double> arc_length_params(const std::vector<Vec>& loop) {
    std::vector<double> t(loop.size() + 1, 0.0);
    for (std::size_t i = 0; i < loop.size(); ++i)
        t[i + 1] = t[i] + (loop[(i + 1) % loop.size()] - loop[i]).norm();
    const double total = t.back();
    for (double& v : t) v /= total;
    return t;
}

}  // namespace

MeshPtr carve_hole_2d(Mesh&& background, const RectifiableSet& set, double r) {
    const double h = background.h;
    const double gap = 0.45 * h;
    const std::vector<Vec> contour = detail::hole_contour(set, r, h);

    // Carve: drop every triangle that comes within r + gap of the set.
    std::vector<char> removed(background.elements.size(), 0);
    int n_removed = 0;
    for (std::size_t e = 0; e < background.elements.size(); ++e) {
        const auto& el = background.elements[e];
        const double dist = set_triangle_distance(set, background.nodes[el.v[0]],
                                                  background.nodes[el.v[1]],
                                                  background.nodes[el.v[2]], h);
        if (dist < r + gap) {
            removed[e] = 1;
            ++n_removed;
        }
    }
    if (n_removed == 0)
        throw MeshError("generate_mesh", "hole smaller than mesh resolution");

    // Cavity boundary: interior edges with exactly one surviving triangle.
    std::map<std::pair<int, int>, std::pair<int, int>> edge_count;  // kept, total
    auto ekey = [](int a, int b) {
        if (a > b) std::swap(a, b);
        return std::make_pair(a, b);
    };
    for (std::size_t e = 0; e < background.elements.size(); ++e) {
        const auto& el = background.elements[e];
        for (int i = 0; i < 3; ++i) {
            auto& cnt = edge_count[ekey(el.v[i], el.v[(i + 1) % 3])];
            ++cnt.second;
            if (!removed[e]) ++cnt.first;
        }
    }
    std::map<int, std::vector<int>> cavity_adj;
    std::set<std::pair<int, int>> cavity_edges;
    for (const auto& [edge, cnt] : edge_count) {
        if (cnt.second == 2 && cnt.first == 1) {
            cavity_edges.insert(edge);
            cavity_adj[edge.first].push_back(edge.second);
            cavity_adj[edge.second].push_back(edge.first);
        }
    }
    if (cavity_edges.empty())
        throw MeshError("generate_mesh", "carving produced no cavity boundary");
    for (const auto& [node, nbrs] : cavity_adj)
        if (nbrs.size() != 2)
            throw MeshError("generate_mesh", "cavity boundary is not a simple loop");

    // Walk the loop.
    std::vector<int> loop_ids;
    {
        const int start = cavity_adj.begin()->first;
        int prev = -1, cur = start;
        do {
            loop_ids.push_back(cur);
            const auto& nbrs = cavity_adj[cur];
            const int next = (nbrs[0] == prev) ? nbrs[1] : nbrs[0];
            prev = cur;
            cur = next;
        } while (cur != start && loop_ids.size() <= cavity_adj.size());
        if (cur != start || loop_ids.size() != cavity_adj.size())
            throw MeshError("generate_mesh", "cavity boundary walk failed");
    }

    // Rebuild the kept part with compact node numbering.
    Mesh mesh;
    mesh.dim = 2;
    mesh.h = h;
    std::vector<int> remap(background.nodes.size(), -1);
    auto map_node = [&](int i) {
        if (remap[i] < 0) {
            remap[i] = mesh.node_count();
            mesh.nodes.push_back(background.nodes[i]);
        }
        return remap[i];
    };
    for (std::size_t e = 0; e < background.elements.size(); ++e) {
        if (removed[e]) continue;
        const auto& el = background.elements[e];
        mesh.elements.push_back({{map_node(el.v[0]), map_node(el.v[1]), map_node(el.v[2])}});
    }
    for (const auto& f : background.facets) {
        if (remap[f.v[0]] < 0 || remap[f.v[1]] < 0) continue;
        const auto it = edge_count.find(ekey(f.v[0], f.v[1]));
        if (it != edge_count.end() && it->second.first == 1)
            mesh.facets.push_back({{remap[f.v[0]], remap[f.v[1]]}, BoundaryTag::outer, -1});
    }

    // Orient both loops counterclockwise and add the contour nodes.
    std::vector<Vec> cavity_pts;
    for (int id : loop_ids) cavity_pts.push_back(background.nodes[id]);
    if (loop_signed_area(cavity_pts) < 0.0) {
        std::reverse(loop_ids.begin(), loop_ids.end());
        std::reverse(cavity_pts.begin(), cavity_pts.end());
    }
    std::vector<Vec> inner_pts = contour;
    if (loop_signed_area(inner_pts) < 0.0) std::reverse(inner_pts.begin(), inner_pts.end());

    std::vector<int> inner_ids;
    for (const Vec& p : inner_pts) {
        inner_ids.push_back(mesh.node_count());
        mesh.nodes.push_back(p);
    }
    std::vector<int> outer_ids;
    for (int id : loop_ids) outer_ids.push_back(remap[id] >= 0 ? remap[id] : map_node(id));

    // Align loop starts, then advance by normalized arc length.
    auto tin = arc_length_params(inner_pts);
    std::size_t best_shift = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cavity_pts.size(); ++j) {
        const double dist = (cavity_pts[j] - inner_pts[0]).norm();
        if (dist < best_dist) {
            best_dist = dist;
            best_shift = j;
        }
    }
    std::rotate(cavity_pts.begin(), cavity_pts.begin() + best_shift, cavity_pts.end());
    std::rotate(outer_ids.begin(), outer_ids.begin() + best_shift, outer_ids.end());
    auto tout = arc_length_params(cavity_pts);

    const std::size_t m = inner_pts.size(), kk = cavity_pts.size();
    std::size_t i = 0, j = 0;
    while (i < m || j < kk) {
        const double next_u = i < m ? tin[i + 1] : 2.0;
        const double next_v = j < kk ? tout[j + 1] : 2.0;
        if (next_u <= next_v) {
            mesh.elements.push_back({{inner_ids[i % m], inner_ids[(i + 1) % m],
                                      outer_ids[j % kk]}});
            ++i;
        } else {
            mesh.elements.push_back({{inner_ids[i % m], outer_ids[(j + 1) % kk],
                                      outer_ids[j % kk]}});
            ++j;
        }
    }
    for (std::size_t q = 0; q < m; ++q)
        mesh.facets.push_back({{inner_ids[q], inner_ids[(q + 1) % m]}, BoundaryTag::hole, -1});

    mesh.finalize();
    return std::make_shared<const Mesh>(std::move(mesh));
}

MeshPtr mesh_hole_interior(const Domain& domain, double h, const RectifiableSet& set,
                           double r) {
    if (domain.dim == 1) {
        if (set.d != 0) throw MeshError("mesh_hole_interior", "1D holes require a point set");
        const double x0 = set.point.x();
        auto pts = std::vector<double>{};
        const int n = std::max(2, static_cast<int>(std::ceil(2.0 * r / h)));
        for (int i = 0; i <= n; ++i) pts.push_back(x0 - r + 2.0 * r * i / n);
        auto mesh = interval_mesh_from_breakpoints(std::move(pts));
        // Re-tag the two endpoints as the hole interface.
        Mesh copy = *mesh;
        for (auto& f : copy.facets) f.tag = BoundaryTag::hole;
        copy.finalize();
        return std::make_shared<const Mesh>(std::move(copy));
    }
    // Scaled copies of the contour polygon toward its centroid (the
    // contour is convex for the supported shapes), plus a center fan.
    std::vector<Vec> contour = detail::hole_contour(set, r, h);
    if (loop_signed_area(contour) < 0.0) std::reverse(contour.begin(), contour.end());
    Vec center = Vec::Zero();
    for (const Vec& p : contour) center += p;
    center /= static_cast<double>(contour.size());

    const int m = static_cast<int>(contour.size());
    const int nr = std::max(1, static_cast<int>(std::ceil(r / h)));
    Mesh mesh;
    mesh.dim = 2;
    mesh.h = std::max(h, 2.0 * M_PI * r / m);
    mesh.nodes.push_back(center);
    auto ring_id = [&](int ring, int j) { return 1 + (ring - 1) * m + ((j % m + m) % m); };
    for (int ring = 1; ring <= nr; ++ring) {
        const double t = static_cast<double>(ring) / nr;
        for (int j = 0; j < m; ++j) mesh.nodes.push_back(center + t * (contour[j] - center));
    }
    for (int j = 0; j < m; ++j) mesh.elements.push_back({{0, ring_id(1, j), ring_id(1, j + 1)}});
    for (int ring = 1; ring < nr; ++ring)
        for (int j = 0; j < m; ++j) {
            mesh.elements.push_back({{ring_id(ring, j), ring_id(ring + 1, j), ring_id(ring + 1, j + 1)}});
            mesh.elements.push_back({{ring_id(ring, j), ring_id(ring + 1, j + 1), ring_id(ring, j + 1)}});
        }
    for (int j = 0; j < m; ++j)
        mesh.facets.push_back({{ring_id(nr, j), ring_id(nr, j + 1)}, BoundaryTag::hole, -1});
    mesh.finalize();
    return std::make_shared<const Mesh>(std::move(mesh));
}

}  // namespace helmsense
