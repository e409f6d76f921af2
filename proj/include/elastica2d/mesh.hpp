#pragma once

// Triangle meshes with boundary markers, the plain-text mesh/state formats,
// validation (orientation, edge-manifoldness, boundary consistency),
// midpoint refinement and boundary-loop counting.

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "elastica2d/complex_expr.hpp"
#include "elastica2d/errors.hpp"

namespace elastica {

struct TriangleMesh {
    std::vector<Complex> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> boundary_vertices; // sorted, unique
};

struct DeformedState {
    std::vector<Complex> positions;
};

inline DeformedState identity_state(const TriangleMesh& mesh) {
    return DeformedState{mesh.vertices};
}

inline double triangle_ref_area(Complex a, Complex b, Complex c) {
    const Complex e1 = b - a, e2 = c - a;
    return 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
}

inline double mesh_area(const TriangleMesh& mesh) {
    double area = 0.0;
    for (const auto& t : mesh.triangles)
        area += triangle_ref_area(mesh.vertices[(size_t)t[0]], mesh.vertices[(size_t)t[1]],
                                  mesh.vertices[(size_t)t[2]]);
    return area;
}

inline double mesh_diameter(const TriangleMesh& mesh) {
    if (mesh.vertices.empty()) return 0.0;
    double xmin = mesh.vertices[0].real(), xmax = xmin;
    double ymin = mesh.vertices[0].imag(), ymax = ymin;
    for (const Complex& v : mesh.vertices) {
        xmin = std::min(xmin, v.real());
        xmax = std::max(xmax, v.real());
        ymin = std::min(ymin, v.imag());
        ymax = std::max(ymax, v.imag());
    }
    return std::hypot(xmax - xmin, ymax - ymin);
}

namespace detail {

struct EdgeUse {
    int count = 0;
    int forward = 0; // directed occurrences a<b vs b<a
};

inline std::map<std::pair<int, int>, EdgeUse> edge_table(const TriangleMesh& mesh) {
    std::map<std::pair<int, int>, EdgeUse> edges;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[(size_t)e], b = t[(size_t)((e + 1) % 3)];
            auto& use = edges[{std::min(a, b), std::max(a, b)}];
            use.count += 1;
            use.forward += (a < b) ? 1 : -1;
        }
    }
    return edges;
}

} // namespace detail

// Throws MeshFormatError on any structural defect.
inline void validate_mesh(const TriangleMesh& mesh) {
    const int nv = (int)mesh.vertices.size();
    if (nv < 3 || mesh.triangles.empty())
        throw MeshFormatError("mesh needs at least 3 vertices and 1 triangle");
    const double scale = mesh_diameter(mesh);
    for (size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        for (int i : t)
            if (i < 0 || i >= nv)
                throw MeshFormatError("triangle references vertex " + std::to_string(i));
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw MeshFormatError("triangle with repeated vertex");
        const double area = triangle_ref_area(
            mesh.vertices[(size_t)t[0]], mesh.vertices[(size_t)t[1]], mesh.vertices[(size_t)t[2]]);
        if (!(area > 1e-14 * scale * scale))
            throw MeshFormatError("triangle " + std::to_string(ti) +
                                  " is degenerate or clockwise");
    }
    std::set<int> boundary_from_edges;
    for (const auto& [key, use] : detail::edge_table(mesh)) {
        if (use.count > 2)
            throw MeshFormatError("non-manifold edge (" + std::to_string(key.first) + "," +
                                  std::to_string(key.second) + ")");
        if (use.count == 2 && use.forward != 0)
            throw MeshFormatError("inconsistently oriented interior edge");
        if (use.count == 1) {
            boundary_from_edges.insert(key.first);
            boundary_from_edges.insert(key.second);
        }
    }
    const std::set<int> marked(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end());
    for (int i : marked)
        if (i < 0 || i >= nv) throw MeshFormatError("boundary marker out of range");
    if (marked != boundary_from_edges)
        throw MeshFormatError("boundary markers disagree with boundary edges");
}

inline int count_boundary_loops(const TriangleMesh& mesh) {
    // boundary edges, directed as they occur in their (unique) triangle
    std::map<std::pair<int, int>, int> undirected;
    for (const auto& [key, use] : detail::edge_table(mesh)) undirected[key] = use.count;
    std::map<int, int> next;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[(size_t)e], b = t[(size_t)((e + 1) % 3)];
            if (undirected[{std::min(a, b), std::max(a, b)}] == 1) next[a] = b;
        }
    }
    int loops = 0;
    std::set<int> seen;
    for (const auto& [start, unused] : next) {
        if (seen.count(start)) continue;
        ++loops;
        int v = start;
        while (!seen.count(v)) {
            seen.insert(v);
            v = next.at(v);
        }
    }
    return loops;
}

// One step of 1-to-4 midpoint refinement; boundary midpoints inherit markers.
inline TriangleMesh refine(const TriangleMesh& mesh) {
    TriangleMesh out;
    out.vertices = mesh.vertices;
    const auto edges = detail::edge_table(mesh);
    std::map<std::pair<int, int>, int> midpoint;
    std::set<int> boundary(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end());
    for (const auto& [key, use] : edges) {
        midpoint[key] = (int)out.vertices.size();
        out.vertices.push_back(0.5 * (mesh.vertices[(size_t)key.first] +
                                      mesh.vertices[(size_t)key.second]));
        if (use.count == 1) boundary.insert(midpoint[key]);
    }
    auto mid = [&](int a, int b) { return midpoint.at({std::min(a, b), std::max(a, b)}); };
    for (const auto& t : mesh.triangles) {
        const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({t[1], m12, m01});
        out.triangles.push_back({t[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
    }
    out.boundary_vertices.assign(boundary.begin(), boundary.end());
    return out;
}

inline TriangleMesh refine(const TriangleMesh& mesh, int times) {
    TriangleMesh out = mesh;
    for (int i = 0; i < times; ++i) out = refine(out);
    return out;
}

// ---- text formats ----------------------------------------------------------
// mesh:  `v <x> <y>`, `t <i> <j> <k>` (0-based CCW), `b <i>`, `#` comments
// state: `p <x> <y>` in vertex order

inline TriangleMesh parse_mesh(std::istream& in) {
    TriangleMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        auto fail = [&](const std::string& why) {
            throw MeshFormatError("line " + std::to_string(lineno) + ": " + why);
        };
        if (tag == "v") {
            double x, y;
            if (!(ls >> x >> y)) fail("expected `v <x> <y>`");
            mesh.vertices.emplace_back(x, y);
        } else if (tag == "t") {
            int i, j, k;
            if (!(ls >> i >> j >> k)) fail("expected `t <i> <j> <k>`");
            mesh.triangles.push_back({i, j, k});
        } else if (tag == "b") {
            int i;
            if (!(ls >> i)) fail("expected `b <i>`");
            mesh.boundary_vertices.push_back(i);
        } else {
            fail("unknown record `" + tag + "`");
        }
        std::string extra;
        if (ls >> extra) fail("trailing tokens");
    }
    std::sort(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end());
    mesh.boundary_vertices.erase(
        std::unique(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end()),
        mesh.boundary_vertices.end());
    validate_mesh(mesh);
    return mesh;
}

inline TriangleMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshFormatError("cannot open mesh file " + path);
    return parse_mesh(in);
}

inline void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
    char buf[96];
    for (const Complex& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", v.real(), v.imag());
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (int b : mesh.boundary_vertices) out << "b " << b << '\n';
}

inline void save_mesh(const std::string& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw MeshFormatError("cannot write mesh file " + path);
    write_mesh(out, mesh);
}

inline DeformedState parse_state(std::istream& in, size_t expected_vertices) {
    DeformedState state;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        double x, y;
        if (tag != "p" || !(ls >> x >> y))
            throw MeshFormatError("line " + std::to_string(lineno) + ": expected `p <x> <y>`");
        state.positions.emplace_back(x, y);
    }
    if (state.positions.size() != expected_vertices)
        throw MeshFormatError("state has " + std::to_string(state.positions.size()) +
                              " positions, mesh has " + std::to_string(expected_vertices));
    for (const Complex& p : state.positions)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw MeshFormatError("non-finite state entry");
    return state;
}

inline DeformedState load_state(const std::string& path, size_t expected_vertices) {
    std::ifstream in(path);
    if (!in) throw MeshFormatError("cannot open state file " + path);
    return parse_state(in, expected_vertices);
}

inline void write_state(std::ostream& out, const DeformedState& state) {
    char buf[96];
    for (const Complex& p : state.positions) {
        std::snprintf(buf, sizeof buf, "p %.17g %.17g\n", p.real(), p.imag());
        out << buf;
    }
}

inline void save_state(const std::string& path, const DeformedState& state) {
    std::ofstream out(path);
    if (!out) throw MeshFormatError("cannot write state file " + path);
    write_state(out, state);
}

} // namespace elastica
