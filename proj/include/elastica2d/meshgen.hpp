#pragma once

// Structured generators for the reference domains used by the paper's
// figures: hexagonal-pattern disks, rectangle grids and polar annuli.

#include <stdexcept>

#include "elastica2d/mesh.hpp"

namespace elastica {

// Hexagonal disk: `rings` concentric rings around a center vertex,
// 1 + 3 rings (rings+1) vertices and 6 rings^2 triangles.
inline TriangleMesh disk_mesh(double radius, int rings) {
    if (rings < 3) throw std::invalid_argument("disk resolution must be at least 3");
    if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
    TriangleMesh mesh;
    mesh.vertices.emplace_back(0.0, 0.0);
    auto ring_start = [](int r) { return r == 0 ? 0 : 1 + 3 * r * (r - 1); };
    for (int r = 1; r <= rings; ++r) {
        const double rho = radius * r / rings;
        for (int k = 0; k < 6 * r; ++k)
            mesh.vertices.push_back(std::polar(rho, 2.0 * M_PI * k / (6.0 * r)));
    }
    for (int r = 1; r <= rings; ++r) {
        const int so = ring_start(r), no = 6 * r;
        const int si = ring_start(r - 1), ni = 6 * (r - 1);
        for (int s = 0; s < 6; ++s) {
            for (int j = 0; j < r; ++j) {
                const int o1 = so + (s * r + j) % no;
                const int o2 = so + (s * r + j + 1) % no;
                const int i1 = r == 1 ? 0 : si + (s * (r - 1) + j) % ni;
                mesh.triangles.push_back({o1, o2, i1});
                if (j + 1 < r) {
                    const int i2 = si + (s * (r - 1) + j + 1) % ni;
                    mesh.triangles.push_back({o2, i2, i1});
                }
            }
        }
    }
    for (int k = 0; k < 6 * rings; ++k)
        mesh.boundary_vertices.push_back(ring_start(rings) + k);
    validate_mesh(mesh);
    return mesh;
}

// Axis-aligned rectangle [0,w] x [0,h] split into nx-by-ny quads, each cut
// along its diagonal: (nx+1)(ny+1) vertices, 2 nx ny triangles.
inline TriangleMesh rectangle_mesh(double w, double h, int nx, int ny) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle needs nx, ny >= 1");
    if (!(w > 0.0) || !(h > 0.0)) throw std::invalid_argument("rectangle needs w, h > 0");
    TriangleMesh mesh;
    auto id = [nx](int ix, int iy) { return iy * (nx + 1) + ix; };
    for (int iy = 0; iy <= ny; ++iy)
        for (int ix = 0; ix <= nx; ++ix)
            mesh.vertices.emplace_back(w * ix / nx, h * iy / ny);
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const int a = id(ix, iy), b = id(ix + 1, iy);
            const int c = id(ix + 1, iy + 1), d = id(ix, iy + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    }
    for (int iy = 0; iy <= ny; ++iy)
        for (int ix = 0; ix <= nx; ++ix)
            if (ix == 0 || iy == 0 || ix == nx || iy == ny)
                mesh.boundary_vertices.push_back(id(ix, iy));
    validate_mesh(mesh);
    return mesh;
}

// Polar annulus grid: `segments` angular subdivisions, radial rings chosen
// for near-unit element aspect; two boundary loops.
inline TriangleMesh annulus_mesh(double r1, double r2, int segments) {
    if (segments < 3) throw std::invalid_argument("annulus resolution must be at least 3");
    if (!(r1 > 0.0) || !(r2 > r1)) throw std::invalid_argument("annulus needs 0 < r1 < r2");
    const int nr = std::max(
        1, (int)std::lround(segments * (r2 - r1) / (M_PI * (r1 + r2))));
    TriangleMesh mesh;
    auto id = [segments](int ir, int ia) { return ir * segments + (ia % segments); };
    for (int ir = 0; ir <= nr; ++ir) {
        const double rho = r1 + (r2 - r1) * ir / nr;
        for (int ia = 0; ia < segments; ++ia)
            mesh.vertices.push_back(std::polar(rho, 2.0 * M_PI * ia / segments));
    }
    for (int ir = 0; ir < nr; ++ir) {
        for (int ia = 0; ia < segments; ++ia) {
            const int a = id(ir, ia), b = id(ir, ia + 1);
            const int c = id(ir + 1, ia + 1), d = id(ir + 1, ia);
            mesh.triangles.push_back({a, d, c});
            mesh.triangles.push_back({a, c, b});
        }
    }
    for (int ia = 0; ia < segments; ++ia) {
        mesh.boundary_vertices.push_back(id(0, ia));
        mesh.boundary_vertices.push_back(id(nr, ia));
    }
    std::sort(mesh.boundary_vertices.begin(), mesh.boundary_vertices.end());
    validate_mesh(mesh);
    return mesh;
}

} // namespace elastica
