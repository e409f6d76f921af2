#pragma once

// Small deterministic SVG writer: render figures from world-space points,
// fit a viewBox with a fixed margin, and map the complex plane y-up to SVG
// y-down. Output depends only on the primitives added (stable formatting).

#include <string>

#include "elastica2d/energy.hpp"

namespace elastica {

inline const char* stability_color(TriStability cls) {
    switch (cls) {
        case TriStability::StableStrict: return "#2c7fb8";
        case TriStability::Melting: return "#fe9929";
        case TriStability::Unstable: return "#d7301f";
    }
    return "#000000";
}

inline constexpr const char* kReferenceColor = "#cccccc";
inline constexpr const char* kBranchColor = "#000000";

class SvgFigure {
  public:
    void add_path(std::vector<Complex> pts, std::string stroke, double width_px,
                  bool closed = false) {
        if (pts.size() < 2) return;
        paths_.push_back({std::move(pts), std::move(stroke), width_px, closed});
    }
    void add_dot(Complex center, double world_radius, std::string fill) {
        dots_.push_back({center, world_radius, std::move(fill)});
    }

    std::string to_string(int pixel_width = 800) const {
        double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
        bool first = true;
        auto grow = [&](Complex p, double pad) {
            if (first) {
                xmin = p.real() - pad;
                xmax = p.real() + pad;
                ymin = p.imag() - pad;
                ymax = p.imag() + pad;
                first = false;
            } else {
                xmin = std::min(xmin, p.real() - pad);
                xmax = std::max(xmax, p.real() + pad);
                ymin = std::min(ymin, p.imag() - pad);
                ymax = std::max(ymax, p.imag() + pad);
            }
        };
        for (const auto& path : paths_)
            for (const Complex& p : path.pts) grow(p, 0.0);
        for (const auto& dot : dots_) grow(dot.center, dot.radius);

        const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
        const double margin = 0.04 * span;
        xmin -= margin;
        xmax += margin;
        ymin -= margin;
        ymax += margin;
        const double scale = pixel_width / (xmax - xmin);
        const int pixel_height = std::max(1, (int)std::lround((ymax - ymin) * scale));
        auto X = [&](Complex p) { return (p.real() - xmin) * scale; };
        auto Y = [&](Complex p) { return (ymax - p.imag()) * scale; };

        std::string out;
        char buf[256];
        auto emit = [&](const char* fmt, auto... args) {
            if constexpr (sizeof...(args) == 0) {
                out += fmt;
            } else {
                std::snprintf(buf, sizeof buf, fmt, args...);
                out += buf;
            }
        };
        emit("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        emit("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
             "viewBox=\"0 0 %d %d\">\n",
             pixel_width, pixel_height, pixel_width, pixel_height);
        emit("<rect width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n", pixel_width,
             pixel_height);
        for (const auto& path : paths_) {
            out += "<path d=\"";
            for (size_t i = 0; i < path.pts.size(); ++i)
                emit("%s%.6g %.6g", i == 0 ? "M" : " L", X(path.pts[i]), Y(path.pts[i]));
            if (path.closed) out += " Z";
            emit("\" fill=\"none\" stroke=\"%s\" stroke-width=\"%.3g\" "
                 "stroke-linejoin=\"round\" stroke-linecap=\"round\"/>\n",
                 path.stroke.c_str(), path.width);
        }
        for (const auto& dot : dots_)
            emit("<circle cx=\"%.6g\" cy=\"%.6g\" r=\"%.6g\" fill=\"%s\"/>\n", X(dot.center),
                 Y(dot.center), std::max(dot.radius * scale, 1.5), dot.fill.c_str());
        out += "</svg>\n";
        return out;
    }

  private:
    struct Path {
        std::vector<Complex> pts;
        std::string stroke;
        double width;
        bool closed;
    };
    struct Dot {
        Complex center;
        double radius;
        std::string fill;
    };
    std::vector<Path> paths_;
    std::vector<Dot> dots_;
};

// Reference mesh in light gray under the image mesh stroked per stability
// class; branch-point triangles marked by filled circles at their centroids.
inline std::string render_mesh_figure(const TriangleMesh& mesh, const DeformedState& state,
                                      const StabilityReport& report) {
    SvgFigure fig;
    for (const auto& t : mesh.triangles)
        fig.add_path({mesh.vertices[(size_t)t[0]], mesh.vertices[(size_t)t[1]],
                      mesh.vertices[(size_t)t[2]]},
                     kReferenceColor, 0.8, true);
    double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;
    for (size_t i = 0; i < state.positions.size(); ++i) {
        const Complex& p = state.positions[i];
        if (i == 0) {
            xlo = xhi = p.real();
            ylo = yhi = p.imag();
        }
        xlo = std::min(xlo, p.real());
        xhi = std::max(xhi, p.real());
        ylo = std::min(ylo, p.imag());
        yhi = std::max(yhi, p.imag());
    }
    const double span = std::hypot(xhi - xlo, yhi - ylo);
    for (size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        fig.add_path({state.positions[(size_t)t[0]], state.positions[(size_t)t[1]],
                      state.positions[(size_t)t[2]]},
                     stability_color(report.flags[ti]), 1.2, true);
    }
    for (int ti : report.branch_triangles) {
        const auto& t = mesh.triangles[(size_t)ti];
        const Complex c = (state.positions[(size_t)t[0]] + state.positions[(size_t)t[1]] +
                           state.positions[(size_t)t[2]]) /
                          3.0;
        fig.add_dot(c, 0.012 * std::max(span, 1e-12), kBranchColor);
    }
    return fig.to_string();
}

struct ClassedCurve {
    std::vector<Complex> pts;
    TriStability cls = TriStability::StableStrict;
};

// Analytic-map figure: reference curves in light gray, image curves stroked
// per stability class, branch points as filled circles.
inline std::string render_map_figure(const std::vector<std::vector<Complex>>& reference,
                                     const std::vector<ClassedCurve>& image,
                                     const std::vector<Complex>& branch_points) {
    SvgFigure fig;
    for (const auto& curve : reference) fig.add_path(curve, kReferenceColor, 0.8);
    double span = 0.0;
    Complex lo(0, 0), hi(0, 0);
    bool first = true;
    for (const auto& curve : image)
        for (const Complex& p : curve.pts) {
            if (first) {
                lo = hi = p;
                first = false;
            }
            lo = Complex(std::min(lo.real(), p.real()), std::min(lo.imag(), p.imag()));
            hi = Complex(std::max(hi.real(), p.real()), std::max(hi.imag(), p.imag()));
        }
    span = std::abs(hi - lo);
    for (const auto& curve : image)
        fig.add_path(curve.pts, stability_color(curve.cls), 1.2);
    for (const Complex& p : branch_points) fig.add_dot(p, 0.012 * std::max(span, 1e-12), kBranchColor);
    return fig.to_string();
}

} // namespace elastica
