#pragma once

// Discrete E_V on piecewise-linear maps: per-triangle Wirtinger derivatives,
// energy with its exact vertex gradient, the energy-area identity, stability
// classification and the second variation quadratic form.

#include <functional>

#include "elastica2d/mesh.hpp"

namespace elastica {

inline constexpr double kFzRegularization = 1e-10; // |fz| -> sqrt(|fz|^2 + eps^2)
inline constexpr double kMeltingTolDefault = 1e-6;
inline constexpr double kBranchTriangleTol = 1e-8;

struct PotentialV {
    std::function<double(double)> value; // V(x), x = |fz|^2
    std::function<double(double)> d1;    // V'(x)
    std::function<double(double)> d2;    // V''(x)
    enum class Kind { Lambda, Custom } kind = Kind::Lambda;
    double lambda = 1.0;

    // V(x) = lambda (sqrt(x) - 1)^2 with sqrt(x) regularized at 0.
    static PotentialV Lambda(double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
        PotentialV v;
        v.kind = Kind::Lambda;
        v.lambda = lambda;
        const double e2 = kFzRegularization * kFzRegularization;
        v.value = [lambda, e2](double x) {
            const double s = std::sqrt(x + e2);
            return lambda * (s - 1.0) * (s - 1.0);
        };
        v.d1 = [lambda, e2](double x) { return lambda * (1.0 - 1.0 / std::sqrt(x + e2)); };
        v.d2 = [lambda, e2](double x) {
            const double s = std::sqrt(x + e2);
            return lambda / (2.0 * s * s * s);
        };
        return v;
    }

    static PotentialV Custom(std::function<double(double)> value,
                             std::function<double(double)> d1,
                             std::function<double(double)> d2) {
        PotentialV v;
        v.kind = Kind::Custom;
        v.value = std::move(value);
        v.d1 = std::move(d1);
        v.d2 = std::move(d2);
        if (std::abs(v.value(1.0)) > 1e-12 || std::abs(v.d1(1.0)) > 1e-12)
            throw std::invalid_argument("custom V must have its minimum 0 at x = 1");
        for (const double x : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            if (!(v.d2(x) > 0.0))
                throw std::invalid_argument("custom V must be strictly convex");
            if (!(v.value(x) >= 0.0))
                throw std::invalid_argument("custom V must be nonnegative");
        }
        if (!(std::abs(v.d1(1e-12) * 1e-6) < 1e3))
            throw std::invalid_argument("custom V violates V'(x) sqrt(x) = O(1)");
        return v;
    }
};

struct TriangleDerivatives {
    Complex fz;
    Complex fzbar;
    double ref_area = 0.0;
};

// The unique affine decomposition img_edge = fz ref_edge + fzbar conj(ref_edge).
inline TriangleDerivatives triangle_wirtinger(const std::array<Complex, 3>& ref,
                                              const std::array<Complex, 3>& img) {
    const Complex e1 = ref[1] - ref[0], e2 = ref[2] - ref[0];
    const Complex w1 = img[1] - img[0], w2 = img[2] - img[0];
    const double cross = e1.real() * e2.imag() - e1.imag() * e2.real();
    const double scale = std::max({std::norm(e1), std::norm(e2), std::norm(e2 - e1)});
    if (!(0.5 * std::abs(cross) > 1e-14 * scale))
        throw DegenerateTriangle("reference triangle has (near) zero area");
    const Complex det = e1 * std::conj(e2) - std::conj(e1) * e2; // = -2i cross
    TriangleDerivatives d;
    d.fz = (w1 * std::conj(e2) - std::conj(e1) * w2) / det;
    d.fzbar = (e1 * w2 - w1 * e2) / det;
    d.ref_area = 0.5 * cross;
    return d;
}

// Deterministic tree reduction (fixed pairing independent of value order).
inline double pairwise_sum(std::vector<double> v) {
    size_t n = v.size();
    while (n > 1) {
        size_t w = 0;
        for (size_t i = 0; i + 1 < n; i += 2) v[w++] = v[i] + v[i + 1];
        if (n & 1) v[w++] = v[n - 1];
        n = w;
    }
    return n == 0 ? 0.0 : v[0];
}

namespace detail {

template <typename Fn>
void for_each_triangle(const TriangleMesh& mesh, const DeformedState& state, Fn&& fn) {
    for (size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        const std::array<Complex, 3> ref = {mesh.vertices[(size_t)t[0]],
                                            mesh.vertices[(size_t)t[1]],
                                            mesh.vertices[(size_t)t[2]]};
        const std::array<Complex, 3> img = {state.positions[(size_t)t[0]],
                                            state.positions[(size_t)t[1]],
                                            state.positions[(size_t)t[2]]};
        fn(ti, t, triangle_wirtinger(ref, img));
    }
}

} // namespace detail

inline double energy(const TriangleMesh& mesh, const DeformedState& state,
                     const PotentialV& V) {
    std::vector<double> parts(mesh.triangles.size());
    detail::for_each_triangle(mesh, state, [&](size_t ti, const auto&, const TriangleDerivatives& d) {
        parts[ti] = d.ref_area * 0.5 * (V.value(std::norm(d.fz)) + std::norm(d.fzbar));
    });
    return pairwise_sum(std::move(parts));
}

// Exact gradient of the discrete energy with respect to vertex positions,
// as real 2-vectors packed into Complex. fz and fzbar are C-linear in the
// vertex images: fz = sum alpha_i f_i, fzbar = sum beta_i f_i.
inline std::vector<Complex> gradient(const TriangleMesh& mesh, const DeformedState& state,
                                     const PotentialV& V) {
    std::vector<Complex> grad(mesh.vertices.size(), Complex(0.0, 0.0));
    detail::for_each_triangle(mesh, state, [&](size_t, const std::array<int, 3>& t,
                                               const TriangleDerivatives& d) {
        const Complex e1 = mesh.vertices[(size_t)t[1]] - mesh.vertices[(size_t)t[0]];
        const Complex e2 = mesh.vertices[(size_t)t[2]] - mesh.vertices[(size_t)t[0]];
        const Complex det = e1 * std::conj(e2) - std::conj(e1) * e2;
        const Complex alpha[3] = {(std::conj(e1) - std::conj(e2)) / det, std::conj(e2) / det,
                                  -std::conj(e1) / det};
        const Complex beta[3] = {(e2 - e1) / det, -e2 / det, e1 / det};
        const double vp = V.d1(std::norm(d.fz));
        for (int i = 0; i < 3; ++i) {
            grad[(size_t)t[i]] += d.ref_area * (vp * d.fz * std::conj(alpha[i]) +
                                                d.fzbar * std::conj(beta[i]));
        }
    });
    return grad;
}

// Signed area of the image, counted with multiplicity: sum A (|fz|^2 - |fzbar|^2).
inline double image_area(const TriangleMesh& mesh, const DeformedState& state) {
    std::vector<double> parts(mesh.triangles.size());
    detail::for_each_triangle(mesh, state, [&](size_t ti, const auto&, const TriangleDerivatives& d) {
        parts[ti] = d.ref_area * (std::norm(d.fz) - std::norm(d.fzbar));
    });
    return pairwise_sum(std::move(parts));
}

// lhs = E_V + area(f(M))/2, rhs = sum A/2 (V(|fz|^2) + |fz|^2); equal as an
// algebraic identity of the discretization.
inline std::pair<double, double> energy_area_identity(const TriangleMesh& mesh,
                                                      const DeformedState& state,
                                                      const PotentialV& V) {
    const double lhs = energy(mesh, state, V) + 0.5 * image_area(mesh, state);
    std::vector<double> parts(mesh.triangles.size());
    detail::for_each_triangle(mesh, state, [&](size_t ti, const auto&, const TriangleDerivatives& d) {
        parts[ti] = d.ref_area * 0.5 * (V.value(std::norm(d.fz)) + std::norm(d.fz));
    });
    return {lhs, pairwise_sum(std::move(parts))};
}

enum class TriStability { StableStrict, Melting, Unstable };

inline TriStability classify_stability(double s, double melting_tol = kMeltingTolDefault) {
    if (s > melting_tol) return TriStability::StableStrict;
    if (s < -melting_tol) return TriStability::Unstable;
    return TriStability::Melting;
}

struct StabilityReport {
    std::vector<TriStability> flags;     // per triangle
    std::vector<double> s_values;        // s = 1 + V'(|fz|^2)
    std::vector<int> branch_triangles;   // |fz| < kBranchTriangleTol
    int stable_count = 0;
    int melting_count = 0;
    int unstable_count = 0;
};

inline StabilityReport stability_report(const TriangleMesh& mesh, const DeformedState& state,
                                        const PotentialV& V,
                                        double melting_tol = kMeltingTolDefault) {
    StabilityReport report;
    report.flags.resize(mesh.triangles.size());
    report.s_values.resize(mesh.triangles.size());
    detail::for_each_triangle(mesh, state, [&](size_t ti, const auto&, const TriangleDerivatives& d) {
        const double s = 1.0 + V.d1(std::norm(d.fz));
        report.s_values[ti] = s;
        report.flags[ti] = classify_stability(s, melting_tol);
        switch (report.flags[ti]) {
            case TriStability::StableStrict: ++report.stable_count; break;
            case TriStability::Melting: ++report.melting_count; break;
            case TriStability::Unstable: ++report.unstable_count; break;
        }
        if (std::abs(d.fz) < kBranchTriangleTol) report.branch_triangles.push_back((int)ti);
    });
    return report;
}

// Quadratic form sum A (2 V''(|fz|^2) <fz,hz>^2 + (1+V'(|fz|^2)) |hz|^2) for
// variations vanishing on the boundary (the |h_zbar|^2 term of the continuum
// formula is traded against |h_z|^2, which requires zero boundary values).
inline double second_variation(const TriangleMesh& mesh, const DeformedState& state,
                               const PotentialV& V, const std::vector<Complex>& variation) {
    if (variation.size() != mesh.vertices.size())
        throw std::invalid_argument("variation size mismatch");
    for (int b : mesh.boundary_vertices)
        if (variation[(size_t)b] != Complex(0.0, 0.0))
            throw VariationOnBoundary("variation must vanish on the boundary");
    std::vector<double> parts(mesh.triangles.size());
    detail::for_each_triangle(mesh, state, [&](size_t ti, const std::array<int, 3>& t,
                                               const TriangleDerivatives& d) {
        const std::array<Complex, 3> ref = {mesh.vertices[(size_t)t[0]],
                                            mesh.vertices[(size_t)t[1]],
                                            mesh.vertices[(size_t)t[2]]};
        const std::array<Complex, 3> var = {variation[(size_t)t[0]], variation[(size_t)t[1]],
                                            variation[(size_t)t[2]]};
        const TriangleDerivatives hd = triangle_wirtinger(ref, var);
        const double x = std::norm(d.fz);
        const double inner = d.fz.real() * hd.fz.real() + d.fz.imag() * hd.fz.imag();
        parts[ti] = d.ref_area * (2.0 * V.d2(x) * inner * inner +
                                  (1.0 + V.d1(x)) * std::norm(hd.fz));
    });
    return pairwise_sum(std::move(parts));
}

} // namespace elastica
