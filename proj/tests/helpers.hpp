#pragma once

#include <random>

#include "elastica2d/complex_expr.hpp"

namespace elastica::testutil {

inline bool close(Complex a, Complex b, double tol = 1e-12) {
    return std::abs(a - b) <= tol;
}

inline bool same_terms(const AnalyticExpr& a, const AnalyticExpr& b, double tol = 1e-12) {
    const auto na = a.normalized(tol).terms();
    const auto nb = b.normalized(tol).terms();
    if (na.size() != nb.size()) return false;
    for (size_t i = 0; i < na.size(); ++i) {
        const auto* ma = std::get_if<Monomial>(&na[i]);
        const auto* mb = std::get_if<Monomial>(&nb[i]);
        if ((ma == nullptr) != (mb == nullptr)) return false;
        if (ma) {
            if (ma->power != mb->power || !close(ma->center, mb->center, tol) ||
                !close(ma->coeff, mb->coeff, tol))
                return false;
        } else {
            const auto& ea = std::get<ExpTerm>(na[i]);
            const auto& eb = std::get<ExpTerm>(nb[i]);
            if (!close(ea.rate, eb.rate, tol) || !close(ea.coeff, eb.coeff, tol))
                return false;
        }
    }
    return true;
}

// Deterministic sample points in the disk |z - center| < radius.
inline std::vector<Complex> disk_samples(int count, Complex center, double radius,
                                         unsigned seed = 12345) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
    std::vector<Complex> pts;
    while ((int)pts.size() < count) {
        const Complex z(2.0 * unit() - 1.0, 2.0 * unit() - 1.0);
        if (std::abs(z) < 1.0) pts.push_back(center + radius * z);
    }
    return pts;
}

} // namespace elastica::testutil
