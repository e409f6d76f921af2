#pragma once

// Exact elastic maps f = 1/2 (G + (2 lambda/(1+lambda)) H/conj(h)) + conj(k)
// built from Weierstrass data (h, lambda), together with the pole-compensating
// meromorphic k, the recovered holomorphic g, and the closed-form special
// solutions (melting point, borderline, odd-zero example).

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "elastica2d/complex_expr.hpp"
#include "elastica2d/errors.hpp"

namespace elastica {

inline constexpr double kBranchFzTol = 1e-12;
inline constexpr double kBranchRadius = 1e-13;

inline double lambda_ratio(double lambda) { return lambda / (1.0 + lambda); }

struct ZeroSpec {
    Complex p;
    int order = 1;
};

struct WeierstrassDatum {
    AnalyticExpr h;
    double lambda = 1.0;
    std::vector<ZeroSpec> zeros;
};

struct MeromorphicK {
    AnalyticExpr k;
    std::vector<Complex> pole_centers;
};

enum class MapSource { Weierstrass, Borderline, Melting, OddZeroExample };

struct DerivSample {
    Complex fz;
    Complex fzbar;
    bool branch_point = false;
};

struct ElasticMapAnalytic {
    std::function<Complex(Complex)> f;
    std::function<DerivSample(Complex)> deriv;
    double lambda = 1.0;
    MapSource source = MapSource::Weierstrass;

    Complex fz(Complex z) const { return deriv(z).fz; }
    Complex fzbar(Complex z) const { return deriv(z).fzbar; }
};

namespace detail {

inline Complex ipow(Complex base, int n) {
    if (n < 0) return 1.0 / ipow(base, -n);
    Complex r(1.0, 0.0);
    while (n > 0) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
    }
    return r;
}

inline Complex horner(const std::vector<Complex>& coeffs, Complex x) {
    Complex s(0.0, 0.0);
    for (size_t i = coeffs.size(); i-- > 0;) s = s * x + coeffs[i];
    return s;
}

inline void validate_datum(const WeierstrassDatum& datum) {
    if (!(datum.lambda > 0.0))
        throw std::invalid_argument("lambda must be positive");
    for (size_t i = 0; i < datum.zeros.size(); ++i) {
        if (datum.zeros[i].order < 1)
            throw std::invalid_argument("zero order must be positive");
        for (size_t j = i + 1; j < datum.zeros.size(); ++j)
            if (std::abs(datum.zeros[i].p - datum.zeros[j].p) < 1e-9)
                throw std::invalid_argument("zeros must be pairwise distinct");
    }
}

// Newton sweep over a square grid; returns deduplicated roots of h inside
// the disk |z - center| <= radius.
inline std::vector<Complex> sweep_zeros(const AnalyticExpr& h, Complex center,
                                        double radius) {
    const AnalyticExpr hp = derivative(h);
    const int grid = 24;
    double scale = 0.0;
    std::vector<Complex> roots;
    auto try_eval = [&](const AnalyticExpr& e, Complex z, Complex* out) {
        try {
            *out = eval(e, z);
            return true;
        } catch (const PoleEvaluation&) {
            return false;
        }
    };
    std::vector<Complex> starts;
    for (int iy = 0; iy <= grid; ++iy)
        for (int ix = 0; ix <= grid; ++ix) {
            const Complex z = center + Complex((2.0 * ix / grid - 1.0) * radius,
                                               (2.0 * iy / grid - 1.0) * radius);
            Complex hv;
            if (!try_eval(h, z, &hv)) continue;
            scale = std::max(scale, std::abs(hv));
            starts.push_back(z);
        }
    if (scale == 0.0) scale = 1.0;
    for (Complex z : starts) {
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
            Complex hv, dv;
            if (!try_eval(h, z, &hv) || !try_eval(hp, z, &dv)) break;
            if (std::abs(dv) < 1e-300) break;
            const Complex step = hv / dv;
            z -= step;
            if (std::abs(z - center) > 2.0 * radius) break;
            if (std::abs(step) < 1e-12) {
                converged = true;
                break;
            }
        }
        if (!converged || std::abs(z - center) > radius) continue;
        Complex hv;
        if (!try_eval(h, z, &hv) || std::abs(hv) > 1e-9 * scale) continue;
        bool dup = false;
        for (const Complex& r : roots)
            if (std::abs(r - z) < 1e-6) {
                dup = true;
                break;
            }
        if (!dup) roots.push_back(z);
    }
    return roots;
}

} // namespace detail

// The meromorphic k of Thm. 1: conj(k) cancels, zero by zero, the principal
// part of (lambda/(1+lambda)) H(p_j)/conj(h(z)) in powers of conj(z - p_j).
// Normalized to pure principal parts (no entire addition).
inline MeromorphicK compensating_k(const WeierstrassDatum& datum) {
    detail::validate_datum(datum);
    const double mu = lambda_ratio(datum.lambda);
    const AnalyticExpr H = antiderivative(datum.h);

    double extent = 1.0;
    for (const auto& zs : datum.zeros) extent = std::max(extent, std::abs(zs.p));
    const auto found = detail::sweep_zeros(datum.h, Complex(0.0, 0.0), 1.5 * extent + 0.5);
    for (const Complex& r : found) {
        bool listed = false;
        for (const auto& zs : datum.zeros)
            if (std::abs(r - zs.p) < 1e-6) {
                listed = true;
                break;
            }
        if (!listed) throw MissingZero("h vanishes at an unlisted point");
    }

    std::vector<Term> terms;
    std::vector<Complex> pole_centers;
    for (const auto& zs : datum.zeros) {
        const Complex numer = mu * eval(H, zs.p);
        const auto c = principal_part(numer, datum.h, zs.p, zs.order);
        bool has_pole = false;
        for (int i = 0; i < zs.order; ++i) {
            const Complex coeff = -std::conj(c[(size_t)i]);
            if (coeff == Complex(0.0, 0.0)) continue;
            terms.push_back(Monomial{coeff, zs.p, i - zs.order});
            has_pole = true;
        }
        if (has_pole) pole_centers.push_back(zs.p);
    }
    return MeromorphicK{AnalyticExpr(std::move(terms)), std::move(pole_centers)};
}

namespace detail {

// Local series data around a listed zero p of order n, used inside the
// switch radius where the direct formulas lose precision:
//   h      = w^n * horner(h_loc, w)                     (w = z - p)
//   1/conj(h) = wb^{-n} * horner(R, wb)                 (wb = conj(w))
//   H(z) - H(p) = w^{n+1} * horner(T1, w)
//   mu*H(p)/conj(h) + conj(k_p-part) = wb^{-n} * horner(D, wb)
// For the canonical k the first n entries of D cancel bit-exactly.
struct ZeroSeriesData {
    Complex p;
    int order = 1;
    double switch_radius = 0.0;
    std::vector<Complex> h_loc;
    std::vector<Complex> R;
    std::vector<Complex> T1;
    std::vector<Complex> D;
};

struct WeierstrassImpl {
    AnalyticExpr h, hp, H, G, k_rest, k_rest_p, k_full, k_full_p;
    double lambda = 1.0;
    double mu = 0.5;
    std::vector<ZeroSeriesData> zero_data;

    const ZeroSeriesData* nearest_zero(Complex z) const {
        for (const auto& zd : zero_data)
            if (std::abs(z - zd.p) < zd.switch_radius) return &zd;
        return nullptr;
    }

    Complex f_direct(Complex z) const {
        const Complex hv = eval(h, z);
        return 0.5 * eval(G, z) + mu * eval(H, z) / std::conj(hv) +
               std::conj(eval(k_full, z));
    }

    DerivSample deriv_direct(Complex z) const {
        const Complex hv = eval(h, z);
        const Complex phase = hv / std::conj(hv);
        DerivSample s;
        s.fz = phase * (0.5 * std::norm(hv) + mu);
        s.fzbar = -mu * eval(H, z) * std::conj(eval(hp, z)) / std::conj(hv * hv) +
                  std::conj(eval(k_full_p, z));
        return s;
    }

    Complex f_series(const ZeroSeriesData& zd, Complex z) const {
        Complex w = z - zd.p;
        if (std::abs(w) < kBranchRadius) w = Complex(kBranchRadius, 0.0);
        const Complex wb = std::conj(w);
        const int n = zd.order;
        const Complex S = ipow(wb, -n) * horner(zd.R, wb);
        const Complex T1v = ipow(w, n + 1) * horner(zd.T1, w);
        const Complex Dv = ipow(wb, -n) * horner(zd.D, wb);
        return 0.5 * eval(G, z) + mu * T1v * S + Dv + std::conj(eval(k_rest, z));
    }

    DerivSample deriv_series(const ZeroSeriesData& zd, Complex z) const {
        Complex w = z - zd.p;
        DerivSample s;
        if (std::abs(w) < kBranchRadius) {
            w = Complex(kBranchRadius, 0.0);
            s.branch_point = true;
        }
        const Complex wb = std::conj(w);
        const int n = zd.order;
        const Complex hv = ipow(w, n) * horner(zd.h_loc, w);
        const Complex S = ipow(wb, -n) * horner(zd.R, wb);
        const Complex T1v = ipow(w, n + 1) * horner(zd.T1, w);
        std::vector<Complex> dR(zd.R.size()), dD(zd.D.size());
        for (size_t i = 0; i < zd.R.size(); ++i) dR[i] = double(int(i) - n) * zd.R[i];
        for (size_t i = 0; i < zd.D.size(); ++i) dD[i] = double(int(i) - n) * zd.D[i];
        const Complex dS = ipow(wb, -n - 1) * horner(dR, wb);
        const Complex dDv = ipow(wb, -n - 1) * horner(dD, wb);
        s.fz = 0.5 * hv * hv + mu * hv * S;
        if (s.branch_point) s.fz = Complex(mu, 0.0);
        s.fzbar = mu * T1v * dS + dDv + std::conj(eval(k_rest_p, z));
        return s;
    }
};

} // namespace detail

inline ElasticMapAnalytic build_elastic_map(const WeierstrassDatum& datum,
                                            const MeromorphicK& k) {
    detail::validate_datum(datum);
    auto impl = std::make_shared<detail::WeierstrassImpl>();
    impl->h = datum.h;
    impl->hp = derivative(datum.h);
    impl->H = antiderivative(datum.h);
    impl->G = antiderivative(multiply(datum.h, datum.h));
    impl->lambda = datum.lambda;
    impl->mu = lambda_ratio(datum.lambda);
    impl->k_full = k.k;
    impl->k_full_p = derivative(k.k);

    const int series_terms = 26;
    for (const auto& zs : datum.zeros) {
        detail::ZeroSeriesData zd;
        zd.p = zs.p;
        zd.order = zs.order;

        double rho = 1.0;
        for (const auto& other : datum.zeros)
            if (std::abs(other.p - zs.p) > 1e-9)
                rho = std::min(rho, std::abs(other.p - zs.p));
        for (const Complex& c : datum.h.negative_power_centers())
            rho = std::min(rho, std::abs(c - zs.p));
        for (const Complex& c : k.k.negative_power_centers())
            if (std::abs(c - zs.p) > 1e-9) rho = std::min(rho, std::abs(c - zs.p));
        zd.switch_radius = std::min(0.05, 0.25 * rho);

        const int n = zs.order;
        const auto a = taylor_coeffs(datum.h, zs.p, n + series_terms + 1);
        zd.h_loc.assign(a.begin() + n, a.end());
        const auto Hc = taylor_coeffs(impl->H, zs.p, n + series_terms + 2);
        zd.T1.assign(Hc.begin() + n + 1, Hc.end());
        zd.R = laurent_series(Complex(1.0, 0.0), datum.h, zs.p, n, n + series_terms + 1);
        // Same product expression as compensating_k so the principal parts
        // cancel bit-exactly for the canonical k.
        const Complex numer = impl->mu * eval(impl->H, zs.p);
        zd.D = laurent_series(numer, datum.h, zs.p, n, n + series_terms + 1);
        impl->zero_data.push_back(std::move(zd));
    }
    // Fold the k terms centered at each listed zero into that zero's D series;
    // everything else stays in k_rest.
    std::vector<Term> rest;
    for (const auto& t : k.k.terms()) {
        const auto* m = std::get_if<Monomial>(&t);
        bool folded = false;
        if (m && m->power < 0) {
            for (auto& zd : impl->zero_data) {
                if (std::abs(m->center - zd.p) < 1e-12 && -m->power <= zd.order) {
                    zd.D[(size_t)(m->power + zd.order)] += std::conj(m->coeff);
                    folded = true;
                    break;
                }
            }
        }
        if (!folded) rest.push_back(t);
    }
    impl->k_rest = AnalyticExpr(std::move(rest));
    impl->k_rest_p = derivative(impl->k_rest);

    ElasticMapAnalytic map;
    map.lambda = datum.lambda;
    map.source = MapSource::Weierstrass;
    map.f = [impl](Complex z) {
        if (const auto* zd = impl->nearest_zero(z)) return impl->f_series(*zd, z);
        return impl->f_direct(z);
    };
    map.deriv = [impl](Complex z) {
        if (const auto* zd = impl->nearest_zero(z)) return impl->deriv_series(*zd, z);
        return impl->deriv_direct(z);
    };
    return map;
}

inline Complex g_of(const ElasticMapAnalytic& map, Complex z) {
    const DerivSample d = map.deriv(z);
    const double m = std::abs(d.fz);
    if (m < kBranchFzTol) throw BranchPoint("fz vanishes; g undefined");
    return (1.0 + map.lambda) * d.fz - map.lambda * d.fz / m;
}

enum class SpecialKind { Melting, Borderline, OddZeroExample };

struct SpecialParams {
    AnalyticExpr h = AnalyticExpr::constant(1.0); // Borderline datum
    AnalyticExpr k;                               // Borderline entire addition
    double domain_radius = 0.9;                   // OddZeroExample domain
};

inline ElasticMapAnalytic special_map(SpecialKind kind, double lambda,
                                      const SpecialParams& params = {}) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    const double mu = lambda_ratio(lambda);
    ElasticMapAnalytic map;
    map.lambda = lambda;

    if (kind == SpecialKind::Melting) {
        map.source = MapSource::Melting;
        auto guard = [](Complex z) {
            if (std::abs(z) < 1e-9) throw DomainViolation("melting map excludes 0");
        };
        map.f = [mu, guard](Complex z) {
            guard(z);
            const Complex e = std::exp(Complex(0.0, std::norm(z)));
            return mu * e / (Complex(0.0, 1.0) * std::conj(z));
        };
        map.deriv = [mu, guard](Complex z) {
            guard(z);
            const Complex e = std::exp(Complex(0.0, std::norm(z)));
            const Complex zb = std::conj(z);
            DerivSample s;
            s.fz = mu * e;
            s.fzbar = mu * e * (z / zb + Complex(0.0, 1.0) / (zb * zb));
            return s;
        };
        return map;
    }

    if (kind == SpecialKind::Borderline) {
        map.source = MapSource::Borderline;
        if (!params.k.is_entire())
            throw std::invalid_argument("borderline k must be entire");
        const AnalyticExpr h = params.h;
        const AnalyticExpr hp = derivative(h);
        const AnalyticExpr H = antiderivative(h);
        const AnalyticExpr k = params.k;
        const AnalyticExpr kp = derivative(k);
        auto hv_checked = [h](Complex z) {
            const Complex hv = eval(h, z);
            if (std::abs(hv) < 1e-12)
                throw DomainViolation("borderline h vanishes at sample");
            return hv;
        };
        map.f = [mu, H, k, hv_checked](Complex z) {
            return mu * eval(H, z) / std::conj(hv_checked(z)) + std::conj(eval(k, z));
        };
        map.deriv = [mu, H, hp, kp, hv_checked](Complex z) {
            const Complex hv = hv_checked(z);
            DerivSample s;
            s.fz = mu * (hv / std::conj(hv));
            s.fzbar = -mu * eval(H, z) * std::conj(eval(hp, z)) / std::conj(hv * hv) +
                      std::conj(eval(kp, z));
            return s;
        };
        return map;
    }

    // Odd-zero example of g = z^2 + 1: branch points of h = sqrt(g) at +-i.
    if (lambda != 1.0)
        throw std::invalid_argument("odd-zero example is defined for lambda = 1");
    map.source = MapSource::OddZeroExample;
    const double radius = params.domain_radius;
    auto guard = [radius](Complex z) {
        if (std::abs(z) > radius + 1e-12)
            throw DomainViolation("outside odd-zero example domain");
    };
    map.f = [guard](Complex z) {
        guard(z);
        const Complex S = std::sqrt(1.0 + z * z);
        const Complex A = std::asinh(z) + z * S;
        Complex tail(0.0, 0.0);
        if (std::norm(S) >= 1e-12)
            tail = (A + std::conj(A)) / (4.0 * std::conj(S));
        return z * z * z / 6.0 + z / 2.0 + tail;
    };
    map.deriv = [guard](Complex z) {
        guard(z);
        const Complex S = std::sqrt(1.0 + z * z);
        const Complex A = std::asinh(z) + z * S;
        DerivSample s;
        if (std::norm(S) < 1e-12) {
            s.branch_point = true;
            s.fz = (1.0 + z * z) / 2.0 + 0.5;
            s.fzbar = Complex(0.5, 0.0);
            return s;
        }
        s.fz = (1.0 + z * z) / 2.0 + S / (2.0 * std::conj(S));
        s.fzbar = 0.5 - (A + std::conj(A)) * std::conj(z) /
                            (4.0 * std::conj(S * S * S));
        return s;
    };
    return map;
}

struct CertificateReport {
    double min_value = 0.0;
    bool all_nonneg = true;
};

// Closed form of 1 + V'(|fz|^2) along the Weierstrass family:
// |h|^2 (1+lambda)^2 / (2 lambda + |h|^2 (1+lambda)). Nonnegative for any
// valid datum; vanishes exactly at zeros of h.
inline CertificateReport strict_minimizer_certificate(const WeierstrassDatum& datum,
                                                      const std::vector<Complex>& samples) {
    detail::validate_datum(datum);
    CertificateReport report;
    report.min_value = std::numeric_limits<double>::infinity();
    if (samples.empty()) {
        report.min_value = 0.0;
        return report;
    }
    const double l = datum.lambda;
    for (const Complex& z : samples) {
        const double h2 = std::norm(eval(datum.h, z));
        const double value = h2 * (1.0 + l) * (1.0 + l) / (2.0 * l + h2 * (1.0 + l));
        report.min_value = std::min(report.min_value, value);
        if (!(value >= 0.0)) report.all_nonneg = false;
    }
    return report;
}

// Five-point finite-difference Laplacian of arg(w(z)) with phase unwrapping
// of the neighbor samples. Harmonic for borderline maps; equals 4 for the
// melting-point map (arg fz = z conj(z)).
template <typename F>
double arg_laplacian(F&& w, Complex z, double step = 1e-3) {
    const double c = std::arg(w(z));
    auto rel = [&](Complex zz) {
        double a = std::arg(w(zz));
        while (a - c > M_PI) a -= 2.0 * M_PI;
        while (a - c < -M_PI) a += 2.0 * M_PI;
        return a;
    };
    const double sum = rel(z + step) + rel(z - step) +
                       rel(z + Complex(0.0, step)) + rel(z - Complex(0.0, step));
    return (sum - 4.0 * c) / (step * step);
}

} // namespace elastica
