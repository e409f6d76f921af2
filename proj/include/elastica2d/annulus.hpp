#pragma once

// Explicit free-boundary equilibrium families on the periodic strip and the
// standard annulus, parameter solving for prescribed boundaries, and the
// boundary-traction residual certifying sigma_lambda(gamma') = 0.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "elastica2d/weierstrass.hpp"

namespace elastica {

// Strip datum h = c e^{nz/2}, k = alpha e^{-nz} on [x1,x2] x [0,2pi).
// e^{n x1}, e^{n x2} are the two roots of u^2 - (4/((1+lambda)c^2)) u
// - 2 alpha n/(lambda c^2) = 0.
struct StripFamily {
    int n = 1;
    double c = 1.0;
    double alpha = 0.0;
    double lambda = 1.0;
    double b = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
};

// Annulus datum h = c z^n, k = alpha z^{-2n-1} with 2n a nonnegative integer
// (n itself may be a half-integer; only integer powers of |z| and integer
// multiples of arg z appear in f, fz, fzbar).
struct AnnulusFamily {
    int two_n = 2;
    double r1 = 1.0;
    double r2 = 2.0;
    double c = 1.0;
    double alpha = 0.0;
    double lambda = 1.0;

    double n() const { return 0.5 * two_n; }
};

namespace detail {

inline double rpow(double base, int p) { return std::pow(base, double(p)); }

inline void validate_strip_inputs(int n, double lambda) {
    if (n < 1) throw std::invalid_argument("strip winding n must be a positive integer");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
}

} // namespace detail

// Entry mode (n, c, alpha, lambda): solves the quadratic for the two wall
// positions x1 < x2.
inline StripFamily solve_strip_params(int n, double c, double alpha, double lambda) {
    detail::validate_strip_inputs(n, lambda);
    if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
    StripFamily fam{n, c, alpha, lambda, 0.0, 0.0, 0.0};
    const double S = 2.0 / ((1.0 + lambda) * c * c);
    const double b2 = S * S + 2.0 * alpha * n / (lambda * c * c);
    if (!(b2 > 0.0)) throw NoRealRoots("strip quadratic has no two distinct real roots");
    fam.b = std::sqrt(b2);
    const double u1 = S - fam.b;
    const double u2 = S + fam.b;
    if (!(u1 > 0.0)) throw NoRealRoots("strip quadratic root e^{n x1} is not positive");
    fam.x1 = std::log(u1) / n;
    fam.x2 = std::log(u2) / n;
    return fam;
}

// Entry mode (n, x1, x2, lambda): inverts the two root equations for (c, alpha).
inline StripFamily strip_family_from_domain(int n, double x1, double x2, double lambda) {
    detail::validate_strip_inputs(n, lambda);
    if (!(x1 < x2)) throw std::invalid_argument("strip needs x1 < x2");
    const double u1 = std::exp(n * x1);
    const double u2 = std::exp(n * x2);
    const double c2 = 4.0 / ((1.0 + lambda) * (u1 + u2));
    StripFamily fam;
    fam.n = n;
    fam.lambda = lambda;
    fam.c = std::sqrt(c2);
    fam.alpha = -lambda * c2 * u1 * u2 / (2.0 * n);
    fam.b = 2.0 / ((1.0 + lambda) * c2) - u1;
    fam.x1 = x1;
    fam.x2 = x2;
    return fam;
}

// The strip datum lies inside the analytic term language, so the map is the
// generic Weierstrass construction with no zeros to compensate.
inline ElasticMapAnalytic strip_map(const StripFamily& fam) {
    const WeierstrassDatum datum{
        AnalyticExpr::exponential(fam.c, Complex(0.5 * fam.n, 0.0)), fam.lambda, {}};
    const MeromorphicK k{AnalyticExpr::exponential(fam.alpha, Complex(-double(fam.n), 0.0)), {}};
    return build_elastic_map(datum, k);
}

// Residual of the radial equilibrium polynomial at radius r; both family
// radii are roots for a solved family.
inline double annulus_residual(const AnnulusFamily& fam, double r) {
    const int p42 = 2 * fam.two_n + 2; // 4n+2
    const int p22 = fam.two_n + 2;     // 2n+2
    const double c2 = fam.c * fam.c;
    const double A = double(p42) / ((1.0 + fam.lambda) * (fam.n() + 1.0) * c2);
    const double B = fam.alpha * double(p42) / (c2 * fam.lambda);
    return detail::rpow(r, p42) - A * detail::rpow(r, p22) - B;
}

inline AnnulusFamily solve_annulus_params(double r1, double r2, int two_n, double lambda) {
    if (two_n < 0) throw std::invalid_argument("2n must be a nonnegative integer");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(r1 > 0.0) || !(r2 > 0.0) || r1 > r2)
        throw std::invalid_argument("annulus needs 0 < r1 <= r2");
    if (std::abs(r2 - r1) < 1e-12 * r2)
        throw DegenerateRadii("annulus radii coincide");
    AnnulusFamily fam;
    fam.two_n = two_n;
    fam.r1 = r1;
    fam.r2 = r2;
    fam.lambda = lambda;
    const int p42 = 2 * two_n + 2;
    const int p22 = two_n + 2;
    const double d22 = detail::rpow(r2, p22) - detail::rpow(r1, p22);
    const double d42 = detail::rpow(r2, p42) - detail::rpow(r1, p42);
    const double c2 =
        double(p42) * d22 / ((1.0 + fam.n()) * (1.0 + lambda) * d42);
    fam.c = std::sqrt(c2);
    const double A = double(p42) / ((1.0 + lambda) * (fam.n() + 1.0) * c2);
    const double B = detail::rpow(r1, p42) - A * detail::rpow(r1, p22);
    fam.alpha = B * c2 * lambda / double(p42);
    return fam;
}

// f(z) = e^{i(2n+1)theta} ( c^2 rho^{2n+1}/(4n+2) + lambda rho/((1+lambda)(n+1))
//        + alpha rho^{-2n-1} ),   rho = |z|, theta = arg z.
inline ElasticMapAnalytic annulus_map(const AnnulusFamily& fam, bool enforce_domain = false) {
    const int two_n = fam.two_n;
    const int p21 = two_n + 1; // 2n+1
    const double np1 = fam.n() + 1.0;
    const double c2 = fam.c * fam.c;
    const double lambda = fam.lambda;
    const double mu = lambda_ratio(lambda);
    const double alpha = fam.alpha;
    const double r1 = fam.r1, r2 = fam.r2;

    auto polar_of = [enforce_domain, r1, r2](Complex z, double* rho, double* theta) {
        *rho = std::abs(z);
        if (*rho < 1e-12) throw DomainViolation("annulus map undefined at 0");
        if (enforce_domain && (*rho < r1 * (1.0 - 1e-9) || *rho > r2 * (1.0 + 1e-9)))
            throw DomainViolation("sample outside [r1, r2]");
        *theta = std::arg(z);
    };

    ElasticMapAnalytic map;
    map.lambda = lambda;
    map.source = MapSource::Weierstrass;
    map.f = [=](Complex z) {
        double rho, theta;
        polar_of(z, &rho, &theta);
        const double radial = c2 * detail::rpow(rho, p21) / (2.0 * p21) +
                              lambda * rho / ((1.0 + lambda) * np1) +
                              alpha * detail::rpow(rho, -p21);
        return std::polar(radial, p21 * theta);
    };
    map.deriv = [=](Complex z) {
        double rho, theta;
        polar_of(z, &rho, &theta);
        DerivSample s;
        s.fz = std::polar(0.5 * c2 * detail::rpow(rho, two_n) + mu, two_n * theta);
        const double nb = two_n / (two_n + 2.0); // n/(n+1)
        s.fzbar = std::polar(-mu * nb - p21 * alpha * detail::rpow(rho, -two_n - 2),
                             (two_n + 2) * theta);
        return s;
    };
    return map;
}

struct BoundaryCurve {
    std::function<Complex(double)> pos; // t in [0,1)
    std::function<Complex(double)> tan;
};

inline BoundaryCurve circle_curve(Complex center, double radius) {
    return BoundaryCurve{
        [=](double t) { return center + std::polar(radius, 2.0 * M_PI * t); },
        [=](double t) {
            return Complex(0.0, 2.0 * M_PI) * std::polar(radius, 2.0 * M_PI * t);
        }};
}

// max_t | lambda (1 - 1/|fz|) fz gamma' - fzbar conj(gamma') | over the
// sampled curve: the free-boundary condition sigma_lambda(gamma') = 0.
inline Complex traction_vector(const ElasticMapAnalytic& map, Complex z, Complex tangent,
                               double lambda) {
    const DerivSample s = map.deriv(z);
    const double m = std::abs(s.fz);
    if (m < kBranchFzTol) throw BranchPoint("fz vanishes on the boundary curve");
    return lambda * (1.0 - 1.0 / m) * s.fz * tangent - s.fzbar * std::conj(tangent);
}

inline double traction_residual(const ElasticMapAnalytic& map, const BoundaryCurve& curve,
                                double lambda, int samples) {
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = double(i) / samples;
        worst = std::max(worst,
                         std::abs(traction_vector(map, curve.pos(t), curve.tan(t), lambda)));
    }
    return worst;
}

// Winding number of a closed sampled curve around 0 (unwrapped phase sum).
inline int winding_number(const std::function<Complex(double)>& curve, int samples = 720) {
    double total = 0.0;
    double prev = std::arg(curve(0.0));
    for (int i = 1; i <= samples; ++i) {
        const double a = std::arg(curve(double(i) / samples));
        double d = a - prev;
        while (d > M_PI) d -= 2.0 * M_PI;
        while (d < -M_PI) d += 2.0 * M_PI;
        total += d;
        prev = a;
    }
    return (int)std::lround(total / (2.0 * M_PI));
}

} // namespace elastica
