#include <catch2/catch_amalgamated.hpp>

#include "elastica2d/weierstrass.hpp"
#include "helpers.hpp"

using namespace elastica;
using testutil::close;
using testutil::disk_samples;
using testutil::same_terms;

namespace {

const AnalyticExpr h_fig2 = AnalyticExpr::polynomial({-1.0, 0.0, 0.0, 0.0, 1.0});

WeierstrassDatum fig2_datum(double lambda = 1.0) {
    return WeierstrassDatum{
        h_fig2,
        lambda,
        {{Complex(1.0, 0.0), 1},
         {Complex(-1.0, 0.0), 1},
         {Complex(0.0, 1.0), 1},
         {Complex(0.0, -1.0), 1}}};
}

bool off_zeros(const WeierstrassDatum& d, Complex z, double margin) {
    for (const auto& zs : d.zeros)
        if (std::abs(z - zs.p) < margin) return false;
    return true;
}

} // namespace

TEST_CASE("compensating_k reproduces the quadrifolium k") {
    const auto k = compensating_k(fig2_datum());
    AnalyticExpr expect = add(
        add(AnalyticExpr::monomial(0.1, Complex(1.0, 0.0), -1),
            AnalyticExpr::monomial(0.1, Complex(-1.0, 0.0), -1)),
        add(AnalyticExpr::monomial(0.1, Complex(0.0, 1.0), -1),
            AnalyticExpr::monomial(0.1, Complex(0.0, -1.0), -1)));
    CHECK(same_terms(k.k, expect));
    CHECK(k.pole_centers.size() == 4);
}

TEST_CASE("compensating_k with vanishing numerator is zero") {
    const WeierstrassDatum d{AnalyticExpr::monomial(1.0, 0.0, 1), 1.0, {{0.0, 1}}};
    const auto k = compensating_k(d);
    CHECK(k.k.normalized(1e-15).empty());
    CHECK(k.pole_centers.empty());
}

TEST_CASE("compensating_k for a shifted simple zero") {
    const Complex i(0.0, 1.0);
    const WeierstrassDatum d{AnalyticExpr::polynomial({-i, 1.0}), 1.0, {{i, 1}}};
    const auto k = compensating_k(d);
    CHECK(same_terms(k.k, AnalyticExpr::monomial(-0.25, i, -1)));
}

TEST_CASE("compensating_k validates the zero list") {
    auto partial = fig2_datum();
    partial.zeros.resize(2);
    CHECK_THROWS_AS(compensating_k(partial), MissingZero);

    auto wrong = fig2_datum();
    wrong.zeros[0].order = 2;
    CHECK_THROWS_AS(compensating_k(wrong), WrongZeroOrder);

    auto bad = fig2_datum();
    bad.lambda = 0.0;
    CHECK_THROWS_AS(compensating_k(bad), std::invalid_argument);

    auto dup = fig2_datum();
    dup.zeros[1].p = dup.zeros[0].p;
    CHECK_THROWS_AS(compensating_k(dup), std::invalid_argument);
}

TEST_CASE("constant h gives the identity map") {
    for (const double lambda : {1.0, 2.5}) {
        const double c = std::sqrt(2.0 / (1.0 + lambda));
        const WeierstrassDatum d{AnalyticExpr::constant(c), lambda, {}};
        const auto map = build_elastic_map(d, MeromorphicK{});
        for (const Complex z : {Complex(0.3, -0.8), Complex(-2.0, 1.0)}) {
            CHECK(close(map.f(z), z, 1e-14));
            const auto s = map.deriv(z);
            CHECK(close(s.fz, 1.0, 1e-14));
            CHECK(close(s.fzbar, 0.0, 1e-14));
            CHECK_FALSE(s.branch_point);
        }
    }
}

TEST_CASE("quadrifolium map matches the closed-form samples") {
    const auto d = fig2_datum();
    const auto map = build_elastic_map(d, compensating_k(d));
    const auto s = map.deriv(Complex(2.0, 0.0));
    CHECK(std::abs(std::abs(s.fz) - 113.0) < 1e-10);
    CHECK(close(g_of(map, Complex(2.0, 0.0)), Complex(225.0, 0.0), 1e-9));
}

TEST_CASE("Weierstrass identity g = ((1+lambda)/2) h^2 at random samples") {
    for (const double lambda : {0.5, 1.0, 3.7}) {
        const auto d = fig2_datum(lambda);
        const auto map = build_elastic_map(d, compensating_k(d));
        int checked = 0;
        for (const Complex z : disk_samples(140, 0.0, 2.0)) {
            if (!off_zeros(d, z, 1e-3)) continue;
            const Complex target = 0.5 * (1.0 + lambda) * eval(h_fig2, z) * eval(h_fig2, z);
            const Complex g = g_of(map, z);
            CHECK(std::abs(g - target) <= 1e-9 * std::max(1.0, std::abs(target)));
            ++checked;
        }
        CHECK(checked >= 100);
    }
}

TEST_CASE("modulus law |fz| = (|h|^2 + 2 lambda/(1+lambda))/2") {
    const double lambda = 1.8;
    const auto d = fig2_datum(lambda);
    const auto map = build_elastic_map(d, compensating_k(d));
    auto samples = disk_samples(60, 0.0, 1.8, 777);
    // also exercise the series path at several distances from a zero
    for (const double r : {0.04, 1e-3, 1e-6, 1e-10})
        samples.push_back(Complex(1.0 + r, r));
    for (const Complex z : samples) {
        const double expect = 0.5 * (std::norm(eval(h_fig2, z)) + 2.0 * lambda_ratio(lambda));
        CHECK(std::abs(std::abs(map.fz(z)) - expect) < 1e-10 * std::max(1.0, expect));
    }
}

TEST_CASE("map derivatives agree with finite differences") {
    const auto d = fig2_datum();
    const auto map = build_elastic_map(d, compensating_k(d));
    const Complex pts[] = {Complex(0.4, 0.3), Complex(-0.2, 1.6), Complex(1.01, 0.0),
                           Complex(0.02, 0.98)};
    for (const Complex z : pts) {
        const auto fd = wirtinger_fd(map.f, z);
        const auto s = map.deriv(z);
        const double scale = std::max(1.0, std::abs(s.fz));
        CHECK(std::abs(fd.fz - s.fz) < 2e-6 * scale);
        CHECK(std::abs(fd.fzbar - s.fzbar) < 2e-6 * scale);
    }
}

TEST_CASE("compensated map is continuous with bounded fzbar at branch points") {
    const auto d = fig2_datum();
    const auto map = build_elastic_map(d, compensating_k(d));
    for (const auto& zs : d.zeros) {
        const Complex fp = map.f(zs.p);
        CHECK(std::isfinite(fp.real()));
        double outer = 0.0;
        for (const double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
            double sup = 0.0, fdev = 0.0;
            for (int a = 0; a < 16; ++a) {
                const Complex z = zs.p + std::polar(r, 2.0 * M_PI * a / 16.0);
                sup = std::max(sup, std::abs(map.fzbar(z)));
                fdev = std::max(fdev, std::abs(map.f(z) - fp));
            }
            if (r == 1e-1) outer = sup;
            CHECK(sup <= 10.0 * outer + 1e-6);
            CHECK(fdev <= 5.0 * r); // continuity: f -> f(p)
        }
        const auto s = map.deriv(zs.p);
        CHECK(s.branch_point);
        CHECK(std::abs(std::abs(s.fz) - lambda_ratio(d.lambda)) < 1e-12);
    }
}

TEST_CASE("double zero is compensated as well") {
    // h = (z-1)^2 (z+2): double zero at 1, simple zero at -2
    const AnalyticExpr h = AnalyticExpr::polynomial({2.0, -3.0, 0.0, 1.0});
    const WeierstrassDatum d{h, 1.0, {{Complex(1.0, 0.0), 2}, {Complex(-2.0, 0.0), 1}}};
    const auto k = compensating_k(d);
    const auto map = build_elastic_map(d, k);
    const Complex p(1.0, 0.0);
    const Complex fp = map.f(p);
    double outer = 0.0;
    for (const double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
        double sup = 0.0;
        for (int a = 0; a < 16; ++a) {
            const Complex z = p + std::polar(r, 2.0 * M_PI * a / 16.0 + 0.1);
            sup = std::max(sup, std::abs(map.fzbar(z)));
            CHECK(std::abs(map.f(z) - fp) < 5.0 * r);
        }
        if (r == 1e-1) outer = sup;
        CHECK(sup <= 10.0 * outer + 1e-6);
    }
    // modulus law still holds on the series path
    const Complex z(1.0 + 3e-4, -2e-4);
    const double expect = 0.5 * (std::norm(eval(h, z)) + 1.0);
    CHECK(std::abs(std::abs(map.fz(z)) - expect) < 1e-10);
}

TEST_CASE("g_of throws at a vanishing fz") {
    ElasticMapAnalytic map;
    map.lambda = 1.0;
    map.f = [](Complex z) { return z; };
    map.deriv = [](Complex) { return DerivSample{Complex(0.0, 0.0), Complex(0.0, 0.0), true}; };
    CHECK_THROWS_AS(g_of(map, Complex(0.0, 0.0)), BranchPoint);
}

TEST_CASE("melting map: modulus, derivatives, non-harmonic phase") {
    const double lambda = 1.0;
    const auto map = special_map(SpecialKind::Melting, lambda);
    CHECK(std::abs(std::abs(map.fz(Complex(1.0, 1.0))) - 0.5) < 1e-12);
    for (const Complex z : disk_samples(25, Complex(0.9, -0.4), 0.5, 99)) {
        const auto s = map.deriv(z);
        CHECK(std::abs(std::abs(s.fz) - lambda_ratio(lambda)) < 1e-12);
        const auto fd = wirtinger_fd(map.f, z);
        CHECK(close(fd.fz, s.fz, 1e-7));
        CHECK(close(fd.fzbar, s.fzbar, 1e-7));
        CHECK(std::abs(g_of(map, z)) < 1e-12);
    }
    CHECK_THROWS_AS(map.f(Complex(0.0, 0.0)), DomainViolation);
    const double lap = arg_laplacian([&](Complex z) { return map.fz(z); }, Complex(0.8, 0.5));
    CHECK(std::abs(lap - 4.0) < 1e-5);
}

TEST_CASE("borderline map: constant h gives f = mu H and harmonic phase") {
    SpecialParams params;
    params.h = AnalyticExpr::constant(1.0); // H = z
    const auto map = special_map(SpecialKind::Borderline, 1.0, params);
    const Complex z(0.3, 0.7);
    CHECK(close(map.f(z), z / 2.0, 1e-14));
    CHECK(close(map.fz(z), Complex(0.5, 0.0), 1e-14));
    const double lap = arg_laplacian([&](Complex w) { return map.fz(w); }, z);
    CHECK(std::abs(lap) < 1e-4);
}

TEST_CASE("borderline map with varying h") {
    SpecialParams params;
    params.h = AnalyticExpr::polynomial({Complex(0.0, 0.0), 1.0}); // h = z
    const auto map = special_map(SpecialKind::Borderline, 2.0, params);
    for (const Complex z : disk_samples(20, Complex(1.2, 0.4), 0.4, 5)) {
        const auto s = map.deriv(z);
        CHECK(std::abs(std::abs(s.fz) - lambda_ratio(2.0)) < 1e-12);
        const auto fd = wirtinger_fd(map.f, z);
        CHECK(close(fd.fz, s.fz, 1e-7));
        CHECK(close(fd.fzbar, s.fzbar, 1e-7));
    }
    const double lap = arg_laplacian([&](Complex w) { return map.fz(w); }, Complex(1.2, 0.4));
    CHECK(std::abs(lap) < 1e-4);
    CHECK_THROWS_AS(map.f(Complex(0.0, 0.0)), DomainViolation);
    SpecialParams bad = params;
    bad.k = AnalyticExpr::monomial(1.0, 0.0, -1);
    CHECK_THROWS_AS(special_map(SpecialKind::Borderline, 2.0, bad), std::invalid_argument);
}

TEST_CASE("odd-zero example satisfies g = z^2 + 1") {
    const auto map = special_map(SpecialKind::OddZeroExample, 1.0);
    const auto s0 = map.deriv(Complex(0.0, 0.0));
    CHECK(close(s0.fz, Complex(1.0, 0.0), 1e-14));
    CHECK(close(g_of(map, Complex(0.0, 0.0)), Complex(1.0, 0.0), 1e-12));

    // spec invariant: fz recovered by finite differences on a grid
    for (double x = -0.8; x <= 0.81; x += 0.4) {
        for (double y = -0.8; y <= 0.81; y += 0.4) {
            const Complex z(x, y);
            if (std::abs(z) > 0.85) continue;
            const auto fd = wirtinger_fd(map.f, z);
            const Complex g = 2.0 * fd.fz - fd.fz / std::abs(fd.fz);
            CHECK(std::abs(g - (z * z + 1.0)) < 1e-7);
            const auto s = map.deriv(z);
            CHECK(close(fd.fz, s.fz, 1e-8));
            CHECK(close(fd.fzbar, s.fzbar, 1e-8));
        }
    }
    CHECK_THROWS_AS(map.f(Complex(0.95, 0.0)), DomainViolation);
    CHECK_THROWS_AS(special_map(SpecialKind::OddZeroExample, 2.0), std::invalid_argument);
}

TEST_CASE("odd-zero example extends over the branch point with a radius override") {
    SpecialParams params;
    params.domain_radius = 1.2;
    const auto map = special_map(SpecialKind::OddZeroExample, 1.0, params);
    const Complex i(0.0, 1.0);
    const Complex fi = map.f(i);
    CHECK(close(fi, i / 3.0, 1e-12)); // z^3/6 + z/2 at i, tail vanishes
    for (int a = 0; a < 12; ++a) {
        const Complex z = i + std::polar(1e-3, 2.0 * M_PI * a / 12.0);
        if (std::abs(z) > 1.2) continue;
        CHECK(std::abs(map.f(z) - fi) < 5e-3);
        CHECK(std::abs(map.fzbar(z)) < 10.0);
    }
}

TEST_CASE("strict minimizer certificate") {
    const auto d1 = fig2_datum();
    const auto r1 = strict_minimizer_certificate(d1, {Complex(1.0, 0.0)});
    CHECK(r1.all_nonneg);
    CHECK(r1.min_value < 1e-15);

    const WeierstrassDatum d2{AnalyticExpr::constant(1.0), 1.0, {}};
    const auto r2 = strict_minimizer_certificate(d2, {Complex(0.3, 0.1)});
    CHECK(r2.all_nonneg);
    CHECK(std::abs(r2.min_value - 1.0) < 1e-14);

    const WeierstrassDatum d3{AnalyticExpr::monomial(1.0, 0.0, 1), 2.0, {{0.0, 1}}};
    const auto r3 = strict_minimizer_certificate(d3, {Complex(2.0, 0.0)});
    CHECK(std::abs(r3.min_value - 2.25) < 1e-14);

    const auto r4 = strict_minimizer_certificate(d1, disk_samples(80, 0.0, 2.0, 3));
    CHECK(r4.all_nonneg);
    CHECK(r4.min_value >= 0.0);
}
