#pragma once

// Closed term language for the analytic functions used throughout: finite
// sums of Laurent monomials coeff*(z-center)^power (power may be negative)
// and exponentials coeff*e^{rate*z}. Supports exact term-wise calculus,
// Taylor/Laurent expansion, and finite-difference Wirtinger derivatives.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "elastica2d/errors.hpp"

namespace elastica {

using Complex = std::complex<double>;

inline constexpr double kPoleProximity = 1e-12;
inline constexpr double kTaylorZeroTol = 1e-12;
inline constexpr double kDefaultFdStep = 1e-5;

struct Monomial {
    Complex coeff;
    Complex center;
    int power = 0; // may be negative
};

struct ExpTerm {
    Complex coeff;
    Complex rate;
};

using Term = std::variant<Monomial, ExpTerm>;

class AnalyticExpr {
public:
    AnalyticExpr() = default;
    explicit AnalyticExpr(std::vector<Term> terms) : terms_(std::move(terms)) {}

    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    bool is_entire() const {
        for (const auto& t : terms_) {
            if (const auto* m = std::get_if<Monomial>(&t)) {
                if (m->power < 0) return false;
            }
        }
        return true;
    }

    std::vector<Complex> negative_power_centers() const {
        std::vector<Complex> centers;
        for (const auto& t : terms_) {
            if (const auto* m = std::get_if<Monomial>(&t)) {
                if (m->power < 0) centers.push_back(m->center);
            }
        }
        return centers;
    }

    // Combines like terms, drops (near-)zero coefficients and orders terms
    // canonically. Used for term-wise comparisons.
    AnalyticExpr normalized(double drop_tol = 0.0) const {
        std::vector<Term> out;
        for (const auto& t : terms_) {
            bool merged = false;
            for (auto& o : out) {
                if (auto* m = std::get_if<Monomial>(&t)) {
                    auto* om = std::get_if<Monomial>(&o);
                    if (om && om->power == m->power && om->center == m->center) {
                        om->coeff += m->coeff;
                        merged = true;
                        break;
                    }
                } else {
                    const auto& e = std::get<ExpTerm>(t);
                    auto* oe = std::get_if<ExpTerm>(&o);
                    if (oe && oe->rate == e.rate) {
                        oe->coeff += e.coeff;
                        merged = true;
                        break;
                    }
                }
            }
            if (!merged) out.push_back(t);
        }
        std::erase_if(out, [&](const Term& t) {
            const Complex c = std::holds_alternative<Monomial>(t)
                                  ? std::get<Monomial>(t).coeff
                                  : std::get<ExpTerm>(t).coeff;
            return std::abs(c) <= drop_tol;
        });
        auto key = [](const Term& t) {
            if (const auto* m = std::get_if<Monomial>(&t))
                return std::tuple(0, m->power, m->center.real(), m->center.imag(),
                                  0.0, 0.0);
            const auto& e = std::get<ExpTerm>(t);
            return std::tuple(1, 0, 0.0, 0.0, e.rate.real(), e.rate.imag());
        };
        std::sort(out.begin(), out.end(),
                  [&](const Term& a, const Term& b) { return key(a) < key(b); });
        return AnalyticExpr(std::move(out));
    }

    static AnalyticExpr constant(Complex c) {
        if (c == Complex(0.0, 0.0)) return AnalyticExpr{};
        return AnalyticExpr({Monomial{c, Complex(0.0, 0.0), 0}});
    }

    static AnalyticExpr monomial(Complex coeff, Complex center, int power) {
        return AnalyticExpr({Monomial{coeff, center, power}});
    }

    // Polynomial in z with coefficients c0 + c1 z + c2 z^2 + ...
    static AnalyticExpr polynomial(const std::vector<Complex>& coeffs) {
        std::vector<Term> ts;
        for (int k = 0; k < (int)coeffs.size(); ++k)
            if (coeffs[(size_t)k] != Complex(0.0, 0.0))
                ts.push_back(Monomial{coeffs[(size_t)k], Complex(0.0, 0.0), k});
        return AnalyticExpr(std::move(ts));
    }

    static AnalyticExpr exponential(Complex coeff, Complex rate) {
        return AnalyticExpr({ExpTerm{coeff, rate}});
    }

private:
    std::vector<Term> terms_;
};

inline Complex eval(const AnalyticExpr& expr, Complex z) {
    Complex sum(0.0, 0.0);
    for (const auto& t : expr.terms()) {
        if (const auto* m = std::get_if<Monomial>(&t)) {
            const Complex w = z - m->center;
            if (m->power < 0 && std::abs(w) < kPoleProximity)
                throw PoleEvaluation("evaluation at a pole center");
            if (m->power == 0)
                sum += m->coeff;
            else
                sum += m->coeff * std::pow(w, m->power);
        } else {
            const auto& e = std::get<ExpTerm>(t);
            sum += e.coeff * std::exp(e.rate * z);
        }
    }
    return sum;
}

inline AnalyticExpr derivative(const AnalyticExpr& expr) {
    std::vector<Term> out;
    for (const auto& t : expr.terms()) {
        if (const auto* m = std::get_if<Monomial>(&t)) {
            if (m->power == 0) continue;
            out.push_back(Monomial{m->coeff * double(m->power), m->center, m->power - 1});
        } else {
            const auto& e = std::get<ExpTerm>(t);
            if (e.rate == Complex(0.0, 0.0)) continue; // constant in disguise
            out.push_back(ExpTerm{e.coeff * e.rate, e.rate});
        }
    }
    return AnalyticExpr(std::move(out));
}

// Term-wise antiderivative with integration constant 0.
inline AnalyticExpr antiderivative(const AnalyticExpr& expr) {
    std::vector<Term> out;
    for (const auto& t : expr.terms()) {
        if (const auto* m = std::get_if<Monomial>(&t)) {
            if (m->power == -1)
                throw LogarithmRequired("antiderivative of power -1 term");
            out.push_back(Monomial{m->coeff / double(m->power + 1), m->center, m->power + 1});
        } else {
            const auto& e = std::get<ExpTerm>(t);
            if (e.rate == Complex(0.0, 0.0))
                out.push_back(Monomial{e.coeff, Complex(0.0, 0.0), 1});
            else
                out.push_back(ExpTerm{e.coeff / e.rate, e.rate});
        }
    }
    return AnalyticExpr(std::move(out));
}

inline AnalyticExpr add(const AnalyticExpr& a, const AnalyticExpr& b) {
    std::vector<Term> ts = a.terms();
    ts.insert(ts.end(), b.terms().begin(), b.terms().end());
    return AnalyticExpr(std::move(ts));
}

inline AnalyticExpr scale(const AnalyticExpr& a, Complex s) {
    std::vector<Term> ts = a.terms();
    for (auto& t : ts) {
        if (auto* m = std::get_if<Monomial>(&t))
            m->coeff *= s;
        else
            std::get<ExpTerm>(t).coeff *= s;
    }
    return AnalyticExpr(std::move(ts));
}

namespace detail {

// Rebases every nonnegative-power monomial to center 0 (binomial expansion).
// Negative powers and exponentials pass through untouched.
inline AnalyticExpr expand_monomials_to_origin(const AnalyticExpr& a) {
    std::vector<Term> out;
    for (const auto& t : a.terms()) {
        const auto* m = std::get_if<Monomial>(&t);
        if (!m || m->power < 0 || m->center == Complex(0.0, 0.0)) {
            out.push_back(t);
            continue;
        }
        // (z - c)^q = sum_k C(q,k) (-c)^{q-k} z^k
        const int q = m->power;
        double binom = 1.0;
        for (int k = 0; k <= q; ++k) {
            const Complex coeff =
                m->coeff * binom * std::pow(-m->center, double(q - k));
            out.push_back(Monomial{coeff, Complex(0.0, 0.0), k});
            binom = binom * double(q - k) / double(k + 1);
        }
    }
    return AnalyticExpr(std::move(out));
}

} // namespace detail

// Product of two expressions, restricted to combinations that stay inside
// the term language (same-center monomials, origin-rebasable polynomials,
// exponential*exponential, constant*anything).
inline AnalyticExpr multiply(const AnalyticExpr& a, const AnalyticExpr& b) {
    const AnalyticExpr ea = detail::expand_monomials_to_origin(a);
    const AnalyticExpr eb = detail::expand_monomials_to_origin(b);
    std::vector<Term> out;
    for (const auto& ta : ea.terms()) {
        for (const auto& tb : eb.terms()) {
            const auto* ma = std::get_if<Monomial>(&ta);
            const auto* mb = std::get_if<Monomial>(&tb);
            if (ma && mb) {
                if (ma->power == 0) {
                    out.push_back(Monomial{ma->coeff * mb->coeff, mb->center, mb->power});
                } else if (mb->power == 0) {
                    out.push_back(Monomial{ma->coeff * mb->coeff, ma->center, ma->power});
                } else if (ma->center == mb->center) {
                    out.push_back(
                        Monomial{ma->coeff * mb->coeff, ma->center, ma->power + mb->power});
                } else {
                    throw UnsupportedProduct("monomial centers differ");
                }
            } else if (!ma && !mb) {
                const auto& xa = std::get<ExpTerm>(ta);
                const auto& xb = std::get<ExpTerm>(tb);
                const Complex rate = xa.rate + xb.rate;
                if (rate == Complex(0.0, 0.0))
                    out.push_back(Monomial{xa.coeff * xb.coeff, Complex(0.0, 0.0), 0});
                else
                    out.push_back(ExpTerm{xa.coeff * xb.coeff, rate});
            } else {
                const auto* mono = ma ? ma : mb;
                const auto& ex = std::get<ExpTerm>(ma ? tb : ta);
                if (mono->power != 0)
                    throw UnsupportedProduct("monomial * exponential is outside the term language");
                out.push_back(ExpTerm{mono->coeff * ex.coeff, ex.rate});
            }
        }
    }
    return AnalyticExpr(std::move(out)).normalized();
}

// First `count` Taylor coefficients of expr about p: expr(z) = sum a_k (z-p)^k.
inline std::vector<Complex> taylor_coeffs(const AnalyticExpr& expr, Complex p, int count) {
    std::vector<Complex> a((size_t)count, Complex(0.0, 0.0));
    for (const auto& t : expr.terms()) {
        if (const auto* m = std::get_if<Monomial>(&t)) {
            const Complex d = p - m->center;
            if (m->power < 0 && std::abs(d) < kPoleProximity)
                throw PoleEvaluation("Taylor expansion at a pole center");
            if (m->power >= 0 && std::abs(d) == 0.0) {
                if (m->power < count) a[(size_t)m->power] += m->coeff;
                continue;
            }
            // (z-c)^q = sum_k C(q,k) d^{q-k} (z-p)^k, generalized binomial for q<0
            double binom = 1.0;
            for (int k = 0; k < count; ++k) {
                if (m->power >= 0 && k > m->power) break;
                a[(size_t)k] += m->coeff * binom * std::pow(d, double(m->power - k));
                binom = binom * double(m->power - k) / double(k + 1);
            }
        } else {
            const auto& e = std::get<ExpTerm>(t);
            Complex c = e.coeff * std::exp(e.rate * p);
            for (int k = 0; k < count; ++k) {
                a[(size_t)k] += c;
                c = c * e.rate / double(k + 1);
            }
        }
    }
    return a;
}

// Laurent coefficients of numer / conj(h(z)) about p in powers of
// (zbar - pbar), where h has a zero of exactly `order` at p. Returns
// `num_coeffs` coefficients starting at power -order.
inline std::vector<Complex> laurent_series(Complex numer, const AnalyticExpr& h,
                                           Complex p, int order, int num_coeffs) {
    if (order < 1) throw std::invalid_argument("zero order must be positive");
    const int taylor_count = order + num_coeffs;
    const std::vector<Complex> a = taylor_coeffs(h, p, taylor_count);
    double scale = 1.0;
    for (const Complex& c : a) scale = std::max(scale, std::abs(c));
    for (int k = 0; k < order; ++k)
        if (std::abs(a[(size_t)k]) > kTaylorZeroTol * scale)
            throw WrongZeroOrder("h has a nonzero Taylor coefficient below the stated order");
    if (std::abs(a[(size_t)order]) <= kTaylorZeroTol * scale)
        throw WrongZeroOrder("h vanishes to higher order than stated");

    // conj(h(z)) = w^order * sum_k conj(a_{k+order}) w^k with w = zbar - pbar;
    // reciprocal power series of the analytic factor.
    std::vector<Complex> b((size_t)num_coeffs, Complex(0.0, 0.0));
    for (int k = 0; k < num_coeffs && k + order < taylor_count; ++k)
        b[(size_t)k] = std::conj(a[(size_t)(k + order)]);
    std::vector<Complex> r((size_t)num_coeffs, Complex(0.0, 0.0));
    r[0] = 1.0 / b[0];
    for (int m = 1; m < num_coeffs; ++m) {
        Complex s(0.0, 0.0);
        for (int j = 1; j <= m; ++j) s += b[(size_t)j] * r[(size_t)(m - j)];
        r[(size_t)m] = -s / b[0];
    }
    for (auto& c : r) c *= numer;
    return r; // r[m] is the coefficient of w^{m-order}
}

// Principal-part coefficients c_{-order}..c_{-1} of numer / conj(h(z)) about p.
inline std::vector<Complex> principal_part(Complex numer, const AnalyticExpr& h,
                                           Complex p, int order) {
    return laurent_series(numer, h, p, order, order);
}

struct WirtingerPair {
    Complex fz;
    Complex fzbar;
};

// Central-difference Wirtinger derivatives fz = (fx - i fy)/2,
// fzbar = (fx + i fy)/2 of an arbitrary pointwise map.
template <typename F>
WirtingerPair wirtinger_fd(F&& map, Complex z, double step = kDefaultFdStep) {
    const Complex fx = (map(z + step) - map(z - step)) / (2.0 * step);
    const Complex fy = (map(z + Complex(0.0, step)) - map(z - Complex(0.0, step))) / (2.0 * step);
    const Complex i(0.0, 1.0);
    return {(fx - i * fy) / 2.0, (fx + i * fy) / 2.0};
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string format_complex(Complex c) {
    if (c.imag() == 0.0) return format_double(c.real());
    std::string s = "(" + format_double(c.real());
    s += (c.imag() >= 0.0 ? "+" : "-");
    s += format_double(std::abs(c.imag())) + "i)";
    return s;
}

inline std::string to_string(const AnalyticExpr& expr) {
    if (expr.terms().empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& t : expr.terms()) {
        if (!first) s += " + ";
        first = false;
        if (const auto* m = std::get_if<Monomial>(&t)) {
            s += format_complex(m->coeff);
            if (m->power != 0) {
                std::string base = (m->center == Complex(0.0, 0.0))
                                       ? "z"
                                       : "(z - " + format_complex(m->center) + ")";
                s += "*" + base;
                if (m->power != 1) s += "^" + std::to_string(m->power);
            }
        } else {
            const auto& e = std::get<ExpTerm>(t);
            s += format_complex(e.coeff) + "*exp(" + format_complex(e.rate) + "*z)";
        }
    }
    return s;
}

} // namespace elastica
