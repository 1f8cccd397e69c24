#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

// Small dense polynomial helpers over double.
// Convention in this header: ascending coefficients, c[k] multiplies x^k.
// (TransferFunction stores descending lists; callers convert at the boundary.)

namespace bcast::poly {

inline std::vector<double> strip(std::vector<double> c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    return c;
}

inline int degree(const std::vector<double>& c) {
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k)
        if (c[static_cast<size_t>(k)] != 0.0) return k;
    return -1;  // zero polynomial
}

inline bool is_zero(const std::vector<double>& c) { return degree(c) < 0; }

inline double eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

inline std::complex<double> eval(const std::vector<double>& c, std::complex<double> x) {
    std::complex<double> acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

inline std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {0.0};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline std::vector<double> add(std::vector<double> a, const std::vector<double>& b) {
    if (b.size() > a.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

inline std::vector<double> scale(std::vector<double> a, double s) {
    for (double& v : a) v *= s;
    return a;
}

inline std::vector<double> derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> out(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) out[k - 1] = c[k] * static_cast<double>(k);
    return out;
}

// p(s) = E(s^2) + s*O(s^2); returns E or O as polynomials in y = s^2.
inline std::vector<double> even_part(const std::vector<double>& c) {
    std::vector<double> out;
    for (size_t k = 0; k < c.size(); k += 2) out.push_back(c[k]);
    return out.empty() ? std::vector<double>{0.0} : out;
}

inline std::vector<double> odd_part(const std::vector<double>& c) {
    std::vector<double> out;
    for (size_t k = 1; k < c.size(); k += 2) out.push_back(c[k]);
    return out.empty() ? std::vector<double>{0.0} : out;
}

/// q(x) = p(-x): negate odd-power coefficients.
inline std::vector<double> neg_arg(std::vector<double> c) {
    for (size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
    return c;
}

// Every real root r of c satisfies |r| <= bound (Cauchy).
inline double cauchy_bound(const std::vector<double>& c) {
    int d = degree(c);
    if (d <= 0) return 0.0;
    double lead = std::abs(c[static_cast<size_t>(d)]);
    double m = 0.0;
    for (int k = 0; k < d; ++k) m = std::max(m, std::abs(c[static_cast<size_t>(k)]));
    return 1.0 + m / lead;
}

namespace detail {

// Remainder of a/b, coefficients normalized to unit max-abs to keep the
// Sturm chain well scaled (positive scaling preserves sign variations).
inline std::vector<double> normalized_remainder(std::vector<double> a, const std::vector<double>& b) {
    int db = degree(b);
    double blead = b[static_cast<size_t>(db)];
    for (int da = degree(a); da >= db && da >= 0; da = degree(a)) {
        double f = a[static_cast<size_t>(da)] / blead;
        for (int k = 0; k <= db; ++k)
            a[static_cast<size_t>(da - db + k)] -= f * b[static_cast<size_t>(k)];
        a[static_cast<size_t>(da)] = 0.0;  // force exact cancellation of the lead
        a = strip(a);
        if (degree(a) < 0) break;
    }
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    if (m > 0.0) {
        // drop noise-level coefficients so the chain terminates
        for (double& v : a)
            if (std::abs(v) < m * 1e-13) v = 0.0;
        a = strip(a);
        m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        if (m > 0.0)
            for (double& v : a) v /= m;
    }
    return a;
}

inline int sign_variations(const std::vector<std::vector<double>>& chain, double x) {
    int var = 0;
    int prev = 0;
    for (const auto& p : chain) {
        double v = eval(p, x);
        int s = (v > 0.0) - (v < 0.0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++var;
        prev = s;
    }
    return var;
}

}  // namespace detail

// Number of distinct real roots of c in the half-open interval (a, b].
inline int count_real_roots(const std::vector<double>& c, double a, double b) {
    std::vector<double> p = strip(c);
    if (degree(p) <= 0) return 0;
    std::vector<std::vector<double>> chain{p, strip(derivative(p))};
    while (degree(chain.back()) > 0) {
        auto r = detail::normalized_remainder(chain[chain.size() - 2], chain.back());
        if (is_zero(r)) break;
        chain.push_back(scale(std::move(r), -1.0));
    }
    return detail::sign_variations(chain, a) - detail::sign_variations(chain, b);
}

// Infimum of p over x >= 0. Returns -inf when p decreases without bound.
inline double min_over_nonneg(const std::vector<double>& c) {
    std::vector<double> p = strip(c);
    int d = degree(p);
    if (d <= 0) return d < 0 ? 0.0 : p[0];
    if (p[static_cast<size_t>(d)] < 0.0) return -std::numeric_limits<double>::infinity();
    std::vector<double> dp = strip(derivative(p));
    double hi = std::max(cauchy_bound(p), cauchy_bound(dp));
    double best = eval(p, 0.0);
    // critical points found by sign-change bisection of p'; even-multiplicity
    // stationary points are not minima and may be skipped
    constexpr int kGrid = 1024;
    double prev_x = 0.0, prev_v = eval(dp, 0.0);
    for (int g = 1; g <= kGrid; ++g) {
        double x = hi * static_cast<double>(g) / kGrid;
        double v = eval(dp, x);
        if ((prev_v < 0.0 && v >= 0.0) || (prev_v > 0.0 && v <= 0.0) || prev_v == 0.0) {
            double lo = prev_x, up = x;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + up);
                double vm = eval(dp, mid);
                if ((vm < 0.0) == (prev_v < 0.0)) lo = mid; else up = mid;
            }
            best = std::min(best, eval(p, 0.5 * (lo + up)));
        }
        prev_x = x; prev_v = v;
    }
    return std::min(best, eval(p, hi));
}

/// Strict positivity of p on [0, inf): exact closed form for degree <= 2,
// Sturm-count root isolation above that.
inline bool positive_on_nonneg(const std::vector<double>& c) {
    std::vector<double> p = strip(c);
    int d = degree(p);
    if (d < 0) return false;          // identically zero
    if (p[0] <= 0.0) return false;    // p(0)
    if (d == 0) return true;
    if (p[static_cast<size_t>(d)] < 0.0) return false;  // p -> -inf
    if (d == 1) return p[1] > 0.0;    // positive at 0 and increasing
    if (d == 2) {
        double A = p[2], B = p[1], C = p[0];
        double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) return true;  // no real roots, A > 0
        double sq = std::sqrt(disc);
        double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
        double r1 = q / A, r2 = (q != 0.0) ? C / q : r1;
        return std::max(r1, r2) < 0.0;
    }
    return count_real_roots(p, 0.0, cauchy_bound(p)) == 0;
}

}  // namespace bcast::poly
