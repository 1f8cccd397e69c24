#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcast/poly.hpp"

namespace bcast {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

// ============================================================================
// Transfer functions and realizations
// ============================================================================

// Rational G(s) = num(s)/den(s), coefficients in descending powers of s.
// Invariants: proper (deg num <= deg den), den monic, no leading zeros.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    TransferFunction(std::vector<double> num_, std::vector<double> den_)
        : num(std::move(num_)), den(std::move(den_)) {
        auto drop_lead = [](std::vector<double>& c) {
            size_t i = 0;
            while (i + 1 < c.size() && c[i] == 0.0) ++i;
            c.erase(c.begin(), c.begin() + static_cast<long>(i));
        };
        if (num.empty() || den.empty())
            throw std::invalid_argument("transfer function: empty coefficient list");
        drop_lead(num);
        drop_lead(den);
        if (den[0] == 0.0)
            throw std::invalid_argument("transfer function: zero denominator polynomial");
        if (num.size() > den.size())
            throw std::invalid_argument("transfer function: improper (deg num > deg den)");
        double lead = den[0];
        for (double& c : den) c /= lead;
        for (double& c : num) c /= lead;
    }

    int order() const { return static_cast<int>(den.size()) - 1; }
    int relative_degree() const {
        if (std::all_of(num.begin(), num.end(), [](double c) { return c == 0.0; }))
            return order();
        return static_cast<int>(den.size() - num.size());
    }
};

// x' = Ax + bu, y = cx + du.
struct StateSpace {
    Mat A;
    Vec b;
    RowVec c;
    double d = 0.0;

    int order() const { return static_cast<int>(A.rows()); }

    void check_dims() const {
        if (A.rows() != A.cols() || b.size() != A.rows() || c.size() != A.rows())
            throw std::invalid_argument("state space: inconsistent dimensions");
    }
};

// Controllable canonical form: first row of A carries the negated monic
// denominator, c the (strictly proper) numerator padded on the left.
inline StateSpace tf_to_statespace(const TransferFunction& tf) {
    const int n = tf.order();
    if (n == 0) {
        StateSpace ss;
        ss.A.resize(0, 0);
        ss.b.resize(0);
        ss.c.resize(0);
        ss.d = tf.num.size() == 1 ? tf.num[0] : 0.0;
        return ss;
    }
    double d = (static_cast<int>(tf.num.size()) == n + 1) ? tf.num[0] : 0.0;
    // strictly proper remainder: num - d*den, degree <= n-1
    std::vector<double> rem(static_cast<size_t>(n), 0.0);
    size_t pad = static_cast<size_t>(n + 1) - tf.num.size();
    for (size_t k = 0; k < tf.num.size(); ++k) {
        size_t pos = pad + k;            // position in a length-(n+1) descending layout
        double v = tf.num[k] - d * tf.den[pos];
        if (pos >= 1) rem[pos - 1] = v;  // pos 0 cancels exactly by construction
    }
    StateSpace ss;
    ss.A = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) ss.A(0, j) = -tf.den[static_cast<size_t>(j + 1)];
    for (int i = 1; i < n; ++i) ss.A(i, i - 1) = 1.0;
    ss.b = Vec::Zero(n);
    ss.b(0) = 1.0;
    ss.c.resize(n);
    for (int j = 0; j < n; ++j) ss.c(j) = rem[static_cast<size_t>(j)];
    ss.d = d;
    return ss;
}

inline std::complex<double> evaluate(const TransferFunction& tf, std::complex<double> s) {
    std::complex<double> nv = 0.0, dv = 0.0;
    for (double c : tf.num) nv = nv * s + c;
    for (double c : tf.den) dv = dv * s + c;
    return nv / dv;
}

inline std::complex<double> evaluate(const StateSpace& ss, std::complex<double> s) {
    const int n = ss.order();
    if (n == 0) return ss.d;
    Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - ss.A.cast<std::complex<double>>();
    Eigen::VectorXcd x = M.fullPivLu().solve(ss.b.cast<std::complex<double>>());
    return (ss.c.cast<std::complex<double>>() * x).value() + ss.d;
}

// ============================================================================
// Stability and positive realness
// ============================================================================

// Routh-Hurwitz array test: all roots strictly in the open left half plane.
// Coefficients descending; strict test (imaginary-axis roots fail).
inline bool is_hurwitz(const std::vector<double>& den) {
    std::vector<double> c = den;
    size_t lead = 0;
    while (lead < c.size() && c[lead] == 0.0) ++lead;
    c.erase(c.begin(), c.begin() + static_cast<long>(lead));
    if (c.empty()) throw std::invalid_argument("is_hurwitz: zero polynomial");
    if (c.size() == 1) return true;  // constant, no roots
    if (c[0] < 0.0)
        for (double& v : c) v = -v;
    const size_t n = c.size() - 1;  // degree
    std::vector<double> row0, row1;
    for (size_t k = 0; k < c.size(); k += 2) row0.push_back(c[k]);
    for (size_t k = 1; k < c.size(); k += 2) row1.push_back(c[k]);
    row1.resize(row0.size(), 0.0);
    if (row0[0] <= 0.0) return false;
    for (size_t produced = 0; produced < n; ++produced) {
        double head = row1[0];
        if (!(head > 0.0) || !std::isfinite(head)) return false;
        std::vector<double> next(row0.size(), 0.0);
        for (size_t i = 0; i + 1 < row0.size(); ++i)
            next[i] = (head * row0[i + 1] - row0[0] * row1[i + 1]) / head;
        next.pop_back();
        if (next.empty()) break;  // the produced rows end at the s^0 row
        row0 = std::move(row1);
        row0.resize(next.size() + 1, 0.0);
        row1 = std::move(next);
    }
    return true;
}

enum class SprVerdict { StrictlyPositiveReal, PositiveRealOnly, NotPositiveReal };

inline const char* to_string(SprVerdict v) {
    switch (v) {
        case SprVerdict::StrictlyPositiveReal: return "StrictlyPositiveReal";
        case SprVerdict::PositiveRealOnly: return "PositiveRealOnly";
        case SprVerdict::NotPositiveReal: return "NotPositiveReal";
    }
    return "?";
}

// Re G(jw) = p(w^2) / |den(jw)|^2; realpart_poly holds p ascending in x = w^2.
struct SprCertificate {
    bool hurwitz = false;
    int relative_degree = 0;
    std::vector<double> realpart_poly;
    double min_nonneg_value = 0.0;
    SprVerdict verdict = SprVerdict::NotPositiveReal;
    std::string reason;
};

// Frequency-domain strict-PR test: den Hurwitz, Re G(jw) > 0 for all w,
// and for relative degree 1 additionally lim w^2 Re G(jw) > 0. Relative
// degree >= 2 cannot be positive real.
inline SprCertificate spr_test(const TransferFunction& tf) {
    SprCertificate cert;
    cert.relative_degree = tf.relative_degree();
    cert.hurwitz = is_hurwitz(tf.den);

    // descending -> ascending for the polynomial algebra
    std::vector<double> num(tf.num.rbegin(), tf.num.rend());
    std::vector<double> den(tf.den.rbegin(), tf.den.rend());
    // num(jw) conj(den(jw)) has real part nE(-x)dE(-x) + x nO(-x)dO(-x), x = w^2
    auto ne = poly::neg_arg(poly::even_part(num));
    auto no = poly::neg_arg(poly::odd_part(num));
    auto de = poly::neg_arg(poly::even_part(den));
    auto dox = poly::neg_arg(poly::odd_part(den));
    auto p = poly::add(poly::mul(ne, de), poly::mul({0.0, 1.0}, poly::mul(no, dox)));
    cert.realpart_poly = poly::strip(p);
    cert.min_nonneg_value = poly::min_over_nonneg(cert.realpart_poly);

    if (poly::is_zero(cert.realpart_poly) &&
        std::all_of(tf.num.begin(), tf.num.end(), [](double c) { return c == 0.0; })) {
        cert.verdict = SprVerdict::PositiveRealOnly;
        cert.reason = "transfer function is identically zero";
        return cert;
    }
    if (!cert.hurwitz) {
        cert.verdict = SprVerdict::NotPositiveReal;
        cert.reason = "denominator is not Hurwitz";
        return cert;
    }
    if (cert.relative_degree >= 2) {
        cert.verdict = SprVerdict::NotPositiveReal;
        cert.reason = "relative degree " + std::to_string(cert.relative_degree) +
                      " exceeds 1, so Re G(jw) changes sign at high frequency";
        return cert;
    }
    // coefficient driving lim w^(2r) Re G(jw); |den|^2 is monic in x
    size_t limit_idx = static_cast<size_t>(tf.order() - cert.relative_degree);
    double limit_coeff = limit_idx < cert.realpart_poly.size() ? cert.realpart_poly[limit_idx] : 0.0;
    bool strictly_positive = poly::positive_on_nonneg(cert.realpart_poly);
    if (strictly_positive && limit_coeff > 0.0) {
        cert.verdict = SprVerdict::StrictlyPositiveReal;
        return cert;
    }
    double scale = 0.0;
    for (double v : cert.realpart_poly) scale = std::max(scale, std::abs(v));
    if (cert.min_nonneg_value >= -1e-12 * scale) {
        cert.verdict = SprVerdict::PositiveRealOnly;
        cert.reason = limit_coeff > 0.0 ? "Re G(jw) touches zero at some frequency"
                                        : "Re G(jw) is not bounded away from zero at high frequency";
        return cert;
    }
    cert.verdict = SprVerdict::NotPositiveReal;
    cert.reason = "Re G(jw) is negative at some frequency";
    return cert;
}

// ============================================================================
// KYP verification
// ============================================================================

// Candidate for the Kalman-Yakubovich-Popov conditions: A'P + PA = -Q - l'l,
// Pb - c' = -l'w, w^2 = 2d, with P, Q symmetric positive definite. l is a row
// vector.
struct KypSolution {
    Mat P;
    Mat Q;
    RowVec l;
    double w = 0.0;
};

inline bool kyp_verify(const StateSpace& ss, const KypSolution& sol, double tol = 1e-8) {
    ss.check_dims();
    const int n = ss.order();
    if (sol.P.rows() != n || sol.P.cols() != n || sol.Q.rows() != n || sol.Q.cols() != n ||
        sol.l.size() != n)
        throw std::invalid_argument("kyp_verify: dimension mismatch");
    Mat P = 0.5 * (sol.P + sol.P.transpose());  // symmetric-invariant by construction
    Mat Q = 0.5 * (sol.Q + sol.Q.transpose());
    auto positive_definite = [](const Mat& M) {
        Eigen::SelfAdjointEigenSolver<Mat> es(M);
        return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0;
    };
    if (!positive_definite(P) || !positive_definite(Q)) return false;
    Mat r1 = ss.A.transpose() * P + P * ss.A + Q + sol.l.transpose() * sol.l;
    Vec r2 = P * ss.b - ss.c.transpose() + sol.l.transpose() * sol.w;
    double r3 = 2.0 * ss.d - sol.w * sol.w;
    return r1.cwiseAbs().maxCoeff() <= tol && r2.cwiseAbs().maxCoeff() <= tol &&
           std::abs(r3) <= tol;
}

// ============================================================================
// Fixed-step integration
// ============================================================================

// One classical RK4 step of x' = Ax + bu with u held constant over the step.
inline Vec rk4_step(const Mat& A, const Vec& b, const Vec& x, double u, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    Vec bu = b * u;
    Vec k1 = A * x + bu;
    Vec k2 = A * (x + (0.5 * dt) * k1) + bu;
    Vec k3 = A * (x + (0.5 * dt) * k2) + bu;
    Vec k4 = A * (x + dt * k3) + bu;
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace bcast
