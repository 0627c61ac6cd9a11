#pragma once

#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kspec/core.hpp"

namespace kspec {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes and weights for the weight exp(-x^2): Golub-Welsch, then Newton on the
// orthonormal recurrence and Christoffel weights.
inline Rule gauss_hermite(int n) {
    if (n < 1) throw InputError("quadrature order must be positive");
    RMat jac = RMat::Zero(n, n);
    for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(0.5 * i);
    Eigen::SelfAdjointEigenSolver<RMat> es(jac);
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double p0 = std::pow(pi, -0.25);
    auto eval = [&](double x, double& pn, double& pn1, double& sumsq) {
        double pm = 0.0, p = p0;
        sumsq = p * p;
        for (int j = 0; j < n; ++j) {
            const double next = std::sqrt(2.0 / (j + 1)) * x * p - std::sqrt(static_cast<double>(j) / (j + 1)) * pm;
            pm = p;
            p = next;
            if (j + 1 < n) sumsq += p * p;
        }
        pn = p;
        pn1 = pm;
    };
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double pn, pn1, ss;
        for (int it = 0; it < 3; ++it) {
            eval(x, pn, pn1, ss);
            const double d = std::sqrt(2.0 * n) * pn1;
            if (d == 0.0) break;
            x -= pn / d;
        }
        eval(x, pn, pn1, ss);
        r.nodes[i] = x;
        r.weights[i] = 1.0 / ss;
    }
    return r;
}

// Gauss-Legendre on [-1, 1].
inline Rule gauss_legendre(int n) {
    if (n < 1) throw InputError("quadrature order must be positive");
    RMat jac = RMat::Zero(n, n);
    for (int j = 1; j < n; ++j) jac(j, j - 1) = jac(j - 1, j) = j / std::sqrt(4.0 * j * j - 1.0);
    Eigen::SelfAdjointEigenSolver<RMat> es(jac);
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double dp = 1.0;
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 1; j < n; ++j) {
                const double p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            x -= p1 / dp;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

// u = center + A s turns the real part of a quadratic log-integrand into
// const - |s|^2.
struct GaussianEnvelope {
    RVec center;
    RMat A;
    double log_abs_det_A = 0.0;
};

using LogIntegrand = std::function<cplx(const RVec&)>;

// Reads the Gaussian envelope off the real part of log f by central
// differences, which are exact when that real part is quadratic.
inline GaussianEnvelope fit_envelope(int d, const LogIntegrand& logf, double h = 0.5) {
    auto re = [&](const RVec& u) { return logf(u).real(); };
    const RVec zero = RVec::Zero(d);
    const double f0 = re(zero);
    RVec g(d);
    RMat H(d, d);
    for (int i = 0; i < d; ++i) {
        RVec e = RVec::Zero(d);
        e(i) = h;
        const double fp = re(e), fm = re(-e);
        g(i) = (fp - fm) / (2 * h);
        H(i, i) = (fp - 2 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            RVec a = RVec::Zero(d);
            a(i) = h;
            a(j) = h;
            RVec b = RVec::Zero(d);
            b(i) = h;
            b(j) = -h;
            H(i, j) = H(j, i) = (re(a) + re(-a) - re(b) - re(-b)) / (4 * h * h);
        }
    Eigen::LLT<RMat> llt(-0.5 * H);
    if (llt.info() != Eigen::Success) throw AccuracyError("integrand is not a decaying Gaussian");
    GaussianEnvelope env;
    env.center = (-H).ldlt().solve(g);
    const RMat L = llt.matrixL();
    env.A = L.transpose().triangularView<Eigen::Upper>().solve(RMat::Identity(d, d));
    env.log_abs_det_A = -L.diagonal().array().log().sum();
    return env;
}

// Tensor-product Gauss-Hermite rule for the integral of exp(logf) over R^d.
inline cplx integrate_gaussian(int d, int order, const LogIntegrand& logf, const GaussianEnvelope& env) {
    const Rule gh = gauss_hermite(order);
    const double ref = logf(env.center).real();
    std::vector<int> idx(d, 0);
    CompensatedSum<cplx> acc;
    RVec s(d);
    while (true) {
        double w = 1.0, s2 = 0.0;
        for (int i = 0; i < d; ++i) {
            s(i) = gh.nodes[idx[i]];
            w *= gh.weights[idx[i]];
            s2 += s(i) * s(i);
        }
        const RVec u = env.center + env.A * s;
        acc.add(w * std::exp(logf(u) - ref + s2));
        int i = 0;
        while (i < d && ++idx[i] == order) idx[i++] = 0;
        if (i == d) break;
    }
    return acc.value() * std::exp(ref + env.log_abs_det_A);
}

inline cplx integrate_gaussian(int d, int order, const LogIntegrand& logf) {
    return integrate_gaussian(d, order, logf, fit_envelope(d, logf));
}

}  // namespace kspec
