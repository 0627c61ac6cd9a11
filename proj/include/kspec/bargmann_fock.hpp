#pragma once

#include <optional>
#include <vector>

#include "kspec/quadrature.hpp"
#include "kspec/symplectic.hpp"

namespace kspec {

// A point of the circle bundle over C^m.
struct LiftedPoint {
    CVec z;
    double theta = 0.0;

    LiftedPoint() = default;
    LiftedPoint(CVec zz, double th) : z(std::move(zz)), theta(normalize(th)) {}

    static double normalize(double th) {
        double r = std::fmod(th, 2.0 * pi);
        if (r < 0) r += 2.0 * pi;
        return r;
    }
};

inline double log_prefactor(int k, int m) { return m * std::log(k / (2.0 * pi)); }

// log of (k/2pi)^m exp(k(z.wbar - |z|^2/2 - |w|^2/2)).
inline cplx log_bergman_kernel(int k, const CVec& z, const CVec& w) {
    const cplx e = w.dot(z) - 0.5 * z.squaredNorm() - 0.5 * w.squaredNorm();  // w.dot(z) = sum z_j conj(w_j)
    return log_prefactor(k, static_cast<int>(z.size())) + static_cast<double>(k) * e;
}

inline cplx bergman_kernel(int k, const CVec& z, const CVec& w) { return std::exp(log_bergman_kernel(k, z, w)); }

inline cplx log_lifted_kernel(int k, const LiftedPoint& x, const LiftedPoint& y) {
    return log_bergman_kernel(k, x.z, y.z) + I_unit * static_cast<double>(k) * (x.theta - y.theta);
}

inline cplx lifted_kernel(int k, const LiftedPoint& x, const LiftedPoint& y) {
    return std::exp(log_lifted_kernel(k, x, y));
}

// Kernel of the Fock space attached to a compatible complex structure J, with
// sigma(u, v) = u^T Omega v and unit level:
//   exp(-i sigma(z, w)) exp(-sigma(z - w, J(z - w)) / 2).
// For J = J0 this is exp(i Im(z wbar)) exp(-|z - w|^2 / 2).
inline cplx general_J_kernel(const RMat& J, const RVec& z, const RVec& w, double tol = 1e-10) {
    const int n = static_cast<int>(J.rows());
    if (J.cols() != n || n % 2 != 0 || z.size() != n || w.size() != n)
        throw DimensionError("complex structure and points must share an even dimension");
    const int m = n / 2;
    const RMat om = standard_omega(m);
    const double sq = max_abs(RMat(J * J + RMat::Identity(n, n)));
    const double inv = max_abs(RMat(J.transpose() * om * J - om));
    if (sq > tol || inv > tol) throw ValidationError("J is not a compatible complex structure", std::max(sq, inv));
    const RMat g = om * J;  // sigma(u, Ju) = u^T (Omega J) u
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (g + g.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError("sigma(., J.) is not positive", -es.eigenvalues().minCoeff());
    const RVec d = z - w;
    const double phase = -z.dot(om * w);
    return std::exp(cplx(-0.5 * d.dot(g * d), phase));
}

// The Heisenberg translate of the unnormalized ground state v(z) = exp(-k|z|^2/2),
//   [beta(w) v](z) = exp(k(z.wbar - |z|^2/2 - |w|^2/2)),
// where beta(w) f(z) = exp(k(z.wbar - |w|^2/2)) f(z - w) on the weighted space.
struct CoherentState {
    int k = 1;
    CVec w;
    cplx log_scale{0.0, 0.0};  // accumulated constant factor, in log form

    cplx log_value(const CVec& z) const {
        const cplx e = w.dot(z) - 0.5 * z.squaredNorm() - 0.5 * w.squaredNorm();
        return log_scale + static_cast<double>(k) * e;
    }
    cplx operator()(const CVec& z) const { return std::exp(log_value(z)); }
};

inline CoherentState heisenberg_translate(int k, const CVec& w, const CoherentState* v = nullptr) {
    if (v == nullptr) return CoherentState{k, w, {0.0, 0.0}};
    // beta(w) beta(w0) v = exp(-ik Im(w . conj(w0))) beta(w + w0) v
    const cplx cross = v->w.dot(w);  // sum w_j conj(w0_j)
    CoherentState out{k, w + v->w, v->log_scale};
    out.log_scale += -I_unit * static_cast<double>(k) * cross.imag();
    return out;
}

enum class Orientation { det_P, det_P_star };

inline std::string to_string(Orientation o) { return o == Orientation::det_P ? "det_P" : "det_P_star"; }

struct MetaplecticKernelSpec {
    int k = 1;
    ComplexBlocks blocks;
    std::optional<double> det_arg;  // tracked argument of det P; principal branch when empty
};

inline cplx log_sqrt_det(const CMat& P, std::optional<double> arg) {
    const cplx d = P.determinant();
    if (std::abs(d) == 0.0) throw SingularityError("det P vanishes", std::numeric_limits<double>::infinity());
    const double a = arg ? *arg : std::arg(d);
    return 0.5 * cplx(std::log(std::abs(d)), a);
}

// log of the lifted metaplectic kernel
//   (k/2pi)^m (det P)^{-1/2} exp{k/2 (z Qbar P^{-1} z + 2 wbar P^{-1} z - wbar P^{-1} Q wbar)}
//   * exp(k(i theta_x - |z|^2/2) + k(-i theta_y - |w|^2/2)).
// The det_P_star orientation uses the blocks of the inverse map.
inline cplx log_metaplectic_kernel(const MetaplecticKernelSpec& spec, const LiftedPoint& x, const LiftedPoint& y,
                                   Orientation o = Orientation::det_P) {
    const ComplexBlocks b = o == Orientation::det_P ? spec.blocks : inverse_blocks(spec.blocks);
    const auto lu = b.P.partialPivLu();
    const CVec& z = x.z;
    const CVec wb = y.z.conjugate();
    const CVec Pinv_z = lu.solve(z);
    const CVec Pinv_Q_wb = lu.solve(b.Q * wb);
    const CMat Qb = b.Q.conjugate();
    const cplx quad = z.transpose() * Qb * Pinv_z;
    const cplx cross = 2.0 * wb.transpose() * Pinv_z;
    const cplx back = -(wb.transpose() * Pinv_Q_wb)(0);
    const double kk = spec.k;
    const cplx lift = kk * (I_unit * x.theta - 0.5 * z.squaredNorm()) + kk * (-I_unit * y.theta - 0.5 * y.z.squaredNorm());
    const std::optional<double> arg = o == Orientation::det_P ? spec.det_arg : std::nullopt;
    return log_prefactor(spec.k, static_cast<int>(z.size())) - log_sqrt_det(b.P, arg) +
           0.5 * kk * (quad + cross + back) + lift;
}

inline cplx metaplectic_kernel(const MetaplecticKernelSpec& spec, const LiftedPoint& x, const LiftedPoint& y,
                               Orientation o = Orientation::det_P) {
    return std::exp(log_metaplectic_kernel(spec, x, y, o));
}

struct FactorizationReport {
    cplx quadrature;          // (det P*)^{1/2} * integral
    cplx closed_form;         // det_P orientation
    cplx closed_form_star;    // det_P_star orientation
    double residual = 0.0;
    double residual_star = 0.0;
    double residual_half_order = 0.0;
    int order = 0;
    std::string matching_orientation;
};

// The fiber integral in dVol = dtheta/2pi ^ omega^m/m! contributes exactly 1,
// since the integrand's dependence on the fiber angle cancels; omega^m/m! is
// 2^m times Lebesgue measure in (x, y).
inline cplx factorization_integral(int k, const ComplexBlocks& b, const LiftedPoint& x, const LiftedPoint& y,
                                   int order) {
    const int m = static_cast<int>(b.P.rows());
    const LogIntegrand logf = [&](const RVec& u) {
        const CVec uz = complex_from_real(u);
        const LiftedPoint image(b.P * uz + b.Q * uz.conjugate(), 0.0);
        const LiftedPoint base(uz, 0.0);
        return log_lifted_kernel(k, x, image) + log_lifted_kernel(k, base, y) + m * std::log(2.0);
    };
    return integrate_gaussian(2 * m, order, logf);
}

inline FactorizationReport toep_met_factorization_check(const MetaplecticKernelSpec& spec, const LiftedPoint& x,
                                                        const LiftedPoint& y, int order = 40) {
    const int m = static_cast<int>(spec.blocks.P.rows());
    if (m > 2) throw UnsupportedError("factorization quadrature supports m <= 2");
    const cplx det_star = spec.blocks.P.adjoint().determinant();
    const cplx sqrt_star = std::sqrt(det_star);
    auto residual_at = [&](int ord, cplx& q) {
        q = sqrt_star * factorization_integral(spec.k, spec.blocks, x, y, ord);
        const cplx c = metaplectic_kernel(spec, x, y);
        return std::abs(q - c) / std::abs(c);
    };
    FactorizationReport r;
    r.order = order;
    cplx q_half;
    r.residual_half_order = residual_at(std::max(2, order / 2), q_half);
    r.residual = residual_at(order, r.quadrature);
    r.closed_form = metaplectic_kernel(spec, x, y, Orientation::det_P);
    r.closed_form_star = metaplectic_kernel(spec, x, y, Orientation::det_P_star);
    r.residual_star = std::abs(r.quadrature - r.closed_form_star) / std::abs(r.closed_form_star);
    r.matching_orientation = r.residual <= r.residual_star ? "det_P" : "det_P_star";
    const double floor = 1e-12;
    if (r.residual > floor && r.residual > r.residual_half_order)
        throw AccuracyError("quadrature residual does not decrease with order");
    return r;
}

struct BpuReport {
    cplx quadrature;
    cplx closed_form;          // (k/2pi)^{-m-1/2} (abar (P*)^{-1} alpha)^{-1/2} (det P*)^{-1/2}
    cplx closed_form_det_P;    // same with P in place of P*
    cplx closed_form_general;  // denominator |alpha|^2 - alpha^T Q* (P*)^{-1} alpha
    double residual = 0.0;
    double residual_det_P = 0.0;
    double residual_general = 0.0;
    int order = 0;
};

// <M^{-1} v, P_Xi v> with
//   (M^{-1} v)(z) = (det P*)^{-1/2} exp(k(-z^T Q* (P*)^{-1} z / 2 - |z|^2/2)),
//   (P_Xi v)(z)   = integral over t of exp(k(i t z.abar - |z|^2/2 - |alpha t|^2/2)),
// integrated over C^m x R with dVol = 2^m dx dy.
inline BpuReport bpu_matrix_element(const SymplecticMap& S, const CVec& alpha, int k, int order = 40) {
    const int m = S.m();
    const ComplexBlocks b = complexify(S);
    const CVec xi_check = b.P * alpha + b.Q * alpha.conjugate() - alpha;
    if (max_abs(xi_check) > 1e-8 * std::max(1.0, alpha.norm()))
        throw ValidationError("alpha is not invariant under S", max_abs(xi_check));
    const CMat Ps = b.P.adjoint();
    const CMat Qs = b.Q.adjoint();
    const auto lu = Ps.partialPivLu();
    const CMat B = Qs * lu.inverse();
    const cplx half_log_det_star = 0.5 * std::log(Ps.determinant());
    const double kk = k;
    const double a2 = alpha.squaredNorm();
    const LogIntegrand logf = [&](const RVec& u) {
        const CVec z = complex_from_real(u.head(2 * m));
        const double t = u(2 * m);
        const cplx left = -half_log_det_star + kk * (-0.5 * cplx(z.transpose() * B * z) - 0.5 * z.squaredNorm());
        const cplx zab = z.transpose() * alpha.conjugate();
        const cplx right = kk * (I_unit * t * zab - 0.5 * z.squaredNorm() - 0.5 * a2 * t * t);
        return left + std::conj(right) + m * std::log(2.0);
    };
    BpuReport r;
    r.order = order;
    r.quadrature = integrate_gaussian(2 * m + 1, order, logf);
    const double pref = std::pow(kk / (2 * pi), -m - 0.5);
    const cplx me_star = alpha.dot(lu.solve(alpha));
    const cplx me_p = alpha.dot(b.P.partialPivLu().solve(alpha));
    const cplx gen = a2 - cplx(alpha.transpose() * B * alpha);
    r.closed_form = pref / std::sqrt(me_star) / std::sqrt(Ps.determinant());
    r.closed_form_det_P = pref / std::sqrt(me_p) / std::sqrt(b.P.determinant());
    r.closed_form_general = pref / std::sqrt(gen) / std::sqrt(Ps.determinant());
    r.residual = std::abs(r.quadrature - r.closed_form) / std::abs(r.closed_form);
    r.residual_det_P = std::abs(r.quadrature - r.closed_form_det_P) / std::abs(r.closed_form_det_P);
    r.residual_general = std::abs(r.quadrature - r.closed_form_general) / std::abs(r.closed_form_general);
    return r;
}

}  // namespace kspec
