#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kspec/core.hpp"

namespace kspec {

// Real coordinates are ordered (x_1..x_m, y_1..y_m) with z_j = x_j + i y_j.
// Omega is the matrix of sum dx_j ^ dy_j; J0 is multiplication by i.
inline RMat standard_omega(int m) {
    RMat w = RMat::Zero(2 * m, 2 * m);
    w.topRightCorner(m, m) = RMat::Identity(m, m);
    w.bottomLeftCorner(m, m) = -RMat::Identity(m, m);
    return w;
}

inline RMat standard_J(int m) {
    RMat j = RMat::Zero(2 * m, 2 * m);
    j.topRightCorner(m, m) = -RMat::Identity(m, m);
    j.bottomLeftCorner(m, m) = RMat::Identity(m, m);
    return j;
}

struct SymplecticCheck {
    bool ok = false;
    double residual = 0.0;
};

inline SymplecticCheck check_symplectic(const RMat& S, double tol) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0)
        throw DimensionError("symplectic check needs a square even-dimensional matrix, got " +
                             std::to_string(S.rows()) + "x" + std::to_string(S.cols()));
    const int m = static_cast<int>(S.rows() / 2);
    const RMat w = standard_omega(m);
    const double r = max_abs(RMat(S.transpose() * w * S - w));
    return {r <= tol, r};
}

// S^{-1} = Omega^{-1} S^T Omega for S in Sp.
inline RMat symplectic_inverse(const RMat& S) {
    const int m = static_cast<int>(S.rows() / 2);
    const RMat w = standard_omega(m);
    return -w * S.transpose() * w;
}

// A validated element of Sp(2m, R). Inputs that miss the group by a residual
// within tol are pulled back by one Newton step; the step size is kept.
class SymplecticMap {
public:
    SymplecticMap() = default;

    SymplecticMap(const RMat& S, double tol = 1e-10) : tol_(tol) {
        auto chk = check_symplectic(S, tol);
        if (!chk.ok)
            throw ValidationError("matrix is not symplectic (residual " + std::to_string(chk.residual) + ")",
                                  chk.residual);
        m_ = static_cast<int>(S.rows() / 2);
        S_ = S;
        if (chk.residual > 0.0) {
            const RMat w = standard_omega(m_);
            const RMat e = S.transpose() * w * S - w;
            RMat step = S * (0.5 * w * e);
            RMat projected = S + step;
            if (check_symplectic(projected, tol).residual < chk.residual) {
                S_ = projected;
                projection_distance_ = max_abs(step);
            }
        }
    }

    int m() const { return m_; }
    const RMat& matrix() const { return S_; }
    double tol() const { return tol_; }
    double projection_distance() const { return projection_distance_; }
    double residual() const { return check_symplectic(S_, 1.0).residual; }

    SymplecticMap inverse() const {
        SymplecticMap r;
        r.m_ = m_;
        r.tol_ = tol_;
        r.S_ = symplectic_inverse(S_);
        return r;
    }

    SymplecticMap operator*(const SymplecticMap& o) const {
        SymplecticMap r;
        r.m_ = m_;
        r.tol_ = std::max(tol_, o.tol_);
        r.S_ = S_ * o.S_;
        return r;
    }

    // S^n for any integer n, by repeated multiplication.
    SymplecticMap power(int n) const {
        SymplecticMap base = n >= 0 ? *this : inverse();
        SymplecticMap r;
        r.m_ = m_;
        r.tol_ = tol_;
        r.S_ = RMat::Identity(2 * m_, 2 * m_);
        for (int i = 0; i < std::abs(n); ++i) r.S_ = r.S_ * base.S_;
        return r;
    }

private:
    int m_ = 0;
    RMat S_;
    double tol_ = 1e-10;
    double projection_distance_ = 0.0;
};

struct ComplexBlocks {
    CMat P;
    CMat Q;
};

// W maps (z, zbar) to sqrt(2)(x, y).
inline CMat w_matrix(int m) {
    const double s = 1.0 / std::sqrt(2.0);
    CMat w(2 * m, 2 * m);
    const CMat id = CMat::Identity(m, m);
    w.topLeftCorner(m, m) = s * id;
    w.topRightCorner(m, m) = s * id;
    w.bottomLeftCorner(m, m) = -I_unit * s * id;
    w.bottomRightCorner(m, m) = I_unit * s * id;
    return w;
}

inline double w_unitarity_residual(int m) {
    const CMat w = w_matrix(m);
    return max_abs(CMat(w.adjoint() * w - CMat::Identity(2 * m, 2 * m)));
}

inline ComplexBlocks complexify_raw(const RMat& S) {
    const int m = static_cast<int>(S.rows() / 2);
    const RMat A = S.topLeftCorner(m, m), B = S.topRightCorner(m, m);
    const RMat C = S.bottomLeftCorner(m, m), D = S.bottomRightCorner(m, m);
    ComplexBlocks b;
    b.P = 0.5 * ((A + D).cast<cplx>() + I_unit * (C - B).cast<cplx>());
    b.Q = 0.5 * ((A - D).cast<cplx>() + I_unit * (B + C).cast<cplx>());
    return b;
}

inline ComplexBlocks complexify(const SymplecticMap& S) { return complexify_raw(S.matrix()); }

struct FollandResiduals {
    double pp_qq = 0.0;   // PP* - QQ* - I
    double pq_sym = 0.0;  // PQ^T - QP^T
    double pp_qq_t = 0.0; // P*P - Q^T Qbar - I
    double pq_mixed = 0.0; // P^T Qbar - Q* P
    double max() const { return std::max({pp_qq, pq_sym, pp_qq_t, pq_mixed}); }
};

// Residuals are scaled by max(1, |P|^2) so they stay comparable for large S.
inline FollandResiduals folland_residuals(const ComplexBlocks& b) {
    const auto m = b.P.rows();
    const CMat id = CMat::Identity(m, m);
    const double scale = std::max(1.0, max_abs(b.P) * max_abs(b.P) * static_cast<double>(m));
    FollandResiduals r;
    r.pp_qq = max_abs(CMat(b.P * b.P.adjoint() - b.Q * b.Q.adjoint() - id)) / scale;
    r.pq_sym = max_abs(CMat(b.P * b.Q.transpose() - b.Q * b.P.transpose())) / scale;
    r.pp_qq_t = max_abs(CMat(b.P.adjoint() * b.P - b.Q.transpose() * b.Q.conjugate() - id)) / scale;
    r.pq_mixed = max_abs(CMat(b.P.transpose() * b.Q.conjugate() - b.Q.adjoint() * b.P)) / scale;
    return r;
}

inline RMat decomplexify(const ComplexBlocks& b, double tol = 1e-10) {
    const auto fr = folland_residuals(b);
    if (fr.max() > tol)
        throw ValidationError("complex blocks violate the Folland identities", fr.max());
    const auto m = b.P.rows();
    const CMat sum = b.P + b.Q;   // A + iC
    const CMat diff = b.P - b.Q;  // D - iB
    RMat S(2 * m, 2 * m);
    S.topLeftCorner(m, m) = sum.real();
    S.bottomLeftCorner(m, m) = sum.imag();
    S.bottomRightCorner(m, m) = diff.real();
    S.topRightCorner(m, m) = -diff.imag();
    return S;
}

// Blocks of S^{-1} expressed through those of S.
inline ComplexBlocks inverse_blocks(const ComplexBlocks& b) {
    return {b.P.adjoint(), -b.Q.transpose()};
}

enum class SymplecticClass { identity, positive_definite_symmetric, unitary_type, other };

inline std::string to_string(SymplecticClass c) {
    switch (c) {
        case SymplecticClass::identity: return "identity";
        case SymplecticClass::positive_definite_symmetric: return "positive_definite_symmetric";
        case SymplecticClass::unitary_type: return "unitary_type";
        case SymplecticClass::other: return "other";
    }
    return "other";
}

struct Classification {
    SymplecticClass kind = SymplecticClass::other;
    std::vector<double> lambdas;  // descending, one per complex dimension
    int fixed_multiplicity = 0;   // number of real eigenvalues equal to 1
};

inline Classification classify_pds(const SymplecticMap& Sm, double tol = 1e-9, double cluster_gap = 1e-6) {
    const RMat& S = Sm.matrix();
    const int m = Sm.m();
    const double scale = std::max(1.0, max_abs(S));
    Classification c;
    const RMat id = RMat::Identity(2 * m, 2 * m);
    if (max_abs(RMat(S - id)) <= tol * scale) {
        c.kind = SymplecticClass::identity;
        c.lambdas.assign(m, 0.0);
        c.fixed_multiplicity = 2 * m;
        return c;
    }
    if (max_abs(RMat(S - S.transpose())) <= tol * scale) {
        Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (S + S.transpose()));
        RVec ev = es.eigenvalues();
        if (ev.minCoeff() > 0.0) {
            c.kind = SymplecticClass::positive_definite_symmetric;
            std::vector<double> e(ev.data(), ev.data() + ev.size());
            std::sort(e.begin(), e.end(), std::greater<>());
            for (int j = 0; j < m; ++j) c.lambdas.push_back(std::max(0.0, std::log(e[j])));
            for (double v : e)
                if (std::abs(v - 1.0) <= cluster_gap) ++c.fixed_multiplicity;
            return c;
        }
    }
    if (max_abs(RMat(S.transpose() * S - id)) <= tol * scale * scale) {
        c.kind = SymplecticClass::unitary_type;
        c.lambdas.assign(m, 0.0);
        Eigen::EigenSolver<RMat> es(S);
        for (int i = 0; i < 2 * m; ++i)
            if (std::abs(es.eigenvalues()[i] - cplx(1.0, 0.0)) <= cluster_gap) ++c.fixed_multiplicity;
        return c;
    }
    c.kind = SymplecticClass::other;
    Eigen::EigenSolver<RMat> es(S);
    std::vector<double> mods;
    for (int i = 0; i < 2 * m; ++i) {
        mods.push_back(std::abs(es.eigenvalues()[i]));
        if (std::abs(es.eigenvalues()[i] - cplx(1.0, 0.0)) <= cluster_gap) ++c.fixed_multiplicity;
    }
    std::sort(mods.begin(), mods.end(), std::greater<>());
    for (int j = 0; j < m; ++j) c.lambdas.push_back(std::max(0.0, std::log(mods[j])));
    return c;
}

inline cplx holomorphic_block_det(const SymplecticMap& S) { return complexify(S).P.determinant(); }

// Complex (1,0) coordinate of a real tangent vector: alpha_j = xi_x_j + i xi_y_j.
inline CVec alpha_from_real(const RVec& xi) {
    const auto m = xi.size() / 2;
    return xi.head(m).cast<cplx>() + I_unit * xi.tail(m).cast<cplx>();
}

inline CVec complex_from_real(const RVec& u) { return alpha_from_real(u); }

inline RVec real_from_alpha(const CVec& a) {
    RVec xi(2 * a.size());
    xi << a.real(), a.imag();
    return xi;
}

inline cplx matrix_element(const CMat& P, const CVec& alpha) {
    Eigen::JacobiSVD<CMat> svd(P);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    // blocks of symplectic maps have smin >= 1, so only a vanishing smin is fatal;
    // large smax alone comes from honest hyperbolic powers
    if (!(smin > 1e-12)) throw SingularityError("holomorphic block is singular", cond);
    return alpha.dot(P.partialPivLu().solve(alpha));  // dot conjugates the first argument
}

inline cplx invariant_matrix_element(const SymplecticMap& S, const CVec& alpha) {
    return matrix_element(complexify(S).P, alpha);
}

struct GcalCoefficient {
    int n = 0;
    cplx value;
    cplx detP;
    cplx matrix_element;
    double det_arg = 0.0;  // continuously tracked arguments
    double me_arg = 0.0;
};

// Coefficients for n in [n_lo, n_hi] (n_lo <= 0 <= n_hi). Square roots follow the
// arguments of det P_n and the matrix element continuously outward from n = 0.
inline std::vector<GcalCoefficient> gcal_series(const SymplecticMap& S, const CVec& alpha, int n_lo, int n_hi) {
    if (n_lo > 0 || n_hi < 0) throw InputError("coefficient range must contain n = 0");
    const int count = n_hi - n_lo + 1;
    std::vector<GcalCoefficient> out(count);
    auto fill = [&](int dir, int n_end) {
        const SymplecticMap step = dir > 0 ? S : S.inverse();
        RMat Sn = RMat::Identity(2 * S.m(), 2 * S.m());
        double darg = 0.0, marg = 0.0;
        cplx dprev(1.0, 0.0), mprev;
        for (int n = 0; dir > 0 ? n <= n_end : n >= n_end; n += dir) {
            if (n != 0) Sn = Sn * step.matrix();
            const CMat P = complexify_raw(Sn).P;
            const cplx d = P.determinant();
            const cplx me = matrix_element(P, alpha);
            if (n == 0) {
                darg = std::arg(d);
                marg = std::arg(me);
            } else {
                darg += wrap_angle_diff(std::arg(d) - std::arg(dprev));
                marg += wrap_angle_diff(std::arg(me) - std::arg(mprev));
            }
            dprev = d;
            mprev = me;
            GcalCoefficient g;
            g.n = n;
            g.detP = d;
            g.matrix_element = me;
            g.det_arg = darg;
            g.me_arg = marg;
            const double logmod = -0.5 * (std::log(std::abs(d)) + std::log(std::abs(me)));
            g.value = std::exp(cplx(logmod, -0.5 * (darg + marg)));
            out[n - n_lo] = g;
        }
    };
    fill(+1, n_hi);
    if (n_lo < 0) fill(-1, n_lo);
    return out;
}

inline GcalCoefficient gcal_coefficient(const SymplecticMap& S, const CVec& alpha, int n) {
    auto s = gcal_series(S, alpha, std::min(n, 0), std::max(n, 0));
    return n >= 0 ? s.back() : s.front();
}

struct EtaResult {
    cplx eta;             // 1 / det P, i.e. (eta*)^{-1} = det P*
    cplx eta_determinant; // from det((I + iJ) + S(I - iJ)) / 4^m
    double route_residual = 0.0;
    double beta = 0.0;    // 2^{-m/2} det(I + S^T S)^{1/4}
    double modulus_residual = 0.0;  // | |eta| beta^2 - 1 |
};

inline EtaResult metaplectic_eta(const SymplecticMap& Sm) {
    const int m = Sm.m();
    const cplx detP = holomorphic_block_det(Sm);
    if (std::abs(detP) < 1e-300) throw SingularityError("det P vanishes", std::numeric_limits<double>::infinity());
    EtaResult r;
    r.eta = 1.0 / detP;
    const CMat J = standard_J(m).cast<cplx>();
    const CMat id = CMat::Identity(2 * m, 2 * m);
    const CMat S = Sm.matrix().cast<cplx>();
    const cplx d = ((id + I_unit * J) + S * (id - I_unit * J)).determinant();
    r.eta_determinant = std::pow(4.0, m) / d;
    r.route_residual = std::abs(r.eta - r.eta_determinant) / std::abs(r.eta);
    const RMat StS = Sm.matrix().transpose() * Sm.matrix();
    const double det_sum = (RMat::Identity(2 * m, 2 * m) + StS).determinant();
    r.beta = std::pow(2.0, -0.5 * m) * std::pow(det_sum, 0.25);
    r.modulus_residual = std::abs(std::abs(r.eta) * r.beta * r.beta - 1.0);
    return r;
}

// || P_J S P_J - (S + S^{-1})/2 P_J || on C^{2m} with P_J = (I - iJ)/2.
inline double projector_identity_residual(const SymplecticMap& Sm) {
    const int m = Sm.m();
    const CMat id = CMat::Identity(2 * m, 2 * m);
    const CMat PJ = 0.5 * (id - I_unit * standard_J(m).cast<cplx>());
    const CMat S = Sm.matrix().cast<cplx>();
    const CMat Sinv = symplectic_inverse(Sm.matrix()).cast<cplx>();
    return max_abs(CMat(PJ * S * PJ - 0.5 * (S + Sinv) * PJ)) / std::max(1.0, max_abs(S));
}

// Real 2m x 2m matrix of the complex-linear map z -> F z.
inline RMat realify(const CMat& F) {
    const auto m = F.rows();
    RMat T(2 * m, 2 * m);
    T.topLeftCorner(m, m) = F.real();
    T.topRightCorner(m, m) = -F.imag();
    T.bottomLeftCorner(m, m) = F.imag();
    T.bottomRightCorner(m, m) = F.real();
    return T;
}

// Frame change for a Kahler form i sum g_{jk} dz_j ^ dzbar_k with G Hermitian
// positive definite: z = F z' makes the form standard. Cholesky is the
// Gram-Schmidt step for the metric omega(., J.).
struct KahlerFrame {
    CMat F;     // z = F z'
    CMat Finv;  // z' = Finv z
};

inline KahlerFrame kahler_frame(const CMat& G, double tol = 1e-10) {
    const CMat Gt = G.transpose();
    if (max_abs(CMat(Gt - Gt.adjoint())) > tol * std::max(1.0, max_abs(Gt)))
        throw ValidationError("metric matrix is not Hermitian", max_abs(CMat(Gt - Gt.adjoint())));
    Eigen::LLT<CMat> llt(Gt);
    if (llt.info() != Eigen::Success) throw SingularityError("Kahler metric is not positive definite", 0.0);
    const CMat L = llt.matrixL();
    KahlerFrame fr;
    fr.Finv = L.adjoint();
    fr.F = fr.Finv.inverse();
    return fr;
}

// Conjugate a raw monodromy into the standard frame.
inline RMat adapt_to_frame(const RMat& S_raw, const KahlerFrame& fr) {
    return realify(fr.Finv) * S_raw * realify(fr.F);
}

// ---- random sampling used by the property suites ----

inline CMat random_unitary(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CMat z(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) z(i, j) = cplx(nd(rng), nd(rng));
    Eigen::HouseholderQR<CMat> qr(z);
    CMat q = qr.householderQ();
    const CMat r = qr.matrixQR();
    for (int j = 0; j < m; ++j) {
        const cplx d = r(j, j);
        q.col(j) *= std::abs(d) > 0 ? d / std::abs(d) : cplx(1.0);
    }
    return q;
}

// Symmetric element of sp(2m): [[a, b], [b, -a]] with a, b symmetric.
inline RMat random_symmetric_hamiltonian(int m, std::mt19937_64& rng, double scale, int frozen = 0) {
    std::normal_distribution<double> nd(0.0, scale);
    RMat a = RMat::Zero(m, m), b = RMat::Zero(m, m);
    for (int i = frozen; i < m; ++i)
        for (int j = i; j < m; ++j) {
            a(i, j) = a(j, i) = nd(rng);
            b(i, j) = b(j, i) = nd(rng);
        }
    RMat X(2 * m, 2 * m);
    X << a, b, b, -a;
    return X;
}

inline RMat symmetric_exp(const RMat& X) {
    Eigen::SelfAdjointEigenSolver<RMat> es(X);
    return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

struct SampledPds {
    RMat S;
    RVec invariant;  // zero vector when none was requested
};

// Positive definite symmetric symplectic S = R exp(X) R^T with R unitary. When
// with_invariant is set, the first complex direction is frozen so R e_1 is fixed.
inline SampledPds random_pds_symplectic(int m, std::mt19937_64& rng, double scale, bool with_invariant) {
    const RMat X = random_symmetric_hamiltonian(m, rng, scale, with_invariant ? 1 : 0);
    const RMat R = realify(random_unitary(m, rng));
    SampledPds s;
    s.S = R * symmetric_exp(X) * R.transpose();
    s.S = 0.5 * (s.S + s.S.transpose());
    s.invariant = RVec::Zero(2 * m);
    if (with_invariant) s.invariant = R.col(0);
    return s;
}

inline RMat random_symplectic(int m, std::mt19937_64& rng, double scale) {
    const RMat U = realify(random_unitary(m, rng));
    const RMat V = realify(random_unitary(m, rng));
    return U * symmetric_exp(random_symmetric_hamiltonian(m, rng, scale)) * V;
}

}  // namespace kspec
