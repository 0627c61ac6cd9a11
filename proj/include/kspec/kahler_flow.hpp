#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kspec/ode.hpp"
#include "kspec/quadrature.hpp"
#include "kspec/symplectic.hpp"
#include "kspec/zpoly.hpp"

namespace kspec {

// Kahler model on a single chart: phi = poly + log_coeff * log(1 + |z|^2),
// omega = i ddbar phi, Hamiltonian H real-valued.
struct KahlerModel {
    int m = 1;
    ZPoly potential;
    double log_coeff = 0.0;
    ZPoly H;
    double E = 0.0;
    double domain_radius = 1e6;
    std::string kind = "flat";

    // derivative tables, filled by finalize()
    std::vector<ZPoly> phi_z, phi_zz;     // phi_{z_j}; phi_{z_j z_l}
    std::vector<ZPoly> G, G_z, G_zb;      // G_{jk} = phi_{z_j zbar_k}; d_{z_l}, d_{zbar_l} of G_{jk}
    std::vector<ZPoly> H_z, H_zb, H_zb_z, H_zb_zb;

    void finalize() {
        if (H.m() != m || potential.m() != m) throw DimensionError("model polynomials have the wrong dimension");
        if (H.reality_defect() > 1e-12) throw InputError("Hamiltonian coefficients are not real-valued");
        if (potential.reality_defect() > 1e-12) throw InputError("potential coefficients are not real-valued");
        phi_z.clear();
        phi_zz.clear();
        G.clear();
        G_z.clear();
        G_zb.clear();
        H_z.clear();
        H_zb.clear();
        H_zb_z.clear();
        H_zb_zb.clear();
        for (int j = 0; j < m; ++j) {
            ZPoly d = potential.dz(j);
            if (log_coeff != 0.0) d += ZPoly::zbar(m, j) * ZPoly::v(m) * cplx(log_coeff);
            phi_z.push_back(d);
        }
        for (int j = 0; j < m; ++j)
            for (int l = 0; l < m; ++l) phi_zz.push_back(phi_z[j].dz(l));
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) G.push_back(phi_z[j].dzbar(k));
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    G_z.push_back(G[j * m + k].dz(l));
                    G_zb.push_back(G[j * m + k].dzbar(l));
                }
        for (int k = 0; k < m; ++k) {
            H_z.push_back(H.dz(k));
            H_zb.push_back(H.dzbar(k));
        }
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) {
                H_zb_z.push_back(H_zb[k].dz(l));
                H_zb_zb.push_back(H_zb[k].dzbar(l));
            }
    }

    double phi(const CVec& z) const {
        double v = potential(z).real();
        if (log_coeff != 0.0) v += log_coeff * std::log1p(z.squaredNorm());
        return v;
    }
    double hamiltonian(const CVec& z) const { return H(z).real(); }

    CMat metric(const CVec& z) const {
        CMat g(m, m);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) g(j, k) = G[j * m + k](z);
        return g;
    }
    CVec dphi(const CVec& z) const {
        CVec d(m);
        for (int j = 0; j < m; ++j) d(j) = phi_z[j](z);
        return d;
    }
    CVec dH_zbar(const CVec& z) const {
        CVec d(m);
        for (int j = 0; j < m; ++j) d(j) = H_zb[j](z);
        return d;
    }
};

inline KahlerModel flat_model(int m, const ZPoly& H, double E = 0.0) {
    KahlerModel km;
    km.m = m;
    km.potential = ZPoly::norm2(m);
    km.H = H;
    km.E = E;
    km.kind = "flat";
    km.finalize();
    return km;
}

struct PotentialCoefficient {
    std::vector<int> J;
    std::vector<int> K;
    double a = 0.0;
};

// phi = |z|^2 + sum a_JK z^J zbar^K with |J|, |K| >= 2.
inline KahlerModel k_coordinate_model(int m, const std::vector<PotentialCoefficient>& coeffs, const ZPoly& H,
                                      double E = 0.0, double domain_radius = 1e6) {
    KahlerModel km;
    km.m = m;
    km.potential = ZPoly::norm2(m);
    for (const auto& c : coeffs) {
        if (static_cast<int>(c.J.size()) != m || static_cast<int>(c.K.size()) != m)
            throw DimensionError("potential multi-index has the wrong length");
        int dj = 0, dk = 0;
        for (int j = 0; j < m; ++j) {
            dj += c.J[j];
            dk += c.K[j];
        }
        if (dj < 2 || dk < 2) throw InputError("potential terms must have bidegree at least (2,2)");
        km.potential.add(c.a, c.J, c.K, 0);
    }
    km.H = H;
    km.E = E;
    km.domain_radius = domain_radius;
    km.kind = "k_coordinates";
    km.finalize();
    return km;
}

// Radial potential |z|^2 + a2 |z|^4 + a3 |z|^6 + ... on C.
inline KahlerModel radial_model(const std::vector<double>& higher, const ZPoly& H, double E = 0.0,
                                double domain_radius = 1e6) {
    std::vector<PotentialCoefficient> c;
    for (std::size_t i = 0; i < higher.size(); ++i)
        if (higher[i] != 0.0) c.push_back({{static_cast<int>(i) + 2}, {static_cast<int>(i) + 2}, higher[i]});
    KahlerModel km = k_coordinate_model(1, c, H, E, domain_radius);
    km.kind = "radial";
    return km;
}

// CP^1 on the affine chart, phi = log(1 + |z|^2): omega = 2 dx dy / (1 + |z|^2)^2.
inline KahlerModel fubini_study_model(const ZPoly& H, double E = 0.0, double domain_radius = 1e3) {
    KahlerModel km;
    km.m = 1;
    km.potential = ZPoly(1);
    km.log_coeff = 1.0;
    km.H = H;
    km.E = E;
    km.domain_radius = domain_radius;
    km.kind = "fubini_study";
    km.finalize();
    return km;
}

// Samples omega on a polar grid of the given radius; false if it degenerates anywhere.
inline bool metric_positive_on(const KahlerModel& km, double radius, int samples = 16) {
    for (int a = 0; a <= samples; ++a)
        for (int b = 0; b < samples; ++b) {
            CVec z = CVec::Zero(km.m);
            const double rr = radius * a / samples, ang = 2 * pi * b / samples;
            for (int j = 0; j < km.m; ++j) z(j) = std::polar(rr / std::sqrt(km.m), ang * (j + 1));
            Eigen::SelfAdjointEigenSolver<CMat> es(km.metric(z));
            if (es.eigenvalues().minCoeff() <= 0.0) return false;
        }
    return true;
}

// Complex components xi_j of xi = sum xi_j d/dz_j + conj, from dH = i_xi omega:
// xi = -i G^{-T} dH/dzbar.
inline CVec hamilton_field_complex(const KahlerModel& km, const CVec& z) {
    const CMat g = km.metric(z);
    Eigen::LLT<CMat> llt(g.transpose());
    if (llt.info() != Eigen::Success)
        throw SingularityError("Kahler form is degenerate at the evaluation point", 0.0);
    return -I_unit * llt.solve(km.dH_zbar(z));
}

inline RVec hamilton_field(const KahlerModel& km, const CVec& z) {
    return real_from_alpha(hamilton_field_complex(km, z));
}

// Half the pairing of d^c phi = i(dbar - d)phi with v: -Im sum phi_{z_j} v_j.
inline double half_dc_phi(const KahlerModel& km, const CVec& z, const CVec& v) {
    return -(km.dphi(z).transpose() * v)(0).imag();
}

// Contact form alpha = dtheta - (1/2) d^c phi as a covector on (x, y, theta).
inline RVec contact_form(const KahlerModel& km, const CVec& z) {
    const CVec d = km.dphi(z);
    RVec a(2 * km.m + 1);
    a.head(km.m) = d.imag();
    a.segment(km.m, km.m) = d.real();
    a(2 * km.m) = 1.0;
    return a;
}

// Lifted field xi^h - H R on (x, y, theta).
inline RVec contact_lift_field(const KahlerModel& km, const CVec& z) {
    const CVec xi = hamilton_field_complex(km, z);
    RVec out(2 * km.m + 1);
    out.head(2 * km.m) = real_from_alpha(xi);
    out(2 * km.m) = half_dc_phi(km, z, xi) - km.hamiltonian(z);
    return out;
}

// Real Jacobian of the Hamilton field.
inline RMat hamilton_jacobian(const KahlerModel& km, const CVec& z) {
    const int m = km.m;
    const CMat g = km.metric(z);
    const auto lu = g.transpose().partialPivLu();
    const CVec h = km.dH_zbar(z);
    const CVec y = lu.solve(h);
    CMat A(m, m), B(m, m);  // dF/dz, dF/dzbar with F = -i y
    for (int l = 0; l < m; ++l) {
        CVec dh(m), dhb(m);
        CMat dGt(m, m), dGtb(m, m);
        for (int k = 0; k < m; ++k) {
            dh(k) = km.H_zb_z[k * m + l](z);
            dhb(k) = km.H_zb_zb[k * m + l](z);
            for (int j = 0; j < m; ++j) {
                // (G^T)_{kj} = G_{jk}
                dGt(k, j) = km.G_z[(j * m + k) * m + l](z);
                dGtb(k, j) = km.G_zb[(j * m + k) * m + l](z);
            }
        }
        A.col(l) = -I_unit * lu.solve(dh - dGt * y);
        B.col(l) = -I_unit * lu.solve(dhb - dGtb * y);
    }
    RMat Jr(2 * m, 2 * m);
    const CMat s = A + B, d = A - B;
    Jr.topLeftCorner(m, m) = s.real();
    Jr.topRightCorner(m, m) = -d.imag();
    Jr.bottomLeftCorner(m, m) = s.imag();
    Jr.bottomRightCorner(m, m) = d.real();
    return Jr;
}

// State layout: x (m), y (m), theta_hat, theta_h, then the 2m x 2m variational
// matrix column-major when requested.
inline int flow_state_size(int m, bool with_monodromy) { return 2 * m + 2 + (with_monodromy ? 4 * m * m : 0); }

inline OdeRhs flow_rhs(const KahlerModel& km, bool with_monodromy) {
    const int m = km.m;
    return [&km, m, with_monodromy](double, const RVec& s, RVec& ds) {
        const CVec z = complex_from_real(s.head(2 * m));
        const CVec xi = hamilton_field_complex(km, z);
        ds.resize(s.size());
        ds.head(2 * m) = real_from_alpha(xi);
        const double half = half_dc_phi(km, z, xi);
        ds(2 * m) = half - km.hamiltonian(z);
        ds(2 * m + 1) = half;
        if (with_monodromy) {
            const RMat J = hamilton_jacobian(km, z);
            Eigen::Map<const RMat> M(s.data() + 2 * m + 2, 2 * m, 2 * m);
            Eigen::Map<RMat> dM(ds.data() + 2 * m + 2, 2 * m, 2 * m);
            dM = J * M;
        }
    };
}

inline RVec flow_initial_state(const CVec& z, bool with_monodromy) {
    const int m = static_cast<int>(z.size());
    RVec s = RVec::Zero(flow_state_size(m, with_monodromy));
    s.head(2 * m) = real_from_alpha(z);
    if (with_monodromy) {
        Eigen::Map<RMat> M(s.data() + 2 * m + 2, 2 * m, 2 * m);
        M.setIdentity();
    }
    return s;
}

inline StepObserver domain_guard(const KahlerModel& km) {
    const int m = km.m;
    const double r = km.domain_radius;
    return [m, r](double t, const RVec& s) {
        if (s.head(2 * m).norm() > r) throw TruncationError("trajectory left the coordinate chart", t);
    };
}

// Raw variational matrix conjugated into unitary frames at both ends.
inline RMat adapted_monodromy(const KahlerModel& km, const CVec& z0, const CVec& zt, const RMat& raw) {
    const KahlerFrame f0 = kahler_frame(km.metric(z0));
    const KahlerFrame ft = kahler_frame(km.metric(zt));
    return realify(ft.Finv) * raw * realify(f0.F);
}

struct LiftedTrajectory {
    std::vector<double> times;
    std::vector<CVec> base_points;
    std::vector<double> theta_hat;
    std::vector<double> theta_h;
    std::vector<double> energy;
    std::vector<SymplecticMap> monodromy;  // in unitary frames at both ends
    std::vector<double> symplectic_residual;
    double max_energy_drift = 0.0;
    double max_lift_relation_residual = 0.0;  // |theta_h - theta_hat - t H(z)|
    std::vector<double> step_sizes;
};

inline LiftedTrajectory flow(const KahlerModel& km, const CVec& z, const std::vector<double>& t_grid,
                             double ode_tol = 1e-10) {
    if (t_grid.empty()) throw InputError("empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw InputError("time grid must be increasing");
    if (t_grid.front() < 0.0) throw InputError("time grid must start at t >= 0");
    const int m = km.m;
    const RVec s0 = flow_initial_state(z, true);
    OdeOptions opt;
    opt.rtol = opt.atol = ode_tol;
    const OdeSolution sol = Dopri5::integrate(flow_rhs(km, true), 0.0, s0, t_grid.back(), opt, domain_guard(km));
    LiftedTrajectory tr;
    tr.step_sizes = sol.step_sizes();
    const double H0 = km.hamiltonian(z);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const RVec s = (i + 1 == t_grid.size()) ? sol.y_end : (t == 0.0 ? s0 : sol.eval(t));
        const CVec zt = complex_from_real(s.head(2 * m));
        tr.times.push_back(t);
        tr.base_points.push_back(zt);
        tr.theta_hat.push_back(s(2 * m));
        tr.theta_h.push_back(s(2 * m + 1));
        const double e = km.hamiltonian(zt);
        tr.energy.push_back(e);
        tr.max_energy_drift = std::max(tr.max_energy_drift, std::abs(e - H0));
        tr.max_lift_relation_residual =
            std::max(tr.max_lift_relation_residual, std::abs(s(2 * m + 1) - s(2 * m) - t * H0));
        const RMat raw = Eigen::Map<const RMat>(s.data() + 2 * m + 2, 2 * m, 2 * m);
        const RMat M = adapted_monodromy(km, z, zt, raw);
        const double res = check_symplectic(M, 1.0).residual;
        tr.symplectic_residual.push_back(res);
        tr.monodromy.emplace_back(M, std::max(1e-6, 2 * res));
    }
    return tr;
}

// End state of the flow from z over [0, t].
struct FlowEnd {
    CVec z;
    double theta_hat = 0.0;
    double theta_h = 0.0;
    RMat raw_monodromy;
    std::vector<double> step_sizes;
};

inline FlowEnd flow_to(const KahlerModel& km, const CVec& z, double t, double ode_tol, bool with_monodromy = true) {
    const int m = km.m;
    FlowEnd out;
    const RVec s0 = flow_initial_state(z, with_monodromy);
    RVec s = s0;
    if (t > 0.0) {
        OdeOptions opt;
        opt.rtol = opt.atol = ode_tol;
        const auto sol = Dopri5::integrate(flow_rhs(km, with_monodromy), 0.0, s0, t, opt, domain_guard(km));
        s = sol.y_end;
        out.step_sizes = sol.step_sizes();
    }
    out.z = complex_from_real(s.head(2 * m));
    out.theta_hat = s(2 * m);
    out.theta_h = s(2 * m + 1);
    if (with_monodromy) out.raw_monodromy = Eigen::Map<const RMat>(s.data() + 2 * m + 2, 2 * m, 2 * m);
    return out;
}

struct PeriodicOrbitData {
    CVec z;
    double T = 0.0;
    double holonomy_angle = 0.0;  // theta_h at one period
    double theta_hat = 0.0;
    SymplecticMap monodromy;      // unitary frame at z
    Classification classification;
    RVec xi;                      // Hamilton field at z, raw coordinates
    CVec alpha;                   // its (1,0) part in the unitary frame
    double return_distance = 0.0;
    std::vector<double> step_sizes;  // of the reference integration over [0, T]
};

struct PeriodSearchOptions {
    int coarse_samples = 10000;
    double ode_tol = 1e-11;
    int max_candidates = 50;
};

// Smallest T in (0, T_max] with |g^T z - z| <= return_tol, or none.
inline std::optional<PeriodicOrbitData> find_period(const KahlerModel& km, const CVec& z, double T_max,
                                                    double return_tol, const PeriodSearchOptions& o = {}) {
    const int m = km.m;
    const CVec xi0 = hamilton_field_complex(km, z);
    if (xi0.norm() == 0.0) throw UnsupportedError("critical point of H: every time is a return");
    OdeOptions opt;
    opt.rtol = opt.atol = o.ode_tol;
    const RVec s0 = flow_initial_state(z, false);
    const auto sol = Dopri5::integrate(flow_rhs(km, false), 0.0, s0, T_max, opt, domain_guard(km));
    const int n = o.coarse_samples;
    const double dt = T_max / n;
    std::vector<double> d(n + 1);
    double speed = 0.0;
    for (int i = 0; i <= n; ++i) {
        const RVec s = i == n ? sol.y_end : sol.eval(i * dt);
        const CVec zt = complex_from_real(s.head(2 * m));
        d[i] = (zt - z).squaredNorm();
        if (i % 50 == 0) speed = std::max(speed, hamilton_field_complex(km, zt).norm());
    }
    const double coarse_tol = 2.0 * speed * dt + return_tol;
    // derivative of |g^t z - z|^2 / 2, by exact re-integration
    auto slope = [&](double t, CVec& zt) {
        zt = flow_to(km, z, t, o.ode_tol, false).z;
        const CVec v = hamilton_field_complex(km, zt);
        return (zt - z).dot(v).real();
    };
    int tried = 0;
    for (int i = 1; i <= n && tried < o.max_candidates; ++i) {
        const bool local_min = d[i] < d[i - 1] && (i == n || d[i] <= d[i + 1]);
        if (!local_min || std::sqrt(d[i]) > coarse_tol) continue;
        ++tried;
        double a = (i - 1) * dt, b = std::min(T_max, (i + 1) * dt);
        CVec za, zb, zc;
        double fa = slope(a, za), fb = slope(b, zb);
        double t = i * dt;
        if (fa < 0.0 && fb > 0.0) {
            int side = 0;
            for (int it = 0; it < 100; ++it) {
                t = (a * fb - b * fa) / (fb - fa);
                const double fc = slope(t, zc);
                if (fc == 0.0 || b - a < 1e-14 * std::max(1.0, t)) break;
                if (fc < 0.0) {
                    a = t;
                    fa = fc;
                    if (side == -1) fb *= 0.5;
                    side = -1;
                } else {
                    b = t;
                    fb = fc;
                    if (side == 1) fa *= 0.5;
                    side = 1;
                }
                if (std::abs(fc) < 1e-15 * std::max(1.0, xi0.squaredNorm())) break;
            }
        }
        FlowEnd end = flow_to(km, z, t, o.ode_tol, true);
        const double dist = (end.z - z).norm();
        if (dist > return_tol) continue;
        PeriodicOrbitData pd;
        pd.z = z;
        pd.T = t;
        pd.holonomy_angle = end.theta_h;
        pd.theta_hat = end.theta_hat;
        const RMat M = adapted_monodromy(km, z, end.z, end.raw_monodromy);
        pd.monodromy = SymplecticMap(M, 1e-6);
        pd.classification = classify_pds(pd.monodromy, 1e-7, 1e-6);
        pd.xi = real_from_alpha(xi0);
        pd.alpha = kahler_frame(km.metric(z)).Finv * xi0;
        pd.return_distance = dist;
        pd.step_sizes = end.step_sizes;
        return pd;
    }
    return std::nullopt;
}

// theta_hat after the frozen step sequence, starting at w.
inline FlowEnd replay_flow(const KahlerModel& km, const CVec& w, const std::vector<double>& hs) {
    const int m = km.m;
    const auto sol = Dopri5::replay(flow_rhs(km, false), 0.0, flow_initial_state(w, false), hs, domain_guard(km));
    FlowEnd out;
    out.z = complex_from_real(sol.y_end.head(2 * m));
    out.theta_hat = sol.y_end(2 * m);
    out.theta_h = sol.y_end(2 * m + 1);
    return out;
}

struct HolonomyFit {
    std::vector<double> radii;
    std::vector<double> deviations;
    double slope = 0.0;
    bool below_noise = false;
    double noise_floor = 0.0;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = x.size();
    if (n < 2 || y.size() != n) throw InputError("slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Local holonomy theta_hat_w(T) - theta_hat_z0(T) with the potential gauged to a
// K-frame at z0 (linear and pure-holomorphic quadratic parts of phi removed),
// sampled on spheres |w - z0| = r along the frozen reference step sequence.
inline HolonomyFit holonomy_hessian_check(const KahlerModel& km, const PeriodicOrbitData& orbit,
                                          const std::vector<double>& radii, int directions = 8,
                                          double noise_floor = 1e-11) {
    const int m = km.m;
    const CVec z0 = orbit.z;
    const CVec d1 = km.dphi(z0);
    CMat d2(m, m);
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) d2(j, l) = km.phi_zz[j * m + l](z0);
    auto gauge = [&](const CVec& w) {
        const CVec dlt = w - z0;
        const cplx h = (d1.transpose() * dlt)(0) + 0.5 * (dlt.transpose() * d2 * dlt)(0);
        return h.imag();
    };
    const KahlerFrame fr = kahler_frame(km.metric(z0));
    auto local_theta = [&](const CVec& w) {
        const FlowEnd e = replay_flow(km, w, orbit.step_sizes);
        return e.theta_hat + gauge(e.z) - gauge(w);
    };
    const double base = local_theta(z0);
    HolonomyFit fit;
    fit.noise_floor = noise_floor;
    fit.radii = radii;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::vector<CVec> dirs;
    for (int d = 0; d < directions; ++d) {
        CVec u(m);
        if (m == 1) {
            u(0) = std::polar(1.0, 2 * pi * d / directions + 0.1);
        } else {
            for (int j = 0; j < m; ++j) u(j) = cplx(nd(rng), nd(rng));
            u.normalize();
        }
        dirs.push_back(fr.F * u);
    }
    for (double r : radii) {
        double dev = 0.0;
        for (const auto& u : dirs) dev = std::max(dev, std::abs(local_theta(z0 + r * u) - base));
        fit.deviations.push_back(dev);
    }
    if (*std::max_element(fit.deviations.begin(), fit.deviations.end()) < noise_floor) {
        fit.below_noise = true;
        fit.slope = std::numeric_limits<double>::infinity();
        return fit;
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (fit.deviations[i] >= noise_floor) {
            xs.push_back(radii[i]);
            ys.push_back(fit.deviations[i]);
        }
    fit.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
    return fit;
}

// Points and tangent vectors along a parametrized path, with quadrature weights
// in the path parameter.
struct PathSamples {
    std::vector<CVec> points;
    std::vector<CVec> tangents;
    std::vector<double> weights;
};

// Gauss-Legendre samples of a path gamma on [0, 1] split into `pieces` panels.
inline PathSamples sample_path(const std::function<CVec(double)>& gamma, const std::function<CVec(double)>& dgamma,
                               int nodes = 16, int pieces = 8) {
    const Rule gl = gauss_legendre(nodes);
    PathSamples p;
    for (int k = 0; k < pieces; ++k) {
        const double a = static_cast<double>(k) / pieces, b = static_cast<double>(k + 1) / pieces;
        for (int i = 0; i < nodes; ++i) {
            const double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
            p.points.push_back(gamma(s));
            p.tangents.push_back(dgamma(s));
            p.weights.push_back(0.5 * (b - a) * gl.weights[i]);
        }
    }
    return p;
}

// Integral of (1/2) d^c phi along sampled path.
inline double loop_potential_integral(const KahlerModel& km, const PathSamples& path) {
    CompensatedSum<double> acc;
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        if (path.points[i].norm() > km.domain_radius) throw TruncationError("path leaves the coordinate chart", 0.0);
        acc.add(path.weights[i] * half_dc_phi(km, path.points[i], path.tangents[i]));
    }
    return acc.value();
}

// Image of the samples under g^t, tangents pushed by the variational matrix.
inline PathSamples push_forward_path(const KahlerModel& km, const PathSamples& path, double t, double ode_tol) {
    PathSamples out;
    out.weights = path.weights;
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        const FlowEnd e = flow_to(km, path.points[i], t, ode_tol, true);
        out.points.push_back(e.z);
        const RVec v = e.raw_monodromy * real_from_alpha(path.tangents[i]);
        out.tangents.push_back(complex_from_real(v));
    }
    return out;
}

}  // namespace kspec
