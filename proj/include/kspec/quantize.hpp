#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kspec/kahler_flow.hpp"

namespace kspec {

enum class SystemKind { fock_truncated, radial_bergman, sphere_spin };

inline std::string to_string(SystemKind k) {
    switch (k) {
        case SystemKind::fock_truncated: return "fock_truncated";
        case SystemKind::radial_bergman: return "radial_bergman";
        case SystemKind::sphere_spin: return "sphere_spin";
    }
    return "unknown";
}

// Toeplitz matrix of H in the orthonormalized monomial basis z^a / |z^a|.
struct QuantizedSystem {
    SystemKind kind = SystemKind::fock_truncated;
    int k = 1;
    int m = 1;
    int cutoff = 0;
    CMat H_matrix;
    bool diagonal = false;
    std::vector<std::vector<int>> exponents;
    std::vector<double> log_norms;  // log of |z^a|^2 in L^2(e^{-k phi} omega^m/m!)
    KahlerModel model;

    int dim() const { return static_cast<int>(exponents.size()); }
    std::vector<double> basis_norms() const {
        std::vector<double> r;
        for (double l : log_norms) r.push_back(std::exp(l));
        return r;
    }
    double hermiticity_residual() const { return max_abs(CMat(H_matrix - H_matrix.adjoint())); }
};

inline double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// All multi-indices of total degree <= N, graded then lexicographic.
inline std::vector<std::vector<int>> multi_indices(int m, int N) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(m, 0);
    for (int deg = 0; deg <= N; ++deg) {
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == m - 1) {
                a[pos] = left;
                out.push_back(a);
                return;
            }
            for (int v = left; v >= 0; --v) {
                a[pos] = v;
                rec(pos + 1, left - v);
            }
        };
        rec(0, deg);
    }
    return out;
}

// Generic assembly: entry = sum_terms c * exp(log_moment(a + q, s) - (log_norm_a + log_norm_b)/2)
// when a + q = p + b.
template <class LogMoment>
void assemble_toeplitz(QuantizedSystem& sys, const ZPoly& H, LogMoment log_moment) {
    const int n = sys.dim();
    const int m = sys.m;
    sys.H_matrix = CMat::Zero(n, n);
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < n; ++i) index[sys.exponents[i]] = i;
    bool diag = true;
    for (int ib = 0; ib < n; ++ib) {
        const auto& b = sys.exponents[ib];
        for (const auto& t : H.terms()) {
            std::vector<int> a(m), aq(m);
            bool ok = true;
            for (int j = 0; j < m; ++j) {
                a[j] = t.p[j] + b[j] - t.q[j];
                if (a[j] < 0) ok = false;
                aq[j] = a[j] + t.q[j];
            }
            if (!ok) continue;
            auto it = index.find(a);
            if (it == index.end()) continue;
            const int ia = it->second;
            const double lm = log_moment(aq, t.s);
            sys.H_matrix(ia, ib) += t.c * std::exp(lm - 0.5 * (sys.log_norms[ia] + sys.log_norms[ib]));
            if (ia != ib) diag = false;
        }
    }
    sys.H_matrix = 0.5 * (sys.H_matrix + sys.H_matrix.adjoint());
    sys.diagonal = diag;
}

// Fock space on C^m truncated to degree <= N; H must be polynomial in (z, zbar).
inline QuantizedSystem build_fock(const KahlerModel& km, int k, int N) {
    if (km.kind != "flat") throw InputError("Fock builder needs the flat potential");
    if (km.H.uses_v()) throw UnsupportedError("Fock builder needs a polynomial Hamiltonian");
    if (k < 1 || N < 0) throw InputError("level and cutoff must be positive");
    QuantizedSystem sys;
    sys.kind = SystemKind::fock_truncated;
    sys.k = k;
    sys.m = km.m;
    sys.cutoff = N;
    sys.model = km;
    sys.exponents = multi_indices(km.m, N);
    // |z^a|^2 = prod_j 2 pi a_j! / k^{a_j + 1}
    auto log_moment = [k](const std::vector<int>& a, int) {
        double s = 0.0;
        for (int aj : a) s += std::log(2 * pi) + std::lgamma(aj + 1.0) - (aj + 1.0) * std::log(static_cast<double>(k));
        return s;
    };
    for (const auto& a : sys.exponents) sys.log_norms.push_back(log_moment(a, 0));
    assemble_toeplitz(sys, km.H, log_moment);
    return sys;
}

inline int fock_cutoff(int k, double max_abs_z) {
    return std::max(static_cast<int>(std::ceil(4.0 * k * max_abs_z * max_abs_z)), 64);
}

enum class RadialScheme { gauss_kronrod, tanh_sinh };

// log of 2 pi int_0^inf u^j e^{-k phi(u)} (phi'(u) + u phi''(u)) du for a radial
// potential phi(u) = u + a2 u^2 + ..., the u-integral being split at the peak of
// the integrand's logarithm.
inline double radial_log_moment(const std::vector<double>& c, int k, int j, RadialScheme scheme) {
    auto phi = [&](double u) {
        double s = 0.0, p = 1.0;
        for (std::size_t i = 0; i < c.size(); ++i, p *= u) s += c[i] * p;
        return s;
    };
    auto dphi = [&](double u) {
        double s = 0.0, p = 1.0;
        for (std::size_t i = 1; i < c.size(); ++i, p *= u) s += i * c[i] * p;
        return s;
    };
    auto d2phi = [&](double u) {
        double s = 0.0, p = 1.0;
        for (std::size_t i = 2; i < c.size(); ++i, p *= u) s += i * (i - 1.0) * c[i] * p;
        return s;
    };
    auto density = [&](double u) { return dphi(u) + u * d2phi(u); };
    // peak of j log u - k phi(u)
    double u = std::max(1e-300, static_cast<double>(j) / k);
    if (j > 0)
        for (int it = 0; it < 100; ++it) {
            const double g = j / u - k * dphi(u);
            const double h = -j / (u * u) - k * d2phi(u);
            const double nu = u - g / h;
            u = nu > 0 ? nu : 0.5 * u;
            if (std::abs(g / h) < 1e-14 * u) break;
        }
    const double peak = u;
    const double L = j > 0 ? j * std::log(peak) - k * phi(peak) : -k * phi(0.0);
    auto f = [&](double x) {
        if (x <= 0.0) return j == 0 ? std::exp(-k * phi(0.0) - L) * density(0.0) : 0.0;
        const double e = j * std::log(x) - k * phi(x) - L;
        return e < -745.0 ? 0.0 : std::exp(e) * density(x);
    };
    double val = 0.0;
    namespace bq = boost::math::quadrature;
    if (scheme == RadialScheme::gauss_kronrod) {
        double err = 0.0;
        const double left = j > 0 ? bq::gauss_kronrod<double, 61>::integrate(f, 0.0, peak, 15, 1e-14, &err) : 0.0;
        const double right =
            bq::gauss_kronrod<double, 61>::integrate(f, peak, std::numeric_limits<double>::infinity(), 15, 1e-14, &err);
        val = left + right;
    } else {
        bq::tanh_sinh<double> ts;
        bq::exp_sinh<double> es;
        const double left = j > 0 ? ts.integrate(f, 0.0, peak) : 0.0;
        auto shifted = [&](double x) { return f(peak + x); };
        const double right = es.integrate(shifted);
        val = left + right;
    }
    if (!(val > 0.0) || !std::isfinite(val)) throw IntegrationError("radial moment quadrature failed");
    return std::log(2 * pi) + L + std::log(val);
}

// Bergman space on C for phi = |z|^2 + sum a_i |z|^{2i}; monomials stay orthogonal.
inline QuantizedSystem build_radial_bergman(const KahlerModel& km, int k, int N,
                                            RadialScheme scheme = RadialScheme::gauss_kronrod) {
    if (km.m != 1) throw UnsupportedError("radial Bergman builder is one-dimensional");
    auto rc = km.potential.radial_coefficients();
    if (!rc || km.log_coeff != 0.0) throw InputError("potential is not radial");
    if (km.H.uses_v()) throw UnsupportedError("radial builder needs a polynomial Hamiltonian");
    std::vector<double> c;
    for (auto x : *rc) c.push_back(x.real());
    if (c.size() < 2 || c[1] <= 0.0) throw InputError("radial potential must start with |z|^2");
    // omega density phi' + u phi'' must stay positive on the quadrature support
    for (int i = 0; i <= 400; ++i) {
        const double u = 1e-2 * i * std::max(1.0, 4.0 * N / k);
        double d = 0.0, p = 1.0;
        for (std::size_t r = 1; r < c.size(); ++r, p *= u) d += r * r * c[r] * p;
        if (d <= 0.0) throw ValidationError("omega is not positive on the radial support", d);
    }
    QuantizedSystem sys;
    sys.kind = SystemKind::radial_bergman;
    sys.k = k;
    sys.m = 1;
    sys.cutoff = N;
    sys.model = km;
    sys.exponents = multi_indices(1, N);
    std::map<int, double> cache;
    auto log_moment = [&](const std::vector<int>& a, int) {
        auto it = cache.find(a[0]);
        if (it != cache.end()) return it->second;
        const double v = radial_log_moment(c, k, a[0], scheme);
        cache[a[0]] = v;
        return v;
    };
    for (const auto& a : sys.exponents) sys.log_norms.push_back(log_moment(a, 0));
    assemble_toeplitz(sys, km.H, log_moment);
    return sys;
}

// H^0(CP^1, O(k)) with basis z^a, a = 0..k, hermitian weight (1 + |z|^2)^{-k}
// and measure 2 dx dy / (1 + |z|^2)^2.
inline QuantizedSystem build_sphere_spin(const CartesianPoly& h, int k) {
    if (cartesian_degree(h) > 3) throw UnsupportedError("sphere Hamiltonians are limited to degree 3");
    if (k < 1) throw InputError("level must be positive");
    const ZPoly H = sphere_hamiltonian(h);
    QuantizedSystem sys;
    sys.kind = SystemKind::sphere_spin;
    sys.k = k;
    sys.m = 1;
    sys.cutoff = k;
    sys.model = fubini_study_model(H);
    sys.exponents = multi_indices(1, k);
    // int |z|^{2n} v^{k+s} omega = 2 pi B(n + 1, k + s + 1 - n)
    auto log_moment = [k](const std::vector<int>& a, int s) {
        const int n = a[0];
        if (k + s + 1 - n <= 0) throw IntegrationError("divergent sphere moment");
        return std::log(2 * pi) + lbeta(n + 1.0, k + s + 1.0 - n);
    };
    for (const auto& a : sys.exponents) sys.log_norms.push_back(log_moment(a, 0));
    assemble_toeplitz(sys, H, log_moment);
    return sys;
}

struct SpectralData {
    std::vector<double> eigenvalues;
    std::vector<double> masses;
    int k = 1;
    CVec z;
    double total_mass = 0.0;
    double bergman_diagonal = 0.0;  // sum over the basis, independent of H
    int clipped = 0;                // negative masses set to zero
    int merged = 0;                 // eigenvalues absorbed into clusters
    double tail_estimate = 0.0;     // relative Bergman deficit (Fock truncation)
    std::string kind;
};

// log |z^a| - log|z^a|_{L^2} - k phi(z)/2, or -inf when z^a vanishes.
inline std::vector<double> log_basis_amplitudes(const QuantizedSystem& sys, const CVec& z, std::vector<double>& args) {
    const double half_kphi = 0.5 * sys.k * sys.model.phi(z);
    std::vector<double> out(sys.dim());
    args.assign(sys.dim(), 0.0);
    for (int i = 0; i < sys.dim(); ++i) {
        double l = -0.5 * sys.log_norms[i] - half_kphi, ar = 0.0;
        for (int j = 0; j < sys.m; ++j) {
            const int a = sys.exponents[i][j];
            if (a == 0) continue;
            if (z(j) == cplx(0.0, 0.0)) {
                l = -std::numeric_limits<double>::infinity();
                break;
            }
            l += a * std::log(std::abs(z(j)));
            ar += a * std::arg(z(j));
        }
        out[i] = l;
        args[i] = ar;
    }
    return out;
}

struct MassOptions {
    double cluster_gap = 1e-10;  // relative to the spectral scale
    double tail_tol = 1e-10;
};

inline SpectralData pointwise_masses(const QuantizedSystem& sys, const CVec& z, const MassOptions& opt = {}) {
    if (z.size() != sys.m) throw DimensionError("base point has the wrong dimension");
    if (z.norm() > sys.model.domain_radius) throw InputError("base point is outside the chart");
    SpectralData sd;
    sd.k = sys.k;
    sd.z = z;
    sd.kind = to_string(sys.kind);
    std::vector<double> args;
    const auto la = log_basis_amplitudes(sys, z, args);
    CVec amp(sys.dim());
    CompensatedSum<double> diag;
    for (int i = 0; i < sys.dim(); ++i) {
        amp(i) = std::isfinite(la[i]) ? std::polar(std::exp(la[i]), args[i]) : cplx(0.0, 0.0);
        diag.add(std::norm(amp(i)));
    }
    sd.bergman_diagonal = diag.value();
    std::vector<std::pair<double, double>> atoms;
    if (sys.diagonal) {
        for (int i = 0; i < sys.dim(); ++i) atoms.emplace_back(sys.H_matrix(i, i).real(), std::norm(amp(i)));
    } else {
        Eigen::SelfAdjointEigenSolver<CMat> es(sys.H_matrix);
        if (es.info() != Eigen::Success) throw Error("eigensolver failed");
        // s_j(z) = sum_a c_{a j} z^a / |z^a|
        const CVec s = es.eigenvectors().transpose() * amp;
        for (int i = 0; i < sys.dim(); ++i) atoms.emplace_back(es.eigenvalues()(i), std::norm(s(i)));
    }
    std::sort(atoms.begin(), atoms.end());
    double scale = 1.0;
    for (const auto& a : atoms) scale = std::max(scale, std::abs(a.first));
    CompensatedSum<double> tot;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        double w = atoms[i].second;
        if (w < 0.0) {
            w = 0.0;
            ++sd.clipped;
        }
        if (!sd.eigenvalues.empty() && atoms[i].first - sd.eigenvalues.back() < opt.cluster_gap * scale) {
            sd.masses.back() += w;
            ++sd.merged;
        } else {
            sd.eigenvalues.push_back(atoms[i].first);
            sd.masses.push_back(w);
        }
        tot.add(w);
    }
    sd.total_mass = tot.value();
    if (sys.kind == SystemKind::fock_truncated) {
        const double exact = std::pow(sys.k / (2 * pi), sys.m);
        sd.tail_estimate = std::max(0.0, 1.0 - sd.bergman_diagonal / exact);
        if (sd.tail_estimate > opt.tail_tol)
            throw TruncationError("Fock cutoff too small for the evaluation point (tail " +
                                      std::to_string(sd.tail_estimate) + ")",
                                  0.0);
    }
    return sd;
}

}  // namespace kspec
