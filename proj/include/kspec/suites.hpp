#pragma once

#include <random>
#include <string>
#include <vector>

#include "kspec/bargmann_fock.hpp"
#include "kspec/symplectic.hpp"

namespace kspec {

// Randomized invariant suites over the symplectic and Fock-space layers.
struct SuiteResult {
    std::string name;
    std::string invariant;  // worst-offending invariant
    int cases = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct AlgebraSuiteOptions {
    int pds_cases = 500;
    int folland_cases = 1000;
    int n_range = 6;
    double sample_scale = 0.4;
    double pds_tol = 1e-9;
    double folland_tol = 1e-12;
    std::vector<int> factorization_k{1, 4, 16};
    std::vector<double> factorization_lambda{0.0, 0.6931471805599453, 1.0};
    double factorization_tol = 1e-6;
    int factorization_order = 40;
    std::vector<int> bpu_k{1, 2, 4, 8};
    double bpu_tol = 1e-5;
    double bpu_exponent_tol = 0.05;
    int bpu_order = 16;
};

namespace detail {
// NaN residuals stick, so a broken case can't be masked by later ones.
inline void note(SuiteResult& r, const std::string& inv, double res) {
    if (std::isnan(res)) {
        r.max_residual = res;
        r.invariant = inv;
        return;
    }
    if (res > r.max_residual || r.invariant.empty()) {
        r.max_residual = std::max(res, r.max_residual);
        r.invariant = inv;
    }
}
inline void close(SuiteResult& r) { r.passed = r.max_residual <= r.tolerance; }
}  // namespace detail

// det P(S^n) against prod cosh(n lambda_j), and P(S) alpha = alpha on the frozen direction.
inline SuiteResult pds_suite(std::mt19937_64& rng, const AlgebraSuiteOptions& o) {
    SuiteResult r{"pds_determinant", "", 0, 0.0, o.pds_tol, false};
    std::uniform_int_distribution<int> pick_m(1, 3);
    std::uniform_int_distribution<int> pick_n(-o.n_range, o.n_range);
    for (int c = 0; c < o.pds_cases; ++c) {
        const int m = pick_m(rng);
        const int n = pick_n(rng);
        const auto s = random_pds_symplectic(m, rng, o.sample_scale, true);
        const SymplecticMap S(s.S, 1e-9);
        Eigen::SelfAdjointEigenSolver<RMat> es(s.S);
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 2 * m);
        std::sort(ev.begin(), ev.end(), std::greater<>());
        double expect = 1.0;
        for (int j = 0; j < m; ++j) expect *= std::cosh(n * std::log(ev[j]));
        const cplx d = complexify(S.power(n)).P.determinant();
        detail::note(r, "det_cosh_product", std::abs(d - expect) / expect);
        const CVec alpha = alpha_from_real(s.invariant);
        const CVec back = complexify(S).P.partialPivLu().solve(alpha);
        detail::note(r, "invariant_fixed", (back - alpha).norm() / alpha.norm());
        ++r.cases;
    }
    detail::close(r);
    return r;
}

// Folland identities and complexify/decomplexify round trip.
inline SuiteResult folland_suite(std::mt19937_64& rng, const AlgebraSuiteOptions& o) {
    SuiteResult r{"folland_round_trip", "", 0, 0.0, o.folland_tol, false};
    std::uniform_int_distribution<int> pick_m(1, 3);
    for (int c = 0; c < o.folland_cases; ++c) {
        const int m = pick_m(rng);
        const RMat S = random_symplectic(m, rng, o.sample_scale);
        const ComplexBlocks b = complexify_raw(S);
        const auto f = folland_residuals(b);
        detail::note(r, "PP*-QQ*=I", f.pp_qq);
        detail::note(r, "PQ^T=QP^T", f.pq_sym);
        detail::note(r, "P*P-Q^TQbar=I", f.pp_qq_t);
        detail::note(r, "P^TQbar=Q*P", f.pq_mixed);
        const RMat back = decomplexify(b, 1e-9);
        detail::note(r, "round_trip", max_abs(RMat(back - S)) / std::max(1.0, max_abs(S)));
        ++r.cases;
    }
    detail::close(r);
    return r;
}

inline RMat hyperbolic_1d(double lambda) {
    RMat S = RMat::Zero(2, 2);
    S(0, 0) = std::exp(lambda);
    S(1, 1) = std::exp(-lambda);
    return S;
}

// Kernel factorization by quadrature, m = 1.
inline SuiteResult factorization_suite(std::mt19937_64& rng, const AlgebraSuiteOptions& o) {
    SuiteResult r{"metaplectic_factorization", "", 0, 0.0, o.factorization_tol, false};
    std::normal_distribution<double> nd(0.0, 0.3);
    for (int k : o.factorization_k)
        for (double lam : o.factorization_lambda) {
            MetaplecticKernelSpec spec{k, complexify_raw(hyperbolic_1d(lam)), std::nullopt};
            CVec zx(1), zy(1);
            zx << cplx(nd(rng), nd(rng));
            zy << cplx(nd(rng), nd(rng));
            const auto rep =
                toep_met_factorization_check(spec, LiftedPoint(zx, nd(rng)), LiftedPoint(zy, nd(rng)), o.factorization_order);
            detail::note(r, "factorization_k" + std::to_string(k), rep.residual);
            ++r.cases;
        }
    detail::close(r);
    return r;
}

struct BpuSuiteResult {
    SuiteResult closed_form;
    double fitted_exponent = 0.0;
    double expected_exponent = 0.0;
    bool exponent_ok = false;
};

// Matrix element against its closed form on hyperbolic(ln 2) + identity (m = 2)
// across the k list; |quadrature| gives the fitted k-exponent.
inline BpuSuiteResult bpu_suite(const AlgebraSuiteOptions& o) {
    BpuSuiteResult out;
    out.closed_form = {"bpu_matrix_element", "", 0, 0.0, o.bpu_tol, false};
    RMat S = RMat::Identity(4, 4);
    const RMat h = hyperbolic_1d(std::log(2.0));
    S(1, 1) = h(0, 0);
    S(3, 3) = h(1, 1);
    const SymplecticMap Sm(S);
    CVec alpha(2);
    alpha << 1.0, 0.0;
    std::vector<double> ks, vals;
    for (int k : o.bpu_k) {
        const auto rep = bpu_matrix_element(Sm, alpha, k, o.bpu_order);
        detail::note(out.closed_form, "closed_form_k" + std::to_string(k), rep.residual);
        ks.push_back(k);
        vals.push_back(std::abs(rep.quadrature));
        ++out.closed_form.cases;
    }
    detail::close(out.closed_form);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto N = static_cast<double>(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double x = std::log(ks[i]), y = std::log(vals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.fitted_exponent = (N * sxy - sx * sy) / (N * sxx - sx * sx);
    out.expected_exponent = -2.5;
    out.exponent_ok = std::abs(out.fitted_exponent - out.expected_exponent) <= o.bpu_exponent_tol;
    return out;
}

}  // namespace kspec
