// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "kspec/suites.hpp"
#include "kspec/tauberian.hpp"

using namespace kspec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

CVec c1(cplx a) {
    CVec v(1);
    v << a;
    return v;
}

// Orthonormal basis of the +i eigenspace of J0, i.e. the range of (I - iJ)/2.
CMat holomorphic_basis(int m) {
    CMat B = CMat::Zero(2 * m, m);
    for (int j = 0; j < m; ++j) {
        B(j, j) = 1.0 / std::sqrt(2.0);
        B(m + j, j) = -I_unit / std::sqrt(2.0);
    }
    return B;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) { return loglog_slope(x, y); }

// 1. determinant and fixed-direction identities for compressed positive symmetric maps
Outcome criterion1() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> pick_m(1, 3), pick_n(-6, 6);
    double det_err = 0.0, fix_err = 0.0;
    for (int c = 0; c < 500; ++c) {
        const int m = pick_m(rng), n = pick_n(rng);
        const auto s = random_pds_symplectic(m, rng, 0.4, true);
        Eigen::SelfAdjointEigenSolver<RMat> es(s.S);
        RMat Sn = RMat::Identity(2 * m, 2 * m);
        const RMat step = n >= 0 ? s.S : RMat(es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                                              es.eigenvectors().transpose());
        for (int i = 0; i < std::abs(n); ++i) Sn = Sn * step;
        const CMat B = holomorphic_basis(m);
        const cplx d = (B.adjoint() * Sn.cast<cplx>() * B).determinant();
        double prod = 1.0;
        for (int j = m; j < 2 * m; ++j) prod *= std::cosh(n * std::log(es.eigenvalues()(j)));
        det_err = std::max(det_err, std::abs(d - prod) / prod);
        const CMat M = B.adjoint() * s.S.cast<cplx>() * B;
        const CVec a = B.adjoint() * s.invariant.cast<cplx>();
        fix_err = std::max(fix_err, (M.partialPivLu().solve(a) - a).norm() / a.norm());
    }
    return {det_err <= 1e-9 && fix_err <= 1e-9,
            "500 maps, max det rel err " + num(det_err) + ", fixed-direction residual " + num(fix_err)};
}

// 2. round trip and the four block identities
Outcome criterion2() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> pick_m(1, 3);
    double worst = 0.0;
    for (int c = 0; c < 1000; ++c) {
        const int m = pick_m(rng);
        const RMat S = random_symplectic(m, rng, 0.4);
        const auto b = complexify_raw(S);
        const CMat id = CMat::Identity(m, m);
        const double sc = std::max(1.0, max_abs(b.P) * max_abs(b.P) * m);
        const double r1 = max_abs(CMat(b.P * b.P.adjoint() - b.Q * b.Q.adjoint() - id)) / sc;
        const double r2 = max_abs(CMat(b.P * b.Q.transpose() - b.Q * b.P.transpose())) / sc;
        const double r3 = max_abs(CMat(b.P.adjoint() * b.P - b.Q.transpose() * b.Q.conjugate() - id)) / sc;
        const double r4 = max_abs(CMat(b.P.transpose() * b.Q.conjugate() - b.Q.adjoint() * b.P)) / sc;
        const double rt = max_abs(RMat(decomplexify(b, 1e-9) - S)) / std::max(1.0, max_abs(S));
        worst = std::max({worst, r1, r2, r3, r4, rt});
    }
    return {worst <= 1e-12, "1000 maps, max residual " + num(worst)};
}

// 3. kernel factorization and matrix element by quadrature
Outcome criterion3() {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> nd(0.0, 0.3);
    double fact = 0.0;
    for (int k : {1, 4, 16})
        for (double lam : {0.0, std::log(2.0), 1.0}) {
            RMat S = RMat::Zero(2, 2);
            S(0, 0) = std::exp(lam);
            S(1, 1) = std::exp(-lam);
            const MetaplecticKernelSpec spec{k, complexify_raw(S), std::nullopt};
            const LiftedPoint x(c1({nd(rng), nd(rng)}), nd(rng)), y(c1({nd(rng), nd(rng)}), nd(rng));
            fact = std::max(fact, toep_met_factorization_check(spec, x, y, 40).residual);
        }
    AlgebraSuiteOptions o;
    const auto bpu = bpu_suite(o);
    const bool ok = fact <= 1e-6 && bpu.closed_form.max_residual <= 1e-5 &&
                    std::abs(bpu.fitted_exponent - bpu.expected_exponent) <= 0.05;
    return {ok, "factorization residual " + num(fact) + ", matrix element residual " +
                    num(bpu.closed_form.max_residual) + ", k-exponent " + num(bpu.fitted_exponent) + " (expect " +
                    num(bpu.expected_exponent) + ")"};
}

// 4. linear flow, lift cocycle, monodromy, cubic vanishing of the holonomy defect
Outcome criterion4() {
    const auto lin = flat_model(1, ZPoly::z(1, 0) + ZPoly::zbar(1, 0));
    const CVec z0 = c1({0.3, 0.4});
    const auto tr = flow(lin, z0, {0.5, 1.0, 2.0, 4.0}, 1e-12);
    double lin_err = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        lin_err = std::max(lin_err, std::abs(tr.base_points[i](0) - (z0(0) - I_unit * t)));
        lin_err = std::max(lin_err, std::abs(tr.theta_hat[i] + t * z0(0).real()));
        lin_err = std::max(lin_err, std::abs(tr.theta_h[i] - t * z0(0).real()));
    }

    const ZPoly z4 = ZPoly::z(1, 0) * ZPoly::z(1, 0) * ZPoly::z(1, 0) * ZPoly::z(1, 0);
    const ZPoly zb4 = ZPoly::zbar(1, 0) * ZPoly::zbar(1, 0) * ZPoly::zbar(1, 0) * ZPoly::zbar(1, 0);
    const auto km = radial_model({0.05}, ZPoly::norm2(1) + cplx(0.05) * (z4 + zb4));
    const CVec z = c1(0.5);
    const double s = 1.3, t = 2.1;
    const auto a = flow_to(km, z, s, 1e-12);
    const auto b = flow_to(km, a.z, t, 1e-12);
    const auto ab = flow_to(km, z, s + t, 1e-12);
    const double cocycle = std::max(std::abs(ab.theta_h - a.theta_h - b.theta_h),
                                    std::abs(ab.theta_hat - a.theta_hat - b.theta_hat));
    const auto traj = flow(km, z, {1.0, 3.0, 6.0}, 1e-11);
    double symp = 0.0;
    for (double r : traj.symplectic_residual) symp = std::max(symp, r);
    const auto orbit = find_period(km, z, 12.0, 1e-9);
    if (!orbit) return {false, "no period found on the anharmonic model"};
    const auto fit = holonomy_hessian_check(km, *orbit, {1e-3, 3e-3, 1e-2, 3e-2, 1e-1});
    const bool ok = lin_err <= 1e-10 && cocycle <= 1e-8 && symp <= 1e-8 && fit.slope >= 2.9;
    return {ok, "linear flow err " + num(lin_err) + ", cocycle " + num(cocycle) + ", symplectic " + num(symp) +
                    ", holonomy slope " + num(fit.slope)};
}

// 5. elliptic smoothed law on the harmonic oscillator
Outcome criterion5() {
    const auto km = flat_model(1, ZPoly::norm2(1));
    const double r = 3.0;
    const CVec z = c1(r);
    const double E = r * r;
    const auto f = TestFunction::compact(1.0);  // support below the period 2 pi
    const auto orbit = find_period(km, z, 8.0, 1e-9);
    if (!orbit || !(orbit->T > f.support())) return {false, "orbit period not resolved"};
    const auto pe = predicted_expansion(km, z, orbit, E);
    const std::vector<int> ks{64, 128, 256, 512};
    std::vector<double> emp, pred;
    SpectralData last;
    for (int k : ks) {
        last = pointwise_masses(build_fock(km, k, fock_cutoff(k, r)), z);
        emp.push_back(smoothed_sum(weyl_measure(last, E), f).real());
        pred.push_back(predicted_smoothed(pe, k, f).real());
    }
    const auto rep = compare(ks, emp, pred, 0.5);
    // energy offsets E + a / sqrt(k) at the top level against exp(-a^2 / |xi|^2)
    const double xn = pe.xi_norm, k = ks.back();
    const double s0 = smoothed_sum(weyl_measure(last, E), f).real();
    double worst = 0.0;
    for (int i = -20; i <= 20; ++i) {
        const double a = 2.0 * xn * i / 20.0;
        const double sv = smoothed_sum(weyl_measure(last, E + a / std::sqrt(k)), f).real();
        worst = std::max(worst, std::abs(sv / (s0 * std::exp(-a * a / (xn * xn))) - 1.0));
    }
    const bool ok = std::abs(rep.fitted_exponent - 0.5) <= 0.1 && rep.ratio_spread <= 0.05 && worst <= 0.10;
    return {ok, "exponent " + num(rep.fitted_exponent) + ", ratio spread " + num(rep.ratio_spread) +
                    ", profile sup deviation " + num(worst) + " at k=512, |z|=3"};
}

WeylMeasure sphere_measure(int k, const CVec& z) {
    return weyl_measure(pointwise_masses(build_sphere_spin({{{0, 0, 1}, 1.0}}, k), z), 0.0);
}

// 6. holonomy-phase comb on the equator, rapid decay off the level
Outcome criterion6() {
    const auto sc = sphere_coordinates();
    const auto km = fubini_study_model(sc.x3);
    const CVec z = c1(1.0);
    const auto orbit = find_period(km, z, 5.0, 1e-9);
    if (!orbit) return {false, "equatorial period not found"};
    const auto pe = predicted_expansion(km, z, orbit, 0.0);
    const auto f = TestFunction::compact(4 * pi);  // n T inside the support for |n| <= 3
    const std::vector<int> ks{64, 127, 128, 255, 256, 511, 512};
    std::vector<double> ratio;
    for (int k : ks) {
        const cplx e = smoothed_sum(sphere_measure(k, z), f);
        const cplx p = predicted_smoothed(pe, k, f);
        ratio.push_back(e.real() / p.real());
    }
    double worst = 0.0;
    for (double q : ratio) worst = std::max(worst, std::abs(q / ratio.back() - 1.0));

    const CVec zo = c1(std::sqrt(2.0 / 3.0));  // x3 = 0.2
    const auto off = predicted_expansion(km, zo, std::nullopt, 0.0);
    std::vector<double> kx, mag;
    for (int k : {128, 256, 512, 1024}) {
        kx.push_back(k);
        mag.push_back(std::abs(smoothed_sum(sphere_measure(k, zo), f)));
    }
    const double slope = fit_slope(kx, mag);
    const bool ok = worst <= 0.10 && off.branch == Branch::off_level && slope < -4.0;
    return {ok, "comb deviation " + num(worst) + " (constant " + num(ratio.back()) + " at k=512), off-level slope " +
                    num(slope)};
}

// 7. sharp two-term counts and the smoothed-vs-sharp gap
Outcome criterion7() {
    const auto sc = sphere_coordinates();
    const auto km = fubini_study_model(sc.x3);
    const CVec z = c1(1.0);
    const auto orbit = find_period(km, z, 5.0, 1e-9);
    if (!orbit) return {false, "equatorial period not found"};
    const auto pe = predicted_expansion(km, z, orbit, 0.0);
    std::vector<WeylMeasure> ladder;
    for (int k : {64, 128, 256, 512, 1024}) ladder.push_back(sphere_measure(k, z));
    const auto tt = two_term_verify(ladder, pe, -3.5, 3.5);
    const auto g = gap_scaling(ladder[2], -3.5, 3.5, {5.0, 10.0, 20.0, 40.0});
    const bool ok = tt.monotone_to_one && tt.final_deviation < std::abs(tt.rows.front().ratio - 1.0) &&
                    std::abs(g.slope + 1.0) <= 0.2;
    return {ok, "ratios " + num(tt.rows.front().ratio) + " -> " + num(tt.rows.back().ratio) +
                    (tt.monotone_to_one ? " monotone" : " not monotone") + ", gap slope " + num(g.slope)};
}

// 8. strong hyperbolic coefficients and the Q-function
Outcome criterion8() {
    const double lam = std::log(2.0);
    RMat S = RMat::Identity(4, 4);
    S(1, 1) = std::exp(lam);
    S(3, 3) = std::exp(-lam);
    CVec a(2);
    a << 1.0, 0.0;
    ExpansionOptions o;
    o.n_cap = 64;
    const auto pe = periodic_expansion(SymplecticMap(S), a, 1.0, 0.0, o);
    const double rate = fit_decay_rate(pe, 8, pe.n_max);
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(-pi + 2 * pi * i / 400.0);
    // sup-norm differences of successive partial sums
    double prev = std::numeric_limits<double>::infinity(), last = 0.0;
    bool decreasing = true;
    for (int N = 8; N + 8 <= pe.n_max; N += 8) {
        double d = 0.0;
        for (double s : grid) d = std::max(d, std::abs(q_partial_sum(pe, 3, s, N + 8) - q_partial_sum(pe, 3, s, N)));
        if (d > prev) decreasing = false;
        prev = last = d;
    }
    const bool ok = std::abs(rate / (0.5 * lam) - 1.0) <= 0.10 && pe.tail_bound < 1e-8 && pe.n_max <= 64 &&
                    decreasing && last < 1e-8;
    return {ok, "decay rate " + num(rate) + " vs " + num(0.5 * lam) + ", tail " + num(pe.tail_bound) + " at n_max " +
                    std::to_string(pe.n_max) + ", last sup increment " + num(last)};
}

// 9. diagonal Bergman kernel at the origin of a perturbed radial potential
Outcome criterion9() {
    const auto km = radial_model({0.1}, ZPoly::norm2(1));
    std::vector<double> c;
    for (int k : {16, 32, 64, 128}) {
        const auto sys = build_radial_bergman(km, k, 8);
        const double P0 = std::exp(-sys.log_norms[0]);
        c.push_back((P0 / (k / (2 * pi)) - 1.0) * k);
    }
    double mean = 0.0;
    for (double v : c) mean += v / c.size();
    double dev = 0.0;
    for (double v : c) dev = std::max(dev, std::abs(v / mean - 1.0));
    return {dev <= 0.10, "1/k coefficients " + num(c[0]) + ", " + num(c[1]) + ", " + num(c[2]) + ", " + num(c[3]) +
                             " (max deviation from mean " + num(dev) + ")"};
}

// 10. negative controls
Outcome criterion10() {
    RMat bad(2, 2);
    bad << 1.0, 0.5, 0.0, 1.2;
    bool rejected = false;
    try {
        SymplecticMap s(bad);
    } catch (const ValidationError&) {
        rejected = true;
    }
    const auto sc = sphere_coordinates();
    const auto km = fubini_study_model(sc.x3);
    const auto off = predicted_expansion(km, c1(std::sqrt(2.0 / 3.0)), std::nullopt, 0.0);
    const bool off_flag = off.branch == Branch::off_level && off.tail_bound == 0.0 &&
                          predicted_smoothed(off, 256, TestFunction::compact(1.0)) == cplx(0.0);
    // windows ending in consecutive gaps differ by exactly the atom between them
    const auto mu = sphere_measure(64, c1(1.0));
    std::vector<std::size_t> idx(mu.locations.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return mu.locations[i] < mu.locations[j]; });
    const std::size_t mid = idx.size() / 2;
    const double gap1 = 0.5 * (mu.locations[idx[mid]] + mu.locations[idx[mid + 1]]);
    const double gap2 = 0.5 * (mu.locations[idx[mid + 1]] + mu.locations[idx[mid + 2]]);
    const double a = mu.locations[idx[mid - 3]] - 0.5;
    const double jump = sharp_interval_count(mu, a, gap2) - sharp_interval_count(mu, a, gap1);
    const double atom = mu.weights[idx[mid + 1]];
    const bool exact = jump == atom || std::abs(jump - atom) <= 4 * std::numeric_limits<double>::epsilon() * mu.total_mass;
    return {rejected && off_flag && exact, std::string("non-symplectic ") + (rejected ? "rejected" : "accepted") +
                                               ", off-level flag " + (off_flag ? "set" : "missing") +
                                               ", gap shift jump " + num(jump) + " vs atom " + num(atom)};
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<Outcome()> run;
        double budget_s;  // wall-clock limit, 0 for none
    };
    const std::vector<Criterion> criteria = {
        {"symplectic identity suite", criterion1, 10.0}, {"block identities and round trip", criterion2, 5.0},
        {"kernel factorization", criterion3, 120.0},     {"flow and holonomy", criterion4, 0.0},
        {"elliptic smoothed law", criterion5, 0.0},      {"periodic comb", criterion6, 0.0},
        {"two-term sharp law", criterion7, 0.0},         {"hyperbolic Q-function", criterion8, 0.0},
        {"Bergman kernel scaling", criterion9, 0.0},     {"negative controls", criterion10, 0.0},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].budget_s > 0.0 && secs > criteria[i].budget_s) {
            o.pass = false;
            o.detail += ", over the " + num(criteria[i].budget_s) + " s budget";
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2zu %s: %s; %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
