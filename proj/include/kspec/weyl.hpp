#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kspec/kahler_flow.hpp"
#include "kspec/quantize.hpp"
#include "kspec/test_functions.hpp"

namespace kspec {

// Atoms at k(mu_j - E) with weights Pi_{k,j}(z).
struct WeylMeasure {
    std::vector<double> locations;
    std::vector<double> weights;
    int k = 1;
    CVec z;
    double E = 0.0;
    double total_mass = 0.0;
};

inline WeylMeasure weyl_measure(const SpectralData& sd, double E) {
    WeylMeasure mu;
    mu.k = sd.k;
    mu.z = sd.z;
    mu.E = E;
    CompensatedSum<double> tot;
    for (std::size_t j = 0; j < sd.eigenvalues.size(); ++j) {
        mu.locations.push_back(sd.k * (sd.eigenvalues[j] - E));
        mu.weights.push_back(sd.masses[j]);
        tot.add(sd.masses[j]);
    }
    mu.total_mass = tot.value();
    return mu;
}

template <class F>
cplx smoothed_sum(const WeylMeasure& mu, const F& f) {
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < mu.locations.size(); ++j) acc.add(cplx(f(mu.locations[j])) * mu.weights[j]);
    return acc.value();
}

inline std::vector<cplx> measure_fourier_transform(const WeylMeasure& mu, const std::vector<double>& t_grid) {
    std::vector<cplx> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        if (t == 0.0) {
            out.emplace_back(mu.total_mass, 0.0);
            continue;
        }
        CompensatedSum<cplx> acc;
        for (std::size_t j = 0; j < mu.locations.size(); ++j)
            acc.add(mu.weights[j] * std::polar(1.0, t * mu.locations[j]));
        out.push_back(acc.value());
    }
    return out;
}

enum class Branch { nonperiodic, periodic, off_level };

inline std::string to_string(Branch b) {
    switch (b) {
        case Branch::nonperiodic: return "nonperiodic";
        case Branch::periodic: return "periodic";
        case Branch::off_level: return "off_level";
    }
    return "unknown";
}

struct PredictedExpansion {
    Branch branch = Branch::nonperiodic;
    int m = 1;
    std::optional<double> T;
    double holonomy_angle = 0.0;
    double prefactor_exponent = 0.5;
    std::vector<GcalCoefficient> coefficients;  // n = -n_max..n_max (just n = 0 when nonperiodic)
    int n_max = 0;
    bool summable = false;     // |G_n| has a detected exponential decay
    double decay_rate = 0.0;   // fitted c in |G_n| ~ C e^{-c|n|}
    double tail_bound = std::numeric_limits<double>::infinity();
    Classification classification;
    double G0 = 0.0;
    double xi_norm = 0.0;      // Kahler norm of the Hamilton field at z

    const GcalCoefficient& coefficient(int n) const {
        if (std::abs(n) > n_max) throw InputError("coefficient index beyond the computed range");
        return coefficients[n + n_max];
    }
};

struct ExpansionOptions {
    int n_max = 32;
    int n_cap = 512;
    double tail_tol = 1e-8;
    double level_tol = 1e-9;
};

// Exponential decay fit of |G_n| over n in [n0, n1] (both signs pooled).
inline double fit_decay_rate(const PredictedExpansion& pe, int n0, int n1) {
    std::vector<double> xs, ys;
    for (int n = n0; n <= n1; ++n)
        for (int sgn : {1, -1}) {
            const double v = std::abs(pe.coefficient(sgn * n).value);
            if (v > 0.0) {
                xs.push_back(n);
                ys.push_back(std::log(v));
            }
        }
    const auto N = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return -(N * sxy - sx * sy) / (N * sxx - sx * sx);
}

// Coefficients for a periodic orbit given its frame-adapted monodromy and alpha.
inline PredictedExpansion periodic_expansion(const SymplecticMap& monodromy, const CVec& alpha, double T,
                                             double holonomy, const ExpansionOptions& o = {}) {
    PredictedExpansion pe;
    pe.branch = Branch::periodic;
    pe.m = monodromy.m();
    pe.prefactor_exponent = pe.m - 0.5;
    pe.T = T;
    pe.holonomy_angle = holonomy;
    pe.classification = classify_pds(monodromy);
    pe.xi_norm = std::sqrt(2.0) * alpha.norm();
    int n_max = o.n_max;
    while (true) {
        pe.coefficients = gcal_series(monodromy, alpha, -n_max, n_max);
        pe.n_max = n_max;
        pe.G0 = pe.coefficient(0).value.real();
        const int n0 = std::max(1, n_max / 2);
        const double rate = fit_decay_rate(pe, n0, n_max);
        pe.decay_rate = rate;
        pe.summable = rate > 1e-6;
        if (pe.summable) {
            const double r = std::exp(-rate);
            const double last =
                std::max(std::abs(pe.coefficient(n_max).value), std::abs(pe.coefficient(-n_max).value));
            pe.tail_bound = 2.0 * last * r / (1.0 - r);
        } else {
            pe.tail_bound = std::numeric_limits<double>::infinity();
        }
        if (!pe.summable || pe.tail_bound < o.tail_tol || n_max >= o.n_cap) break;
        n_max = std::min(2 * n_max, o.n_cap);
    }
    return pe;
}

// Branch selection: off the level set the smoothed sums are O(k^-inf); on the
// level a periodic point contributes the full comb, otherwise only n = 0.
inline PredictedExpansion predicted_expansion(const KahlerModel& km, const CVec& z,
                                              const std::optional<PeriodicOrbitData>& orbit, double E,
                                              const ExpansionOptions& o = {}) {
    PredictedExpansion pe;
    pe.m = km.m;
    pe.prefactor_exponent = km.m - 0.5;
    if (std::abs(km.hamiltonian(z) - E) > o.level_tol) {
        pe.branch = Branch::off_level;
        pe.tail_bound = 0.0;
        return pe;
    }
    const CVec xi = hamilton_field_complex(km, z);
    if (xi.norm() == 0.0) throw UnsupportedError("z is a critical point of H");
    const CVec alpha = kahler_frame(km.metric(z)).Finv * xi;
    if (orbit) {
        if ((orbit->z - z).norm() > 1e-12 * std::max(1.0, z.norm()))
            throw InputError("orbit data belongs to a different base point");
        return periodic_expansion(orbit->monodromy, orbit->alpha, orbit->T, orbit->holonomy_angle, o);
    }
    pe.branch = Branch::nonperiodic;
    pe.xi_norm = std::sqrt(2.0) * alpha.norm();
    GcalCoefficient g;
    g.n = 0;
    g.detP = 1.0;
    g.matrix_element = alpha.squaredNorm();
    g.value = 1.0 / alpha.norm();
    pe.coefficients = {g};
    pe.n_max = 0;
    pe.G0 = g.value.real();
    pe.summable = true;
    pe.tail_bound = 0.0;
    return pe;
}

// (k/2pi)^{m-1/2} sum_n fhat(nT) G_n e^{-i k n theta_h}; zero on the off-level branch.
template <class FT>
cplx predicted_smoothed(const PredictedExpansion& pe, int k, const FT& fhat, double support) {
    if (pe.branch == Branch::off_level) return 0.0;
    const double pref = std::pow(k / (2 * pi), pe.prefactor_exponent);
    if (pe.branch == Branch::nonperiodic) return pref * fhat(0.0) * pe.G0;
    CompensatedSum<cplx> acc;
    for (int n = -pe.n_max; n <= pe.n_max; ++n) {
        const double t = n * *pe.T;
        if (std::abs(t) >= support) continue;
        const auto& g = pe.coefficient(n);
        acc.add(fhat(t) * g.value * std::polar(1.0, -static_cast<double>(k) * n * pe.holonomy_angle));
    }
    return pref * acc.value();
}

inline cplx predicted_smoothed(const PredictedExpansion& pe, int k, const TestFunction& f) {
    return predicted_smoothed(pe, k, [&](double t) { return f.ft(t); }, f.support());
}

struct QSamples {
    std::vector<double> s;
    std::vector<cplx> values;
    int n_max = 0;
    double tail_bound = 0.0;
    bool warning = false;  // tail above tolerance
};

// Q(s) = (2pi)^{-1} sum_{|n| <= N} e^{-inTs} e^{-iknθ_h} G_n.
inline cplx q_partial_sum(const PredictedExpansion& pe, int k, double s, int N) {
    CompensatedSum<cplx> acc;
    for (int n = -N; n <= N; ++n) {
        const auto& g = pe.coefficient(n);
        acc.add(g.value * std::polar(1.0, -n * (*pe.T * s + k * pe.holonomy_angle)));
    }
    return acc.value() / (2 * pi);
}

inline QSamples q_function(const PredictedExpansion& pe, int k, const std::vector<double>& s_grid,
                           double tail_tol = 1e-8) {
    if (pe.branch != Branch::periodic) throw InputError("Q-function needs the periodic branch");
    QSamples q;
    q.s = s_grid;
    q.n_max = pe.n_max;
    q.tail_bound = pe.tail_bound / (2 * pi);
    q.warning = !(q.tail_bound < tail_tol);
    for (double s : s_grid) q.values.push_back(q_partial_sum(pe, k, s, pe.n_max));
    return q;
}

// nu_k(a, b) = int_a^b Q. Summable coefficients integrate termwise; for
// constant |G_n| (identity monodromy) Poisson summation turns Q into a comb of
// point masses G_0/T at s_j = (2 pi j - k θ_h)/T.
inline double nu_interval(const PredictedExpansion& pe, int k, double a, double b) {
    if (a > b) throw InputError("interval endpoints out of order");
    if (pe.branch == Branch::nonperiodic) return pe.G0 * (b - a);
    if (pe.branch == Branch::off_level) return 0.0;
    const double T = *pe.T;
    if (pe.summable) {
        CompensatedSum<cplx> acc;
        acc.add(pe.coefficient(0).value * (b - a));
        for (int n = 1; n <= pe.n_max; ++n)
            for (int sg : {1, -1}) {
                const int nn = sg * n;
                const cplx ph = std::polar(1.0, -static_cast<double>(k) * nn * pe.holonomy_angle);
                const cplx integral = (std::polar(1.0, -nn * T * b) - std::polar(1.0, -nn * T * a)) / (-I_unit * (nn * T));
                acc.add(pe.coefficient(nn).value * ph * integral);
            }
        return acc.value().real() / (2 * pi);
    }
    if (pe.classification.kind != SymplecticClass::identity)
        throw UnsupportedError("non-summable coefficients without identity monodromy");
    const double shift = k * pe.holonomy_angle;
    const auto j_lo = static_cast<long>(std::ceil((a * T + shift) / (2 * pi) - 1e-12));
    const auto j_hi = static_cast<long>(std::floor((b * T + shift) / (2 * pi) + 1e-12));
    const long count = std::max(0L, j_hi - j_lo + 1);
    return pe.G0 / T * static_cast<double>(count);
}

struct ComparisonReport {
    std::vector<int> k_values;
    std::vector<double> empirical;
    std::vector<double> predicted;
    std::vector<double> ratios;
    double fitted_exponent = 0.0;
    double expected_exponent = 0.5;
    double ratio_spread = 0.0;  // max/min - 1
    std::string branch;
};

inline ComparisonReport compare(const std::vector<int>& ks, const std::vector<double>& empirical,
                                const std::vector<double>& predicted, double expected_exponent,
                                const std::string& branch = "") {
    if (ks.size() < 3) throw InputError("comparison needs at least three levels");
    if (empirical.size() != ks.size() || predicted.size() != ks.size()) throw DimensionError("ladder size mismatch");
    ComparisonReport r;
    r.k_values = ks;
    r.empirical = empirical;
    r.predicted = predicted;
    r.expected_exponent = expected_exponent;
    r.branch = branch;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        r.ratios.push_back(empirical[i] / predicted[i]);
        x.push_back(ks[i]);
        y.push_back(std::abs(empirical[i]));
    }
    r.fitted_exponent = loglog_slope(x, y);
    const auto [mn, mx] = std::minmax_element(r.ratios.begin(), r.ratios.end());
    r.ratio_spread = *mx / *mn - 1.0;
    return r;
}

}  // namespace kspec
