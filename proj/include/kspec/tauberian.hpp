#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <vector>

#include "kspec/test_functions.hpp"
#include "kspec/weyl.hpp"

namespace kspec {

// theta_T(x) = T rhohat(T x), whose Fourier transform rho(t / T) / (2 pi) is supported in (-T, T).
struct Mollifier {
    double T = 1.0;
    const AutocorrelatedBump* bump = nullptr;
    double delta0 = 0.0;  // rhohat >= delta0 on [-eps0, eps0]
    double eps0 = 0.0;
    double parseval_residual = 0.0;
    double mass_residual = 0.0;  // |int theta_T - 1|
    std::shared_ptr<const AutocorrelatedBump> owned;  // set when the grid had to be refined

    double theta(double x) const { return T * bump->rho_hat(T * x); }
    double Theta(double x) const { return bump->Theta(T * x); }  // int_{-inf}^x theta_T
    double rho(double t) const { return bump->rho(t / T); }
};

struct MollifierOptions {
    double eps0 = 1.0;
    double parseval_tol = 1e-9;
};

inline Mollifier build_mollifier(double T, const MollifierOptions& o = {},
                                 const AutocorrelatedBump* bump = &AutocorrelatedBump::shared()) {
    if (!(T > 0.0)) throw InputError("mollifier scale must be positive");
    Mollifier mol;
    if (bump->parseval_residual() >= o.parseval_tol) {
        // one refinement with doubled resolution
        auto opt = bump->options();
        opt.half_nodes *= 2;
        opt.table_step *= 0.5;
        mol.owned = std::make_shared<const AutocorrelatedBump>(opt);
        bump = mol.owned.get();
        if (bump->parseval_residual() >= o.parseval_tol)
            throw AccuracyError("rhohat grid still aliases after refinement");
    }
    mol.T = T;
    mol.bump = bump;
    mol.eps0 = o.eps0;
    mol.parseval_residual = bump->parseval_residual();
    mol.mass_residual = std::abs(bump->integral_rho_hat() - 1.0);
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) d = std::min(d, bump->rho_hat(o.eps0 * i / 1000.0));
    mol.delta0 = d;
    if (!(d > 0.0)) throw AccuracyError("rhohat has no positive floor on [-eps0, eps0]");
    return mol;
}

// sigma(x) = mu(-inf, x]
struct CountingFunction {
    std::vector<double> jumps;       // sorted atom locations
    std::vector<double> weights;
    std::vector<double> cumulative;  // sigma at each jump
    double total_mass = 0.0;

    double operator()(double x) const {
        const auto it = std::upper_bound(jumps.begin(), jumps.end(), x);
        if (it == jumps.begin()) return 0.0;
        return cumulative[static_cast<std::size_t>(it - jumps.begin()) - 1];
    }
};

inline CountingFunction counting_function(const WeylMeasure& mu) {
    std::vector<std::size_t> idx(mu.locations.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return mu.locations[a] < mu.locations[b]; });
    CountingFunction c;
    CompensatedSum<double> acc;
    for (auto i : idx) {
        c.jumps.push_back(mu.locations[i]);
        c.weights.push_back(mu.weights[i]);
        acc.add(mu.weights[i]);
        c.cumulative.push_back(acc.value());
    }
    c.total_mass = acc.value();
    return c;
}

struct SmoothedCounting {
    std::vector<double> x;
    std::vector<double> value;       // (sigma * theta_T)(x)
    std::vector<double> derivative;  // (mu * theta_T)(x)
};

inline SmoothedCounting convolve_counting(const CountingFunction& sigma, const Mollifier& mol,
                                          const std::vector<double>& x_grid) {
    SmoothedCounting out;
    out.x = x_grid;
    const double reach = mol.bump->y_max() / mol.T;
    for (double x : x_grid) {
        CompensatedSum<double> v, d;
        // atoms left of x - reach contribute their full weight to the value and nothing to the slope
        const auto lo = std::lower_bound(sigma.jumps.begin(), sigma.jumps.end(), x - reach);
        const auto hi = std::upper_bound(sigma.jumps.begin(), sigma.jumps.end(), x + reach);
        const auto i0 = static_cast<std::size_t>(lo - sigma.jumps.begin());
        const auto i1 = static_cast<std::size_t>(hi - sigma.jumps.begin());
        if (i0 > 0) v.add(sigma.cumulative[i0 - 1]);
        for (std::size_t i = i0; i < i1; ++i) {
            v.add(sigma.weights[i] * mol.Theta(x - sigma.jumps[i]));
            d.add(sigma.weights[i] * mol.theta(x - sigma.jumps[i]));
        }
        out.value.push_back(v.value());
        out.derivative.push_back(d.value());
    }
    return out;
}

// Closed interval: atoms on either endpoint count fully.
inline double sharp_interval_count(const WeylMeasure& mu, double a, double b) {
    if (a > b) throw InputError("interval endpoints out of order");
    CompensatedSum<double> acc;
    for (std::size_t j = 0; j < mu.locations.size(); ++j)
        if (mu.locations[j] >= a && mu.locations[j] <= b) acc.add(mu.weights[j]);
    return acc.value();
}

// ((sigma * theta_T)(b) - (sigma * theta_T)(a))
inline double smoothed_interval_count(const WeylMeasure& mu, const Mollifier& mol, double a, double b) {
    if (a > b) throw InputError("interval endpoints out of order");
    CompensatedSum<double> acc;
    for (std::size_t j = 0; j < mu.locations.size(); ++j)
        acc.add(mu.weights[j] * (mol.Theta(b - mu.locations[j]) - mol.Theta(a - mu.locations[j])));
    return acc.value();
}

// Drops atoms with |lambda| > c sqrt(k) log k; returns the dropped mass.
inline double concentrate(WeylMeasure& mu, double c = 10.0) {
    const double cut = c * std::sqrt(static_cast<double>(mu.k)) * std::log(std::max(2.0, static_cast<double>(mu.k)));
    WeylMeasure kept = mu;
    kept.locations.clear();
    kept.weights.clear();
    double dropped = 0.0;
    for (std::size_t j = 0; j < mu.locations.size(); ++j) {
        if (std::abs(mu.locations[j]) > cut) {
            dropped += mu.weights[j];
            continue;
        }
        kept.locations.push_back(mu.locations[j]);
        kept.weights.push_back(mu.weights[j]);
    }
    mu = kept;
    return dropped;
}

struct TwoTermRow {
    int k = 0;
    double sharp = 0.0;
    double nu = 0.0;
    double predicted = 0.0;  // (k/2pi)^{m-1/2} nu_k(a, b)
    double ratio = 0.0;
};

struct TwoTermReport {
    double a = 0.0, b = 0.0;
    std::vector<TwoTermRow> rows;
    bool monotone_to_one = false;  // |ratio - 1| nonincreasing along the ladder
    double final_deviation = 0.0;
};

inline TwoTermReport two_term_verify(const std::vector<WeylMeasure>& ladder, const PredictedExpansion& pe, double a,
                                     double b, double noise = 1e-12) {
    if (ladder.size() < 3) throw InputError("two-term check needs at least three levels");
    if (pe.branch == Branch::off_level) throw InputError("two-term law needs an on-level prediction");
    TwoTermReport r;
    r.a = a;
    r.b = b;
    for (const auto& mu : ladder) {
        TwoTermRow row;
        row.k = mu.k;
        row.sharp = sharp_interval_count(mu, a, b);
        row.nu = nu_interval(pe, mu.k, a, b);
        row.predicted = std::pow(mu.k / (2 * pi), pe.prefactor_exponent) * row.nu;
        row.ratio = row.sharp / row.predicted;
        r.rows.push_back(row);
    }
    r.monotone_to_one = true;
    for (std::size_t i = 1; i < r.rows.size(); ++i)
        if (std::abs(r.rows[i].ratio - 1.0) > std::abs(r.rows[i - 1].ratio - 1.0) + noise) r.monotone_to_one = false;
    r.final_deviation = std::abs(r.rows.back().ratio - 1.0);
    return r;
}

struct GapScaling {
    std::vector<double> T;
    std::vector<double> gap;  // mean over window shifts of |sharp - smoothed|
    double slope = 0.0;       // log-log in T; -1 expected
};

// Window [a + s, b + s] for s on a uniform grid of [0, shift_span).
inline GapScaling gap_scaling(const WeylMeasure& mu, double a, double b, const std::vector<double>& Ts,
                              double shift_span = 2.0, int shifts = 200) {
    GapScaling g;
    g.T = Ts;
    for (double T : Ts) {
        const Mollifier mol = build_mollifier(T);
        CompensatedSum<double> acc;
        for (int i = 0; i < shifts; ++i) {
            const double s = shift_span * i / shifts;
            acc.add(std::abs(sharp_interval_count(mu, a + s, b + s) - smoothed_interval_count(mu, mol, a + s, b + s)));
        }
        g.gap.push_back(acc.value() / shifts);
    }
    g.slope = loglog_slope(g.T, g.gap);
    return g;
}

// max over |tau| <= eps0/T of |mu([a,b] - tau) - mu([a,b])| divided by
// sup(mu * theta_T) / (T delta0); at most 1 when the increment bound holds.
inline double increment_bound_ratio(const WeylMeasure& mu, const Mollifier& mol, double a, double b,
                                     int taus = 101) {
    const auto sig = counting_function(mu);
    std::vector<double> grid;
    const double lo = std::min(a, b) - 2.0 * mol.eps0 / mol.T, hi = std::max(a, b) + 2.0 * mol.eps0 / mol.T;
    for (int i = 0; i <= 2000; ++i) grid.push_back(lo + (hi - lo) * i / 2000.0);
    const auto sm = convolve_counting(sig, mol, grid);
    const double sup = *std::max_element(sm.derivative.begin(), sm.derivative.end());
    const double bound = sup / (mol.T * mol.delta0);
    const double base = sharp_interval_count(mu, a, b);
    double worst = 0.0;
    for (int i = 0; i < taus; ++i) {
        const double tau = mol.eps0 / mol.T * (2.0 * i / (taus - 1) - 1.0);
        worst = std::max(worst, std::abs(sharp_interval_count(mu, a - tau, b - tau) - base));
    }
    return worst / bound;
}

}  // namespace kspec
