#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "kspec/core.hpp"

namespace kspec {

// Fourier convention: f(x) = int fhat(t) e^{itx} dt, fhat(t) = (1/2pi) int f(x) e^{-itx} dx.

inline double smooth_bump(double s) {
    const double a = 1.0 - s * s;
    return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}

// rho(t) = (chi * chi)(t) / |chi|^2 with chi(s) = bump(2s) on (-1/2, 1/2): even,
// supported in (-1, 1), rho(0) = 1, and rhohat = |chihat|^2 / (2pi |chi|^2) >= 0.
// rhohat and its primitive are tabulated on [0, y_max] and read back by cubic
// Hermite interpolation.
class AutocorrelatedBump {
public:
    struct Options {
        int half_nodes = 1000;   // trapezoid nodes on [0, 1/2] for chi
        double table_step = 0.02;
        double y_max = 800.0;
    };

    explicit AutocorrelatedBump(const Options& o) : opt_(o) { build(); }
    AutocorrelatedBump() : AutocorrelatedBump(Options{}) {}

    static const AutocorrelatedBump& shared() {
        static const AutocorrelatedBump inst;
        return inst;
    }

    double rho(double t) const {
        t = std::abs(t);
        if (t >= 1.0) return 0.0;
        // trapezoid for int chi(s) chi(s - t) ds; both factors vanish to all orders at the ends
        const int n = 4 * opt_.half_nodes;
        const double lo = t - 0.5, hi = 0.5;
        const double h = (hi - lo) / n;
        CompensatedSum<double> acc;
        for (int i = 1; i < n; ++i) {
            const double s = lo + i * h;
            acc.add(smooth_bump(2 * s) * smooth_bump(2 * (s - t)));
        }
        return acc.value() * h / chi_norm2_;
    }

    double rho_hat(double y) const { return interp(std::abs(y), false); }

    // int_{-inf}^y rhohat
    double Theta(double y) const {
        const double a = std::abs(y);
        const double v = a >= opt_.y_max ? 0.5 : interp(a, true) - 0.5;
        return y >= 0 ? 0.5 + v : 0.5 - v;
    }

    // Direct (untabulated) evaluations for checks.
    double rho_hat_direct(double y) const { return eval_direct(std::abs(y)).value; }
    double Theta_direct(double y) const {
        const double v = eval_direct(std::abs(y)).primitive - 0.5;
        return y >= 0 ? 0.5 + v : 0.5 - v;
    }

    // |int rho^2 - 2 pi int rhohat^2|, the second by the band-limited trapezoid on the table.
    double parseval_residual() const { return parseval_residual_; }
    double integral_rho_hat() const { return 2.0 * (prim_.back() - 0.5); }
    double y_max() const { return opt_.y_max; }
    const Options& options() const { return opt_; }

private:
    struct Direct {
        double value, slope, primitive;
    };

    // rhohat(y) = (1/pi) int_0^1 rho(t) cos(ty) dt,
    // int_0^y rhohat = (1/pi) int_0^1 rho(t) sin(ty)/t dt, by trapezoid on rho samples.
    Direct eval_direct(double y) const {
        const int n = static_cast<int>(rho_nodes_.size()) - 1;
        const double h = 1.0 / n;
        const double c1 = std::cos(h * y), s1 = std::sin(h * y);
        double c = 1.0, s = 0.0;
        CompensatedSum<double> v, d, p;
        v.add(0.5 * rho_nodes_[0]);
        p.add(0.5 * rho_nodes_[0] * y);
        for (int i = 1; i <= n; ++i) {
            const double cn = c * c1 - s * s1, sn = s * c1 + c * s1;
            c = cn;
            s = sn;
            const double t = i * h, r = rho_nodes_[i] * (i == n ? 0.5 : 1.0);
            v.add(r * c);
            d.add(-r * t * s);
            p.add(r * s / t);
        }
        return {v.value() * h / pi, d.value() * h / pi, 0.5 + p.value() * h / pi};
    }

    void build() {
        const int M = opt_.half_nodes;
        const double hs = 0.5 / M;
        // chi samples at s = i hs, i = -M..M
        std::vector<double> chi(2 * M + 1);
        for (int i = -M; i <= M; ++i) chi[i + M] = smooth_bump(2 * i * hs);
        double n2 = 0.0;
        for (double c : chi) n2 += c * c;
        chi_norm2_ = n2 * hs;
        // rho at t = l hs, l = 0..2M, by discrete autocorrelation
        rho_nodes_.assign(2 * M + 1, 0.0);
        for (int l = 0; l <= 2 * M; ++l) {
            CompensatedSum<double> acc;
            for (int i = l; i <= 2 * M; ++i) acc.add(chi[i] * chi[i - l]);
            rho_nodes_[l] = acc.value() * hs / chi_norm2_;
        }
        const int nt = static_cast<int>(std::ceil(opt_.y_max / opt_.table_step));
        val_.resize(nt + 1);
        der_.resize(nt + 1);
        prim_.resize(nt + 1);
        for (int i = 0; i <= nt; ++i) {
            const auto d = eval_direct(i * opt_.table_step);
            val_[i] = d.value;
            der_[i] = d.slope;
            prim_[i] = d.primitive;
        }
        // Parseval: int rho^2 dt (trapezoid) vs 2 pi int rhohat^2 (trapezoid, step < pi)
        double a = 0.0;
        for (std::size_t l = 1; l < rho_nodes_.size(); ++l) a += 2.0 * rho_nodes_[l] * rho_nodes_[l];
        a += rho_nodes_[0] * rho_nodes_[0];
        a *= hs;
        double b = 0.0;
        for (int i = 1; i <= nt; ++i) b += 2.0 * val_[i] * val_[i];
        b += val_[0] * val_[0];
        b *= opt_.table_step * 2 * pi;
        parseval_residual_ = std::abs(a - b);
    }

    double interp(double y, bool primitive) const {
        if (y >= opt_.y_max) return primitive ? 1.0 : 0.0;
        const double hh = opt_.table_step;
        const auto i = static_cast<std::size_t>(y / hh);
        const double x = y / hh - i;
        const double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
        const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
        if (primitive)
            return h00 * prim_[i] + h10 * hh * val_[i] + h01 * prim_[i + 1] + h11 * hh * val_[i + 1];
        return h00 * val_[i] + h10 * hh * der_[i] + h01 * val_[i + 1] + h11 * hh * der_[i + 1];
    }

    Options opt_;
    double chi_norm2_ = 0.0;
    std::vector<double> rho_nodes_;
    std::vector<double> val_, der_, prim_;
    double parseval_residual_ = 0.0;
};

// Test functions with their Fourier transforms.
struct TestFunction {
    enum class Kind { bump, gaussian } kind = Kind::bump;
    double scale = 1.0;  // bump: fhat supported in (-scale, scale); gaussian: sigma in x
    const AutocorrelatedBump* bump = nullptr;

    // f(x) = 2 pi eps rhohat(eps x), fhat(t) = rho(t / eps).
    static TestFunction compact(double eps, const AutocorrelatedBump& b = AutocorrelatedBump::shared()) {
        if (!(eps > 0.0)) throw InputError("Fourier support must be positive");
        return {Kind::bump, eps, &b};
    }
    // f(x) = exp(-x^2 / (2 sigma^2)), fhat(t) = sigma / sqrt(2 pi) exp(-sigma^2 t^2 / 2).
    static TestFunction gaussian(double sigma) {
        if (!(sigma > 0.0)) throw InputError("Gaussian width must be positive");
        return {Kind::gaussian, sigma, nullptr};
    }

    double operator()(double x) const {
        if (kind == Kind::gaussian) return std::exp(-0.5 * x * x / (scale * scale));
        return 2 * pi * scale * bump->rho_hat(scale * x);
    }
    double ft(double t) const {
        if (kind == Kind::gaussian) return scale / std::sqrt(2 * pi) * std::exp(-0.5 * scale * scale * t * t);
        return bump->rho(t / scale);
    }
    // fhat vanishes outside (-support, support); infinite for the Gaussian.
    double support() const { return kind == Kind::bump ? scale : std::numeric_limits<double>::infinity(); }
};

}  // namespace kspec
