#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "kspec/core.hpp"

namespace kspec {

using OdeRhs = std::function<void(double, const RVec&, RVec&)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_init = 0.0;  // 0 picks a start step from the field
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 2'000'000;
};

// One accepted step with its quartic dense-output polynomial.
struct DenseStep {
    double t0 = 0.0, h = 0.0;
    RVec y0;
    Eigen::Matrix<double, Eigen::Dynamic, 4> q;  // y(t0 + x h) = y0 + h q [x x^2 x^3 x^4]

    RVec eval(double t) const {
        const double x = (t - t0) / h;
        Eigen::Vector4d pw(x, x * x, x * x * x, x * x * x * x);
        return y0 + h * (q * pw);
    }
};

struct OdeSolution {
    std::vector<DenseStep> steps;
    RVec y_end;
    double t_end = 0.0;

    RVec eval(double t) const {
        if (steps.empty()) return y_end;
        auto it = std::upper_bound(steps.begin(), steps.end(), t,
                                   [](double v, const DenseStep& s) { return v < s.t0; });
        const DenseStep& s = it == steps.begin() ? *it : *std::prev(it);
        return s.eval(t);
    }

    std::vector<double> step_sizes() const {
        std::vector<double> h;
        h.reserve(steps.size());
        for (const auto& s : steps) h.push_back(s.h);
        return h;
    }
};

// Called after every accepted step; throwing stops the integration.
using StepObserver = std::function<void(double, const RVec&)>;

// Dormand-Prince 5(4) with the standard quartic continuous extension.
class Dopri5 {
public:
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    // Adaptive integration from t0 to t1 (t1 > t0).
    static OdeSolution integrate(const OdeRhs& f, double t0, const RVec& y0, double t1, const OdeOptions& opt,
                                 const StepObserver& obs = {}) {
        return run(f, t0, y0, t1, opt, nullptr, obs);
    }

    // Re-run a recorded step sequence without error control, so the map
    // y0 -> y(t1) is a fixed smooth function of y0.
    static OdeSolution replay(const OdeRhs& f, double t0, const RVec& y0, const std::vector<double>& hs,
                              const StepObserver& obs = {}) {
        double t1 = t0;
        for (double h : hs) t1 += h;
        return run(f, t0, y0, t1, OdeOptions{}, &hs, obs);
    }

private:
    static OdeSolution run(const OdeRhs& f, double t0, const RVec& y0, double t1, const OdeOptions& opt,
                           const std::vector<double>* fixed, const StepObserver& obs) {
        if (!(t1 >= t0)) throw InputError("integration interval must be increasing");
        const auto n = y0.size();
        OdeSolution sol;
        RVec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), tmp(n);
        double t = t0;
        f(t, y, k1);
        double h = fixed ? 0.0 : opt.h_init;
        if (!fixed && h <= 0.0) {
            const double d0 = scaled_norm(y, y, opt), d1 = scaled_norm(k1, y, opt);
            h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
            h = std::min(h, t1 - t0);
        }
        double err_prev = 1e-4;
        long count = 0;
        std::size_t idx = 0;
        while (t < t1) {
            if (++count > opt.max_steps) throw IntegrationError("step limit exceeded at t=" + std::to_string(t));
            bool last = false;
            if (fixed) {
                if (idx >= fixed->size()) break;
                h = (*fixed)[idx++];
                last = idx == fixed->size();
            } else {
                h = std::min(h, opt.h_max);
                if (t + h >= t1) {
                    h = t1 - t;
                    last = true;
                }
            }
            tmp = y + h * a21 * k1;
            f(t + c2 * h, tmp, k2);
            tmp = y + h * (a31 * k1 + a32 * k2);
            f(t + c3 * h, tmp, k3);
            tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            f(t + c4 * h, tmp, k4);
            tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(t + c5 * h, tmp, k5);
            tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(t + h, tmp, k6);
            ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(t + h, ynew, k7);
            double err = 0.0;
            if (!fixed) {
                tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
                err = scaled_norm(tmp, y.cwiseAbs().cwiseMax(ynew.cwiseAbs()), opt);
                if (!std::isfinite(err)) throw IntegrationError("non-finite state at t=" + std::to_string(t));
                if (err > 1.0) {
                    h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                    if (h < 1e-14 * std::max(1.0, std::abs(t)))
                        throw IntegrationError("step size underflow at t=" + std::to_string(t));
                    continue;
                }
            }
            DenseStep ds;
            ds.t0 = t;
            ds.h = h;
            ds.y0 = y;
            ds.q.resize(n, 4);
            for (int c = 0; c < 4; ++c)
                ds.q.col(c) = P[0][c] * k1 + P[2][c] * k3 + P[3][c] * k4 + P[4][c] * k5 + P[5][c] * k6 +
                              P[6][c] * k7;
            sol.steps.push_back(std::move(ds));
            t = last ? t1 : t + h;
            y = ynew;
            k1 = k7;
            if (obs) obs(t, y);
            if (!fixed) {
                // PI step control
                const double e = std::max(err, 1e-10);
                double fac = 0.9 * std::pow(e, -0.7 / 5) * std::pow(err_prev, 0.4 / 5);
                fac = std::clamp(fac, 0.2, 5.0);
                err_prev = e;
                h *= fac;
            }
        }
        sol.y_end = y;
        sol.t_end = t;
        return sol;
    }

    static double scaled_norm(const RVec& e, const RVec& y, const OdeOptions& opt) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < e.size(); ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y(i));
            s += (e(i) / sc) * (e(i) / sc);
        }
        return std::sqrt(s / static_cast<double>(e.size()));
    }

    static constexpr double P[7][4] = {
        {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0},
        {0.0, 0.0, 0.0, 0.0},
        {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0},
        {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0},
        {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0},
        {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0},
        {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0},
    };
};

}  // namespace kspec
