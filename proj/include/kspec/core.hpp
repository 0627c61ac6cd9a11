#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <limits>
#include <type_traits>

#include <Eigen/Dense>

namespace kspec {

using cplx = std::complex<double>;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct InputError : Error {
    using Error::Error;
};

struct UnsupportedError : Error {
    using Error::Error;
};

// Carries the measured residual so callers can report how far off the input was.
struct ValidationError : Error {
    double residual;
    ValidationError(const std::string& what, double r) : Error(what), residual(r) {}
};

struct SingularityError : Error {
    double condition;
    SingularityError(const std::string& what, double c) : Error(what), condition(c) {}
};

struct AccuracyError : Error {
    using Error::Error;
};

struct IntegrationError : Error {
    using Error::Error;
};

struct TruncationError : Error {
    double exit_time;
    TruncationError(const std::string& what, double t) : Error(what), exit_time(t) {}
};

// Largest absolute entry.
template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

// Argument difference folded into (-pi, pi].
inline double wrap_angle_diff(double d) {
    d = std::remainder(d, 2.0 * pi);
    if (d <= -pi) d += 2.0 * pi;
    return d;
}

// Compensated (Neumaier) accumulator.
template <class T>
struct CompensatedSum {
    T sum{};
    T comp{};

    void add(T x) {
        T t = sum + x;
        if constexpr (std::is_same_v<T, double>) {
            if (std::abs(sum) >= std::abs(x))
                comp += (sum - t) + x;
            else
                comp += (x - t) + sum;
        } else {
            add_part(sum, x, t, comp);
        }
        sum = t;
    }

    T value() const { return sum + comp; }

private:
    static void add_part(const cplx& s, const cplx& x, const cplx& t, cplx& c) {
        auto part = [](double a, double b, double tt) {
            return std::abs(a) >= std::abs(b) ? (a - tt) + b : (b - tt) + a;
        };
        c += cplx(part(s.real(), x.real(), t.real()), part(s.imag(), x.imag(), t.imag()));
    }
};

}  // namespace kspec
