#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>
#include <algorithm>

#include "kspec/core.hpp"

namespace kspec {

// Finite sums of c z^p zbar^q v^s with v = 1/(1 + |z|^2). The v factor lets the
// same type carry Fubini-Study data on the affine chart of CP^1.
struct ZTerm {
    cplx c;
    std::vector<int> p;
    std::vector<int> q;
    int s = 0;
};

class ZPoly {
public:
    ZPoly() = default;
    explicit ZPoly(int m) : m_(m) {}

    static ZPoly constant(int m, cplx c) {
        ZPoly r(m);
        r.add(c, std::vector<int>(m, 0), std::vector<int>(m, 0), 0);
        return r;
    }
    static ZPoly z(int m, int j) {
        ZPoly r(m);
        std::vector<int> p(m, 0), q(m, 0);
        p[j] = 1;
        r.add(1.0, p, q, 0);
        return r;
    }
    static ZPoly zbar(int m, int j) {
        ZPoly r(m);
        std::vector<int> p(m, 0), q(m, 0);
        q[j] = 1;
        r.add(1.0, p, q, 0);
        return r;
    }
    static ZPoly v(int m, int power = 1) {
        ZPoly r(m);
        r.add(1.0, std::vector<int>(m, 0), std::vector<int>(m, 0), power);
        return r;
    }
    // |z|^2
    static ZPoly norm2(int m) {
        ZPoly r(m);
        for (int j = 0; j < m; ++j) r += z(m, j) * zbar(m, j);
        return r;
    }

    int m() const { return m_; }
    const std::vector<ZTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add(cplx c, const std::vector<int>& p, const std::vector<int>& q, int s) {
        if (static_cast<int>(p.size()) != m_ || static_cast<int>(q.size()) != m_)
            throw DimensionError("monomial exponent length does not match dimension");
        if (c == cplx(0.0, 0.0)) return;
        for (auto& t : terms_)
            if (t.p == p && t.q == q && t.s == s) {
                t.c += c;
                prune();
                return;
            }
        terms_.push_back({c, p, q, s});
    }

    ZPoly& operator+=(const ZPoly& o) {
        check(o);
        for (const auto& t : o.terms_) add(t.c, t.p, t.q, t.s);
        return *this;
    }
    ZPoly operator+(const ZPoly& o) const { ZPoly r = *this; return r += o; }
    ZPoly operator-(const ZPoly& o) const { return *this + o * cplx(-1.0); }
    ZPoly operator*(cplx c) const {
        ZPoly r(m_);
        for (const auto& t : terms_) r.add(t.c * c, t.p, t.q, t.s);
        return r;
    }
    ZPoly operator*(const ZPoly& o) const {
        check(o);
        ZPoly r(m_);
        for (const auto& a : terms_)
            for (const auto& b : o.terms_) {
                std::vector<int> p(m_), q(m_);
                for (int j = 0; j < m_; ++j) {
                    p[j] = a.p[j] + b.p[j];
                    q[j] = a.q[j] + b.q[j];
                }
                r.add(a.c * b.c, p, q, a.s + b.s);
            }
        return r;
    }

    // d/dz_j; uses dv/dz_j = -zbar_j v^2.
    ZPoly dz(int j) const { return derive(j, false); }
    ZPoly dzbar(int j) const { return derive(j, true); }

    cplx operator()(const CVec& zv) const {
        if (zv.size() != m_) throw DimensionError("evaluation point has wrong dimension");
        const double vv = 1.0 / (1.0 + zv.squaredNorm());
        cplx acc(0.0, 0.0);
        for (const auto& t : terms_) {
            cplx x = t.c;
            for (int j = 0; j < m_; ++j) {
                if (t.p[j]) x *= ipow(zv(j), t.p[j]);
                if (t.q[j]) x *= ipow(std::conj(zv(j)), t.q[j]);
            }
            if (t.s) x *= std::pow(vv, t.s);
            acc += x;
        }
        return acc;
    }

    bool uses_v() const {
        for (const auto& t : terms_)
            if (t.s != 0) return true;
        return false;
    }

    int degree() const {
        int d = 0;
        for (const auto& t : terms_) {
            int e = 0;
            for (int j = 0; j < m_; ++j) e += t.p[j] + t.q[j];
            d = std::max(d, e);
        }
        return d;
    }

    // Largest |c_{p,q,s} - conj(c_{q,p,s})|; zero for real-valued sums.
    double reality_defect() const {
        double r = 0.0;
        for (const auto& t : terms_) {
            cplx mate(0.0, 0.0);
            for (const auto& u : terms_)
                if (u.p == t.q && u.q == t.p && u.s == t.s) mate = u.c;
            r = std::max(r, std::abs(t.c - std::conj(mate)));
        }
        return r;
    }

    // Polynomial in |z|^2 alone (with no v factor): returns coefficients by power.
    std::optional<std::vector<cplx>> radial_coefficients() const;

private:
    static cplx ipow(cplx x, int n) {
        cplx r(1.0, 0.0);
        for (int i = 0; i < n; ++i) r *= x;
        return r;
    }

    void check(const ZPoly& o) const {
        if (o.m_ != m_) throw DimensionError("polynomials live in different dimensions");
    }

    void prune() {
        std::erase_if(terms_, [](const ZTerm& t) { return t.c == cplx(0.0, 0.0); });
    }

    ZPoly derive(int j, bool bar) const {
        ZPoly r(m_);
        for (const auto& t : terms_) {
            const int e = bar ? t.q[j] : t.p[j];
            if (e > 0) {
                auto p = t.p, q = t.q;
                (bar ? q : p)[j] -= 1;
                r.add(t.c * static_cast<double>(e), p, q, t.s);
            }
            if (t.s != 0) {
                auto p = t.p, q = t.q;
                (bar ? p : q)[j] += 1;
                r.add(-t.c * static_cast<double>(t.s), p, q, t.s + 1);
            }
        }
        return r;
    }

    int m_ = 0;
    std::vector<ZTerm> terms_;
};

inline std::optional<std::vector<cplx>> ZPoly::radial_coefficients() const {
    std::vector<cplx> c;
    for (const auto& t : terms_) {
        if (t.s != 0 || t.p != t.q) return std::nullopt;
        int d = t.p[0];
        for (int j = 1; j < m_; ++j)
            if (t.p[j] != 0) return std::nullopt;
        if (static_cast<int>(c.size()) <= d) c.resize(d + 1, cplx(0.0, 0.0));
        c[d] += t.c;
    }
    if (m_ != 1) return std::nullopt;
    return c;
}

inline ZPoly operator*(cplx c, const ZPoly& p) { return p * c; }

// Cartesian coordinates on the unit sphere through inverse stereographic
// projection from the south pole: x1 + i x2 = 2z v, x3 = (1 - |z|^2) v = 2v - 1.
struct SphereCoordinates {
    ZPoly x1, x2, x3;
};

inline SphereCoordinates sphere_coordinates() {
    const ZPoly z = ZPoly::z(1, 0), zb = ZPoly::zbar(1, 0), v = ZPoly::v(1);
    SphereCoordinates s;
    s.x1 = (z + zb) * v;
    s.x2 = (z - zb) * v * cplx(0.0, -1.0);
    s.x3 = v * cplx(2.0) - ZPoly::constant(1, 1.0);
    return s;
}

// A polynomial in (x1, x2, x3): coefficient keyed by exponent triple.
using CartesianPoly = std::map<std::tuple<int, int, int>, double>;

inline int cartesian_degree(const CartesianPoly& h) {
    int d = 0;
    for (const auto& [e, c] : h)
        if (c != 0.0) d = std::max(d, std::get<0>(e) + std::get<1>(e) + std::get<2>(e));
    return d;
}

inline ZPoly sphere_hamiltonian(const CartesianPoly& h) {
    const auto sc = sphere_coordinates();
    ZPoly out(1);
    for (const auto& [e, c] : h) {
        auto [a, b, d] = e;
        if (a < 0 || b < 0 || d < 0) throw InputError("negative exponent in Cartesian polynomial");
        ZPoly term = ZPoly::constant(1, c);
        for (int i = 0; i < a; ++i) term = term * sc.x1;
        for (int i = 0; i < b; ++i) term = term * sc.x2;
        for (int i = 0; i < d; ++i) term = term * sc.x3;
        out += term;
    }
    return out;
}

}  // namespace kspec
