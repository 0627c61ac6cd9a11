#include "catch_amalgamated.hpp"

#include <random>

#include "kspec/bargmann_fock.hpp"

using namespace kspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
CVec c1(cplx a) {
    CVec v(1);
    v << a;
    return v;
}
}  // namespace

TEST_CASE("Bergman kernel diagonal and reproducing property", "[bf]") {
    const int k = 3;
    const CVec z = c1({0.4, -0.2}), u = c1({-0.1, 0.3});
    CHECK_THAT(bergman_kernel(k, z, z).real(), WithinRel(k / (2 * pi), 1e-15));
    // int K(z, w) K(w, u) dVol(w), dVol = 2 dx dy
    const LogIntegrand f = [&](const RVec& w) {
        const CVec wc = complex_from_real(w);
        return log_bergman_kernel(k, z, wc) + log_bergman_kernel(k, wc, u) + std::log(2.0);
    };
    const cplx v = integrate_gaussian(2, 24, f);
    const cplx exact = bergman_kernel(k, z, u);
    CHECK(std::abs(v - exact) < 1e-12 * std::abs(exact));
}

TEST_CASE("lifted points normalize the fiber angle", "[bf]") {
    const LiftedPoint p(c1(0.0), -0.5);
    CHECK_THAT(p.theta, WithinAbs(2 * pi - 0.5, 1e-15));
    const LiftedPoint q(c1(0.0), 7.0);
    CHECK_THAT(q.theta, WithinAbs(7.0 - 2 * pi, 1e-15));
}

TEST_CASE("general complex structure kernel reduces to the standard one", "[bf]") {
    const RMat J = standard_J(1);
    RVec z(2), w(2);
    z << 0.3, -0.7;
    w << 1.1, 0.2;
    const cplx zc(0.3, -0.7), wc(1.1, 0.2);
    const cplx expect = std::exp(cplx(-0.5 * std::norm(zc - wc), (zc * std::conj(wc)).imag()));
    CHECK(std::abs(general_J_kernel(J, z, w) - expect) < 1e-15);
    CHECK_THROWS_AS(general_J_kernel(2.0 * J, z, w), ValidationError);
}

TEST_CASE("conjugated structure gives a positive kernel of unit diagonal", "[bf]") {
    std::mt19937_64 rng(2);
    const RMat S = random_symplectic(1, rng, 0.5);
    const RMat J = S * standard_J(1) * symplectic_inverse(S);
    RVec z(2);
    z << 0.25, 0.5;
    CHECK(std::abs(general_J_kernel(J, z, z) - 1.0) < 1e-14);
}

TEST_CASE("Heisenberg translations compose with the cocycle phase", "[bf]") {
    const int k = 2;
    const CVec w0 = c1({0.3, 0.1}), w = c1({-0.2, 0.5});
    const CoherentState v0 = heisenberg_translate(k, w0);
    const CoherentState v1 = heisenberg_translate(k, w, &v0);
    // apply beta(w) f(z) = exp(k(z wbar - |w|^2/2)) f(z - w) to the holomorphic part by hand;
    // states carry the weight exp(-k|z|^2/2)
    const CVec z = c1({0.7, -0.4});
    const double weight_shift = 0.5 * (std::norm(z(0) - w(0)) - std::norm(z(0)));
    const cplx by_hand =
        std::exp(double(k) * (z(0) * std::conj(w(0)) - 0.5 * std::norm(w(0)) + weight_shift)) * v0(z - w);
    CHECK(std::abs(v1(z) - by_hand) < 1e-14 * std::abs(by_hand));
}

TEST_CASE("metaplectic kernel factorization: P orientation matches", "[bf]") {
    RMat S = RMat::Zero(2, 2);
    S(0, 0) = 2.0;
    S(1, 1) = 0.5;
    const MetaplecticKernelSpec spec{4, complexify_raw(S), std::nullopt};
    const LiftedPoint x(c1({0.2, 0.1}), 0.3), y(c1({-0.1, 0.25}), 1.1);
    const auto rep = toep_met_factorization_check(spec, x, y, 40);
    CHECK(rep.residual < 1e-12);
    CHECK(rep.matching_orientation == "det_P");
    CHECK(rep.residual_star > 1e-2);
}

TEST_CASE("identity map kernel is the lifted Bergman kernel", "[bf]") {
    const MetaplecticKernelSpec spec{5, complexify_raw(RMat::Identity(2, 2)), std::nullopt};
    const LiftedPoint x(c1({0.2, 0.1}), 0.3), y(c1({-0.1, 0.25}), 1.1);
    const cplx a = metaplectic_kernel(spec, x, y), b = lifted_kernel(5, x, y);
    CHECK(std::abs(a - b) < 1e-14 * std::abs(b));
}

TEST_CASE("matrix element of the identity map", "[bf]") {
    CVec a = c1(1.0);
    const auto r = bpu_matrix_element(SymplecticMap(RMat::Identity(2, 2)), a, 1, 30);
    CHECK_THAT(r.quadrature.real(), WithinRel(std::pow(2 * pi, 1.5), 1e-12));
    CHECK(r.residual < 1e-12);
    RMat S = RMat::Identity(2, 2);
    S(0, 0) = 2.0;
    S(1, 1) = 0.5;
    CHECK_THROWS_AS(bpu_matrix_element(SymplecticMap(S), a, 1, 10), ValidationError);
}
