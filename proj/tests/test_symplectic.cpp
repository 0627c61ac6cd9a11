#include "catch_amalgamated.hpp"

#include <random>

#include "kspec/symplectic.hpp"

using namespace kspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
RMat diag_hyperbolic(double lam) {
    RMat S = RMat::Zero(2, 2);
    S(0, 0) = std::exp(lam);
    S(1, 1) = std::exp(-lam);
    return S;
}
}  // namespace

TEST_CASE("standard structures", "[symplectic]") {
    for (int m : {1, 2, 3}) {
        const RMat w = standard_omega(m), J = standard_J(m);
        const RMat id = RMat::Identity(2 * m, 2 * m);
        CHECK(max_abs(RMat(J * J + id)) == 0.0);
        CHECK(max_abs(RMat(J.transpose() * w * J - w)) == 0.0);
        CHECK(max_abs(RMat(w.transpose() + w)) == 0.0);
    }
}

TEST_CASE("non-symplectic input is rejected with its residual", "[symplectic]") {
    RMat S(2, 2);
    S << 1.0, 0.5, 0.0, 1.2;
    const auto chk = check_symplectic(S, 1e-10);
    CHECK_FALSE(chk.ok);
    CHECK_THAT(chk.residual, WithinAbs(0.2, 1e-15));  // det - 1
    CHECK_THROWS_AS(SymplecticMap(S), ValidationError);
    CHECK_THROWS_AS(check_symplectic(RMat::Identity(3, 3), 1e-10), DimensionError);
}

TEST_CASE("near-symplectic input is pulled back onto the group", "[symplectic]") {
    RMat S = diag_hyperbolic(0.3);
    S(0, 1) = 1e-12;
    const SymplecticMap Sm(S, 1e-10);
    CHECK(Sm.residual() <= 1e-15);
}

TEST_CASE("complex blocks of elementary maps", "[symplectic]") {
    const double t = 0.7;
    RMat R(2, 2);
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const auto b = complexify_raw(R);
    CHECK(std::abs(b.P(0, 0) - std::polar(1.0, t)) < 1e-15);
    CHECK(std::abs(b.Q(0, 0)) < 1e-15);

    const auto h = complexify_raw(diag_hyperbolic(0.4));
    CHECK_THAT(h.P(0, 0).real(), WithinRel(std::cosh(0.4), 1e-14));
    CHECK_THAT(h.Q(0, 0).real(), WithinRel(std::sinh(0.4), 1e-14));
}

TEST_CASE("round trip and Folland identities on random maps", "[symplectic]") {
    std::mt19937_64 rng(3);
    for (int c = 0; c < 50; ++c) {
        const RMat S = random_symplectic(1 + c % 3, rng, 0.5);
        const auto b = complexify_raw(S);
        CHECK(folland_residuals(b).max() < 1e-13);
        CHECK(max_abs(RMat(decomplexify(b) - S)) < 1e-12 * std::max(1.0, max_abs(S)));
        const auto bi = inverse_blocks(b);
        CHECK(max_abs(RMat(decomplexify(bi) - symplectic_inverse(S))) < 1e-12 * std::max(1.0, max_abs(S) * max_abs(S)));
    }
}

TEST_CASE("classification", "[symplectic]") {
    CHECK(classify_pds(SymplecticMap(RMat::Identity(4, 4))).kind == SymplecticClass::identity);
    const auto c = classify_pds(SymplecticMap(diag_hyperbolic(0.9)));
    CHECK(c.kind == SymplecticClass::positive_definite_symmetric);
    CHECK_THAT(c.lambdas[0], WithinAbs(0.9, 1e-14));
    RMat R(2, 2);
    R << 0.0, -1.0, 1.0, 0.0;
    CHECK(classify_pds(SymplecticMap(R)).kind == SymplecticClass::unitary_type);
}

TEST_CASE("coefficient series on hyperbolic plus identity", "[symplectic]") {
    RMat S = RMat::Identity(4, 4);
    S(1, 1) = 2.0;
    S(3, 3) = 0.5;
    CVec alpha(2);
    alpha << 1.0, 0.0;
    const auto g = gcal_series(SymplecticMap(S), alpha, -3, 3);
    // (cosh(3 ln 2))^{-1/2}
    CHECK_THAT(g.back().value.real(), WithinRel(0.496138938356833824761, 1e-13));
    CHECK_THAT(g.front().value.real(), WithinRel(0.496138938356833824761, 1e-13));
    CHECK(std::abs(g[3].value - 1.0) < 1e-15);
    CHECK(std::abs(g.back().value.imag()) < 1e-15);
}

TEST_CASE("positive definite symmetric maps: determinant and fixed direction", "[symplectic]") {
    std::mt19937_64 rng(5);
    for (int c = 0; c < 40; ++c) {
        const int m = 1 + c % 3;
        const auto s = random_pds_symplectic(m, rng, 0.4, true);
        const SymplecticMap S(s.S, 1e-9);
        Eigen::SelfAdjointEigenSolver<RMat> es(s.S);
        for (int n : {-4, 1, 3}) {
            double prod = 1.0;
            for (int j = m; j < 2 * m; ++j) prod *= std::cosh(n * std::log(es.eigenvalues()(j)));
            const cplx d = complexify(S.power(n)).P.determinant();
            CHECK(std::abs(d - prod) <= 1e-10 * prod);
        }
        const CVec a = alpha_from_real(s.invariant);
        CHECK((complexify(S).P * a - a).norm() < 1e-12);
        CHECK(projector_identity_residual(S) < 1e-12);
    }
}

TEST_CASE("metaplectic normalization routes agree", "[symplectic]") {
    std::mt19937_64 rng(9);
    for (int c = 0; c < 30; ++c) {
        const SymplecticMap S(random_symplectic(1 + c % 3, rng, 0.4), 1e-9);
        const auto e = metaplectic_eta(S);
        CHECK(e.route_residual < 1e-11);
        CHECK(e.modulus_residual < 1e-11);
    }
}

TEST_CASE("frame adaptation standardizes a constant metric", "[symplectic]") {
    CMat G(2, 2);
    G << 2.0, cplx(0.3, 0.1), cplx(0.3, -0.1), 1.5;
    const auto fr = kahler_frame(G);
    // pulled-back metric F^T G conj(F) is the identity
    const CMat pulled = fr.F.transpose() * G * fr.F.conjugate();
    CHECK(max_abs(CMat(pulled - CMat::Identity(2, 2))) < 1e-14);
    CHECK_THROWS_AS(kahler_frame(-G), SingularityError);
}

TEST_CASE("singular holomorphic block is reported", "[symplectic]") {
    CMat P = CMat::Zero(2, 2);
    P(0, 0) = 1.0;
    CVec a(2);
    a << 1.0, 1.0;
    CHECK_THROWS_AS(matrix_element(P, a), SingularityError);
}
