#include "catch_amalgamated.hpp"

#include "kspec/tauberian.hpp"

using namespace kspec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
WeylMeasure atoms(std::vector<double> loc, std::vector<double> w) {
    WeylMeasure mu;
    mu.locations = std::move(loc);
    mu.weights = std::move(w);
    for (double x : mu.weights) mu.total_mass += x;
    mu.k = 16;
    return mu;
}

WeylMeasure equator_measure(int k) {
    CVec z(1);
    z << 1.0;
    return weyl_measure(pointwise_masses(build_sphere_spin({{{0, 0, 1}, 1.0}}, k), z), 0.0);
}
}  // namespace

TEST_CASE("mollifier normalization and floor", "[tauberian]") {
    const auto mol = build_mollifier(10.0);
    CHECK(mol.mass_residual < 1e-12);
    CHECK(mol.parseval_residual < 1e-12);
    CHECK(mol.delta0 > 0.1);
    CHECK_THAT(mol.theta(0.0), WithinRel(10.0 * 0.117872151918700029878, 1e-9));
    CHECK_THAT(mol.Theta(0.0), WithinAbs(0.5, 1e-15));
    CHECK(mol.rho(10.0) == 0.0);
    CHECK_THROWS_AS(build_mollifier(0.0), InputError);
}

TEST_CASE("counting function and its smoothing", "[tauberian]") {
    const auto mu = atoms({1.0, -2.0, 0.5}, {0.2, 0.3, 0.5});
    const auto sig = counting_function(mu);
    CHECK(sig.jumps == std::vector<double>{-2.0, 0.5, 1.0});
    CHECK_THAT(sig(-3.0), WithinAbs(0.0, 0));
    CHECK_THAT(sig(0.5), WithinAbs(0.8, 1e-15));
    CHECK_THAT(sig(7.0), WithinAbs(1.0, 1e-15));
    const auto mol = build_mollifier(4.0);
    const auto sm = convolve_counting(sig, mol, {-100.0, 0.75, 100.0});
    CHECK_THAT(sm.value[0], WithinAbs(0.0, 1e-12));
    CHECK_THAT(sm.value[2], WithinAbs(1.0, 1e-12));
    const double expect = 0.3 * mol.Theta(2.75) + 0.5 * mol.Theta(0.25) + 0.2 * mol.Theta(-0.25);
    CHECK_THAT(sm.value[1], WithinAbs(expect, 1e-15));
    CHECK_THAT(sm.derivative[1],
               WithinAbs(0.3 * mol.theta(2.75) + 0.5 * mol.theta(0.25) + 0.2 * mol.theta(-0.25), 1e-15));
}

TEST_CASE("sharp counts use closed intervals", "[tauberian]") {
    const auto mu = atoms({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25});
    CHECK_THAT(sharp_interval_count(mu, -1.0, 1.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(sharp_interval_count(mu, -0.5, 0.5), WithinAbs(0.5, 1e-15));
    // shifting an endpoint across one atom changes the count by that atom's mass
    CHECK_THAT(sharp_interval_count(mu, -0.5, 1.0) - sharp_interval_count(mu, -0.5, 0.5), WithinAbs(0.25, 1e-15));
    CHECK_THROWS_AS(sharp_interval_count(mu, 1.0, 0.0), InputError);
}

TEST_CASE("concentration drops only the far tail", "[tauberian]") {
    auto mu = atoms({0.0, 1e6}, {1.0, 1e-3});
    const double dropped = concentrate(mu);
    CHECK_THAT(dropped, WithinAbs(1e-3, 1e-18));
    CHECK(mu.locations.size() == 1);
}

TEST_CASE("increment bound on the equator ladder", "[tauberian]") {
    const auto mu = equator_measure(128);
    for (double T : {5.0, 20.0}) {
        const auto mol = build_mollifier(T);
        // window edge on an atom so the shift actually moves mass
        const double r = increment_bound_ratio(mu, mol, mu.locations[60], 3.5);
        CHECK(r > 0.0);
        CHECK(r <= 1.0);
    }
}

TEST_CASE("two-term counts on the equator", "[tauberian]") {
    const auto sc = sphere_coordinates();
    const auto km = fubini_study_model(sc.x3);
    CVec z(1);
    z << 1.0;
    const auto orbit = find_period(km, z, 5.0, 1e-8);
    const auto pe = predicted_expansion(km, z, orbit, 0.0);
    const auto r = two_term_verify({equator_measure(64), equator_measure(128), equator_measure(256)}, pe, -3.5, 3.5);
    CHECK(r.monotone_to_one);
    CHECK_THAT(r.rows[0].ratio, WithinAbs(0.99122792494668, 1e-9));
    CHECK_THAT(r.rows[2].ratio, WithinAbs(0.99774327190549, 1e-9));
    const auto g = gap_scaling(equator_measure(256), -3.5, 3.5, {5.0, 10.0, 20.0, 40.0});
    CHECK_THAT(g.slope, WithinAbs(-1.0, 0.2));
}
