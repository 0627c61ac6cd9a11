#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kspec::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One term of a Hamiltonian or potential. For the Fock and radial models the
// exponents are (p, q) of z^p zbar^q; for the sphere they are (a, b, c) of
// x1^a x2^b x3^c.
struct PolyTerm {
    double coeff = 0.0;
    std::vector<int> exponents;
};

struct ModelSpec {
    std::string kind = "fock";  // fock | radial | sphere
    std::vector<PolyTerm> hamiltonian;
    std::vector<double> potential;  // radial: coefficients of |z|^4, |z|^6, ...
    std::optional<double> energy;   // empty: the level through z
    double z_re = 1.0, z_im = 0.0;
};

struct Tolerances {
    double ode_tol = 1e-11;
    double tail_tol = 1e-8;
    double return_tol = 1e-8;
    double level_tol = 1e-9;
    int quadrature_order = 40;
};

struct WeylSettings {
    double test_support = 1.0;  // Fourier support of the test function
    double window_a = -3.5, window_b = 3.5;
    std::vector<double> mollifier_T{5.0, 10.0, 20.0, 40.0};
    int gap_k = 0;              // level for the smoothed-vs-sharp fit; 0 picks the middle of the ladder
    int n_max = 32;
    double period_max = 10.0;
    int profile_points = 21;    // energy offsets on [-2|xi|, 2|xi|]
    double ratio_tol = 0.10;
    double exponent_tol = 0.10;
};

struct AlgebraSettings {
    int pds_cases = 500;
    int folland_cases = 1000;
    int n_range = 6;
    double sample_scale = 0.4;
    double pds_tol = 1e-9;
    double folland_tol = 1e-12;
    double factorization_tol = 1e-6;
    int factorization_order = 40;
    double bpu_tol = 1e-5;
    int bpu_order = 16;
    std::vector<int> bpu_k{1, 2, 4, 8};
    std::vector<std::vector<double>> fixture;  // extra matrix that must be symplectic
};

struct FlowSettings {
    double t_end = 10.0;
    int samples = 201;
    std::vector<double> holonomy_radii{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    double min_holonomy_slope = 2.9;
};

struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 1;
    int threads = 1;
    ModelSpec model;
    std::vector<int> k_ladder{64, 128, 256, 512};
    Tolerances tol;
    WeylSettings weyl;
    AlgebraSettings algebra;
    FlowSettings flow;
    std::string output_dir = "kspec_out";
};

inline constexpr int kSchemaVersion = 1;

// Versioned key = value text with [section] headers; '#' starts a comment.
// Unknown sections or keys, duplicates and malformed values raise ConfigError
// naming the line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Reads the whole file as bytes.
std::string read_file(const std::string& path);

}  // namespace kspec::cli
