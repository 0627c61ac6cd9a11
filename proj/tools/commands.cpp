#include "commands.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <random>
#include <thread>

#include "artifacts.hpp"
#include "kspec/suites.hpp"
#include "kspec/tauberian.hpp"

#ifndef KSPEC_VERSION
#define KSPEC_VERSION "unknown"
#endif

namespace kspec::cli {

namespace {

int code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const InputError&) {
        return exit_config;
    } catch (const DimensionError&) {
        return exit_config;
    } catch (const UnsupportedError&) {
        return exit_config;
    } catch (const ValidationError&) {
        return exit_tolerance;
    } catch (const SingularityError&) {
        return exit_tolerance;
    } catch (const AccuracyError&) {
        return exit_tolerance;
    } catch (const IntegrationError&) {
        return exit_tolerance;
    } catch (const TruncationError&) {
        return exit_tolerance;
    } catch (...) {
        return exit_internal;
    }
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name + ": " + e.what(), code_for(std::current_exception()));
    }
}

// Runs f(i) for i in [0, n) on up to `threads` workers; the first failure by index is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& f) {
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errs[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int w = std::max(1, std::min(threads, n));
    std::vector<std::thread> pool;
    for (int t = 1; t < w; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

Json manifest_header(const RunContext& ctx) {
    return Json{{"command", ctx.command},
                {"schema_version", ctx.cfg.schema_version},
                {"library_version", KSPEC_VERSION},
                {"config_sha256", sha256_hex(ctx.config_bytes)},
                {"seed", ctx.cfg.seed}};
}

Json suite_json(const SuiteResult& r) {
    return Json{{"name", r.name},
                {"cases", r.cases},
                {"max_residual", r.max_residual},
                {"tolerance", r.tolerance},
                {"worst_invariant", r.invariant},
                {"passed", r.passed}};
}

// ---- model assembly ----

struct Model {
    KahlerModel km;
    CartesianPoly sphere_h;
    CVec z;
    double E = 0.0;
    bool sphere = false;
};

Model build_model(const RunConfig& cfg) {
    Model md;
    md.z = CVec(1);
    md.z << cplx(cfg.model.z_re, cfg.model.z_im);
    if (cfg.model.kind == "sphere") {
        md.sphere = true;
        for (const auto& t : cfg.model.hamiltonian)
            md.sphere_h[{t.exponents[0], t.exponents[1], t.exponents[2]}] += t.coeff;
        md.km = fubini_study_model(sphere_hamiltonian(md.sphere_h));
    } else {
        ZPoly H(1);
        for (const auto& t : cfg.model.hamiltonian) H.add(t.coeff, {t.exponents[0]}, {t.exponents[1]}, 0);
        md.km = cfg.model.kind == "fock" ? flat_model(1, H) : radial_model(cfg.model.potential, H);
    }
    md.E = cfg.model.energy ? *cfg.model.energy : md.km.hamiltonian(md.z);
    md.km.E = md.E;
    return md;
}

QuantizedSystem build_system(const Model& md, const RunConfig& cfg, int k) {
    if (md.sphere) return build_sphere_spin(md.sphere_h, k);
    const int N = fock_cutoff(k, std::abs(md.z(0)));
    if (cfg.model.kind == "fock") return build_fock(md.km, k, N);
    return build_radial_bergman(md.km, k, N);
}

std::string gnuplot_header(const std::string& title) {
    return "# gnuplot script\nset datafile separator ','\nset key autotitle columnhead\nset title '" + title + "'\n";
}

}  // namespace

// ---------------------------------------------------------------- verify-algebra

int cmd_verify_algebra(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.cfg;
    ArtifactWriter out(cfg.output_dir);
    AlgebraSuiteOptions o;
    o.pds_cases = cfg.algebra.pds_cases;
    o.folland_cases = cfg.algebra.folland_cases;
    o.n_range = cfg.algebra.n_range;
    o.sample_scale = cfg.algebra.sample_scale;
    o.pds_tol = cfg.algebra.pds_tol;
    o.folland_tol = cfg.algebra.folland_tol;
    o.factorization_tol = cfg.algebra.factorization_tol;
    o.factorization_order = cfg.algebra.factorization_order;
    o.bpu_tol = cfg.algebra.bpu_tol;
    o.bpu_order = cfg.algebra.bpu_order;
    o.bpu_k = cfg.algebra.bpu_k;

    std::mt19937_64 rng(cfg.seed);
    std::vector<SuiteResult> suites;
    if (!cfg.algebra.fixture.empty()) {
        SuiteResult fx{"fixture", "symplecticity", 1, 0.0, 1e-10, false};
        const auto n = static_cast<int>(cfg.algebra.fixture.size());
        RMat S(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) S(i, j) = cfg.algebra.fixture[i][j];
        try {
            const SymplecticMap Sm(S, fx.tolerance);
            fx.max_residual = Sm.residual();
            fx.passed = true;
        } catch (const ValidationError& e) {
            fx.max_residual = e.residual;
        } catch (const DimensionError&) {
            fx.invariant = "even_square_shape";
            fx.max_residual = std::numeric_limits<double>::infinity();
        }
        suites.push_back(fx);
    }
    suites.push_back(stage("pds_suite", [&] { return pds_suite(rng, o); }));
    suites.push_back(stage("folland_suite", [&] { return folland_suite(rng, o); }));
    suites.push_back(stage("factorization_suite", [&] { return factorization_suite(rng, o); }));
    const auto bpu = stage("bpu_suite", [&] { return bpu_suite(o); });
    suites.push_back(bpu.closed_form);

    Json report;
    report["seed"] = cfg.seed;
    Json arr = Json::array();
    bool ok = true;
    for (const auto& s : suites) {
        arr.push_back(suite_json(s));
        ok = ok && s.passed;
        log << (s.passed ? "PASS " : "FAIL ") << s.name << " cases=" << s.cases << " max_residual=" << s.max_residual
            << " worst=" << s.invariant << "\n";
    }
    report["suites"] = arr;
    report["bpu_k_exponent"] = {{"fitted", bpu.fitted_exponent},
                                {"expected", bpu.expected_exponent},
                                {"tolerance", o.bpu_exponent_tol},
                                {"passed", bpu.exponent_ok}};
    log << (bpu.exponent_ok ? "PASS " : "FAIL ") << "bpu_k_exponent fitted=" << bpu.fitted_exponent << "\n";
    ok = ok && bpu.exponent_ok;
    report["passed"] = ok;
    out.write_json("algebra_report.json", report);
    out.finish(manifest_header(ctx));
    return ok ? exit_ok : exit_tolerance;
}

// ---------------------------------------------------------------- run-weyl

int cmd_run_weyl(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.cfg;
    ArtifactWriter out(cfg.output_dir);
    const Model md = stage("model", [&] { return build_model(cfg); });
    const auto& ks = cfg.k_ladder;
    const int nk = static_cast<int>(ks.size());

    // per-level spectra, one independent cell each
    std::vector<WeylMeasure> measures(static_cast<std::size_t>(nk));
    std::vector<SpectralData> spectra(static_cast<std::size_t>(nk));
    stage("quantize", [&] {
        parallel_for(nk, cfg.threads, [&](int i) {
            const auto sys = build_system(md, cfg, ks[i]);
            spectra[i] = pointwise_masses(sys, md.z);
            measures[i] = weyl_measure(spectra[i], md.E);
        });
        return 0;
    });
    for (int i = 0; i < nk; ++i) {
        CsvTable t({"index", "eigenvalue", "mass", "location"});
        for (std::size_t j = 0; j < spectra[i].eigenvalues.size(); ++j)
            t.row({std::to_string(j), fmt(spectra[i].eigenvalues[j]), fmt(spectra[i].masses[j]),
                   fmt(measures[i].locations[j])});
        out.write("spectrum_k" + std::to_string(ks[i]) + ".csv", t.str());
    }

    // branch and coefficients
    const bool on_level = std::abs(md.km.hamiltonian(md.z) - md.E) <= cfg.tol.level_tol;
    std::optional<PeriodicOrbitData> orbit;
    if (on_level) {
        PeriodSearchOptions po;
        po.ode_tol = cfg.tol.ode_tol;
        orbit = stage("period_search", [&] { return find_period(md.km, md.z, cfg.weyl.period_max, cfg.tol.return_tol, po); });
    }
    ExpansionOptions eo;
    eo.n_max = cfg.weyl.n_max;
    eo.tail_tol = cfg.tol.tail_tol;
    eo.level_tol = cfg.tol.level_tol;
    const auto pe = stage("expansion", [&] { return predicted_expansion(md.km, md.z, orbit, md.E, eo); });
    const auto f = TestFunction::compact(cfg.weyl.test_support);

    Json cmp;
    cmp["model"] = cfg.model.kind;
    cmp["branch"] = to_string(pe.branch);
    cmp["energy"] = md.E;
    cmp["test_support"] = cfg.weyl.test_support;
    bool ok = true;
    std::vector<double> emp, pred;
    for (const auto& mu : measures) {
        emp.push_back(smoothed_sum(mu, f).real());
        pred.push_back(predicted_smoothed(pe, mu.k, f).real());
    }
    CsvTable ct({"k", "empirical", "predicted"});
    for (int i = 0; i < nk; ++i) ct.row({std::to_string(ks[i]), fmt(emp[i]), fmt(pred[i])});
    out.write("comparison.csv", ct.str());

    if (pe.branch == Branch::off_level) {
        std::vector<double> x, y;
        for (int i = 0; i < nk; ++i) {
            x.push_back(ks[i]);
            y.push_back(std::max(std::abs(emp[i]), 1e-300));
        }
        const double slope = nk >= 2 ? loglog_slope(x, y) : 0.0;
        const bool fast = nk >= 2 && slope < -4.0;
        cmp["empirical_abs"] = y;
        cmp["decay_slope"] = slope;
        cmp["decays_faster_than_k^-4"] = fast;
        cmp["prediction"] = "O(k^-inf)";
        ok = fast;
        log << (fast ? "PASS " : "FAIL ") << "off-level decay slope " << slope << "\n";
    } else {
        cmp["T"] = pe.T ? Json(*pe.T) : Json(nullptr);
        cmp["holonomy_angle"] = pe.holonomy_angle;
        cmp["G0"] = pe.G0;
        cmp["xi_norm"] = pe.xi_norm;
        cmp["monodromy_class"] = to_string(pe.classification.kind);
        if (nk >= 3) {
            const auto rep = stage("compare", [&] {
                return compare(ks, emp, pred, pe.prefactor_exponent, to_string(pe.branch));
            });
            cmp["ratios"] = rep.ratios;
            cmp["ratio_spread"] = rep.ratio_spread;
            cmp["fitted_exponent"] = rep.fitted_exponent;
            cmp["expected_exponent"] = rep.expected_exponent;
            const bool spread_ok = rep.ratio_spread <= cfg.weyl.ratio_tol;
            const bool exp_ok = std::abs(rep.fitted_exponent - rep.expected_exponent) <= cfg.weyl.exponent_tol;
            cmp["ratio_spread_ok"] = spread_ok;
            cmp["exponent_ok"] = exp_ok;
            ok = spread_ok && exp_ok;
            log << (ok ? "PASS " : "FAIL ") << to_string(pe.branch) << " spread=" << rep.ratio_spread
                << " exponent=" << rep.fitted_exponent << "\n";
        }

        // energy-offset profile when only the n = 0 term is inside the test function's support
        const bool only_zero = pe.branch == Branch::nonperiodic || (pe.T && *pe.T >= cfg.weyl.test_support);
        if (only_zero && pe.xi_norm > 0.0) {
            const auto& sd = spectra.back();
            const int k = ks.back();
            const double s0 = smoothed_sum(weyl_measure(sd, md.E), f).real();
            CsvTable pt({"offset", "relative", "gaussian", "deviation"});
            double worst = 0.0;
            const int P = cfg.weyl.profile_points;
            for (int i = 0; i < P; ++i) {
                const double a = 2.0 * pe.xi_norm * (2.0 * i / (P - 1) - 1.0);
                const double s = smoothed_sum(weyl_measure(sd, md.E + a / std::sqrt(static_cast<double>(k))), f).real();
                const double g = std::exp(-a * a / (pe.xi_norm * pe.xi_norm));
                const double dev = std::abs(s / (s0 * g) - 1.0);
                worst = std::max(worst, dev);
                pt.row({fmt(a), fmt(s / s0), fmt(g), fmt(dev)});
            }
            out.write("profile.csv", pt.str());
            const bool prof_ok = worst <= cfg.weyl.ratio_tol;
            cmp["profile"] = {{"k", k}, {"sup_deviation", worst}, {"passed", prof_ok}};
            ok = ok && prof_ok;
            log << (prof_ok ? "PASS " : "FAIL ") << "energy profile sup deviation " << worst << "\n";
            out.write("plot_profile.gp", gnuplot_header("energy-offset profile") +
                                             "plot 'profile.csv' using 1:2 with points, '' using 1:3 with lines\n");
        }

        if (pe.branch == Branch::periodic && pe.summable) {
            std::vector<double> sg;
            for (int i = 0; i <= 200; ++i) sg.push_back(cfg.weyl.window_a + (cfg.weyl.window_b - cfg.weyl.window_a) * i / 200.0);
            for (int k : ks) {
                const auto q = q_function(pe, k, sg, cfg.tol.tail_tol);
                CsvTable qt({"s", "re", "im"});
                for (std::size_t i = 0; i < q.s.size(); ++i) qt.row({fmt(q.s[i]), fmt(q.values[i].real()), fmt(q.values[i].imag())});
                out.write("q_function_k" + std::to_string(k) + ".csv", qt.str());
            }
        }

        if (nk >= 3) {
            const auto tt = stage("two_term", [&] { return two_term_verify(measures, pe, cfg.weyl.window_a, cfg.weyl.window_b); });
            Json rows = Json::array();
            for (const auto& r : tt.rows)
                rows.push_back({{"k", r.k}, {"sharp", r.sharp}, {"nu", r.nu}, {"predicted", r.predicted}, {"ratio", r.ratio}});
            cmp["two_term"] = {{"window", {tt.a, tt.b}},
                               {"rows", rows},
                               {"monotone_to_one", tt.monotone_to_one},
                               {"final_deviation", tt.final_deviation}};
        }
        int gk_index = nk / 2;
        if (cfg.weyl.gap_k != 0) {
            const auto it = std::find(ks.begin(), ks.end(), cfg.weyl.gap_k);
            if (it == ks.end()) throw StageError("gap_scaling: weyl.gap_k is not on the ladder", exit_config);
            gk_index = static_cast<int>(it - ks.begin());
        }
        const auto g = stage("gap_scaling", [&] {
            return gap_scaling(measures[gk_index], cfg.weyl.window_a, cfg.weyl.window_b, cfg.weyl.mollifier_T);
        });
        cmp["gap_scaling"] = {{"k", ks[gk_index]}, {"T", g.T}, {"gap", g.gap}, {"slope", g.slope}};
    }
    cmp["passed"] = ok;
    out.write_json("comparison.json", cmp);
    out.write("plot_comparison.gp", gnuplot_header("smoothed sums") +
                                        "set logscale xy\nplot 'comparison.csv' using 1:(abs($2)) with points, "
                                        "'' using 1:(abs($3)) with lines\n");
    out.finish(manifest_header(ctx));
    return ok ? exit_ok : exit_tolerance;
}

// ---------------------------------------------------------------- flow-probe

int cmd_flow_probe(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.cfg;
    ArtifactWriter out(cfg.output_dir);
    const Model md = stage("model", [&] { return build_model(cfg); });
    std::vector<double> grid;
    for (int i = 1; i < cfg.flow.samples; ++i) grid.push_back(cfg.flow.t_end * i / (cfg.flow.samples - 1));
    const auto tr = stage("flow", [&] { return flow(md.km, md.z, grid, cfg.tol.ode_tol); });
    CsvTable t({"t", "re_z", "im_z", "theta_hat", "theta_h", "energy", "symplectic_residual"});
    double worst_symp = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        t.row({fmt(tr.times[i]), fmt(tr.base_points[i](0).real()), fmt(tr.base_points[i](0).imag()), fmt(tr.theta_hat[i]),
               fmt(tr.theta_h[i]), fmt(tr.energy[i]), fmt(tr.symplectic_residual[i])});
        worst_symp = std::max(worst_symp, tr.symplectic_residual[i]);
    }
    out.write("trajectory.csv", t.str());
    out.write("plot_trajectory.gp", gnuplot_header("base trajectory") + "plot 'trajectory.csv' using 2:3 with lines\n");

    Json rep;
    rep["model"] = cfg.model.kind;
    rep["max_energy_drift"] = tr.max_energy_drift;
    rep["max_lift_relation_residual"] = tr.max_lift_relation_residual;
    rep["max_symplectic_residual"] = worst_symp;
    bool ok = tr.max_energy_drift <= 1e-8 && worst_symp <= 1e-8 && tr.max_lift_relation_residual <= 1e-8;
    log << (ok ? "PASS " : "FAIL ") << "flow invariants drift=" << tr.max_energy_drift << " symplectic=" << worst_symp
        << "\n";

    PeriodSearchOptions po;
    po.ode_tol = cfg.tol.ode_tol;
    const auto orbit = stage("period_search", [&] { return find_period(md.km, md.z, cfg.weyl.period_max, cfg.tol.return_tol, po); });
    if (!orbit) {
        rep["period"] = nullptr;
        log << "no return within " << cfg.weyl.period_max << "\n";
    } else {
        rep["period"] = {{"T", orbit->T},
                         {"holonomy_angle", orbit->holonomy_angle},
                         {"theta_hat", orbit->theta_hat},
                         {"return_distance", orbit->return_distance},
                         {"monodromy_class", to_string(orbit->classification.kind)}};
        const auto fit = stage("holonomy", [&] { return holonomy_hessian_check(md.km, *orbit, cfg.flow.holonomy_radii); });
        CsvTable h({"radius", "deviation"});
        for (std::size_t i = 0; i < fit.radii.size(); ++i) h.row({fmt(fit.radii[i]), fmt(fit.deviations[i])});
        out.write("holonomy.csv", h.str());
        const bool slope_ok = fit.below_noise || fit.slope >= cfg.flow.min_holonomy_slope;
        rep["holonomy"] = {{"slope", fit.slope},
                           {"below_noise", fit.below_noise},
                           {"noise_floor", fit.noise_floor},
                           {"min_slope", cfg.flow.min_holonomy_slope},
                           {"passed", slope_ok}};
        ok = ok && slope_ok;
        log << (slope_ok ? "PASS " : "FAIL ") << "period T=" << orbit->T << " holonomy slope " << fit.slope
            << (fit.below_noise ? " (below noise)" : "") << "\n";
        out.write("plot_holonomy.gp", gnuplot_header("holonomy deviation") +
                                          "set logscale xy\nplot 'holonomy.csv' using 1:2 with linespoints\n");
    }
    rep["passed"] = ok;
    out.write_json("flow_report.json", rep);
    out.finish(manifest_header(ctx));
    return ok ? exit_ok : exit_tolerance;
}

}  // namespace kspec::cli
