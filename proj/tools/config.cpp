#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace kspec::cli {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& s, int line) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) fail(line, "expected a number, got '" + s + "'");
    return v;
}

long long to_integer(const std::string& s, int line) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end) fail(line, "expected an integer, got '" + s + "'");
    return v;
}

int to_int(const std::string& s, int line) {
    const long long v = to_integer(s, line);
    if (v < -1000000000LL || v > 1000000000LL) fail(line, "integer out of range: " + s);
    return static_cast<int>(v);
}

std::vector<double> to_doubles(const std::string& s, int line) {
    std::vector<double> out;
    for (const auto& t : split(s, ',')) out.push_back(to_double(t, line));
    return out;
}

std::vector<int> to_ints(const std::string& s, int line) {
    std::vector<int> out;
    for (const auto& t : split(s, ',')) out.push_back(to_int(t, line));
    return out;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<PolyTerm> to_terms(const std::string& s, int line) {
    std::vector<PolyTerm> out;
    for (const auto& t : split(s, ';')) {
        if (t.empty()) continue;
        const auto parts = split_ws(t);
        if (parts.size() < 2) fail(line, "term needs a coefficient and exponents: '" + t + "'");
        PolyTerm term;
        term.coeff = to_double(parts[0], line);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            const int e = to_int(parts[i], line);
            if (e < 0) fail(line, "negative exponent in '" + t + "'");
            term.exponents.push_back(e);
        }
        out.push_back(term);
    }
    if (out.empty()) fail(line, "empty term list");
    return out;
}

std::vector<std::vector<double>> to_matrix(const std::string& s, int line) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : split(s, ';')) {
        if (r.empty()) continue;
        std::string flat = r;
        for (auto& c : flat)
            if (c == ',') c = ' ';
        std::vector<double> row;
        for (const auto& tok : split_ws(flat)) row.push_back(to_double(tok, line));
        rows.push_back(row);
    }
    if (rows.empty()) fail(line, "empty matrix");
    for (const auto& r : rows)
        if (r.size() != rows.size()) fail(line, "matrix must be square");
    return rows;
}

void positive(double v, int line, const char* what) {
    if (!(v > 0.0)) fail(line, std::string(what) + " must be positive");
}

using Setter = std::function<void(RunConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> s = {
        {"schema_version", [](RunConfig& c, const std::string& v, int l) { c.schema_version = to_int(v, l); }},
        {"seed",
         [](RunConfig& c, const std::string& v, int l) {
             const long long x = to_integer(v, l);
             if (x < 0) fail(l, "seed must be nonnegative");
             c.seed = static_cast<std::uint64_t>(x);
         }},
        {"threads",
         [](RunConfig& c, const std::string& v, int l) {
             c.threads = to_int(v, l);
             if (c.threads < 1) fail(l, "threads must be at least 1");
         }},
        {"model.kind",
         [](RunConfig& c, const std::string& v, int l) {
             c.model.kind = unquote(v);
             if (c.model.kind != "fock" && c.model.kind != "radial" && c.model.kind != "sphere")
                 fail(l, "model.kind must be fock, radial or sphere");
         }},
        {"model.hamiltonian", [](RunConfig& c, const std::string& v, int l) { c.model.hamiltonian = to_terms(v, l); }},
        {"model.potential", [](RunConfig& c, const std::string& v, int l) { c.model.potential = to_doubles(v, l); }},
        {"model.energy",
         [](RunConfig& c, const std::string& v, int l) {
             if (unquote(v) == "level")
                 c.model.energy.reset();
             else
                 c.model.energy = to_double(v, l);
         }},
        {"model.z",
         [](RunConfig& c, const std::string& v, int l) {
             const auto z = to_doubles(v, l);
             if (z.size() != 2) fail(l, "model.z takes two numbers: re, im");
             c.model.z_re = z[0];
             c.model.z_im = z[1];
         }},
        {"ladder.k",
         [](RunConfig& c, const std::string& v, int l) {
             c.k_ladder = to_ints(v, l);
             if (c.k_ladder.empty()) fail(l, "empty k ladder");
             for (std::size_t i = 0; i < c.k_ladder.size(); ++i) {
                 if (c.k_ladder[i] < 1) fail(l, "k values must be positive");
                 if (i > 0 && c.k_ladder[i] <= c.k_ladder[i - 1]) fail(l, "k ladder must be strictly increasing");
             }
         }},
        {"tolerances.ode_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.tol.ode_tol = to_double(v, l), l, "ode_tol"); }},
        {"tolerances.tail_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.tol.tail_tol = to_double(v, l), l, "tail_tol"); }},
        {"tolerances.return_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.tol.return_tol = to_double(v, l), l, "return_tol"); }},
        {"tolerances.level_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.tol.level_tol = to_double(v, l), l, "level_tol"); }},
        {"tolerances.quadrature_order",
         [](RunConfig& c, const std::string& v, int l) {
             c.tol.quadrature_order = to_int(v, l);
             if (c.tol.quadrature_order < 4) fail(l, "quadrature_order must be at least 4");
         }},
        {"weyl.test_support",
         [](RunConfig& c, const std::string& v, int l) {
             positive(c.weyl.test_support = to_double(v, l), l, "test_support");
         }},
        {"weyl.window",
         [](RunConfig& c, const std::string& v, int l) {
             const auto w = to_doubles(v, l);
             if (w.size() != 2 || !(w[0] < w[1])) fail(l, "weyl.window takes a < b");
             c.weyl.window_a = w[0];
             c.weyl.window_b = w[1];
         }},
        {"weyl.mollifier_T",
         [](RunConfig& c, const std::string& v, int l) {
             c.weyl.mollifier_T = to_doubles(v, l);
             if (c.weyl.mollifier_T.size() < 2) fail(l, "need at least two mollifier scales");
             for (double t : c.weyl.mollifier_T) positive(t, l, "mollifier scale");
         }},
        {"weyl.gap_k",
         [](RunConfig& c, const std::string& v, int l) {
             c.weyl.gap_k = to_int(v, l);
             if (c.weyl.gap_k < 0) fail(l, "gap_k must be nonnegative");
         }},
        {"weyl.n_max",
         [](RunConfig& c, const std::string& v, int l) {
             c.weyl.n_max = to_int(v, l);
             if (c.weyl.n_max < 2) fail(l, "n_max must be at least 2");
         }},
        {"weyl.period_max",
         [](RunConfig& c, const std::string& v, int l) {
             positive(c.weyl.period_max = to_double(v, l), l, "period_max");
         }},
        {"weyl.profile_points",
         [](RunConfig& c, const std::string& v, int l) {
             c.weyl.profile_points = to_int(v, l);
             if (c.weyl.profile_points < 3) fail(l, "profile_points must be at least 3");
         }},
        {"weyl.ratio_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.weyl.ratio_tol = to_double(v, l), l, "ratio_tol"); }},
        {"weyl.exponent_tol",
         [](RunConfig& c, const std::string& v, int l) {
             positive(c.weyl.exponent_tol = to_double(v, l), l, "exponent_tol");
         }},
        {"algebra.pds_cases",
         [](RunConfig& c, const std::string& v, int l) {
             if ((c.algebra.pds_cases = to_int(v, l)) < 0) fail(l, "pds_cases must be nonnegative");
         }},
        {"algebra.folland_cases",
         [](RunConfig& c, const std::string& v, int l) {
             if ((c.algebra.folland_cases = to_int(v, l)) < 0) fail(l, "folland_cases must be nonnegative");
         }},
        {"algebra.n_range",
         [](RunConfig& c, const std::string& v, int l) {
             if ((c.algebra.n_range = to_int(v, l)) < 0) fail(l, "n_range must be nonnegative");
         }},
        {"algebra.sample_scale",
         [](RunConfig& c, const std::string& v, int l) {
             positive(c.algebra.sample_scale = to_double(v, l), l, "sample_scale");
         }},
        {"algebra.pds_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.algebra.pds_tol = to_double(v, l), l, "pds_tol"); }},
        {"algebra.folland_tol",
         [](RunConfig& c, const std::string& v, int l) {
             positive(c.algebra.folland_tol = to_double(v, l), l, "folland_tol");
         }},
        {"algebra.factorization_tol",
         [](RunConfig& c, const std::string& v, int l) {
             positive(c.algebra.factorization_tol = to_double(v, l), l, "factorization_tol");
         }},
        {"algebra.factorization_order",
         [](RunConfig& c, const std::string& v, int l) {
             if ((c.algebra.factorization_order = to_int(v, l)) < 4) fail(l, "factorization_order must be at least 4");
         }},
        {"algebra.bpu_tol",
         [](RunConfig& c, const std::string& v, int l) { positive(c.algebra.bpu_tol = to_double(v, l), l, "bpu_tol"); }},
        {"algebra.bpu_order",
         [](RunConfig& c, const std::string& v, int l) {
             if ((c.algebra.bpu_order = to_int(v, l)) < 4) fail(l, "bpu_order must be at least 4");
         }},
        {"algebra.bpu_k",
         [](RunConfig& c, const std::string& v, int l) {
             c.algebra.bpu_k = to_ints(v, l);
             if (c.algebra.bpu_k.size() < 2) fail(l, "bpu_k needs at least two levels");
         }},
        {"fixture.matrix", [](RunConfig& c, const std::string& v, int l) { c.algebra.fixture = to_matrix(v, l); }},
        {"flow.t_end", [](RunConfig& c, const std::string& v, int l) { positive(c.flow.t_end = to_double(v, l), l, "t_end"); }},
        {"flow.samples",
         [](RunConfig& c, const std::string& v, int l) {
             if ((c.flow.samples = to_int(v, l)) < 2) fail(l, "samples must be at least 2");
         }},
        {"flow.holonomy_radii",
         [](RunConfig& c, const std::string& v, int l) {
             c.flow.holonomy_radii = to_doubles(v, l);
             if (c.flow.holonomy_radii.size() < 2) fail(l, "need at least two holonomy radii");
             for (double r : c.flow.holonomy_radii) positive(r, l, "holonomy radius");
         }},
        {"flow.min_holonomy_slope",
         [](RunConfig& c, const std::string& v, int l) { c.flow.min_holonomy_slope = to_double(v, l); }},
        {"output.dir",
         [](RunConfig& c, const std::string& v, int l) {
             c.output_dir = unquote(v);
             if (c.output_dir.empty()) fail(l, "empty output directory");
         }},
    };
    return s;
}

const std::set<std::string>& sections() {
    static const std::set<std::string> s = {"model", "ladder", "tolerances", "weyl", "algebra", "fixture", "flow", "output"};
    return s;
}

void check_model(const RunConfig& c) {
    const std::size_t arity = c.model.kind == "sphere" ? 3 : 2;
    for (const auto& t : c.model.hamiltonian)
        if (t.exponents.size() != arity)
            throw ConfigError("model.hamiltonian: " + c.model.kind + " terms take " + std::to_string(arity) +
                              " exponents");
    if (c.model.kind != "radial" && !c.model.potential.empty())
        throw ConfigError("model.potential is only meaningful for the radial model");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.model.hamiltonian = {{1.0, {1, 1}}};
    std::istringstream is(text);
    std::string raw, section;
    std::set<std::string> seen;
    int line = 0;
    bool have_version = false;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (!sections().count(section)) fail(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        const auto it = schema().find(full);
        if (it == schema().end()) fail(line, "unknown key '" + full + "'");
        if (!seen.insert(full).second) fail(line, "duplicate key '" + full + "'");
        if (value.empty()) fail(line, "missing value for '" + full + "'");
        it->second(cfg, value, line);
        if (full == "schema_version") {
            have_version = true;
            if (cfg.schema_version != kSchemaVersion)
                fail(line, "unsupported schema_version " + std::to_string(cfg.schema_version));
        }
    }
    if (!have_version) throw ConfigError("missing schema_version");
    check_model(cfg);
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

}  // namespace kspec::cli
