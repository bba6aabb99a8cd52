#include "entfree/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "entfree/errors.hpp"

namespace entfree {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Tracks which keys of one section were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const pt::ptree* tree, std::string name, std::string source)
        : tree_(tree), name_(std::move(name)), source_(std::move(source)) {}

    bool present() const { return tree_ != nullptr; }

    std::optional<std::string> text(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        auto child = tree_->get_child_optional(key);
        if (!child) return std::nullopt;
        return trim(child->data());
    }

    std::string required_text(const std::string& key) {
        auto v = text(key);
        if (!v || v->empty()) fail(key, "is required");
        return *v;
    }

    std::optional<double> real(const std::string& key) {
        auto v = text(key);
        if (!v) return std::nullopt;
        return parse_real(key, *v);
    }

    double required_real(const std::string& key) { return parse_real(key, required_text(key)); }

    double real_or(const std::string& key, double fallback) { return real(key).value_or(fallback); }

    std::optional<long long> integer(const std::string& key) {
        auto v = text(key);
        if (!v) return std::nullopt;
        std::size_t pos = 0;
        long long out = 0;
        try {
            out = std::stoll(*v, &pos);
        } catch (const std::exception&) {
            fail(key, "must be an integer, got '" + *v + "'");
        }
        if (pos != v->size()) fail(key, "must be an integer, got '" + *v + "'");
        return out;
    }

    long long integer_or(const std::string& key, long long fallback) {
        return integer(key).value_or(fallback);
    }

    std::vector<double> real_list(const std::string& key) {
        std::vector<double> out;
        auto v = text(key);
        if (!v) return out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
        return out;
    }

    bool boolean_or(const std::string& key, bool fallback) {
        auto v = text(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        fail(key, "must be true or false, got '" + *v + "'");
    }

    template <typename Enum>
    Enum choice(const std::string& key, const std::map<std::string, Enum>& options,
                std::optional<Enum> fallback) {
        auto v = text(key);
        if (!v) {
            if (!fallback) fail(key, "is required");
            return *fallback;
        }
        auto it = options.find(*v);
        if (it == options.end()) {
            std::string names;
            for (const auto& [name, _] : options) names += (names.empty() ? "" : ", ") + name;
            fail(key, "must be one of {" + names + "}, got '" + *v + "'");
        }
        return it->second;
    }

    void reject_unknown() const {
        if (!tree_) return;
        for (const auto& [key, _] : *tree_)
            if (!used_.count(key))
                throw ConfigError(source_ + ": unknown key '" + key + "' in [" + name_ + "]");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(source_ + ": [" + name_ + "] " + key + " " + what);
    }

private:
    double parse_real(const std::string& key, const std::string& v) const {
        std::size_t pos = 0;
        double out = 0.0;
        try {
            out = std::stod(v, &pos);
        } catch (const std::exception&) {
            fail(key, "must be a number, got '" + v + "'");
        }
        if (pos != v.size() || !std::isfinite(out)) fail(key, "must be a finite number, got '" + v + "'");
        return out;
    }

    const pt::ptree* tree_;
    std::string name_;
    std::string source_;
    std::set<std::string> used_;
};

const std::map<std::string, continuum::PotentialKind> kPotentialKinds = {
    {"gaussian_bump", continuum::PotentialKind::gaussian_bump},
    {"soft_coulomb", continuum::PotentialKind::soft_coulomb},
    {"harmonic", continuum::PotentialKind::harmonic},
};

continuum::Potential1D read_potential(Section& s, const std::string& prefix,
                                      continuum::PotentialKind kind) {
    continuum::Potential1D v;
    v.kind = kind;
    v.strength = s.real_or(prefix + "strength", 0.0);
    v.range = s.real_or(prefix + "range", 1.0);
    v.center = s.real_or(prefix + "center", 0.0);
    if (v.range <= 0.0) s.fail(prefix + "range", "must be positive");
    return v;
}

std::optional<continuum::Potential1D> read_external(Section& s, const std::string& name) {
    auto kind = s.text(name);
    const std::string prefix = name + "_";
    if (!kind || *kind == "none") {
        for (const char* k : {"strength", "range", "center"})
            if (s.text(prefix + k)) s.fail(prefix + k, "given but " + name + " is none");
        return std::nullopt;
    }
    auto it = kPotentialKinds.find(*kind);
    if (it == kPotentialKinds.end())
        s.fail(name, "must be none, gaussian_bump, soft_coulomb or harmonic, got '" + *kind + "'");
    return read_potential(s, prefix, it->second);
}

PacketConfig read_packet(Section& s, const std::string& suffix) {
    PacketConfig p;
    p.x0 = s.required_real("x0_" + suffix);
    p.p0 = s.real_or("p0_" + suffix, 0.0);
    p.width = s.required_real("width_" + suffix);
    if (p.width <= 0.0) s.fail("width_" + suffix, "must be positive");
    return p;
}

void check_grid(Section& s, const std::string& key, Index n, double dx) {
    try {
        (void)continuum::Grid1D::centered(n, dx);
    } catch (const PreconditionError& e) {
        s.fail(key, std::string("describes an invalid grid: ") + e.what());
    }
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::finite: return "finite";
        case Mode::continuum: return "continuum";
        case Mode::verify: return "verify";
    }
    return "?";
}

std::string to_string(Engine engine) {
    switch (engine) {
        case Engine::exact: return "exact";
        case Engine::hartree: return "hartree";
        case Engine::classical: return "classical";
    }
    return "?";
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    static const std::set<std::string> sections = {"scenario", "finite", "continuum", "checks"};
    for (const auto& [name, child] : tree) {
        if (!sections.count(name)) throw ConfigError(source + ": unknown section [" + name + "]");
        if (!child.data().empty() && child.empty())
            throw ConfigError(source + ": key '" + name + "' outside any section");
    }
    auto section = [&](const std::string& name) {
        auto child = tree.get_child_optional(name);
        return Section(child ? &*child : nullptr, name, source);
    };

    ScenarioConfig cfg;
    Section sc = section("scenario");
    if (!sc.present()) throw ConfigError(source + ": missing [scenario] section");
    cfg.id = sc.required_text("id");
    if (!std::regex_match(cfg.id, std::regex("[A-Za-z0-9_.-]+")))
        sc.fail("id", "may only contain letters, digits, '_', '.' and '-'");
    cfg.mode = sc.choice<Mode>(
        "mode", {{"finite", Mode::finite}, {"continuum", Mode::continuum}, {"verify", Mode::verify}},
        std::nullopt);
    const long long seed = sc.integer_or("seed", 0);
    if (seed < 0) sc.fail("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.hbar = sc.real_or("hbar", 1.0);
    if (cfg.hbar <= 0.0) sc.fail("hbar", "must be positive");
    cfg.output_dir = sc.text("output_dir").value_or("output");
    if (cfg.output_dir.empty()) sc.fail("output_dir", "must not be empty");
    cfg.filter = sc.text("filter").value_or("");
    if (cfg.mode == Mode::verify) {
        if (sc.text("dt") || sc.text("t_final")) sc.fail("dt", "is not used in verify mode");
    } else {
        if (!cfg.filter.empty()) sc.fail("filter", "is only valid in verify mode");
        cfg.dt = sc.required_real("dt");
        cfg.t_final = sc.required_real("t_final");
        if (cfg.dt <= 0.0) sc.fail("dt", "must be positive");
        if (cfg.t_final <= 0.0) sc.fail("t_final", "must be positive");
    }
    sc.reject_unknown();

    Section fs = section("finite");
    Section cs = section("continuum");
    if (cfg.mode != Mode::finite && fs.present())
        throw ConfigError(source + ": [finite] given but mode is " + to_string(cfg.mode));
    if (cfg.mode != Mode::continuum && cs.present())
        throw ConfigError(source + ": [continuum] given but mode is " + to_string(cfg.mode));

    if (cfg.mode == Mode::finite) {
        if (!fs.present()) throw ConfigError(source + ": finite mode needs a [finite] section");
        FiniteConfig& f = cfg.finite;
        f.dim_a = fs.integer_or("dim_a", 2);
        f.dim_b = fs.integer_or("dim_b", 2);
        if (f.dim_a < 2 || f.dim_b < 2) fs.fail("dim_a", "and dim_b must be at least 2");
        if (f.dim_a * f.dim_b > kMaxBipartiteDim) fs.fail("dim_a", "* dim_b exceeds 4096");
        f.hamiltonian = fs.choice<HamiltonianKind>(
            "hamiltonian",
            {{"sigma_zz", HamiltonianKind::sigma_zz},
             {"zero", HamiltonianKind::zero},
             {"random", HamiltonianKind::random},
             {"random_factorisable", HamiltonianKind::random_factorisable},
             {"file", HamiltonianKind::file}},
            std::nullopt);
        f.hamiltonian_scale = fs.real_or("hamiltonian_scale", 1.0);
        if (f.hamiltonian_scale <= 0.0) fs.fail("hamiltonian_scale", "must be positive");
        if (f.hamiltonian == HamiltonianKind::sigma_zz && (f.dim_a != 2 || f.dim_b != 2))
            fs.fail("hamiltonian", "sigma_zz needs dim_a = dim_b = 2");
        if (f.hamiltonian == HamiltonianKind::file) {
            f.hamiltonian_file = fs.required_text("hamiltonian_file");
            ComplexMatrix h;
            try {
                h = load_matrix(f.hamiltonian_file);
            } catch (const IoError& e) {
                fs.fail("hamiltonian_file", e.what());
            }
            if (h.rows() != f.dim_a * f.dim_b || h.cols() != h.rows())
                fs.fail("hamiltonian_file", "must hold a square matrix of size dim_a * dim_b");
            if (!is_hermitian(h)) fs.fail("hamiltonian_file", "must hold a Hermitian matrix");
        } else if (fs.text("hamiltonian_file")) {
            fs.fail("hamiltonian_file", "is only valid with hamiltonian = file");
        }
        f.segments = static_cast<int>(fs.integer_or("segments", 1));
        if (f.segments < 1) fs.fail("segments", "must be at least 1");
        const double steps = cfg.t_final / f.segments / cfg.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps) || std::round(steps) < 1)
            fs.fail("segments", "t_final / segments must be a whole number of dt steps");
        f.initial_state = fs.choice<InitialStateKind>(
            "initial_state",
            {{"plus_plus", InitialStateKind::plus_plus},
             {"basis", InitialStateKind::basis},
             {"random_product", InitialStateKind::random_product},
             {"random", InitialStateKind::random}},
            InitialStateKind::plus_plus);
        f.rate_dts = fs.real_list("rate_dts");
        if (!f.rate_dts.empty()) {
            if (f.rate_dts.size() < 2) fs.fail("rate_dts", "needs at least two entries");
            for (std::size_t k = 0; k < f.rate_dts.size(); ++k) {
                if (f.rate_dts[k] <= 0.0) fs.fail("rate_dts", "entries must be positive");
                if (k > 0 && std::abs(f.rate_dts[k - 1] - 2.0 * f.rate_dts[k]) > 1e-12 * f.rate_dts[k - 1])
                    fs.fail("rate_dts", "each entry must be half the previous one");
            }
            if (f.initial_state == InitialStateKind::random)
                fs.fail("rate_dts", "needs a product initial_state");
        }
        f.track_mean_field = fs.boolean_or("track_mean_field", true);
        fs.reject_unknown();
    }

    if (cfg.mode == Mode::continuum) {
        if (!cs.present()) throw ConfigError(source + ": continuum mode needs a [continuum] section");
        ContinuumConfig& c = cfg.continuum;
        c.engine = cs.choice<Engine>(
            "engine",
            {{"exact", Engine::exact}, {"hartree", Engine::hartree}, {"classical", Engine::classical}},
            Engine::exact);
        c.n_a = cs.integer_or("n_a", 256);
        c.dx_a = cs.required_real("dx_a");
        c.n_b = cs.integer_or("n_b", c.n_a);
        c.dx_b = cs.real_or("dx_b", c.dx_a);
        check_grid(cs, "n_a", c.n_a, c.dx_a);
        check_grid(cs, "n_b", c.n_b, c.dx_b);
        c.mass_a = cs.real_or("mass_a", 1.0);
        c.mass_b = cs.real_or("mass_b", 1.0);
        if (c.mass_a <= 0.0 || c.mass_b <= 0.0) cs.fail("mass_a", "and mass_b must be positive");
        c.packet_a = read_packet(cs, "a");
        c.packet_b = read_packet(cs, "b");
        const auto kind = cs.choice<continuum::PotentialKind>("potential", kPotentialKinds,
                                                             continuum::PotentialKind::gaussian_bump);
        c.potential.interaction = read_potential(cs, "", kind);
        c.potential.external_a = read_external(cs, "external_a");
        c.potential.external_b = read_external(cs, "external_b");
        c.mask_width = cs.real_or("mask_width", 0.0);
        c.mask_exponent = cs.real_or("mask_exponent", 0.125);
        if (c.mask_width < 0.0) cs.fail("mask_width", "must be non-negative");
        if (c.mask_exponent <= 0.0) cs.fail("mask_exponent", "must be positive");
        if (c.mask_width > 0.0 && c.engine != Engine::exact)
            cs.fail("mask_width", "is only supported by the exact engine");
        c.sample_every = static_cast<int>(cs.integer_or("sample_every", 10));
        if (c.sample_every < 1) cs.fail("sample_every", "must be at least 1");
        if (c.engine == Engine::hartree && std::abs(c.dx_a - c.dx_b) > 1e-12 * c.dx_a)
            cs.fail("dx_b", "must equal dx_a for the hartree engine");
        cs.reject_unknown();
    }

    Section ks = section("checks");
    if (cfg.mode == Mode::verify && ks.present())
        throw ConfigError(source + ": [checks] is not used in verify mode");
    ChecksConfig& k = cfg.checks;
    k.min_purity = ks.real("min_purity");
    k.curvature_expected = ks.real("curvature_expected");
    k.curvature_tolerance = ks.real_or("curvature_tolerance", 1e-3);
    k.rate_relative_tolerance = ks.real_or("rate_relative_tolerance", 1e-4);
    k.max_norm_drift = ks.real("max_norm_drift");
    k.max_energy_drift = ks.real("max_energy_drift");
    k.max_final_entropy = ks.real("max_final_entropy");
    k.min_final_entropy = ks.real("min_final_entropy");
    k.max_classical_deviation_dx = ks.real_or("max_classical_deviation_dx", 2.0);
    if (k.curvature_tolerance <= 0.0) ks.fail("curvature_tolerance", "must be positive");
    if (k.rate_relative_tolerance <= 0.0) ks.fail("rate_relative_tolerance", "must be positive");
    if (k.max_classical_deviation_dx <= 0.0) ks.fail("max_classical_deviation_dx", "must be positive");
    if (cfg.mode == Mode::finite && cfg.finite.rate_dts.empty() && k.curvature_expected)
        ks.fail("curvature_expected", "needs [finite] rate_dts");
    ks.reject_unknown();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

ComplexMatrix parse_matrix(const std::string& text, const std::string& source) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != tok.size() || !std::isfinite(v))
                throw IoError(source + ": bad number '" + tok + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(source + ": no matrix rows");
    const std::size_t width = rows.front().size();
    if (width == 0 || width % 2 != 0) throw IoError(source + ": rows need (re, im) pairs");
    ComplexMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(width / 2));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != width) throw IoError(source + ": ragged rows");
        for (std::size_t j = 0; j < width / 2; ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = Complex(rows[i][2 * j], rows[i][2 * j + 1]);
    }
    return m;
}

ComplexMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read matrix file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matrix(ss.str(), path);
}

}  // namespace entfree
