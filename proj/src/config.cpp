#include "vpf/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vpf {

namespace {

double interface_indicator_threshold(double eps) {
    // a hundredth of the peak profile slope 1/(sqrt(2) eps)
    return 0.01 / (std::sqrt(2.0) * eps) * 2.0;
}

RunConfig base_config() {
    RunConfig cfg;
    cfg.control.domain = {-5, -5, 5, 5};
    cfg.control.n_coarse = 32;
    cfg.control.dirichlet = {Segment{-5, -5, -5, 5}};
    cfg.control.adapt = true;
    cfg.control.target_h = 0.111;
    cfg.control.indicator_threshold = interface_indicator_threshold(cfg.model.eps);
    cfg.control.remesh_every = 10;
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"example1_k0",  "example1_kp",  "example1_km",      "example2_km2",
            "example2_km1", "example2_kp1", "smoke_dissipative", "chs_limit"};
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg = base_config();
    cfg.preset = name;
    if (name == "example1_k0") {
        cfg.model.kappa_t = 0.0;
    } else if (name == "example1_kp") {
        cfg.model.kappa_t = 0.5;
    } else if (name == "example1_km") {
        cfg.model.kappa_t = -0.5;
    } else if (name == "example2_km2" || name == "example2_km1" || name == "example2_kp1") {
        cfg.model.chi_phi = 0.0;
        cfg.model.G_stress = 4.0;
        cfg.model.kappa_t = name == "example2_km2" ? -2.0 : name == "example2_km1" ? -1.0 : 1.0;
    } else if (name == "smoke_dissipative") {
        cfg.model.P = 0.0;
        cfg.model.chi_phi = 0.0;
        cfg.model.kappa_t = 0.0;
        cfg.model.T_end = 0.25;
        cfg.model.tol_nonlinear = 1e-9;
        cfg.control.n_coarse = 16;
        cfg.control.adapt = false;
        cfg.output_stride = 10;
    } else if (name == "chs_limit") {
        cfg.model.tau_bar = 1e-3;
        cfg.model.kappa_t = 0.0;
        cfg.model.G_stress = 0.0;
        cfg.model.dt = 1e-4;
        cfg.model.T_end = 0.01;
        cfg.control.n_coarse = 16;
        cfg.control.adapt = false;
        cfg.output_stride = 25;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
}

namespace {

struct Parser {
    RunConfig& cfg;
    std::string section;
    int lineno = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("line " + std::to_string(lineno) + ": " + msg);
    }

    std::string path(const std::string& key) const {
        return section.empty() ? key : section + "." + key;
    }

    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    double number(const std::string& key, const std::string& v) const {
        std::size_t pos = 0;
        double d;
        try {
            d = std::stod(v, &pos);
        } catch (...) {
            fail(path(key) + ": expected a number, got '" + v + "'");
        }
        if (pos != v.size()) fail(path(key) + ": trailing characters in number '" + v + "'");
        return d;
    }

    int integer(const std::string& key, const std::string& v) const {
        const double d = number(key, v);
        if (d != std::floor(d)) fail(path(key) + ": expected an integer, got '" + v + "'");
        return static_cast<int>(d);
    }

    bool boolean(const std::string& key, const std::string& v) const {
        if (v == "true") return true;
        if (v == "false") return false;
        fail(path(key) + ": expected true/false, got '" + v + "'");
    }

    std::string text(const std::string& key, const std::string& v) const {
        if (v.size() < 2 || v.front() != '"' || v.back() != '"')
            fail(path(key) + ": expected a \"quoted\" string, got '" + v + "'");
        return v.substr(1, v.size() - 2);
    }

    std::vector<double> array(const std::string& key, const std::string& v) const {
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            fail(path(key) + ": expected [a, b, ...]");
        std::vector<double> out;
        std::string inner = v.substr(1, v.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail(path(key) + ": empty array element");
            out.push_back(number(key, item));
        }
        return out;
    }

    void positive(const std::string& key, double v) const {
        if (!(v > 0)) fail(path(key) + ": must be positive");
    }

    void apply(const std::string& key, const std::string& v) {
        ModelParams& m = cfg.model;
        RunControl& c = cfg.control;
        if (section.empty()) {
            if (key == "preset") {
                const std::string name = text(key, v);
                const std::string keep_dir = cfg.out_dir;
                cfg = preset_config(name);
                cfg.out_dir = keep_dir;
                return;
            }
            fail("unknown key '" + key + "'");
        }
        if (section == "model") {
            if (key == "dt") { m.dt = number(key, v); positive(key, m.dt); return; }
            if (key == "P") { m.P = number(key, v); return; }
            if (key == "eps") { m.eps = number(key, v); positive(key, m.eps); return; }
            if (key == "beta") { m.beta = number(key, v); positive(key, m.beta); return; }
            if (key == "chi_phi") { m.chi_phi = number(key, v); return; }
            if (key == "kappa_t") { m.kappa_t = number(key, v); return; }
            if (key == "C_consumption") { m.C_consumption = number(key, v); return; }
            if (key == "K_boundary") { m.K_boundary = number(key, v); positive(key, m.K_boundary); return; }
            if (key == "eta_bar") { m.eta_bar = number(key, v); positive(key, m.eta_bar); return; }
            if (key == "G_stress") { m.G_stress = number(key, v); return; }
            if (key == "tau_bar") { m.tau_bar = number(key, v); positive(key, m.tau_bar); return; }
            if (key == "alpha") { m.alpha = number(key, v); positive(key, m.alpha); return; }
            if (key == "T_end") { m.T_end = number(key, v); if (m.T_end < 0) fail(path(key) + ": must be nonnegative"); return; }
            if (key == "tol_nonlinear") { m.tol_nonlinear = number(key, v); positive(key, m.tol_nonlinear); return; }
            if (key == "max_nonlinear_iters") { m.max_nonlinear_iters = integer(key, v); if (m.max_nonlinear_iters < 1) fail(path(key) + ": must be >= 1"); return; }
            if (key == "tol_cg") { m.tol_cg = number(key, v); positive(key, m.tol_cg); return; }
            if (key == "tol_saddle") { m.tol_saddle = number(key, v); positive(key, m.tol_saddle); return; }
            if (key == "element") {
                const std::string e = text(key, v);
                if (e == "taylor_hood") m.element_variant = ElementVariant::taylor_hood;
                else if (e == "mini") m.element_variant = ElementVariant::mini;
                else fail(path(key) + ": expected \"taylor_hood\" or \"mini\"");
                return;
            }
            fail("unknown key '" + path(key) + "'");
        }
        if (section == "mesh") {
            if (key == "n_coarse") { c.n_coarse = integer(key, v); if (c.n_coarse < 1) fail(path(key) + ": must be >= 1"); return; }
            if (key == "domain") {
                auto a = array(key, v);
                if (a.size() != 4) fail(path(key) + ": expected [x0, y0, x1, y1]");
                c.domain = {a[0], a[1], a[2], a[3]};
                return;
            }
            if (key == "dirichlet_segments") {
                auto a = array(key, v);
                if (a.size() % 4 != 0) fail(path(key) + ": expected groups of 4 coordinates");
                c.dirichlet.clear();
                for (std::size_t i = 0; i + 3 < a.size(); i += 4)
                    c.dirichlet.push_back(Segment{a[i], a[i + 1], a[i + 2], a[i + 3]});
                return;
            }
            if (key == "adapt") { c.adapt = boolean(key, v); return; }
            if (key == "target_h") { c.target_h = number(key, v); positive(key, c.target_h); return; }
            if (key == "indicator_threshold") { c.indicator_threshold = number(key, v); positive(key, c.indicator_threshold); return; }
            if (key == "remesh_every") { c.remesh_every = integer(key, v); if (c.remesh_every < 0) fail(path(key) + ": must be >= 0"); return; }
            if (key == "project_B0") { c.project_B0 = boolean(key, v); return; }
            fail("unknown key '" + path(key) + "'");
        }
        if (section == "run") {
            if (key == "naive_lambda") { c.naive_lambda = boolean(key, v); return; }
            if (key == "threads") { cfg.threads = integer(key, v); if (cfg.threads < 1) fail(path(key) + ": must be >= 1"); return; }
            if (key == "seed") { cfg.seed = static_cast<std::uint64_t>(number(key, v)); return; }
            fail("unknown key '" + path(key) + "'");
        }
        if (section == "output") {
            if (key == "dir") { cfg.out_dir = text(key, v); return; }
            if (key == "stride") { cfg.output_stride = integer(key, v); if (cfg.output_stride < 1) fail(path(key) + ": must be >= 1"); return; }
            fail("unknown key '" + path(key) + "'");
        }
        fail("unknown section '" + section + "'");
    }

    void line(std::string s) {
        // strip comments outside quotes
        bool in_quote = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_quote = !in_quote;
            else if (s[i] == '#' && !in_quote) {
                s = s.substr(0, i);
                break;
            }
        }
        s = trim(s);
        if (s.empty()) return;
        if (s.front() == '[') {
            if (s.back() != ']') fail("malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) fail("empty section name");
            return;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail("expected 'key = value' in '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (val.empty()) fail(path(key) + ": empty value");
        apply(key, val);
    }
};

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text) {
    Parser p{cfg, {}, 0};
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        ++p.lineno;
        p.line(line);
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

}  // namespace vpf
