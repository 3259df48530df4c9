#include "nlslab/config.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlslab {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config value for " + key + " is not a number: '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config value for " + key + " is not an integer: '" + v + "'");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    explicit_keys.insert(key);
    if (key == "nonlinearity.kind") {
        if (v != "cubic_quintic" && v != "pure_power" && v != "saturable")
            throw ConfigError("unknown nonlinearity kind: " + v);
        kind = v;
    } else if (key == "nonlinearity.p") p = parse_double(key, v);
    else if (key == "nonlinearity.a") a = parse_double(key, v);
    else if (key == "nonlinearity.b") b = parse_double(key, v);
    else if (key == "nonlinearity.kappa") kappa = parse_double(key, v);
    else if (key == "grid.d") d = parse_int(key, v);
    else if (key == "grid.R") R = parse_double(key, v);
    else if (key == "grid.M") M = parse_int(key, v);
    else if (key == "continuum.R") cont_R = parse_double(key, v);
    else if (key == "continuum.M") cont_M = parse_int(key, v);
    else if (key == "run.omega") omega = parse_double(key, v);
    else if (key == "run.omega_min") omega_min = parse_double(key, v);
    else if (key == "run.omega_max") omega_max = parse_double(key, v);
    else if (key == "run.omega_count") omega_count = parse_int(key, v);
    else if (key == "spectrum.coarse_size") coarse_size = parse_int(key, v);
    else if (key == "spectrum.gap_tol_rel") gap_tol_rel = parse_double(key, v);
    else if (key == "fgr.eps0_factor") eps0_factor = parse_double(key, v);
    else if (key == "fgr.cap_fraction") cap_fraction = parse_double(key, v);
    else if (key == "fgr.cap_strength") cap_strength = parse_double(key, v);
    else if (key == "fgr.gamma_threshold") gamma_threshold = parse_double(key, v);
    else if (key == "fgr.cross_tol") cross_tol = parse_double(key, v);
    else if (key == "evolution.scheme") {
        if (v != "crank_nicolson" && v != "strang_split")
            throw ConfigError("unknown scheme: " + v);
        scheme = v;
    } else if (key == "evolution.dt") dt = parse_double(key, v);
    else if (key == "evolution.T") T = parse_double(key, v);
    else if (key == "evolution.stride") stride = parse_int(key, v);
    else if (key == "evolution.absorber_fraction") absorber_fraction = parse_double(key, v);
    else if (key == "evolution.absorber_strength") absorber_strength = parse_double(key, v);
    else if (key == "evolution.sweeps") sweeps = parse_int(key, v);
    else if (key == "tracker.z0_re") z0_re = parse_double(key, v);
    else if (key == "tracker.z0_im") z0_im = parse_double(key, v);
    else if (key == "tracker.s1") s1 = parse_double(key, v);
    else if (key == "tracker.fit_min_samples") fit_min_samples = parse_int(key, v);
    else if (key == "output.dir") out_dir = v;
    else if (key.rfind("tolerances.", 0) == 0)
        tolerances[key.substr(11)] = parse_double(key, v);
    else
        throw ConfigError("unknown config key: " + key);
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("bad section header at line " + std::to_string(lineno));
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (section.empty()) throw ConfigError("key outside a [section]: " + key);
        cfg.set(section + "." + key, val);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_text(ss.str());
}

void RunConfig::require(const std::string& key) const {
    if (key == "run.omega") {
        if (std::isnan(omega))
            throw ConfigError("missing config field: run.omega");
        return;
    }
    if (!was_set(key)) throw ConfigError("missing config field: " + key);
}

std::string RunConfig::serialize() const {
    std::ostringstream o;
    o << "[nonlinearity]\n"
      << "kind = " << kind << "\n"
      << "p = " << fmt(p) << "\n"
      << "a = " << fmt(a) << "\n"
      << "b = " << fmt(b) << "\n"
      << "kappa = " << fmt(kappa) << "\n\n";
    o << "[grid]\n"
      << "d = " << d << "\n"
      << "R = " << fmt(R) << "\n"
      << "M = " << M << "\n\n";
    o << "[continuum]\n"
      << "R = " << fmt(cont_R) << "\n"
      << "M = " << cont_M << "\n\n";
    o << "[run]\n";
    if (std::isnan(omega))
        o << "# omega is required\nomega =\n";
    else
        o << "omega = " << fmt(omega) << "\n";
    o << "omega_min = " << fmt(omega_min) << "\n"
      << "omega_max = " << fmt(omega_max) << "\n"
      << "omega_count = " << omega_count << "\n\n";
    o << "[spectrum]\n"
      << "coarse_size = " << coarse_size << "\n"
      << "gap_tol_rel = " << fmt(gap_tol_rel) << "\n\n";
    o << "[fgr]\n"
      << "eps0_factor = " << fmt(eps0_factor) << "\n"
      << "cap_fraction = " << fmt(cap_fraction) << "\n"
      << "cap_strength = " << fmt(cap_strength) << "\n"
      << "gamma_threshold = " << fmt(gamma_threshold) << "\n"
      << "cross_tol = " << fmt(cross_tol) << "\n\n";
    o << "[evolution]\n"
      << "scheme = " << scheme << "\n"
      << "dt = " << fmt(dt) << "\n"
      << "T = " << fmt(T) << "\n"
      << "stride = " << stride << "\n"
      << "absorber_fraction = " << fmt(absorber_fraction) << "\n"
      << "absorber_strength = " << fmt(absorber_strength) << "\n"
      << "sweeps = " << sweeps << "\n\n";
    o << "[tracker]\n"
      << "z0_re = " << fmt(z0_re) << "\n"
      << "z0_im = " << fmt(z0_im) << "\n"
      << "s1 = " << fmt(s1) << "\n"
      << "fit_min_samples = " << fit_min_samples << "\n\n";
    o << "[output]\n"
      << "dir = " << out_dir << "\n";
    if (!tolerances.empty()) {
        o << "\n[tolerances]\n";
        for (auto& [k, v] : tolerances) o << k << " = " << fmt(v) << "\n";
    }
    return o.str();
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

uint64_t RunConfig::config_hash() const { return fnv1a(serialize()); }

NonlinearitySpec RunConfig::nonlinearity() const {
    if (kind == "pure_power") return NonlinearitySpec::pure_power(p);
    if (kind == "cubic_quintic") return NonlinearitySpec::cubic_quintic(a, b);
    return NonlinearitySpec::saturable(kappa);
}

EvolutionConfig RunConfig::evolution() const {
    EvolutionConfig e;
    e.dt = dt;
    e.T = T;
    e.stride = stride;
    e.scheme = scheme == "strang_split" ? Scheme::StrangSplit : Scheme::CrankNicolson;
    e.absorber_fraction = absorber_fraction;
    e.absorber_strength = absorber_strength;
    e.sweeps = sweeps;
    return e;
}

std::vector<double> RunConfig::omega_range() const {
    std::vector<double> out;
    if (omega_count > 1) {
        if (!(omega_max > omega_min) || omega_min <= 0)
            throw ConfigError("omega scan requires 0 < omega_min < omega_max");
        for (int i = 0; i < omega_count; ++i)
            out.push_back(omega_min + (omega_max - omega_min) * i / (omega_count - 1));
    } else {
        require("run.omega");
        out.push_back(omega);
    }
    return out;
}

}  // namespace nlslab
