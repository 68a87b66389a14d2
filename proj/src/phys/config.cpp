#include "vin/phys/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vin::phys {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class KvReader {
public:
    explicit KvReader(const KeyValues& kv) : kv_(kv) {}

    double number(const std::string& key) const {
        return std::stod(require(key));
    }
    double number_or(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() || it->second.empty() ? fallback
                                                     : std::stod(it->second);
    }
    long long integer(const std::string& key) const {
        return std::stoll(require(key));
    }
    long long integer_or(const std::string& key, long long fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() || it->second.empty() ? fallback
                                                     : std::stoll(it->second);
    }
    std::uint64_t uinteger_or(const std::string& key,
                              std::uint64_t fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() || it->second.empty() ? fallback
                                                     : std::stoull(it->second);
    }
    bool flag_or(const std::string& key, bool fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end() || it->second.empty()) return fallback;
        return it->second == "1" || it->second == "true";
    }
    std::string text_or(const std::string& key, std::string fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? std::move(fallback) : it->second;
    }
    const std::string& require(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end() || it->second.empty())
            throw std::invalid_argument("config: missing required key '" +
                                        key + "'");
        return it->second;
    }

private:
    const KeyValues& kv_;
};

}  // namespace

KeyValues parse_kv_text(const std::string& text) {
    KeyValues kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " +
                                        std::to_string(lineno) +
                                        " is not key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues load_kv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_kv_text(buf.str());
}

void save_kv_file(const KeyValues& kv, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("config: cannot write " + path);
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    if (!os) throw std::runtime_error("config: short write to " + path);
}

KeyValues spec_to_kv(const SimSpec& spec) {
    KeyValues kv;
    kv["system"] = force_law_name(spec.system);
    kv["n_object"] = std::to_string(spec.n_object);
    kv["frames"] = std::to_string(spec.frames);
    kv["stride"] = std::to_string(spec.stride);
    kv["seed"] = std::to_string(spec.seed);
    kv["radius"] = fmt_double(spec.radius);
    kv["density"] = fmt_double(spec.density);
    kv["friction"] = fmt_double(spec.friction);
    kv["v_init"] = fmt_double(spec.v_init);
    kv["kappa"] = fmt_double(spec.kappa);
    kv["rest_length"] = fmt_double(spec.rest_length);
    kv["gravity_g"] = fmt_double(spec.gravity_g);
    kv["gravity_f_max"] = fmt_double(spec.gravity_f_max);
    kv["lambda_center"] = fmt_double(spec.lambda_center);
    kv["tangent_speed"] = fmt_double(spec.tangent_speed);
    kv["tangent_noise"] = fmt_double(spec.tangent_noise);
    kv["coulomb_k"] = fmt_double(spec.coulomb_k);
    kv["charge"] = fmt_double(spec.charge);
    kv["variable_mass"] = spec.variable_mass ? "1" : "0";
    kv["radius_min"] = fmt_double(spec.radius_min);
    kv["radius_max"] = fmt_double(spec.radius_max);
    kv["invisible"] = spec.invisible_object ? "1" : "0";
    kv["background"] = spec.render.background;
    kv["cifar_train_path"] = spec.render.cifar_train_path;
    kv["cifar_test_path"] = spec.render.cifar_test_path;
    return kv;
}

SimSpec spec_from_kv(const KeyValues& kv) {
    KvReader r(kv);
    SimSpec spec;
    spec.system = force_law_from_name(r.require("system"));
    spec.n_object = int(r.integer("n_object"));
    spec.frames = int(r.integer_or("frames", 64));
    spec.stride = int(r.integer("stride"));
    spec.seed = r.uinteger_or("seed", 1);
    spec.radius = r.number("radius");
    spec.density = r.number("density");
    spec.friction = r.number("friction");
    spec.v_init = r.number_or("v_init", 0.0);
    switch (spec.system) {
        case ForceLaw::kSpring:
            spec.kappa = r.number("kappa");
            spec.rest_length = r.number("rest_length");
            break;
        case ForceLaw::kGravity:
            spec.gravity_g = r.number("gravity_g");
            spec.gravity_f_max = r.number("gravity_f_max");
            spec.lambda_center = r.number("lambda_center");
            spec.tangent_speed = r.number("tangent_speed");
            spec.tangent_noise = r.number("tangent_noise");
            break;
        case ForceLaw::kMagneticBilliards:
            spec.coulomb_k = r.number("coulomb_k");
            spec.charge = r.number("charge");
            break;
        default:
            break;
    }
    spec.variable_mass = r.flag_or("variable_mass", false);
    spec.radius_min = r.number_or("radius_min", spec.radius_min);
    spec.radius_max = r.number_or("radius_max", spec.radius_max);
    spec.invisible_object = r.flag_or("invisible", false);
    spec.render.background = r.text_or("background", "procedural");
    spec.render.cifar_train_path = r.text_or("cifar_train_path", "");
    spec.render.cifar_test_path = r.text_or("cifar_test_path", "");
    spec.validate();
    return spec;
}

SimSpec load_spec(const std::string& path) {
    return spec_from_kv(load_kv_file(path));
}

void save_spec(const SimSpec& spec, const std::string& path) {
    save_kv_file(spec_to_kv(spec), path);
}

}  // namespace vin::phys
