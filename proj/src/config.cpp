#include "sdr/config.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "sdr/errors.hpp"

namespace sdr {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Reader {
    const IniFile& ini;
    std::set<std::string> consumed;

    [[noreturn]] void fail(const IniFile::Entry& e, const std::string& msg) const {
        std::ostringstream out;
        out << ini.source << ":" << e.line << ": " << msg;
        throw ConfigError(out.str());
    }

    const IniFile::Entry* get(const std::string& sec, const std::string& key) {
        const auto* e = ini.find(sec, key);
        if (e) consumed.insert(sec + "." + key);
        return e;
    }

    double number(const IniFile::Entry& e) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            fail(e, e.key + ": cannot parse '" + e.value + "' as a number");
        }
    }

    void read(const std::string& sec, const std::string& key, double& dst) {
        if (const auto* e = get(sec, key)) dst = number(*e);
    }
    void read(const std::string& sec, const std::string& key, std::optional<double>& dst) {
        if (const auto* e = get(sec, key)) dst = number(*e);
    }
    void read(const std::string& sec, const std::string& key, int& dst) {
        if (const auto* e = get(sec, key)) {
            const double v = number(*e);
            dst = static_cast<int>(v);
            if (static_cast<double>(dst) != v) fail(*e, key + ": expected an integer");
        }
    }
    void read(const std::string& sec, const std::string& key, std::optional<int>& dst) {
        if (const auto* e = get(sec, key)) {
            const double v = number(*e);
            const int i = static_cast<int>(v);
            if (static_cast<double>(i) != v) fail(*e, key + ": expected an integer");
            dst = i;
        }
    }
    void read(const std::string& sec, const std::string& key, std::uint64_t& dst) {
        if (const auto* e = get(sec, key)) {
            try {
                std::size_t used = 0;
                dst = std::stoull(e->value, &used);
                if (used != e->value.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                fail(*e, key + ": expected an unsigned integer");
            }
        }
    }
    void read(const std::string& sec, const std::string& key, bool& dst) {
        if (const auto* e = get(sec, key)) {
            if (e->value == "true" || e->value == "1")
                dst = true;
            else if (e->value == "false" || e->value == "0")
                dst = false;
            else
                fail(*e, key + ": expected true/false");
        }
    }
    void read(const std::string& sec, const std::string& key, std::string& dst) {
        if (const auto* e = get(sec, key)) dst = e->value;
    }

    void reject_unknown() const {
        static const std::set<std::string> known_sections = {"geometry", "acquisition",
                                                             "sequence", "walk", "fit", "run"};
        for (const auto& sec : ini.sections) {
            if (!known_sections.count(sec.name)) {
                std::ostringstream out;
                out << ini.source << ":" << sec.line << ": unknown section [" << sec.name << "]";
                throw ConfigError(out.str());
            }
            if (sec.name == "run") continue; // metadata echo, ignored on input
            for (const auto& e : sec.entries) {
                if (!consumed.count(sec.name + "." + e.key)) {
                    std::ostringstream out;
                    out << ini.source << ":" << e.line << ": unknown key '" << e.key
                        << "' in section [" << sec.name << "]";
                    throw ConfigError(out.str());
                }
            }
        }
    }
};

}  // namespace

Geometry RunConfig::geometry() const {
    const double d0 = d0_um2_per_ms * constants::um2_per_ms_to_m2_per_s;
    if (geometry_kind == "free") return Geometry::free_space(d0);
    const double d = diameter_um.value_or(0.0) * constants::um_to_m;
    if (geometry_kind == "slab") return Geometry::slab(d, d0);
    if (geometry_kind == "cylinder") return Geometry::cylinder(d, d0);
    if (geometry_kind == "sphere") return Geometry::sphere(d, d0);
    throw ConfigError("unknown geometry kind: " + geometry_kind);
}

AcquisitionParams RunConfig::acquisition() const {
    AcquisitionParams acq;
    acq.gamma = gamma_rad_per_s_per_t;
    acq.gradient = gradient_g_per_cm * constants::gauss_per_cm_to_t_per_m;
    acq.t2 = t2_ms.value_or(0.0) * constants::ms_to_s;
    return acq;
}

double RunConfig::te() const { return te_ms * constants::ms_to_s; }
double RunConfig::gradient() const {
    return gradient_g_per_cm * constants::gauss_per_cm_to_t_per_m;
}

RunConfig parse_config(const IniFile& ini) {
    RunConfig cfg;
    Reader r{ini, {}};

    r.read("geometry", "kind", cfg.geometry_kind);
    r.read("geometry", "diameter_um", cfg.diameter_um);
    r.read("geometry", "d0_um2_per_ms", cfg.d0_um2_per_ms);

    r.read("acquisition", "gradient_g_per_cm", cfg.gradient_g_per_cm);
    r.read("acquisition", "gamma_rad_per_s_per_t", cfg.gamma_rad_per_s_per_t);
    r.read("acquisition", "t2_ms", cfg.t2_ms);

    r.read("sequence", "n_pulses", cfg.n_pulses);
    r.read("sequence", "te_ms", cfg.te_ms);
    r.read("sequence", "kind", cfg.sequence_kind);
    r.read("sequence", "x_ms", cfg.x_ms);
    r.read("sequence", "x_min_ms", cfg.x_min_ms);
    r.read("sequence", "x_max_ms", cfg.x_max_ms);
    r.read("sequence", "x_count", cfg.x_count);
    r.read("sequence", "te_min_ms", cfg.te_min_ms);
    r.read("sequence", "te_max_ms", cfg.te_max_ms);
    r.read("sequence", "te_count", cfg.te_count);

    r.read("walk", "dt_ms", cfg.dt_ms);
    r.read("walk", "n_walkers", cfg.n_walkers);
    r.read("walk", "seed", cfg.seed);
    r.read("walk", "duration_ms", cfg.duration_ms);
    r.read("walk", "workers", cfg.workers);

    r.read("fit", "d_min_um", cfg.d_min_um);
    r.read("fit", "d_max_um", cfg.d_max_um);
    r.read("fit", "multistarts", cfg.multistarts);
    r.read("fit", "fit_amplitude", cfg.fit_amplitude);
    r.read("fit", "fit_d0", cfg.fit_d0);

    r.reject_unknown();

    // cheap structural validation; command-specific checks happen at use
    const std::set<std::string> kinds = {"free", "slab", "cylinder", "sphere"};
    if (!kinds.count(cfg.geometry_kind))
        throw ConfigError(ini.source + ": [geometry] kind: expected free|slab|cylinder|sphere, got '" +
                          cfg.geometry_kind + "'");
    const std::set<std::string> seq_kinds = {"hahn", "cpmg", "sdr"};
    if (!seq_kinds.count(cfg.sequence_kind))
        throw ConfigError(ini.source + ": [sequence] kind: expected hahn|cpmg|sdr, got '" +
                          cfg.sequence_kind + "'");
    if (cfg.geometry_kind != "free" && cfg.diameter_um && !(*cfg.diameter_um > 0.0))
        throw ConfigError(ini.source + ": [geometry] diameter_um must be positive");
    if (cfg.d0_um2_per_ms < 0.0)
        throw ConfigError(ini.source + ": [geometry] d0_um2_per_ms must be >= 0");
    return cfg;
}

IniFile serialize_config(const RunConfig& cfg) {
    IniFile ini;
    ini.set("geometry", "kind", cfg.geometry_kind);
    if (cfg.diameter_um) ini.set("geometry", "diameter_um", fmt(*cfg.diameter_um));
    ini.set("geometry", "d0_um2_per_ms", fmt(cfg.d0_um2_per_ms));

    ini.set("acquisition", "gradient_g_per_cm", fmt(cfg.gradient_g_per_cm));
    ini.set("acquisition", "gamma_rad_per_s_per_t", fmt(cfg.gamma_rad_per_s_per_t));
    if (cfg.t2_ms) ini.set("acquisition", "t2_ms", fmt(*cfg.t2_ms));

    ini.set("sequence", "n_pulses", std::to_string(cfg.n_pulses));
    ini.set("sequence", "te_ms", fmt(cfg.te_ms));
    ini.set("sequence", "kind", cfg.sequence_kind);
    if (cfg.x_ms) ini.set("sequence", "x_ms", fmt(*cfg.x_ms));
    if (cfg.x_min_ms) ini.set("sequence", "x_min_ms", fmt(*cfg.x_min_ms));
    if (cfg.x_max_ms) ini.set("sequence", "x_max_ms", fmt(*cfg.x_max_ms));
    if (cfg.x_count) ini.set("sequence", "x_count", std::to_string(*cfg.x_count));
    if (cfg.te_min_ms) ini.set("sequence", "te_min_ms", fmt(*cfg.te_min_ms));
    if (cfg.te_max_ms) ini.set("sequence", "te_max_ms", fmt(*cfg.te_max_ms));
    if (cfg.te_count) ini.set("sequence", "te_count", std::to_string(*cfg.te_count));

    if (cfg.dt_ms) ini.set("walk", "dt_ms", fmt(*cfg.dt_ms));
    ini.set("walk", "n_walkers", std::to_string(cfg.n_walkers));
    ini.set("walk", "seed", std::to_string(cfg.seed));
    if (cfg.duration_ms) ini.set("walk", "duration_ms", fmt(*cfg.duration_ms));
    ini.set("walk", "workers", std::to_string(cfg.workers));

    ini.set("fit", "d_min_um", fmt(cfg.d_min_um));
    ini.set("fit", "d_max_um", fmt(cfg.d_max_um));
    ini.set("fit", "multistarts", std::to_string(cfg.multistarts));
    ini.set("fit", "fit_amplitude", cfg.fit_amplitude ? "true" : "false");
    ini.set("fit", "fit_d0", cfg.fit_d0 ? "true" : "false");
    return ini;
}

RunConfig load_config(const std::string& path) { return parse_config(IniFile::load(path)); }

}  // namespace sdr
