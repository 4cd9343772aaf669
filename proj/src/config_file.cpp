#include "skyreserve/config_file.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "skyreserve/units_atmos.hpp"

namespace skyreserve::config {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + v + "'", line);
    }
}

long parse_int(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + v + "'", line);
    }
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("expected true/false, got '" + v + "'", line);
}

std::vector<int> parse_int_list(const std::string& v, int line) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw ConfigError("empty list entry", line);
        out.push_back(static_cast<int>(parse_int(tok, line)));
    }
    if (out.empty()) throw ConfigError("empty list", line);
    return out;
}

std::string fmt(double v) {
    char buf[48];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) break;  // shortest exact representation
    }
    return buf;
}

}  // namespace

ProjectConfig defaults() { return ProjectConfig{}; }

ProjectConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path, 0);

    ProjectConfig cfg = defaults();
    bool drag_table_cleared = false;
    std::map<std::string, powerplant::DragComponent> pending_components;
    std::vector<std::string> component_order;

    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError("unterminated section header", line_no);
            section = trim(text.substr(1, text.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", line_no);
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value", line_no);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", line_no);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);

        auto& a = cfg.aircraft;
        auto& s = cfg.scenario;
        if (section == "aircraft") {
            if (key == "n_rotors") a.n_rotors = static_cast<int>(parse_int(value, line_no));
            else if (key == "rotor_radius_m") a.rotor_radius = parse_double(value, line_no);
            else if (key == "n_blades") a.n_blades = static_cast<int>(parse_int(value, line_no));
            else if (key == "solidity") a.solidity = parse_double(value, line_no);
            else if (key == "cruise_rpm")
                a.cruise_omega = parse_double(value, line_no) * units::kRpmToRadps;
            else if (key == "wing_area_m2") a.wing_area = parse_double(value, line_no);
            else if (key == "aspect_ratio") a.aspect_ratio = parse_double(value, line_no);
            else if (key == "oswald") a.oswald = parse_double(value, line_no);
            else if (key == "mtom_kg") a.mtom = parse_double(value, line_no);
            else if (key == "gravity") a.gravity = parse_double(value, line_no);
            else if (key == "kappa") a.kappa = parse_double(value, line_no);
            else if (key == "k_mu") a.k_mu = parse_double(value, line_no);
            else if (key == "blade_cd0") a.blade_cd0 = parse_double(value, line_no);
            else if (key == "k_lift") a.k_lift = parse_double(value, line_no);
            else if (key == "eta_drv") a.eta_drv = parse_double(value, line_no);
            else if (key == "p_hotel_w") a.p_hotel = parse_double(value, line_no);
            else if (key == "max_shaft_power_w") a.max_shaft_power = parse_double(value, line_no);
            else if (key == "cruise_altitude_ft")
                a.cruise_altitude = parse_double(value, line_no) * units::kFtToM;
            else if (key == "speed_min_kt")
                a.speed_min = parse_double(value, line_no) * units::kKnotToMps;
            else if (key == "speed_max_kt")
                a.speed_max = parse_double(value, line_no) * units::kKnotToMps;
            else if (key == "parasite_calibration_factor")
                a.parasite_calibration_factor = parse_double(value, line_no);
            else
                throw ConfigError("unknown key '" + key + "' in [aircraft]", line_no);
        } else if (section.rfind("drag_component.", 0) == 0) {
            const std::string name = section.substr(15);
            if (name.empty()) throw ConfigError("drag component needs a name", line_no);
            if (!drag_table_cleared) {
                cfg.aircraft.drag_components.clear();
                drag_table_cleared = true;
            }
            auto it = pending_components.find(name);
            if (it == pending_components.end()) {
                powerplant::DragComponent c;
                c.name = name;
                it = pending_components.emplace(name, c).first;
                component_order.push_back(name);
            }
            auto& c = it->second;
            if (key == "wetted_area_m2") c.wetted_area = parse_double(value, line_no);
            else if (key == "form_factor") c.form_factor = parse_double(value, line_no);
            else if (key == "characteristic_length_m")
                c.characteristic_length = parse_double(value, line_no);
            else if (key == "bluff") c.bluff_body = parse_bool(value, line_no);
            else if (key == "bluff_cd") c.bluff_cd = parse_double(value, line_no);
            else
                throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
        } else if (section == "scenario") {
            if (key == "densities") cfg.densities = parse_int_list(value, line_no);
            else if (key == "n_aircraft") s.n_aircraft = static_cast<int>(parse_int(value, line_no));
            else if (key == "runs") s.runs = static_cast<int>(parse_int(value, line_no));
            else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
            else if (key == "dt_s") s.dt = parse_double(value, line_no);
            else if (key == "max_sim_time_s") s.max_sim_time = parse_double(value, line_no);
            else if (key == "sector_radius_nm")
                s.sector_radius = parse_double(value, line_no) * units::kNmToM;
            else if (key == "alpha") s.alpha = parse_double(value, line_no);
            else if (key == "exit_bearing_min_deg")
                s.exit_bearing_min = parse_double(value, line_no) * units::kDegToRad;
            else if (key == "exit_bearing_max_deg")
                s.exit_bearing_max = parse_double(value, line_no) * units::kDegToRad;
            else if (key == "rpz_nm")
                s.detection.r_pz = parse_double(value, line_no) * units::kNmToM;
            else if (key == "tlook_s") s.detection.t_look = parse_double(value, line_no);
            else if (key == "nmac_ft")
                s.nmac_threshold = parse_double(value, line_no) * units::kFtToM;
            else if (key == "radial_scale_min") s.radial_scale_min = parse_double(value, line_no);
            else if (key == "radial_scale_max") s.radial_scale_max = parse_double(value, line_no);
            else if (key == "neighbor_radius_nm")
                s.neighbor_radius = parse_double(value, line_no) * units::kNmToM;
            else if (key == "max_spawn_iterations")
                s.max_spawn_iterations = static_cast<int>(parse_int(value, line_no));
            else
                throw ConfigError("unknown key '" + key + "' in [scenario]", line_no);
        } else if (section == "predictor") {
            auto& n = cfg.net;
            if (key == "hidden_dim") n.hidden_dim = static_cast<int>(parse_int(value, line_no));
            else if (key == "n_blocks") n.n_blocks = static_cast<int>(parse_int(value, line_no));
            else if (key == "ffn_inner_dim")
                n.ffn_inner_dim = static_cast<int>(parse_int(value, line_no));
            else if (key == "dropout") n.dropout_rate = parse_double(value, line_no);
            else if (key == "logvar_min") n.logvar_min = parse_double(value, line_no);
            else if (key == "logvar_max") n.logvar_max = parse_double(value, line_no);
            else
                throw ConfigError("unknown key '" + key + "' in [predictor]", line_no);
        } else if (section == "train") {
            auto& t = cfg.train;
            if (key == "learning_rate") t.learning_rate = parse_double(value, line_no);
            else if (key == "weight_decay") t.weight_decay = parse_double(value, line_no);
            else if (key == "batch_size") t.batch_size = static_cast<int>(parse_int(value, line_no));
            else if (key == "grad_clip_norm") t.grad_clip_norm = parse_double(value, line_no);
            else if (key == "epochs") t.epochs = static_cast<int>(parse_int(value, line_no));
            else if (key == "patience") t.patience = static_cast<int>(parse_int(value, line_no));
            else if (key == "split_fraction") t.split_fraction = parse_double(value, line_no);
            else if (key == "seed") t.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
            else
                throw ConfigError("unknown key '" + key + "' in [train]", line_no);
        } else if (section.empty()) {
            throw ConfigError("key '" + key + "' outside any section", line_no);
        } else {
            throw ConfigError("unknown section [" + section + "]", line_no);
        }
    }

    if (drag_table_cleared) {
        for (const auto& name : component_order)
            cfg.aircraft.drag_components.push_back(pending_components.at(name));
    }
    // keep the solidity/chord invariant after any overrides
    cfg.aircraft.blade_chord =
        cfg.aircraft.solidity * kPi * cfg.aircraft.rotor_radius / cfg.aircraft.n_blades;

    try {
        cfg.aircraft.validate();
        cfg.scenario.validate();
        cfg.net.validate();
        cfg.train.validate();
        for (int n : cfg.densities) {
            simkit::ScenarioConfig probe = cfg.scenario;
            probe.n_aircraft = n;
            probe.validate();
        }
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what(), 0);
    }
    return cfg;
}

std::string to_text(const ProjectConfig& cfg) {
    std::ostringstream out;
    const auto& a = cfg.aircraft;
    out << "[aircraft]\n";
    out << "n_rotors = " << a.n_rotors << "\n";
    out << "rotor_radius_m = " << fmt(a.rotor_radius) << "\n";
    out << "n_blades = " << a.n_blades << "\n";
    out << "solidity = " << fmt(a.solidity) << "\n";
    out << "cruise_rpm = " << fmt(a.cruise_omega / units::kRpmToRadps) << "\n";
    out << "wing_area_m2 = " << fmt(a.wing_area) << "\n";
    out << "aspect_ratio = " << fmt(a.aspect_ratio) << "\n";
    out << "oswald = " << fmt(a.oswald) << "\n";
    out << "mtom_kg = " << fmt(a.mtom) << "\n";
    out << "gravity = " << fmt(a.gravity) << "\n";
    out << "kappa = " << fmt(a.kappa) << "\n";
    out << "k_mu = " << fmt(a.k_mu) << "\n";
    out << "blade_cd0 = " << fmt(a.blade_cd0) << "\n";
    out << "k_lift = " << fmt(a.k_lift) << "\n";
    out << "eta_drv = " << fmt(a.eta_drv) << "\n";
    out << "p_hotel_w = " << fmt(a.p_hotel) << "\n";
    out << "max_shaft_power_w = " << fmt(a.max_shaft_power) << "\n";
    out << "cruise_altitude_ft = " << fmt(a.cruise_altitude / units::kFtToM) << "\n";
    out << "speed_min_kt = " << fmt(a.speed_min / units::kKnotToMps) << "\n";
    out << "speed_max_kt = " << fmt(a.speed_max / units::kKnotToMps) << "\n";
    out << "parasite_calibration_factor = " << fmt(a.parasite_calibration_factor) << "\n";
    for (const auto& c : a.drag_components) {
        out << "\n[drag_component." << c.name << "]\n";
        out << "wetted_area_m2 = " << fmt(c.wetted_area) << "\n";
        out << "form_factor = " << fmt(c.form_factor) << "\n";
        out << "characteristic_length_m = " << fmt(c.characteristic_length) << "\n";
        out << "bluff = " << (c.bluff_body ? "true" : "false") << "\n";
        if (c.bluff_body) out << "bluff_cd = " << fmt(c.bluff_cd) << "\n";
    }
    const auto& s = cfg.scenario;
    out << "\n[scenario]\n";
    out << "densities = ";
    for (std::size_t i = 0; i < cfg.densities.size(); ++i)
        out << (i ? "," : "") << cfg.densities[i];
    out << "\n";
    out << "runs = " << s.runs << "\n";
    out << "seed = " << s.seed << "\n";
    out << "dt_s = " << fmt(s.dt) << "\n";
    out << "max_sim_time_s = " << fmt(s.max_sim_time) << "\n";
    out << "sector_radius_nm = " << fmt(s.sector_radius / units::kNmToM) << "\n";
    out << "alpha = " << fmt(s.alpha) << "\n";
    out << "exit_bearing_min_deg = " << fmt(s.exit_bearing_min / units::kDegToRad) << "\n";
    out << "exit_bearing_max_deg = " << fmt(s.exit_bearing_max / units::kDegToRad) << "\n";
    out << "rpz_nm = " << fmt(s.detection.r_pz / units::kNmToM) << "\n";
    out << "tlook_s = " << fmt(s.detection.t_look) << "\n";
    out << "nmac_ft = " << fmt(s.nmac_threshold / units::kFtToM) << "\n";
    out << "radial_scale_min = " << fmt(s.radial_scale_min) << "\n";
    out << "radial_scale_max = " << fmt(s.radial_scale_max) << "\n";
    out << "neighbor_radius_nm = " << fmt(s.neighbor_radius / units::kNmToM) << "\n";
    out << "max_spawn_iterations = " << s.max_spawn_iterations << "\n";
    const auto& n = cfg.net;
    out << "\n[predictor]\n";
    out << "hidden_dim = " << n.hidden_dim << "\n";
    out << "n_blocks = " << n.n_blocks << "\n";
    out << "ffn_inner_dim = " << n.ffn_inner_dim << "\n";
    out << "dropout = " << fmt(n.dropout_rate) << "\n";
    out << "logvar_min = " << fmt(n.logvar_min) << "\n";
    out << "logvar_max = " << fmt(n.logvar_max) << "\n";
    const auto& t = cfg.train;
    out << "\n[train]\n";
    out << "learning_rate = " << fmt(t.learning_rate) << "\n";
    out << "weight_decay = " << fmt(t.weight_decay) << "\n";
    out << "batch_size = " << t.batch_size << "\n";
    out << "grad_clip_norm = " << fmt(t.grad_clip_norm) << "\n";
    out << "epochs = " << t.epochs << "\n";
    out << "patience = " << t.patience << "\n";
    out << "split_fraction = " << fmt(t.split_fraction) << "\n";
    out << "seed = " << t.seed << "\n";
    return out.str();
}

}  // namespace skyreserve::config
