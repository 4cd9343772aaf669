#include "skyreserve/powerplant.hpp"

#include <cmath>
#include <stdexcept>

namespace skyreserve::powerplant {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double AircraftConfig::rotor_disk_area() const {
    return kPi * rotor_radius * rotor_radius;
}

double AircraftConfig::total_disk_area() const {
    return rotor_disk_area() * n_rotors;
}

void AircraftConfig::validate() const {
    if (n_rotors < 1 || rotor_radius <= 0.0 || n_blades < 1 || blade_chord <= 0.0)
        throw std::domain_error("rotor geometry invalid");
    const double sigma = n_blades * blade_chord / (kPi * rotor_radius);
    if (std::abs(sigma - solidity) > 1e-9 * solidity)
        throw std::domain_error("solidity inconsistent with blade chord");
    if (cruise_omega * rotor_radius <= 0.0)
        throw std::domain_error("rotor tip speed must be positive");
    if (!(eta_drv > 0.0 && eta_drv <= 1.0))
        throw std::domain_error("drivetrain efficiency must be in (0, 1]");
    if (!(speed_min < speed_max))
        throw std::domain_error("speed_min must be below speed_max");
    if (wing_area <= 0.0 || aspect_ratio <= 0.0 || oswald <= 0.0 || mtom <= 0.0)
        throw std::domain_error("airframe parameters must be positive");
    if (parasite_calibration_factor <= 0.0)
        throw std::domain_error("parasite calibration factor must be positive");
    for (const auto& c : drag_components) {
        if (c.wetted_area <= 0.0)
            throw std::domain_error("drag component area must be positive: " + c.name);
        if (!c.bluff_body && c.form_factor < 1.0)
            throw std::domain_error("form factor below 1 for streamlined component: " + c.name);
        if (c.bluff_body && c.bluff_cd <= 0.0)
            throw std::domain_error("bluff component needs a positive drag coefficient: " + c.name);
        if (!c.bluff_body && c.characteristic_length <= 0.0)
            throw std::domain_error("characteristic length must be positive: " + c.name);
    }
}

AircraftConfig AircraftConfig::baseline() {
    AircraftConfig cfg;
    // Tuned once by a bisection sweep so that best_range_speed(baseline)
    // lands at 157.0 kt at 2000 ft.
    cfg.parasite_calibration_factor = 0.25607535552796310;
    cfg.drag_components = {
        {"wing", 18.5, 1.45, 1.02, false, 0.0},
        {"fuselage", 32.0, 1.34, 8.50, false, 0.0},
        {"horizontal_tail", 4.6, 1.35, 0.70, false, 0.0},
        {"vertical_tail", 3.0, 1.35, 0.80, false, 0.0},
        {"pod_1", 0.12, 1.0, 0.30, true, 0.20},
        {"pod_2", 0.12, 1.0, 0.30, true, 0.20},
        {"pod_3", 0.12, 1.0, 0.30, true, 0.20},
        {"pod_4", 0.12, 1.0, 0.30, true, 0.20},
        {"pod_5", 0.12, 1.0, 0.30, true, 0.20},
        {"pod_6", 0.12, 1.0, 0.30, true, 0.20},
        {"landing_gear", 0.08, 1.0, 0.30, true, 0.45},
    };
    return cfg;
}

double skin_friction(double reynolds) {
    if (!(reynolds > 1e4))
        throw std::domain_error("skin friction formula requires Re > 1e4");
    const double l = std::log10(reynolds);
    return 0.455 / std::pow(l, 2.58);
}

double parasite_drag_coefficient(const AircraftConfig& cfg, double airspeed,
                                 double density) {
    if (!(airspeed > 0.0))
        throw std::domain_error("airspeed must be positive");
    if (cfg.drag_components.empty())
        throw std::domain_error("drag component table is empty");
    double cd = 0.0;
    for (const auto& c : cfg.drag_components) {
        if (c.bluff_body) {
            cd += c.bluff_cd * c.wetted_area / cfg.wing_area;
        } else {
            const double re = density * airspeed * c.characteristic_length / kAirViscosity;
            cd += c.form_factor * skin_friction(re) * c.wetted_area / cfg.wing_area;
        }
    }
    return cfg.parasite_calibration_factor * cd;
}

DragBreakdown total_drag(const AircraftConfig& cfg, double airspeed, double density) {
    if (!(airspeed > 0.0))
        throw std::domain_error("airspeed must be positive");
    const double q = 0.5 * density * airspeed * airspeed;
    const double weight = cfg.mtom * cfg.gravity;
    DragBreakdown d;
    d.parasite = parasite_drag_coefficient(cfg, airspeed, density) * q * cfg.wing_area;
    d.induced = weight * weight /
                (kPi * cfg.aspect_ratio * cfg.oswald * q * cfg.wing_area);
    d.total = d.parasite + d.induced;
    return d;
}

double induced_power(const AircraftConfig& cfg, double thrust_required,
                     double airspeed, double density) {
    if (!(airspeed > 0.0))
        throw std::domain_error("high-speed inflow approximation requires V > 0");
    if (thrust_required < 0.0)
        throw std::domain_error("thrust must be non-negative");
    // v_i = v_h^2 / V with v_h^2 = T / (2 rho A_total)
    return cfg.kappa * thrust_required * thrust_required /
           (2.0 * density * cfg.total_disk_area() * airspeed);
}

double profile_power(const AircraftConfig& cfg, double thrust_required,
                     double airspeed, double density) {
    const double tip_speed = cfg.cruise_omega * cfg.rotor_radius;
    if (!(tip_speed > 0.0))
        throw std::domain_error("rotor tip speed must be positive");
    const double mu_r = airspeed / tip_speed;
    const double area = cfg.rotor_disk_area();
    const double ct = thrust_required /
                      (density * area * tip_speed * tip_speed * cfg.n_rotors);
    const double ct_sigma = ct / cfg.solidity;
    const double blade_cd = cfg.blade_cd0 * (1.0 + cfg.k_lift * ct_sigma * ct_sigma);
    return (blade_cd * cfg.solidity / 8.0) * (1.0 + cfg.k_mu * mu_r * mu_r) *
           density * area * tip_speed * tip_speed * tip_speed * cfg.n_rotors;
}

PowerBreakdown total_power(const AircraftConfig& cfg, double airspeed, double density) {
    if (!(airspeed >= cfg.speed_min && airspeed <= cfg.speed_max))
        throw std::domain_error("airspeed outside permitted cruise range");
    const DragBreakdown drag = total_drag(cfg, airspeed, density);
    const double thrust = drag.total;
    PowerBreakdown p;
    p.induced = induced_power(cfg, thrust, airspeed, density);
    p.profile = profile_power(cfg, thrust, airspeed, density);
    p.parasite = drag.total * airspeed;
    p.shaft_total = p.induced + p.profile + p.parasite;
    p.hotel = cfg.p_hotel;
    p.electrical_total = p.shaft_total / cfg.eta_drv + cfg.p_hotel;
    p.shaft_limit_exceeded = p.shaft_total > cfg.max_shaft_power;
    return p;
}

double segment_energy(const AircraftConfig& cfg,
                      std::span<const std::pair<double, double>> speed_profile,
                      double density) {
    if (speed_profile.size() < 2)
        throw std::domain_error("speed profile needs at least two samples");
    double energy = 0.0;
    double prev_t = speed_profile[0].first;
    double prev_p = total_power(cfg, speed_profile[0].second, density).electrical_total;
    for (std::size_t i = 1; i < speed_profile.size(); ++i) {
        const double t = speed_profile[i].first;
        if (t < prev_t)
            throw std::domain_error("speed profile timestamps must be non-decreasing");
        const double p = total_power(cfg, speed_profile[i].second, density).electrical_total;
        energy += 0.5 * (p + prev_p) * (t - prev_t);
        prev_t = t;
        prev_p = p;
    }
    return energy;
}

double best_range_speed(const AircraftConfig& cfg, double density) {
    const auto energy_per_meter = [&](double v) {
        return total_power(cfg, v, density).electrical_total / v;
    };
    // golden-section search to 0.01 m/s
    const double inv_phi = 0.6180339887498949;
    double a = cfg.speed_min;
    double b = cfg.speed_max;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = energy_per_meter(c);
    double fd = energy_per_meter(d);
    while (b - a > 0.01) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = energy_per_meter(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = energy_per_meter(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace skyreserve::powerplant
