#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace skyreserve::powerplant {

/// Airframe component entry for the parasite-drag build-up.
/// Streamlined components use form_factor * Cf(Re) * wetted_area / S_wing;
/// bluff components use bluff_cd * area / S_wing, where `wetted_area`
/// holds the frontal-area proxy.
struct DragComponent {
    std::string name;
    double wetted_area = 0.0;            // m^2 (frontal-area proxy when bluff)
    double form_factor = 1.0;            // dimensionless, >= 1 for streamlined parts
    double characteristic_length = 1.0;  // m, sets the Reynolds number
    bool bluff_body = false;
    double bluff_cd = 0.0;               // used only when bluff_body
};

/// Immutable tilt-rotor configuration. All values SI.
struct AircraftConfig {
    int n_rotors = 6;
    double rotor_radius = 1.45;          // m
    int n_blades = 5;
    double solidity = 0.083;             // N_b * chord / (pi * R)
    double blade_chord = 0.083 * 3.14159265358979323846 * 1.45 / 5.0;  // m, from solidity
    double cruise_omega = 300.0 * 2.0 * 3.14159265358979323846 / 60.0; // rad/s (300 rpm)
    double wing_area = 10.83;            // m^2, reference area
    double aspect_ratio = 10.8;
    double oswald = 0.8;
    double mtom = 2177.0;                // kg
    double gravity = 9.81;               // m/s^2
    double kappa = 1.15;                 // induced-power factor
    double k_mu = 4.65;                  // advancing-blade profile factor
    double blade_cd0 = 0.012;
    double k_lift = 6.0;                 // lift-dependent blade drag factor
    double eta_drv = 0.85;               // drivetrain efficiency
    double p_hotel = 2000.0;             // W
    double max_shaft_power = 690000.0;   // W
    double cruise_altitude = 609.6;      // m (2000 ft)
    double speed_min = 85.0 * 0.514444;  // m/s
    double speed_max = 185.0 * 0.514444; // m/s
    double parasite_calibration_factor = 1.0;
    std::vector<DragComponent> drag_components;

    double rotor_disk_area() const;      // pi R^2, single rotor
    double total_disk_area() const;

    /// Throws std::domain_error when an invariant is violated.
    void validate() const;

    /// Shipped baseline configuration with the calibrated drag table.
    static AircraftConfig baseline();
};

struct PowerBreakdown {
    double induced = 0.0;          // W, shaft side
    double profile = 0.0;          // W, shaft side
    double parasite = 0.0;         // W, shaft side
    double shaft_total = 0.0;      // W, induced + profile + parasite
    double hotel = 0.0;            // W
    double electrical_total = 0.0; // W, shaft_total / eta_drv + hotel
    bool shaft_limit_exceeded = false;
};

struct DragBreakdown {
    double parasite = 0.0;  // N
    double induced = 0.0;   // N
    double total = 0.0;     // N
};

/// ISA sea-level dynamic viscosity used for Reynolds numbers [Pa s].
inline constexpr double kAirViscosity = 1.7894e-5;

/// Prandtl-Schlichting turbulent flat-plate skin friction.
/// Requires Re > 1e4 (turbulent regime).
double skin_friction(double reynolds);

/// Total parasite drag coefficient referenced to the wing area,
/// scaled by the calibration factor.
double parasite_drag_coefficient(const AircraftConfig& cfg, double airspeed,
                                 double density);

DragBreakdown total_drag(const AircraftConfig& cfg, double airspeed, double density);

/// Momentum-theory induced power with the high-speed inflow approximation:
/// P = kappa * T^2 / (2 rho A_total V).
double induced_power(const AircraftConfig& cfg, double thrust_required,
                     double airspeed, double density);

/// Blade-element profile power with lift-dependent blade drag and
/// advancing-blade correction.
double profile_power(const AircraftConfig& cfg, double thrust_required,
                     double airspeed, double density);

/// Full cruise power breakdown at trim (thrust = total drag).
/// airspeed must lie within [speed_min, speed_max].
PowerBreakdown total_power(const AircraftConfig& cfg, double airspeed, double density);

/// Trapezoidal energy integral over a (time [s], speed [m/s]) profile.
/// Timestamps must be non-decreasing and at least two samples are required.
double segment_energy(const AircraftConfig& cfg,
                      std::span<const std::pair<double, double>> speed_profile,
                      double density);

/// Speed minimizing total electrical power per unit distance, located by
/// golden-section search on [speed_min, speed_max] to 0.01 m/s.
double best_range_speed(const AircraftConfig& cfg, double density);

}  // namespace skyreserve::powerplant
