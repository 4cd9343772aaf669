#pragma once

#include <string>

namespace skyreserve::units {

inline constexpr double kPi = 3.14159265358979323846;

// Exact conversion constants. Everything internal is SI
// (m, m/s, kg, N, W, rad, s); aviation units live at the edges.
inline constexpr double kKnotToMps = 0.514444;
inline constexpr double kNmToM = 1852.0;
inline constexpr double kFtToM = 0.3048;
inline constexpr double kRpmToRadps = 2.0 * kPi / 60.0;
inline constexpr double kDegToRad = kPi / 180.0;

enum class Unit {
    Meter,
    Foot,
    NauticalMile,
    MeterPerSecond,
    Knot,
    Radian,
    Degree,
    RadianPerSecond,
    Rpm,
    Watt,
    Kilowatt,
    Second,
    Kilogram,
};

enum class Dimension {
    Length,
    Speed,
    Angle,
    AngularRate,
    Power,
    Time,
    Mass,
};

Dimension dimension_of(Unit u);
double si_factor(Unit u);
const char* unit_name(Unit u);

/// Convert between units of the same dimension; throws std::domain_error
/// on a dimension mismatch.
double convert(double value, Unit from, Unit to);

/// ISA troposphere density [kg/m^3] at geometric altitude [m].
/// Valid for 0 <= altitude <= 11,000 m; throws std::domain_error outside.
double isa_density(double altitude_m);

}  // namespace skyreserve::units
