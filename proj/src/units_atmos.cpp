#include "skyreserve/units_atmos.hpp"

#include <cmath>
#include <stdexcept>

namespace skyreserve::units {

Dimension dimension_of(Unit u) {
    switch (u) {
        case Unit::Meter:
        case Unit::Foot:
        case Unit::NauticalMile:
            return Dimension::Length;
        case Unit::MeterPerSecond:
        case Unit::Knot:
            return Dimension::Speed;
        case Unit::Radian:
        case Unit::Degree:
            return Dimension::Angle;
        case Unit::RadianPerSecond:
        case Unit::Rpm:
            return Dimension::AngularRate;
        case Unit::Watt:
        case Unit::Kilowatt:
            return Dimension::Power;
        case Unit::Second:
            return Dimension::Time;
        case Unit::Kilogram:
            return Dimension::Mass;
    }
    throw std::domain_error("unknown unit");
}

double si_factor(Unit u) {
    switch (u) {
        case Unit::Meter: return 1.0;
        case Unit::Foot: return kFtToM;
        case Unit::NauticalMile: return kNmToM;
        case Unit::MeterPerSecond: return 1.0;
        case Unit::Knot: return kKnotToMps;
        case Unit::Radian: return 1.0;
        case Unit::Degree: return kDegToRad;
        case Unit::RadianPerSecond: return 1.0;
        case Unit::Rpm: return kRpmToRadps;
        case Unit::Watt: return 1.0;
        case Unit::Kilowatt: return 1000.0;
        case Unit::Second: return 1.0;
        case Unit::Kilogram: return 1.0;
    }
    throw std::domain_error("unknown unit");
}

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::Meter: return "m";
        case Unit::Foot: return "ft";
        case Unit::NauticalMile: return "nm";
        case Unit::MeterPerSecond: return "m/s";
        case Unit::Knot: return "kt";
        case Unit::Radian: return "rad";
        case Unit::Degree: return "deg";
        case Unit::RadianPerSecond: return "rad/s";
        case Unit::Rpm: return "rpm";
        case Unit::Watt: return "W";
        case Unit::Kilowatt: return "kW";
        case Unit::Second: return "s";
        case Unit::Kilogram: return "kg";
    }
    throw std::domain_error("unknown unit");
}

double convert(double value, Unit from, Unit to) {
    if (dimension_of(from) != dimension_of(to)) {
        throw std::domain_error(std::string("unit dimension mismatch: ") +
                                unit_name(from) + " -> " + unit_name(to));
    }
    return value * si_factor(from) / si_factor(to);
}

double isa_density(double altitude_m) {
    if (!(altitude_m >= 0.0 && altitude_m <= 11000.0)) {
        throw std::domain_error("altitude outside ISA troposphere range [0, 11000] m");
    }
    return 1.225 * std::pow(1.0 - 2.25577e-5 * altitude_m, 4.25588);
}

}  // namespace skyreserve::units
