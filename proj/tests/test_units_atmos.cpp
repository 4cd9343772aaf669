#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "skyreserve/units_atmos.hpp"

using namespace skyreserve::units;

TEST_CASE("conversion constants are exact") {
    CHECK(convert(1.0, Unit::Knot, Unit::MeterPerSecond) == doctest::Approx(0.514444).epsilon(1e-15));
    CHECK(convert(1.0, Unit::NauticalMile, Unit::Meter) == doctest::Approx(1852.0).epsilon(1e-15));
    CHECK(convert(1.0, Unit::Foot, Unit::Meter) == doctest::Approx(0.3048).epsilon(1e-15));
    CHECK(convert(60.0, Unit::Rpm, Unit::RadianPerSecond) ==
          doctest::Approx(2.0 * kPi).epsilon(1e-15));
}

TEST_CASE("documented conversions") {
    CHECK(convert(157.0, Unit::Knot, Unit::MeterPerSecond) ==
          doctest::Approx(80.767708).epsilon(1e-9));
    CHECK(convert(0.6, Unit::NauticalMile, Unit::Meter) ==
          doctest::Approx(1111.2).epsilon(1e-12));
    CHECK(convert(0.0, Unit::Knot, Unit::MeterPerSecond) == 0.0);
    CHECK(convert(0.0, Unit::Foot, Unit::NauticalMile) == 0.0);
}

TEST_CASE("round trips are exact to 1e-12 relative") {
    const Unit lengths[] = {Unit::Meter, Unit::Foot, Unit::NauticalMile};
    const double samples[] = {1e-6, 0.37, 42.0, 98765.4321};
    for (Unit a : lengths)
        for (Unit b : lengths)
            for (double x : samples) {
                const double y = convert(convert(x, a, b), b, a);
                CHECK(std::abs(y - x) <= 1e-12 * std::abs(x));
            }
    for (double x : samples) {
        CHECK(std::abs(convert(convert(x, Unit::Knot, Unit::MeterPerSecond),
                               Unit::MeterPerSecond, Unit::Knot) -
                       x) <= 1e-12 * std::abs(x));
        CHECK(std::abs(convert(convert(x, Unit::Rpm, Unit::RadianPerSecond),
                               Unit::RadianPerSecond, Unit::Rpm) -
                       x) <= 1e-12 * std::abs(x));
        CHECK(std::abs(convert(convert(x, Unit::Degree, Unit::Radian), Unit::Radian,
                               Unit::Degree) -
                       x) <= 1e-12 * std::abs(x));
    }
}

TEST_CASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(convert(1.0, Unit::Knot, Unit::Meter), std::domain_error);
    CHECK_THROWS_AS(convert(1.0, Unit::Watt, Unit::Second), std::domain_error);
    CHECK_THROWS_AS(convert(1.0, Unit::Degree, Unit::Kilowatt), std::domain_error);
}

TEST_CASE("standard atmosphere density") {
    CHECK(isa_density(0.0) == doctest::Approx(1.225).epsilon(1e-12));
    // hand-evaluated: 1.225 * (1 - 2.25577e-5 * h)^4.25588
    CHECK(isa_density(609.6) == doctest::Approx(1.1548972607567827).epsilon(1e-12));
    CHECK(isa_density(609.6) == doctest::Approx(1.1548).epsilon(1e-3));
    CHECK(isa_density(1000.0) == doctest::Approx(1.1116424580279263).epsilon(1e-12));
    CHECK(isa_density(1000.0) == doctest::Approx(1.1117).epsilon(1e-3));
    CHECK_THROWS_AS(isa_density(-1.0), std::domain_error);
    CHECK_THROWS_AS(isa_density(11000.1), std::domain_error);
    CHECK_THROWS_AS(isa_density(std::nan("")), std::domain_error);
}

TEST_CASE("density decreases strictly with altitude") {
    double prev = isa_density(0.0);
    for (double h = 100.0; h <= 11000.0; h += 100.0) {
        const double rho = isa_density(h);
        CHECK(rho < prev);
        prev = rho;
    }
}
