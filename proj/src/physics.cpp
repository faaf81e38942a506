#include "hbship/physics.hpp"

#include <cmath>

#include "hbship/error.hpp"

namespace hbship {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be finite");
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (v <= 0.0) throw InvalidArgument(std::string(name) + " must be positive");
}

void require_nonnegative(double v, const char* name) {
  require_finite(v, name);
  if (v < 0.0) throw InvalidArgument(std::string(name) + " must be non-negative");
}

}  // namespace

void VesselCharacteristics::validate() const {
  auto check = [&](bool ok, const char* what) {
    if (!ok) throw DataError("ship '" + ship_id + "': " + what);
  };
  check(!ship_id.empty(), "empty ship_id");
  check(std::isfinite(gross_tonnage) && gross_tonnage > 0.0, "gross_tonnage must be > 0");
  check(std::isfinite(lwl) && lwl > 0.0, "lwl must be > 0");
  check(std::isfinite(breadth) && breadth > 0.0, "breadth must be > 0");
  check(std::isfinite(draft) && draft > 0.0, "draft must be > 0");
  if (wetted_surface) check(std::isfinite(*wetted_surface) && *wetted_surface > 0.0, "wetted surface must be > 0");
  if (residual_coeff) check(std::isfinite(*residual_coeff) && *residual_coeff > 0.0, "c_r must be > 0");
}

void WaterProperties::validate() const {
  require_positive(density, "water density");
  require_positive(kinematic_viscosity, "kinematic viscosity");
}

double greybox_power(double a, double b, double speed, double wind_speed, double wind_angle) {
  require_finite(a, "a");
  require_finite(b, "b");
  require_nonnegative(speed, "speed");
  require_nonnegative(wind_speed, "relative wind speed");
  require_finite(wind_angle, "relative wind angle");
  return a * speed * speed * speed + b * std::cos(wind_angle) * wind_speed * wind_speed * speed;
}

double reynolds_number(double speed, double lwl, double kinematic_viscosity) {
  require_positive(speed, "speed");
  require_positive(lwl, "lwl");
  require_positive(kinematic_viscosity, "kinematic viscosity");
  return speed * lwl / kinematic_viscosity;
}

double ittc_friction_coefficient(double reynolds) {
  require_finite(reynolds, "Reynolds number");
  if (reynolds <= 100.0) throw InvalidArgument("ITTC friction line requires Rn > 100");
  const double d = std::log10(reynolds) - 2.0;
  return 0.075 / (d * d);
}

double frictional_resistance(double cf, double density, double wetted_surface, double speed) {
  require_nonnegative(cf, "C_F");
  require_nonnegative(density, "density");
  require_nonnegative(wetted_surface, "wetted surface");
  require_nonnegative(speed, "speed");
  return cf * (density / 2.0) * wetted_surface * speed * speed;
}

double residual_resistance(double cr, double density, double breadth, double draft, double speed) {
  require_nonnegative(cr, "C_R");
  require_nonnegative(density, "density");
  require_nonnegative(breadth, "breadth");
  require_nonnegative(draft, "draft");
  require_nonnegative(speed, "speed");
  return cr * (density / 2.0) * (breadth * draft / 10.0) * speed * speed;
}

double steam2_power(const VesselCharacteristics& chars, const WaterProperties& water, double speed) {
  if (!chars.wetted_surface || !chars.residual_coeff)
    throw NotFound("white-box inputs unavailable for ship '" + chars.ship_id +
                   "' (wetted surface and c_r required)");
  water.validate();
  require_positive(speed, "speed");
  const double cf = ittc_friction_coefficient(reynolds_number(speed, chars.lwl, water.kinematic_viscosity));
  const double rf = frictional_resistance(cf, water.density, *chars.wetted_surface, speed);
  const double rr = residual_resistance(*chars.residual_coeff, water.density, chars.breadth, chars.draft, speed);
  return (rf + rr) * speed;
}

double heuristic_wetted_surface(const VesselCharacteristics& chars, double factor) {
  require_positive(factor, "wetted surface factor");
  return chars.lwl * (chars.breadth + 2.0 * chars.draft) * factor;
}

}  // namespace hbship
