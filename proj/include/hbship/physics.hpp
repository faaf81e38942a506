#pragma once

#include <optional>
#include <string>

namespace hbship {

/// Static metadata of one vessel. Dimensions are SI.
struct VesselCharacteristics {
  std::string ship_id;
  double gross_tonnage = 0.0;
  double lwl = 0.0;      // waterline length [m]
  double breadth = 0.0;  // [m]
  double draft = 0.0;    // [m]
  std::optional<double> wetted_surface;  // [m^2]
  std::optional<double> residual_coeff;  // C_R [-]

  /// Throws DataError when a field violates its invariant.
  void validate() const;
};

struct WaterProperties {
  double density = 1025.0;                 // [kg/m^3]
  double kinematic_viscosity = 1.188e-6;   // [m^2/s], seawater at ~15 degC

  void validate() const;
};

/// Per-ship resistance coefficients of the grey-box model.
struct ShipParameters {
  double a = 0.0;      // hydrodynamic coefficient [kg/m]
  double b = 0.0;      // aerodynamic coefficient [kg/m]
  double sigma = 1.0;  // observation noise scale [W]
};

/// Mean propulsion power a*V^3 + b*cos(alpha)*U_R^2*V [W].
/// Linear in (a, b); the result is not clamped and may be negative in strong tailwind.
double greybox_power(double a, double b, double speed, double wind_speed, double wind_angle);
inline double greybox_power(const ShipParameters& p, double speed, double wind_speed,
                            double wind_angle) {
  return greybox_power(p.a, p.b, speed, wind_speed, wind_angle);
}

double reynolds_number(double speed, double lwl, double kinematic_viscosity);

/// ITTC-1957 friction line, 0.075 / (log10(Rn) - 2)^2. Requires Rn > 100.
double ittc_friction_coefficient(double reynolds);

double frictional_resistance(double cf, double density, double wetted_surface, double speed);

/// C_R * rho/2 * (B*T/10) * V^2 [N].
double residual_resistance(double cr, double density, double breadth, double draft, double speed);

/// White-box power (R_F + R_R) * V [W]. Requires wetted surface and C_R on `chars`.
double steam2_power(const VesselCharacteristics& chars, const WaterProperties& water, double speed);

/// Rough wetted surface lwl * (B + 2T) * factor, for vessels without a tabulated value.
/// Anything computed from it must be flagged as using a heuristic wetted surface.
double heuristic_wetted_surface(const VesselCharacteristics& chars, double factor = 1.0);

}  // namespace hbship
