#pragma once

#include <array>
#include <optional>

#include "tunnelsplit/potential.hpp"

namespace tunnel {

/// Invariant torus of the quadratic model p = xi^2 + sum lambda_j^2 z_j^2 in
/// one well, labelled by its actions.
struct ModelTorus {
  std::array<double, 2> iota{0.0, 0.0};
  double E = 0.0;                // 2 lambda1 iota1 + 2 lambda2 iota2
  Vec2 umbilic_frame = Vec2::Zero();  // (sqrt(2 iota1/lambda1), sqrt(2 iota2/lambda2)), signs per vertex
  Vec2 umbilic = Vec2::Zero();        // same vertex in global coordinates
  HarmonicData well;
  std::optional<std::array<int, 2>> k;
};

/// The umbilic vertex facing the symmetry line {x1 = 0} (second component
/// taken with the sign of `x2_sign`).
ModelTorus torus_from_actions(const HarmonicData& well, std::array<double, 2> iota, double x2_sign = 1.0);

/// iota_j = h (k_j + 1/2), or h k_j without the Maslov shift.
std::array<double, 2> ebk_actions(const HarmonicData& well, std::array<int, 2> k, double h,
                                  bool maslov_shift = true);

ModelTorus ebk_torus(const HarmonicData& well, std::array<int, 2> k, double h, bool maslov_shift = true,
                     double x2_sign = 1.0);

/// lambda int_y^x sqrt(t^2 - y^2) dt for |x| >= |y| (magnitudes).
double agmon_component(double lambda, double y, double x);

/// F_y(x) = sum_j lambda_j int_{y_j}^{x_j} sqrt(t^2 - y_j^2) dt, y and x in the
/// well frame. Throws InsideCaustic if |x_j| < |y_j| for some j.
double model_agmon_F(const HarmonicData& well, const Vec2& y, const Vec2& x);

/// Same integral by adaptive quadrature, for validation.
double model_agmon_F_quadrature(const HarmonicData& well, const Vec2& y, const Vec2& x);

struct TunnelPath {
  Vec2 yL = Vec2::Zero(), yR = Vec2::Zero();
  Vec2 x_tilde = Vec2::Zero();
  double action = 0.0;
  double gradient = 0.0;   // Phi'(x_tilde)
  double curvature = 0.0;  // Phi''(x_tilde)
  bool degenerate = false;
};

/// Minimizes Phi(x2) = F_{yL}(0, x2) + F_{yR}(0, x2) on the symmetry line,
/// each term in its own well frame and extended by zero inside the caustic
/// strip. `strict` turns a degenerate minimum into DegenerateCritical.
TunnelPath tunnel_distance(const ModelTorus& left, const ModelTorus& right, bool strict = true);

}  // namespace tunnel
