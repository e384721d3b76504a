#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tunnel {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class Family { SeparableQuartic, CoupledQuartic, CurvedQuartic };

std::string_view to_string(Family f) noexcept;
Family family_from_string(std::string_view name);

/// Coefficients of
///   V(x1,x2) = alpha (x1^2 - a^2)^2 + omega^2 x2^2 + c x1^2 x2^2 + d (x1^2 - a^2) x2.
struct Coefficients {
  double alpha = 1.0;
  double a = 1.0;
  double omega = 1.0;
  double c = 0.0;
  double d = 0.0;
};

struct Derivatives {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};

/// Fully symmetric third-derivative tensor, indexed t[i][j][k].
struct ThirdDerivatives {
  double t[2][2][2] = {};
};

/// Symmetric (in x1) double-well potential from a fixed polynomial family.
/// Every term depends on x1 only through x1^2, so V(-x1,x2) == V(x1,x2)
/// bitwise.
class PotentialSpec {
 public:
  PotentialSpec(Family family, Coefficients coeffs, double box_factor = 2.5);

  static PotentialSpec from_map(std::string_view family,
                                const std::map<std::string, double>& params,
                                double box_factor = 2.5);

  Family family() const noexcept { return family_; }
  const Coefficients& coefficients() const noexcept { return k_; }

  double value(const Vec2& x) const noexcept;
  Derivatives eval(const Vec2& x) const noexcept;
  ThirdDerivatives third(const Vec2& x) const noexcept;

  /// Height of the saddle on the symmetry line, min over x2 of V(0, x2).
  double barrier() const noexcept;
  Vec2 saddle() const noexcept;

  /// Half-width of the square search/contouring box centred at the origin.
  double box_half_width() const noexcept { return box_factor_ * k_.a; }
  bool in_box(const Vec2& x) const noexcept;

  /// Canonical text form (family plus coefficients at 17 significant digits).
  std::string canonical() const;

 private:
  Family family_;
  Coefficients k_;
  double box_factor_;
};

/// Harmonic data at one minimum: V = sum_j lambda_j^2 z_j^2 + O(|z|^3) with
/// z = frame * (x - minimum). Rows of `frame` are the principal axes; the
/// first axis has a non-negative x1 component and the frame is right-handed.
struct HarmonicData {
  Vec2 minimum = Vec2::Zero();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Mat2 frame = Mat2::Identity();

  Vec2 to_frame(const Vec2& x) const { return frame * (x - minimum); }
  Vec2 from_frame(const Vec2& z) const { return minimum + frame.transpose() * z; }
  Vec2 axis1() const { return frame.row(0).transpose(); }
  Vec2 axis2() const { return frame.row(1).transpose(); }
};

struct WellPair {
  HarmonicData left;
  HarmonicData right;
};

/// Newton from the seeds (+-a, 0) to |grad V| <= 1e-12.
WellPair locate_minima(const PotentialSpec& pot);

enum class Side { Left, Right };

struct WellBoundary {
  double energy = 0.0;
  Side side = Side::Left;
  std::vector<Vec2> polyline;     // closed: last vertex is not repeated
  std::vector<double> arclength;  // cumulative, arclength[0] == 0, size n+1
  double perimeter() const { return arclength.empty() ? 0.0 : arclength.back(); }
  double enclosed_area() const;
  Vec2 at_arclength(double s) const;
  double max_level_error(const PotentialSpec& pot) const;
};

/// Level curve {V = E} around one minimum: marching squares on a local grid
/// followed by Newton projection of every vertex along grad V.
WellBoundary well_boundary(const PotentialSpec& pot, double energy, Side side,
                           int resolution = 128);

struct AssumptionReport {
  bool gap_ok = false;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double ratio = 0.0;
  double barrier = 0.0;
  // uniqueness of the libration family is assumed, never verified
  bool unique_libration_assumed = true;
};

AssumptionReport check_quasi1d_assumptions(const PotentialSpec& pot);

}  // namespace tunnel
