#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace tunnel {

using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Piecewise quartic dense output of a Dormand-Prince run.
class DenseSolution {
 public:
  void clear();
  void push_step(double t0, double t1, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                 Eigen::Matrix<double, Eigen::Dynamic, 5> coeffs);
  /// Drop everything past t (inside the last step), keeping dense output valid.
  void truncate(double t, const Eigen::VectorXd& y);
  void shift_time(double dt);

  bool empty() const { return times_.size() < 2; }
  std::size_t steps() const { return coeffs_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXd>& states() const { return states_; }

  Eigen::VectorXd operator()(double t) const;

 private:
  std::size_t segment(double t) const;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> states_;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 5>> coeffs_;
};

struct OdeEvent {
  std::function<double(double t, const Eigen::VectorXd& y)> g;
  int direction = 0;  // +1: rising only, -1: falling only, 0: both
  bool terminal = true;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unlimited
  long max_steps = 2'000'000;
  /// Returns false when the state has left the admissible region (BlowUp).
  std::function<bool(const Eigen::VectorXd& y)> guard;
};

struct OdeResult {
  DenseSolution solution;
  bool event_fired = false;
  int event_index = -1;
  double t_event = 0.0;
  Eigen::VectorXd y_event;
  long accepted = 0;
  long rejected = 0;
};

/// Dormand-Prince 5(4) with PI step control. t1 < t0 integrates backward.
/// Events are located on the dense output; the first terminal event stops
/// the run and truncates the solution there.
OdeResult integrate(const Rhs& f, double t0, const Eigen::VectorXd& y0, double t1,
                    const OdeOptions& opt, const std::vector<OdeEvent>& events = {});

}  // namespace tunnel
