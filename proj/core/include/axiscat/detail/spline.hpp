#pragma once

#include <span>
#include <vector>

namespace axiscat::detail {

// C2 cubic spline interpolant on strictly increasing abscissae.
class CubicSpline {
public:
  CubicSpline() = default;

  static CubicSpline natural(std::span<const double> x, std::span<const double> y);
  static CubicSpline clamped(std::span<const double> x, std::span<const double> y,
                             double dy_start, double dy_end);
  // Samples cover one period [x0, x0 + period); f(x0 + period) = y[0].
  static CubicSpline periodic(std::span<const double> x, std::span<const double> y,
                              double period);

  double value(double t) const;
  double derivative(double t) const;
  void eval(double t, double& v, double& dv) const;

  bool is_periodic() const { return periodic_; }
  double period() const { return period_; }

private:
  std::vector<double> x_, y_, m_;  // nodes, values, second derivatives
  bool periodic_ = false;
  double period_ = 0.0;

  int find_interval(double& t) const;
};

}  // namespace axiscat::detail
