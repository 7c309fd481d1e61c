#include "axiscat/detail/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace axiscat::detail {

namespace {

void check_input(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("CubicSpline: need >= 3 matching samples");
  for (size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("CubicSpline: abscissae must increase");
}

// Tridiagonal solve (Thomas), overwrites rhs with solution.
void solve_tridiag(std::vector<double>& a, std::vector<double>& b,
                   std::vector<double>& c, std::vector<double>& d) {
  const size_t n = b.size();
  for (size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace

CubicSpline CubicSpline::natural(std::span<const double> x, std::span<const double> y) {
  return clamped(x, y, std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN());
}

CubicSpline CubicSpline::clamped(std::span<const double> x, std::span<const double> y,
                                 double dy_start, double dy_end) {
  check_input(x, y);
  const size_t n = x.size();
  CubicSpline s;
  s.x_.assign(x.begin(), x.end());
  s.y_.assign(y.begin(), y.end());

  std::vector<double> a(n, 0), b(n, 0), c(n, 0), d(n, 0);
  const bool nat_start = std::isnan(dy_start), nat_end = std::isnan(dy_end);
  if (nat_start) {
    b[0] = 1;
  } else {
    const double h = x[1] - x[0];
    b[0] = 2 * h;
    c[0] = h;
    d[0] = 6 * ((y[1] - y[0]) / h - dy_start);
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
    a[i] = hm;
    b[i] = 2 * (hm + hp);
    c[i] = hp;
    d[i] = 6 * ((y[i + 1] - y[i]) / hp - (y[i] - y[i - 1]) / hm);
  }
  if (nat_end) {
    b[n - 1] = 1;
  } else {
    const double h = x[n - 1] - x[n - 2];
    a[n - 1] = h;
    b[n - 1] = 2 * h;
    d[n - 1] = 6 * (dy_end - (y[n - 1] - y[n - 2]) / h);
  }
  solve_tridiag(a, b, c, d);
  s.m_ = std::move(d);
  return s;
}

CubicSpline CubicSpline::periodic(std::span<const double> x, std::span<const double> y,
                                  double period) {
  check_input(x, y);
  if (!(period > x.back() - x.front()))
    throw std::invalid_argument("CubicSpline: period must exceed sample span");
  const size_t n = x.size();
  CubicSpline s;
  s.periodic_ = true;
  s.period_ = period;
  s.x_.assign(x.begin(), x.end());
  s.y_.assign(y.begin(), y.end());
  s.x_.push_back(x[0] + period);  // phantom closing node
  s.y_.push_back(y[0]);

  // Cyclic tridiagonal system for second derivatives at the n distinct nodes,
  // solved by Sherman-Morrison.
  auto h = [&](size_t i) { return s.x_[i + 1] - s.x_[i]; };
  auto slope = [&](size_t i) { return (s.y_[i + 1] - s.y_[i]) / h(i); };

  std::vector<double> diag(n), lower(n), upper(n), rhs(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t im = (i + n - 1) % n;
    lower[i] = h(im);
    diag[i] = 2 * (h(im) + h(i));
    upper[i] = h(i);
    rhs[i] = 6 * (slope(i) - slope(im));
  }

  // A = T + u v^T with corner entries lower[0], upper[n-1].
  const double alpha = lower[0], beta = upper[n - 1];
  const double gamma = -diag[0];
  std::vector<double> b1(diag), a1(lower), c1(upper), d1(rhs);
  b1[0] -= gamma;
  b1[n - 1] -= alpha * beta / gamma;
  a1[0] = c1[n - 1] = 0;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = beta;
  {
    auto a2 = a1;
    auto b2 = b1;
    auto c2 = c1;
    solve_tridiag(a2, b2, c2, d1);
  }
  {
    auto a2 = a1;
    auto b2 = b1;
    auto c2 = c1;
    solve_tridiag(a2, b2, c2, u);
  }
  const double fact = (d1[0] + alpha * d1[n - 1] / gamma) /
                      (1.0 + u[0] + alpha * u[n - 1] / gamma);
  std::vector<double> m(n);
  for (size_t i = 0; i < n; ++i) m[i] = d1[i] - fact * u[i];
  m.push_back(m[0]);
  s.m_ = std::move(m);
  return s;
}

int CubicSpline::find_interval(double& t) const {
  if (periodic_) {
    const double x0 = x_.front();
    t = x0 + std::fmod(t - x0, period_);
    if (t < x0) t += period_;
  } else {
    t = std::clamp(t, x_.front(), x_.back());
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

void CubicSpline::eval(double t, double& v, double& dv) const {
  const int i = find_interval(t);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
  v = A * y_[i] + B * y_[i + 1] +
      ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  dv = (y_[i + 1] - y_[i]) / h +
       ((3 * B * B - 1) * m_[i + 1] - (3 * A * A - 1) * m_[i]) * h / 6.0;
}

double CubicSpline::value(double t) const {
  double v, dv;
  eval(t, v, dv);
  return v;
}

double CubicSpline::derivative(double t) const {
  double v, dv;
  eval(t, v, dv);
  return dv;
}

}  // namespace axiscat::detail
