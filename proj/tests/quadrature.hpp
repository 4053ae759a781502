// Quadrature oracle for the room-and-passage test functions.
#pragma once

#include <cmath>
#include <utility>

#include "qhlab/poincare.hpp"

namespace qhlab::test {

// Composite Simpson rule on [a, b] with n (even) intervals.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Integral of |u|^q and of |du/dy|^p, computed from eval alone.
// The spec is moved so the passage starts at y = 0, where thin passages keep
// full relative precision.
inline std::pair<double, double> quadrature_norms(TestFunctionSpec s, double p) {
  s.center = {0.0, -s.side / 8.0};
  const Box room = s.room(), pass = s.passage();
  const double x = s.center.x;
  auto uq = [&](double y) { return std::pow(std::abs(s.eval({x, y})), s.q); };
  const double room_lq = simpson(uq, room.lo.y, room.hi.y, 2) * room.width();
  // Open passage interior: excludes the interface with the room.
  const double pass_lq = simpson(uq, std::nextafter(pass.lo.y, INFINITY), pass.hi.y, 4000) * pass.width();
  const double mid = pass.lo.y + pass.height() / 2, d = pass.height() * 1e-4;
  const double slope = (s.eval({x, mid - d}) - s.eval({x, mid + d})) / (2 * d);
  return {room_lq + pass_lq, std::pow(slope, p) * pass.area()};
}

}  // namespace qhlab::test
