#pragma once

#include <array>
#include <cmath>

namespace sdeconv::quad {

// 7-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b) {
  static constexpr std::array<double, 7> x{0.0,
                                           0.4058451513773971669066064,
                                           -0.4058451513773971669066064,
                                           0.7415311855993944398638648,
                                           -0.7415311855993944398638648,
                                           0.9491079123427585245261897,
                                           -0.9491079123427585245261897};
  static constexpr std::array<double, 7> w{0.4179591836734693877551020, 0.3818300505051189449503698,
                                           0.3818300505051189449503698, 0.2797053914892766679014678,
                                           0.2797053914892766679014678, 0.1294849661688696932706114,
                                           0.1294849661688696932706114};
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(c + h * x[i]);
  return s * h;
}

// Composite Gauss-Legendre with `panels` equal panels.
template <class F>
double composite(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) s += gauss_legendre(f, a + i * h, a + (i + 1) * h);
  return s;
}

}  // namespace sdeconv::quad
