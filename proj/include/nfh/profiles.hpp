#pragma once
// Closed-form macro profiles. Every compactly supported macro factor in the
// lab (initial data, kernel envelopes, test functions, vanishing cores) is
// one of these four shapes, so support radii and sup norms are known exactly.

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "nfh/common.hpp"

namespace nfh {

enum class ProfileKind { gaussian, indicator, bump, costaper };

inline const char* profile_kind_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::indicator: return "indicator";
    case ProfileKind::bump: return "bump";
    case ProfileKind::costaper: return "costaper";
  }
  return "?";
}

// Radial profile A * s(|x - c| / ...) supported in the closed ball of
// radius `radius` around `center`:
//   gaussian : A exp(-r^2 / (2 width^2)), truncated at r >= radius
//   indicator: A for r <= radius
//   bump     : A exp(1 - 1/(1 - (r/radius)^2)), C-infinity with compact support
//   costaper : A cos^2(pi r / (2 radius)), C^1 with compact support
struct Profile {
  ProfileKind kind = ProfileKind::gaussian;
  int dim = 1;
  double amplitude = 1.0;
  std::array<double, 2> center{0.0, 0.0};
  double width = 1.0;   // gaussian standard deviation; ignored otherwise
  double radius = 1.0;  // support radius (gaussian: truncation radius)

  void validate() const {
    if (dim < 1 || dim > 2) throw std::invalid_argument("profile: dim must be 1 or 2");
    if (!(radius > 0.0)) throw std::invalid_argument("profile: radius must be positive");
    if (kind == ProfileKind::gaussian && !(width > 0.0))
      throw std::invalid_argument("profile: gaussian width must be positive");
  }

  double eval_radius(double r) const {
    switch (kind) {
      case ProfileKind::gaussian:
        return r < radius ? amplitude * std::exp(-r * r / (2.0 * width * width)) : 0.0;
      case ProfileKind::indicator:
        return r <= radius ? amplitude : 0.0;
      case ProfileKind::bump: {
        const double s = r / radius;
        if (s >= 1.0) return 0.0;
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
      }
      case ProfileKind::costaper: {
        if (r >= radius) return 0.0;
        const double c = std::cos(kPi * r / (2.0 * radius));
        return amplitude * c * c;
      }
    }
    return 0.0;
  }

  double operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double d = x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)];
      r2 += d * d;
    }
    return eval_radius(std::sqrt(r2));
  }

  double operator()(double x) const {
    const double d = x - center[0];
    return eval_radius(std::fabs(d));
  }

  double support_radius() const { return radius; }

  // All four shapes peak at the center.
  double sup() const { return std::fabs(amplitude); }
};

}  // namespace nfh
