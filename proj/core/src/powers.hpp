#pragma once

#include <cmath>

namespace nlkg::detail {

// |u|^{2*-2} and |u|^{2*} without calling pow(): 2*-2 is 4, 2 and 4/3 for
// d = 3, 4, 5, so everything reduces to squares and one cube root.
struct CriticalPower {
  int d;

  double pm2(double u) const {  // |u|^{2*-2}
    const double u2 = u * u;
    switch (d) {
      case 3: return u2 * u2;
      case 4: return u2;
      default: {
        const double c = std::cbrt(u2);
        return c * c;
      }
    }
  }
  double p(double u) const { return u * u * pm2(u); }  // |u|^{2*}
};

}  // namespace nlkg::detail
