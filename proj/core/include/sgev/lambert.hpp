#pragma once

namespace sgev {

// Principal branch W0: the solution w >= -1 of w*exp(w) = x.
// Domain x >= -1/e; residual |w*e^w - x| <= 1e-12 * max(1, |x|).
double lambert_w0(double x);

// W0(exp(y)) for arbitrary y, including y far beyond the point where
// exp(y) overflows a double.
double lambert_w0_exp(double y);

}  // namespace sgev
