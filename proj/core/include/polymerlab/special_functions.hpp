#ifndef POLYMERLAB_SPECIAL_FUNCTIONS_HPP
#define POLYMERLAB_SPECIAL_FUNCTIONS_HPP

namespace polymerlab {

// ln Gamma(x) for x > 0. Upward recurrence into x >= 12 followed by the
// Stirling series with Bernoulli coefficients. Error is at the few-ulp level
// (measured against max(1, |ln Gamma|)) for x in [1e-3, 1e6]; outside that
// window the same code runs but only best-effort accuracy is promised.
double log_gamma(double x);

// Psi_0 = d/dx ln Gamma, Psi_1 = Psi_0', Psi_2 = Psi_1'; x > 0, same
// accuracy window as log_gamma. Psi_1 > 0 and Psi_2 < 0 on (0, inf).
double digamma(double x);
double trigamma(double x);
double tetragamma(double x);

// Dispatch by derivative order; only orders 0, 1, 2 exist here.
double polygamma(int order, double x);

}  // namespace polymerlab

#endif
