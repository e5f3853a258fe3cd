#pragma once

// Log-Heston model: dU = (r - V/2) dt + sqrt(V) dW1, dV = kappa (theta - V) dt
// + sigma sqrt(V) dW2, with a European call on S = exp(U).

#include <complex>
#include <string>

namespace levy::heston {

struct HestonParams {
  double T = 1.0;
  double r = 0.1;
  double strike = 20.0;
  double kappa = 2.0;
  double theta = 0.1;
  double sigma = 0.6;
  double U0 = 2.995732273553991;  // log 20
  double V0 = 2.0;

  /// Throws unless V0 > 0, kappa > 0, sigma > 0 and 2 kappa theta > sigma^2.
  void validate() const;
  /// Mean reversion level of the Stratonovich drift, theta - sigma^2 / (4 kappa).
  double xi() const { return theta - sigma * sigma / (4.0 * kappa); }
};

struct State {
  double u = 0.0;
  double v = 0.0;
};

/// No-area Milstein step with full truncation (v replaced by max(v, 0) in
/// square roots and drifts).
State milstein_step(const HestonParams& p, State s, double dw1, double dw2, double h);

/// Drift flow of the Stratonovich form over time `tau`.
State strang_drift(const HestonParams& p, State s, double tau);

/// Exact flow of the diffusion vector fields with the area bracket term.
State strang_diffusion(const HestonParams& p, State s, double dw1, double dw2, double area12);

/// Half drift, diffusion with area, half drift.
State strang_step(const HestonParams& p, State s, double dw1, double dw2, double area12, double h);

/// Discounted call payoff exp(-rT) (exp(u) - K)^+.
double payoff(const HestonParams& p, double u_terminal);

enum class PricingConvention {
  Standard,  // e^{-i w ln K} strike phase, a = sqrt(k^2 + s^2 w (w + i))
  Printed,   // e^{i w K} strike phase, a = sqrt(k^2 + s^2 w (w - i))
};

PricingConvention parse_convention(const std::string& name);

/// Characteristic function E exp(i w U_T) in the chosen convention.
std::complex<double> log_price_cf(const HestonParams& p, std::complex<double> w,
                                  PricingConvention conv = PricingConvention::Standard);

struct QuadConfig {
  PricingConvention convention = PricingConvention::Standard;
  double tolerance = 1e-8;     // successive-refinement agreement on each integral
  double initial_cutoff = 50.0;
  int max_doublings = 20;
};

struct PriceResult {
  double price = 0.0;
  double pi0 = 0.0, pi1 = 0.0;
  double cutoff = 0.0;
};

/// Semi-analytic call price by Fourier inversion; adaptive Gauss-Kronrod on
/// [0, cutoff] with the cutoff doubled until the integrals stabilise.
PriceResult heston_price(const HestonParams& p, const QuadConfig& q = {});

/// Black-Scholes call price with total variance `variance * T`.
double black_scholes_call(double s0, double strike, double r, double variance, double T);

}  // namespace levy::heston
