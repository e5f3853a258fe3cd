#include "levy/heston.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace levy::heston {

void HestonParams::validate() const {
  if (!(T > 0)) throw std::invalid_argument("heston: T must be positive");
  if (!(V0 > 0)) throw std::invalid_argument("heston: V0 must be positive");
  if (!(kappa > 0) || !(sigma > 0) || !(theta > 0))
    throw std::invalid_argument("heston: kappa, theta and sigma must be positive");
  if (!(strike > 0)) throw std::invalid_argument("heston: strike must be positive");
  if (!(2.0 * kappa * theta - sigma * sigma > 0))
    throw std::invalid_argument("heston: Feller condition 2 kappa theta > sigma^2 violated");
}

State milstein_step(const HestonParams& p, State s, double dw1, double dw2, double h) {
  const double v = std::max(s.v, 0.0);
  const double root = std::sqrt(v);
  State out;
  out.u = s.u + (p.r - 0.5 * v) * h + root * dw1 + 0.25 * p.sigma * dw1 * dw2;
  out.v = s.v + p.kappa * (p.theta - v) * h + p.sigma * root * dw2 +
          0.25 * p.sigma * p.sigma * (dw2 * dw2 - h);
  if (!std::isfinite(out.u) || !std::isfinite(out.v))
    throw std::runtime_error("milstein_step: non-finite state");
  return out;
}

namespace {

State drift_flow(const HestonParams& p, State s, double tau, double decay) {
  const double xi = p.xi();
  State out;
  out.v = xi + (s.v - xi) * decay;
  out.u = s.u + (s.v - xi) * (decay - 1.0) / (2.0 * p.kappa) + tau * (p.r - 0.5 * xi);
  return out;
}

}  // namespace

State strang_drift(const HestonParams& p, State s, double tau) {
  return drift_flow(p, s, tau, std::exp(-p.kappa * tau));
}

State strang_diffusion(const HestonParams& p, State s, double dw1, double dw2, double area12) {
  const double root = std::sqrt(std::max(s.v, 0.0));
  const double shifted = root + 0.5 * p.sigma * dw2;
  State out;
  out.v = shifted * shifted;
  out.u = s.u + root * dw1 + 0.25 * p.sigma * dw1 * dw2 - 0.5 * p.sigma * area12;
  return out;
}

State strang_step(const HestonParams& p, State s, double dw1, double dw2, double area12, double h) {
  const double decay = std::exp(-0.5 * p.kappa * h);
  s = drift_flow(p, s, 0.5 * h, decay);
  s = strang_diffusion(p, s, dw1, dw2, area12);
  return drift_flow(p, s, 0.5 * h, decay);
}

double payoff(const HestonParams& p, double u_terminal) {
  return std::exp(-p.r * p.T) * std::max(std::exp(u_terminal) - p.strike, 0.0);
}

PricingConvention parse_convention(const std::string& name) {
  if (name == "standard") return PricingConvention::Standard;
  if (name == "printed") return PricingConvention::Printed;
  throw std::invalid_argument("unknown pricing convention: " + name);
}

std::complex<double> log_price_cf(const HestonParams& p, std::complex<double> w,
                                  PricingConvention conv) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  const double s2 = p.sigma * p.sigma;
  const cd shift = conv == PricingConvention::Standard ? w + i : w - i;
  const cd a = std::sqrt(p.kappa * p.kappa + s2 * w * shift);
  const cd b1 = (p.kappa - a) / s2;
  const cd b2 = (p.kappa - a) / (p.kappa + a);
  const cd e = std::exp(-a * p.T);
  const cd c = p.kappa * (b1 * p.T - (2.0 / s2) * std::log((1.0 - b2 * e) / (1.0 - b2)));
  const cd d = b1 * (1.0 - e) / (1.0 - b2 * e);
  const double log_forward = p.U0 + p.r * p.T;
  return std::exp(c * p.theta + d * p.V0 + i * w * log_forward);
}

PriceResult heston_price(const HestonParams& p, const QuadConfig& q) {
  p.validate();
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  const double log_k = std::log(p.strike);
  const cd forward = log_price_cf(p, -i, q.convention);
  auto phase = [&](double w) {
    return q.convention == PricingConvention::Standard ? std::exp(-i * w * log_k)
                                                       : std::exp(i * w * p.strike);
  };
  auto f0 = [&](double w) {
    return std::real(phase(w) * log_price_cf(p, cd(w, 0.0) - i, q.convention) / (i * w * forward));
  };
  auto f1 = [&](double w) {
    return std::real(phase(w) * log_price_cf(p, cd(w, 0.0), q.convention) / (i * w));
  };
  using boost::math::quadrature::gauss_kronrod;
  auto integrate = [&](auto&& f, double hi) {
    double err = 0;
    return gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 15, q.tolerance * 1e-2, &err);
  };
  double cutoff = q.initial_cutoff;
  double i0 = integrate(f0, cutoff), i1 = integrate(f1, cutoff);
  bool converged = false;
  for (int k = 0; k < q.max_doublings; ++k) {
    const double next = 2.0 * cutoff;
    const double n0 = integrate(f0, next), n1 = integrate(f1, next);
    const bool stable = std::abs(n0 - i0) < q.tolerance && std::abs(n1 - i1) < q.tolerance;
    i0 = n0;
    i1 = n1;
    cutoff = next;
    if (stable) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(i0) || !std::isfinite(i1))
    throw std::runtime_error("heston_price: quadrature did not converge");
  PriceResult out;
  out.pi0 = 0.5 + i0 / std::numbers::pi;
  out.pi1 = 0.5 + i1 / std::numbers::pi;
  out.cutoff = cutoff;
  out.price = std::exp(p.U0) * out.pi0 - std::exp(-p.r * p.T) * p.strike * out.pi1;
  return out;
}

double black_scholes_call(double s0, double strike, double r, double variance, double T) {
  const double sd = std::sqrt(variance * T);
  const double d1 = (std::log(s0 / strike) + r * T + 0.5 * sd * sd) / sd;
  const double d2 = d1 - sd;
  auto ncdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  return s0 * ncdf(d1) - strike * std::exp(-r * T) * ncdf(d2);
}

}  // namespace levy::heston
