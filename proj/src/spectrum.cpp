#include "sphtap/spectrum.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sphtap/errors.hpp"

namespace sphtap {

namespace semicircle {

double density(double x) {
  if (std::abs(x) >= kEdge) return 0.0;
  return std::sqrt(std::max(0.0, 2.0 - x * x)) / std::numbers::pi;
}

double cdf(double theta) {
  if (theta <= -kEdge) return 0.0;
  if (theta >= kEdge) return 1.0;
  const double r = std::sqrt(std::max(0.0, 2.0 - theta * theta));
  const double s = std::clamp(theta / kEdge, -1.0, 1.0);
  const double v = 0.5 + theta * r / (2.0 * std::numbers::pi) + std::asin(s) / std::numbers::pi;
  return std::clamp(v, 0.0, 1.0);
}

double classical_location(double q) {
  if (!(q > 0.0 && q <= 1.0)) {
    std::ostringstream os;
    os << "classical_location: q must lie in (0, 1], got " << q;
    throw InputError(os.str());
  }
  if (q == 1.0) return kEdge;
  if (q == 0.5) return 0.0;
  boost::uintmax_t max_iter = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      [q](double t) { return cdf(t) - q; }, -kEdge, kEdge, -q, 1.0 - q,
      boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (lo + hi);
}

}  // namespace semicircle

BinnedSpectrum make_binned(int bins) {
  if (bins < 2) {
    std::ostringstream os;
    os << "make_binned: need at least 2 bins, got " << bins;
    throw InputError(os.str());
  }
  BinnedSpectrum s;
  s.bins = bins;
  s.atoms.resize(bins);
  s.weights.resize(bins);
  const double width = 2.0 * semicircle::kEdge / bins;
  for (int k = 0; k < bins; ++k) s.atoms[k] = -semicircle::kEdge + k * width;
  for (int k = 0; k + 1 < bins; ++k) {
    s.weights[k] = semicircle::cdf(s.atoms[k + 1]) - semicircle::cdf(s.atoms[k]);
  }
  s.weights[bins - 1] = 1.0 - semicircle::cdf(s.atoms[bins - 1]);
  return s;
}

namespace {

// G and G' at offset t from the rightmost atom.
struct GValue {
  double g;
  double dg;
};

GValue stieltjes_with_derivative(const BinnedSpectrum& spec, double t) {
  const double xk = spec.rightmost();
  double g = 0.0, dg = 0.0;
  for (int k = 0; k < spec.bins; ++k) {
    const double gap = t + (xk - spec.atoms[k]);
    const double r = spec.weights[k] / gap;
    g += r;
    dg -= r / gap;
  }
  return {g, dg};
}

}  // namespace

double stieltjes_offset(const BinnedSpectrum& spec, double t) {
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << "stieltjes: argument must lie strictly right of the rightmost atom (offset " << t
       << ")";
    throw DomainError(os.str());
  }
  return stieltjes_with_derivative(spec, t).g;
}

double stieltjes(const BinnedSpectrum& spec, double z) {
  if (!(z > spec.rightmost())) {
    std::ostringstream os;
    os.precision(17);
    os << "stieltjes: z = " << z << " is not right of the rightmost atom "
       << spec.rightmost();
    throw DomainError(os.str());
  }
  return stieltjes_offset(spec, z - spec.rightmost());
}

double v_offset(const BinnedSpectrum& spec, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    std::ostringstream os;
    os << "v_of: z must be positive and finite, got " << z;
    throw InputError(os.str());
  }
  // G(t) > z at lo, G(t) <= z at hi: every gap at hi is at least 1/z.
  double lo = 1e-14;
  double hi = 1.0 / z + 2.0 * semicircle::kEdge;
  if (stieltjes_offset(spec, lo) <= z) return lo;

  // Bisection to relative width 1e-8; geometric while the bracket spans decades.
  for (int it = 0; it < 400 && (hi - lo) > 1e-8 * hi; ++it) {
    const double mid = (hi > 4.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (stieltjes_offset(spec, mid) > z) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // Newton polish, kept inside the bracket.
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    const GValue gv = stieltjes_with_derivative(spec, t);
    const double resid = gv.g - z;
    if (std::abs(resid) <= 1e-14 * z) return t;
    double next = t - resid / gv.dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (resid > 0) {
      lo = t;
    } else {
      hi = t;
    }
    if (next == t) break;
    t = next;
  }
  const double resid = stieltjes_offset(spec, t) - z;
  if (std::abs(resid) > 1e-10 * z) {
    std::ostringstream os;
    os.precision(17);
    os << "v_of: inversion did not converge for z = " << z << " (residual " << resid << ")";
    throw NumericalError(os.str());
  }
  return t;
}

double v_of(const BinnedSpectrum& spec, double z) { return spec.rightmost() + v_offset(spec, z); }

double fk(const BinnedSpectrum& spec, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    std::ostringstream os;
    os << "fk: beta must be a finite nonnegative number, got " << beta;
    throw InputError(os.str());
  }
  if (beta < 1e-8) return 0.0;
  const double z = 2.0 * beta;
  const double t = v_offset(spec, z);
  const double xk = spec.rightmost();
  const double v = xk + t;
  double log_sum = 0.0;
  for (int k = 0; k < spec.bins; ++k) {
    log_sum += spec.weights[k] * std::log(t + (xk - spec.atoms[k]));
  }
  return 0.5 * (z * v - std::log(z) - log_sum - 1.0);
}

double fk_prime(const BinnedSpectrum& spec, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    std::ostringstream os;
    os << "fk_prime: beta must be positive, got " << beta;
    throw InputError(os.str());
  }
  return v_of(spec, 2.0 * beta) - 1.0 / (2.0 * beta);
}

}  // namespace sphtap
