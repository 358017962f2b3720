#pragma once

// Real-order Bessel, modified Bessel and Kelvin functions of real argument.
//
// Orders are restricted to nu >= -1/2 and arguments to x >= 0. Every entry
// point is a pure function; failures to converge are reported by exception
// (or by SpecialFunctionResult::converged for the raw series), never by a
// silently wrong number.

#include <complex>

namespace mrbf::specfun {

struct SpecialFunctionResult {
  double value = 0.0;
  bool converged = false;
  int terms_used = 0;
};

struct SeriesOptions {
  int max_terms = 500;
  // Below this argument the ascending series is used for I_nu.
  double crossover = 20.0;
};

/// Gamma function of real argument (Lanczos, g = 7); poles throw DomainError.
double gamma(double x);

/// Raw ascending series sum_k (-1)^k (x/2)^(2k+nu) / (k! Gamma(k+nu+1)).
SpecialFunctionResult bessel_j_series(double nu, double x, int max_terms = 500);
/// Raw ascending series sum_k (x/2)^(2k+nu) / (k! Gamma(k+nu+1)).
SpecialFunctionResult bessel_i_series(double nu, double x, int max_terms = 500);

double bessel_j(double nu, double x, const SeriesOptions& opts = {});
/// Bessel function of the second kind; nu >= 0, x > 0.
double bessel_y(double nu, double x);
double bessel_i(double nu, double x, const SeriesOptions& opts = {});
double bessel_k(double nu, double x);

/// K_nu(z) for complex z with Re z > 0 (Temme series near the origin,
/// Steed's continued fraction further out).
std::complex<double> bessel_k(double nu, std::complex<double> z);

struct KelvinValues {
  double ber = 0.0;
  double bei = 0.0;
  double ker = 0.0;
  double kei = 0.0;
};

/// ber_nu(x) + i bei_nu(x) = J_nu(x e^{3 pi i / 4}).
std::complex<double> kelvin_be(double nu, double x, int max_terms = 500);
/// ker_nu(x) + i kei_nu(x) = e^{-nu pi i / 2} K_nu(x e^{pi i / 4}); x > 0.
std::complex<double> kelvin_ke(double nu, double x);

/// All four Kelvin functions. ker/kei are only computed when x > 0; with
/// x = 0 and want_second_kind set, a SingularityError is thrown.
KelvinValues kelvin(double nu, double x, bool want_second_kind = true);

}  // namespace mrbf::specfun
