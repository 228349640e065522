#pragma once

#include <string>
#include <vector>

#include "ite/radial_solver.hpp"

namespace ite {

/// D0(k) = (sin k / k) y'(1;k) - cos k y(1;k), from one solver call.
ScaledComplex d0(const RadialProfile& profile, cplx k, const IntegratorConfig& cfg = {});

/// dD0/dk via the variational system.
ScaledComplex d0_derivative(const RadialProfile& profile, cplx k, const IntegratorConfig& cfg = {});

struct D0Pair {
  ScaledComplex value;
  ScaledComplex derivative;
};

/// D0 and dD0/dk from a single augmented integration.
D0Pair d0_with_derivative(const RadialProfile& profile, cplx k, const IntegratorConfig& cfg = {});

/// log of the growth envelope exp((1+B)|Im k|) / max(1, |k|).
double log_envelope(cplx k, double travel_time);

/// |value| divided by the growth envelope at k.
double normalized_abs(const ScaledComplex& value, cplx k, double travel_time);

/// Largest envelope-normalised |D0| on an nx-by-ny grid over the rectangle,
/// evaluated at rel_tol 1e-14 whatever `cfg` says.
double prescan_max_normalized(const LiouvilleMap& map, double re_min, double re_max, double im_min,
                              double im_max, const IntegratorConfig& cfg, int nx = 9, int ny = 5);

/// Throws DegenerateDeterminantError when the prescan maximum is below `floor`
/// (D0 vanishes identically exactly when n == 1).
void require_nondegenerate(const LiouvilleMap& map, double re_min, double re_max, double im_min,
                           double im_max, const IntegratorConfig& cfg, double floor = 1e-12);

/// Parameters of the large-k exponential-polynomial models of D0.
struct AsymptoticModel {
  enum class Mode { full, reduced };

  double travel_time = 1;  // B
  double n0_quarter = 1;   // n(0)^{1/4}
  double p0 = 0;           // p at xi = 0
  double q_b = 0;          // Q(B)
  double p_b = 0;          // p at xi = B
  Mode mode = Mode::reduced;

  static AsymptoticModel from_map(const LiouvilleMap& map, Mode mode);
  void validate() const;
};

/// Evaluates the model at k, |k| >= 1.
///
/// Mode::full uses the O1/O2 factorisation of D0 with their 1/k^3 tails
/// dropped; it needs |sin kB| and |cos kB| above `guard`. Mode::reduced is
/// [k^2 (e^{i(1-B)k} - e^{-i(1-B)k}) - p0 (e^{i(1+B)k} - e^{-i(1+B)k})] / (i k^3).
ScaledComplex d0_asymptotic(const AsymptoticModel& model, cplx k, double guard = 0.1);

/// Shape mismatch between i k^3 n(0)^{1/4} D0 and the reduced model on a window of Im k = im.
///
/// A complex scale c is fitted by least squares over the window; the
/// deviation is max |c M - R| / (|k|^2 e^{|1-B||Im k|} + e^{(1+B)|Im k|}),
/// with M the numerical and R the model side.
struct ModelDeviation {
  double deviation = 0;
  cplx scale{0};
  int samples = 0;
};

ModelDeviation reduced_model_deviation(const LiouvilleMap& map, double re_start, double im, double window,
                                       int samples = 33, const IntegratorConfig& cfg = {});

/// Directional growth of D0 along the ray arg k = theta.
struct IndicatorReport {
  double theta = 0;
  std::vector<double> radii;
  std::vector<double> raw;  // log|D0(R e^{i theta})| / R
  double extrapolated = 0;  // h from the least-squares fit h + c/R
  double slope = 0;         // fitted c
  double target = 0;        // (1+B)|sin theta|
  std::vector<std::string> notes;
};

IndicatorReport indicator_estimate(const LiouvilleMap& map, double theta, const std::vector<double>& radii,
                                   const IntegratorConfig& cfg = {}, double max_radius = 400);

/// Envelope-normalised extremes of |D0| on the line Im k = h.
struct HorizontalBounds {
  double h = 0;
  double x_min = 0;
  double x_max = 0;
  int samples = 0;
  double min_abs = 0;  // min |D0(x+ih)| e^{-(1+B)|h|}
  double max_abs = 0;
  bool near_zero = false;  // min below 1e-8: the line passes close to a zero
};

/// `h_min` <= 0 selects the default 2 pi / (1+B).
HorizontalBounds horizontal_bounds(const LiouvilleMap& map, double h, double x_min, double x_max, int samples,
                                   const IntegratorConfig& cfg = {}, double h_min = -1);

/// Unit null vector (a00, b00) of the l = 0 boundary matching matrix at an eigenvalue.
struct EigenpairCoefficients {
  cplx k{0};
  cplx a00{0};
  cplx b00{0};
  double matching_residual = 0;  // smaller / larger singular value
};

EigenpairCoefficients eigenpair_coefficients(const LiouvilleMap& map, cplx k, const IntegratorConfig& cfg = {},
                                             double zero_tol = 1e-8);

}  // namespace ite
