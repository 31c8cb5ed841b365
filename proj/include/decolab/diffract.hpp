#pragma once

#include <optional>
#include <string>
#include <vector>

#include "decolab/qcore.hpp"

#include <json.hpp>

// Compiled single- and double-diffractive cross-section dataset, the
// decoherence-factor model family and the weighted log-space regression
// used to extract phi.
//
// SD values are stored as 2*sigma_SD (the conventional doubling of the
// one-sided cross section); s is measured in GeV^2 with s0 = 1 GeV^2. The
// reaction class fixes the phi power through the antiproton interaction
// count k: SD classes A..D carry phi^(2k) with k = 0..3, DD classes E..G
// carry phi^(4k) with k = 0..2.
//
// Fits minimise the weighted log deviation
//   delta_w^2 = sum w_i ln^2(pred_i/obs_i) / sum w_i,  w_i = (obs_i/err_i)^2
// (inverse variance in log space), are linear in the fitted parameters and
// are solved by weighted least squares. delta_L2 is the plain RMS residual
// in mb and chi2_w = sum w_i ln^2(pred/obs) / (n - n_f).

namespace decolab::diffract {

enum class ReactionClass { A, B, C, D, E, F, G };
enum class DiffractionKind { SD, DD };

ReactionClass reaction_class_from_string(const std::string& s);
std::string to_string(ReactionClass c);
DiffractionKind kind_of(ReactionClass c);
int k_exponent(ReactionClass c);

struct CrossSectionPoint {
  std::string experiment;
  DiffractionKind kind = DiffractionKind::SD;
  ReactionClass reaction = ReactionClass::A;
  double sqrt_s = 0.0;  // GeV
  double value = 0.0;   // mb; 2*sigma_SD for SD rows
  double err_stat = 0.0;
  double err_syst = 0.0;
  std::optional<double> err_lo;  // asymmetric downward error (positive number)
  std::optional<double> err_hi;  // asymmetric upward error
  bool include = true;
  std::string note;

  double s() const { return sqrt_s * sqrt_s; }
  int k() const { return k_exponent(reaction); }
  /// RMS of stat and syst; asymmetric errors are RMS-combined with the
  /// stat part per side and then symmetrised by the arithmetic mean.
  double combined_error() const;
};

/// Parses the compiled CSV (header: experiment,kind,class,sqrt_s_gev,
/// value_mb,err_stat,err_syst,err_lo,err_hi,include,note). Throws with the
/// offending row number on malformed input or non-positive values.
std::vector<CrossSectionPoint> load_dataset(const std::string& path);

enum class ModelKind { SDF1, SDC1, SDF1s, SDF2, SDCln, SDC4, SDF1w1, SDC1w1, DDF1, DDF2, DDC1 };
enum class Weighting { InverseVariance, Unit };

struct FitModel {
  ModelKind kind = ModelKind::SDF1;

  std::string name() const;
  DiffractionKind data_kind() const;
  Weighting default_weighting() const;
  int parameter_count() const;  // n_f
  std::vector<std::string> parameter_names() const;
  /// True for models carrying a free phi that freeze_phi can pin.
  bool has_phi() const;

  static FitModel from_name(const std::string& name);  // throws on unknown
  static std::vector<std::string> known_names();
};

/// Model prediction in mb from natural parameters (ordered as
/// parameter_names(); a frozen phi replaces the phi entry).
double model_predict(const FitModel& m, const std::vector<double>& params,
                     const CrossSectionPoint& p);

struct FitParameter {
  std::string name;
  double value = 0.0;
  double err_naive = 0.0;     // from the weighted-LS covariance
  double err_rescaled = 0.0;  // naive * sqrt(chi2_w)
};

struct FitResult {
  ModelKind model = ModelKind::SDF1;
  std::vector<FitParameter> params;
  std::optional<double> frozen_phi;
  Weighting weighting = Weighting::InverseVariance;
  double delta_w = 0.0;   // weighted RMS log deviation
  double delta_l2 = 0.0;  // RMS absolute deviation, mb
  double chi2_w = 0.0;    // reduced chi-squared of the weighted log fit
  int n = 0;
  int n_f = 0;
  RealMatrix covariance;  // naive, in the internal fit parameterisation

  // Per included point, in dataset order.
  std::vector<std::size_t> point_index;
  std::vector<double> predicted;
  std::vector<double> log_residual;  // ln(pred/obs)

  const FitParameter* find(const std::string& name) const;
  std::vector<double> natural_parameters() const;
  nlohmann::json to_json() const;
};

struct FitOptions {
  std::optional<double> freeze_phi;
  std::optional<Weighting> weighting;
};

/// Weighted linear least squares on the included points of the matching
/// kind. Throws if fewer included points than parameters or if the design
/// is rank-deficient (e.g. fitting phi on single-class data).
FitResult fit(const FitModel& m, const std::vector<CrossSectionPoint>& data,
              const FitOptions& opts = {});

/// DD entry point: DDF1 requires a frozen phi (the SD-fit value), DDF2
/// fits phi freely, DDC1 has none.
FitResult fit_dd(const FitModel& m, const std::vector<CrossSectionPoint>& data,
                 std::optional<double> phi_frozen = {});

struct E710Estimate {
  double phi = 0.0;
  double phi_uncertainty = 0.0;  // first-order propagation of count errors
  double delta_n = 0.0;          // N_R - N_L
  double coin_flip_scale = 0.0;  // sqrt(N_L + N_R)
  double bias_significance = 0.0;  // delta_n / coin_flip_scale
};

/// phi = sqrt(N_L / N_R) from side-separated event counts.
E710Estimate e710_direct_phi(double n_left, double n_right, double err_left, double err_right);

enum class NullHypothesis { PhiGreaterEqualOne, PhiIndependent };

struct Significance {
  double z = 0.0;            // (1 - phi) / sigma_phi, naive errors
  double p_one_sided = 0.0;  // Gaussian tail
  double p_two_sided = 0.0;  // exactly twice the one-sided value
  double p = 0.0;            // per the requested null
  double z_rescaled = 0.0;   // same with chi2-rescaled sigma_phi
  double p_rescaled = 0.0;
};

/// Gaussian-equivalent significance of phi < 1. Throws if the fit has no
/// phi parameter.
Significance significance(const FitResult& fit, NullHypothesis null);
Significance significance_from(double phi, double sigma_phi, NullHypothesis null);

/// Writes <out_dir>/fit_results.json, per-model curve CSVs over
/// sqrt(s) in [10, 1e4] GeV and a residual table; returns the file list.
std::vector<std::string> write_report(const std::vector<FitResult>& results,
                                      const std::vector<CrossSectionPoint>& data,
                                      const std::string& out_dir);

}  // namespace decolab::diffract
