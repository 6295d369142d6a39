#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"

namespace modlab {

// Exponents of the anisotropic norms; each case reads the ones it needs.
struct EstimateParams {
  double p = 2.0;
  double pbar = kInf;
  double q = 4.0;
  double qbar = kInf;
  double r = 4.0 / 3.0;
  double strichartz_p = 2.0;  // space-time exponent 2 + p of the Strichartz pair
};

struct EstimateCase {
  std::string id;
  std::string label;  // one-letter family label (a .. i) with a suffix for variants
  std::string lhs;    // human-readable description of the measured norm
  std::string rhs;
  bool inhomogeneous = false;
  int default_dim = 2;
};

const std::vector<EstimateCase>& estimate_cases();
const EstimateCase& find_estimate_case(const std::string& id);

struct EstimateConfig {
  std::string case_id;
  std::uint64_t seed = 1;
  Grid grid;
  Signature eps;
  std::vector<int> k_list;   // k = (k_1, 0, ..)
  EstimateParams params;
  int slices = 64;
  double window_scale = 1.0;  // T_k = window_scale * L_1 / (4 |k_1|)
  int family_size = 6;
  std::array<double, 3> shift{0.0, 0.0, 0.0};
  bool check_refinement = true;
  bool check_window = true;
};

// Grid, k-list and exponents used by the acceptance sweep for a case.
EstimateConfig default_estimate_config(const std::string& case_id);

struct EstimateRow {
  int k = 0;
  int datum = 0;
  std::string family;
  std::string forcing;  // "none", "resonant" or "constant"
  double window = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;     // weight * data norm
  double ratio = 0.0;
};

struct EstimateReport {
  std::string case_id;
  std::vector<EstimateRow> rows;
  std::vector<int> k_values;
  std::vector<double> max_ratio_per_k;
  double max_ratio = 0.0;
  double weight_exponent = 0.0;
  double slope = 0.0;
  double slope_tolerance = 0.15;
  bool has_secondary = false;  // slope against the unsmoothed weight
  double secondary_slope = 0.0;
  double secondary_bound = -0.35;
  double refined_max_ratio = 0.0;
  double refinement_change = 0.0;  // relative
  double window_max_ratio = 0.0;
  double window_change = 0.0;      // relative, reported only

  bool slope_ok() const;
  bool refinement_ok() const;
};

// Runs one case; throws ValidationError when the exponents violate the
// admissibility condition of the estimate (the message names it).
EstimateReport run_estimate(const EstimateConfig& cfg);

// Rows only, without refinement or window runs.
EstimateReport run_estimate_rows(const EstimateConfig& cfg);

void write_report_csv(std::ostream& os, const EstimateReport& r);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConvolutionResult {
  double lhs = 0.0;
  double rhs_scale = 0.0;
  double ratio = 0.0;
};

// || sum_l |a_l| (1 + |x - l + b| / |c|)^{-theta} ||_{L^p_x} against
// <c>^{1/p + 1/r'} ||a||_{l^r}; a_l is indexed from l = first.
ConvolutionResult convolution_lemma_check(const std::vector<double>& a, int first, double theta, double p, double r,
                                          double b, double c);

struct ConvolutionSweep {
  std::vector<double> c_values;
  std::vector<double> sup_ratio;  // max over the family of lhs / ||a||_r
  double slope = 0.0;
  double exponent = 0.0;          // 1/p + 1/r'
};

// Sweeps c over a fixed sequence family (delta, flat, seeded random, decaying).
ConvolutionSweep convolution_sweep(double theta, double p, double r, const std::vector<double>& c_values,
                                   std::uint64_t seed = 7);

}  // namespace modlab
