#pragma once

#include <array>
#include <span>
#include <vector>

namespace rpde {

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // unbiased (n-1)
};

/// Mean and unbiased standard deviation; UsageError for fewer than 2 samples.
Moments ensemble_moments(std::span<const double> samples);

struct PdfEstimate {
  std::vector<double> abscissae;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Silverman bandwidth 1.06 sigma n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian-kernel density estimate; needs >= 30 samples and nonzero variance.
PdfEstimate kde_pdf(std::span<const double> samples, std::span<const double> abscissae);

/// `count` evenly spaced points covering [min - 4h, max + 4h].
std::vector<double> kde_abscissae(std::span<const double> samples, int count);

/// Two-sample Kolmogorov-Smirnov statistic on the empirical CDFs.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Per-probe ensemble statistics. `samples` may be empty when only
/// summaries are available (KS is then skipped).
struct StatsField {
  std::vector<std::array<double, 2>> probes;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::vector<double>> samples;

  static StatsField from_samples(std::vector<std::array<double, 2>> probes, std::vector<std::vector<double>> samples);
  bool has_samples() const { return !samples.empty(); }
};

struct FieldComparison {
  double mean_rel_l2 = 0.0;  // ||mean_a - mean_b|| / ||mean_b||
  double std_rel_l2 = 0.0;
  double mean_max_abs = 0.0;
  double std_max_abs = 0.0;
  std::vector<double> ks;  // per probe, empty without samples
  double ks_max = 0.0;
};

/// Metrics of `a` against the reference `b`. UsageError if probe sets differ.
FieldComparison compare_fields(const StatsField& a, const StatsField& b);

/// |a - b| / |b| in the L2 sense; absolute norm when the reference is zero.
double relative_l2(std::span<const double> a, std::span<const double> b);

}  // namespace rpde
