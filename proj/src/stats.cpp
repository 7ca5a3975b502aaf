#include "rpde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rpde/errors.hpp"

namespace rpde {

Moments ensemble_moments(std::span<const double> samples) {
  if (samples.size() < 2) throw UsageError("ensemble moments need at least 2 samples");
  // Shift by the first sample so a constant ensemble gives exactly zero spread.
  const double shift = samples[0];
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v - shift;
  const double offset = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - shift - offset) * (v - shift - offset);
  return {shift + offset, std::sqrt(ss / (n - 1.0))};
}

double silverman_bandwidth(std::span<const double> samples) {
  const Moments m = ensemble_moments(samples);
  return 1.06 * m.std * std::pow(static_cast<double>(samples.size()), -0.2);
}

PdfEstimate kde_pdf(std::span<const double> samples, std::span<const double> abscissae) {
  if (samples.size() < 30) throw UsageError("kde_pdf needs at least 30 samples");
  PdfEstimate est;
  est.bandwidth = silverman_bandwidth(samples);
  if (!(est.bandwidth > 0.0)) throw UsageError("kde_pdf: degenerate distribution (zero sample variance)");
  const double h = est.bandwidth;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  est.abscissae.assign(abscissae.begin(), abscissae.end());
  est.density.reserve(abscissae.size());
  for (double x : abscissae) {
    double s = 0.0;
    for (double v : samples) {
      const double z = (x - v) / h;
      s += std::exp(-0.5 * z * z);
    }
    est.density.push_back(s * norm);
  }
  return est;
}

std::vector<double> kde_abscissae(std::span<const double> samples, int count) {
  if (count < 2) throw UsageError("kde_abscissae needs at least 2 points");
  const double h = silverman_bandwidth(samples);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 4.0 * h;
  const double hi = *hi_it + 4.0 * h;
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) xs[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (count - 1);
  return xs;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw UsageError("ks_distance needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    worst = std::max(worst, std::abs(i / na - j / nb));
  }
  return worst;
}

StatsField StatsField::from_samples(std::vector<std::array<double, 2>> probes,
                                    std::vector<std::vector<double>> samples) {
  if (probes.size() != samples.size()) throw UsageError("one sample list per probe is required");
  StatsField f;
  f.probes = std::move(probes);
  for (const auto& s : samples) {
    const Moments m = ensemble_moments(s);
    f.mean.push_back(m.mean);
    f.std.push_back(m.std);
  }
  f.samples = std::move(samples);
  return f;
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("relative_l2: length mismatch");
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    ref += b[k] * b[k];
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

FieldComparison compare_fields(const StatsField& a, const StatsField& b) {
  if (a.probes != b.probes) throw UsageError("compare_fields: probe sets differ");
  FieldComparison c;
  c.mean_rel_l2 = relative_l2(a.mean, b.mean);
  c.std_rel_l2 = relative_l2(a.std, b.std);
  for (std::size_t k = 0; k < a.probes.size(); ++k) {
    c.mean_max_abs = std::max(c.mean_max_abs, std::abs(a.mean[k] - b.mean[k]));
    c.std_max_abs = std::max(c.std_max_abs, std::abs(a.std[k] - b.std[k]));
  }
  if (a.has_samples() && b.has_samples()) {
    for (std::size_t k = 0; k < a.probes.size(); ++k) {
      c.ks.push_back(ks_distance(a.samples[k], b.samples[k]));
      c.ks_max = std::max(c.ks_max, c.ks.back());
    }
  }
  return c;
}

}  // namespace rpde
