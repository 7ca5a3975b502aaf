#pragma once

#include <array>
#include <string>
#include <vector>

#include "rpde/config.hpp"
#include "rpde/stats.hpp"

namespace rpde {

/// Per-probe ensemble values, probe-major: samples[q][m].
struct EnsembleTable {
  std::array<std::string, 2> axes;
  std::vector<Probe> probes;
  std::vector<std::vector<double>> samples;
};

// Column layouts (all numbers %.17g):
//   ensemble: probe,<a0>,<a1>,sample,value
//   summary:  probe,<a0>,<a1>,mean,std,bandwidth
//   pdf:      probe,abscissa,density
// <a0>,<a1> are "t,x" for diffusion problems and "x,y" for heat problems.

void write_ensemble_csv(const std::string& path, const EnsembleTable& table);
/// ConfigError on any schema problem (header, column count, probe/sample order).
EnsembleTable read_ensemble_csv(const std::string& path);

/// Summary rows; bandwidth is 0 where no density estimate was made
/// (fewer than 30 samples or zero spread). Returns the density estimates
/// that were made, keyed by probe index.
struct SummaryOutput {
  StatsField field;
  std::vector<double> bandwidth;
  std::vector<std::pair<std::size_t, PdfEstimate>> pdfs;
};
SummaryOutput summarize(const EnsembleTable& table, int pdf_points);

void write_summary_csv(const std::string& path, const EnsembleTable& table, const SummaryOutput& summary);
void write_pdf_csv(const std::string& path, const SummaryOutput& summary);

}  // namespace rpde
