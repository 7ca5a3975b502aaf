#include "rpde/csv_io.hpp"

#include <fstream>
#include <sstream>

#include "rpde/errors.hpp"

namespace rpde {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

[[noreturn]] void schema(const std::string& path, std::size_t line, const std::string& what) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + what);
}

double field_number(const std::string& s, const std::string& path, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    schema(path, line, "bad number '" + s + "'");
  }
  if (used != s.size()) schema(path, line, "bad number '" + s + "'");
  return v;
}

long field_index(const std::string& s, const std::string& path, std::size_t line) {
  std::size_t used = 0;
  long v = -1;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    schema(path, line, "bad index '" + s + "'");
  }
  if (used != s.size() || v < 0) schema(path, line, "bad index '" + s + "'");
  return v;
}

}  // namespace

void write_ensemble_csv(const std::string& path, const EnsembleTable& t) {
  std::ofstream out = open_out(path);
  out << "probe," << t.axes[0] << "," << t.axes[1] << ",sample,value\n";
  for (std::size_t q = 0; q < t.probes.size(); ++q) {
    const std::string head = std::to_string(q) + "," + format_double(t.probes[q][0]) + "," +
                             format_double(t.probes[q][1]) + ",";
    for (std::size_t m = 0; m < t.samples[q].size(); ++m) {
      out << head << m << "," << format_double(t.samples[q][m]) << "\n";
    }
  }
  if (!out) throw UsageError("error while writing '" + path + "'");
}

EnsembleTable read_ensemble_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  EnsembleTable t;
  std::string line;
  if (!std::getline(in, line)) schema(path, 1, "empty file");
  if (line == "probe,t,x,sample,value") {
    t.axes = {"t", "x"};
  } else if (line == "probe,x,y,sample,value") {
    t.axes = {"x", "y"};
  } else {
    schema(path, 1, "unexpected header '" + line + "' (want probe,t,x,sample,value or probe,x,y,sample,value)");
  }
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) schema(path, ln, "empty line");
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 5) schema(path, ln, "expected 5 columns, got " + std::to_string(f.size()));
    const auto q = static_cast<std::size_t>(field_index(f[0], path, ln));
    const Probe c{field_number(f[1], path, ln), field_number(f[2], path, ln)};
    const auto m = static_cast<std::size_t>(field_index(f[3], path, ln));
    const double v = field_number(f[4], path, ln);
    if (q == t.probes.size()) {
      t.probes.push_back(c);
      t.samples.emplace_back();
    } else if (q + 1 != t.probes.size()) {
      schema(path, ln, "probe index " + std::to_string(q) + " out of order");
    } else if (t.probes[q] != c) {
      schema(path, ln, "probe " + std::to_string(q) + " changes coordinates");
    }
    if (m != t.samples[q].size()) schema(path, ln, "sample index " + std::to_string(m) + " out of order");
    t.samples[q].push_back(v);
  }
  if (t.probes.empty()) schema(path, ln, "no data rows");
  for (std::size_t q = 1; q < t.samples.size(); ++q) {
    if (t.samples[q].size() != t.samples[0].size()) schema(path, ln, "probes have different sample counts");
  }
  return t;
}

SummaryOutput summarize(const EnsembleTable& t, int pdf_points) {
  SummaryOutput s;
  s.field = StatsField::from_samples(t.probes, t.samples);
  s.bandwidth.assign(t.probes.size(), 0.0);
  for (std::size_t q = 0; q < t.probes.size(); ++q) {
    if (t.samples[q].size() < 30 || !(s.field.std[q] > 0.0)) continue;
    PdfEstimate e = kde_pdf(t.samples[q], kde_abscissae(t.samples[q], pdf_points));
    s.bandwidth[q] = e.bandwidth;
    s.pdfs.emplace_back(q, std::move(e));
  }
  return s;
}

void write_summary_csv(const std::string& path, const EnsembleTable& t, const SummaryOutput& s) {
  std::ofstream out = open_out(path);
  out << "probe," << t.axes[0] << "," << t.axes[1] << ",mean,std,bandwidth\n";
  for (std::size_t q = 0; q < t.probes.size(); ++q) {
    out << q << "," << format_double(t.probes[q][0]) << "," << format_double(t.probes[q][1]) << ","
        << format_double(s.field.mean[q]) << "," << format_double(s.field.std[q]) << ","
        << format_double(s.bandwidth[q]) << "\n";
  }
  if (!out) throw UsageError("error while writing '" + path + "'");
}

void write_pdf_csv(const std::string& path, const SummaryOutput& s) {
  std::ofstream out = open_out(path);
  out << "probe,abscissa,density\n";
  for (const auto& [q, e] : s.pdfs) {
    for (std::size_t k = 0; k < e.abscissae.size(); ++k) {
      out << q << "," << format_double(e.abscissae[k]) << "," << format_double(e.density[k]) << "\n";
    }
  }
  if (!out) throw UsageError("error while writing '" + path + "'");
}

}  // namespace rpde
