#pragma once

// G_cs distributions, two-model proportion differences, relative improvement
// tables and their CSV/SVG renderings.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csm/matching.hpp"

namespace csm {

struct Histogram {
  double lo = 0.0;
  double hi = 2.0;
  std::vector<std::size_t> counts;
  /// Every pair seen, including those outside [lo, hi].
  std::size_t total_pairs = 0;

  std::size_t bins() const { return counts.size(); }
  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double bin_lo(std::size_t i) const;
  double bin_hi(std::size_t i) const;
  /// counts[i] / total_pairs; nullopt when there are no pairs.
  std::optional<std::vector<double>> proportions() const;
};

inline constexpr double kDefaultIntervalLo = 0.0;
inline constexpr double kDefaultIntervalHi = 2.0;
inline constexpr std::size_t kDefaultBins = 40;

/// Bin i covers [lo + i*w, lo + (i+1)*w); the last bin is closed above.
/// Throws UsageError when bins == 0 or lo >= hi.
Histogram gcs_histogram(std::span<const double> gaps, double lo = kDefaultIntervalLo,
                        double hi = kDefaultIntervalHi, std::size_t bins = kDefaultBins);

struct DiffSeries {
  double lo = 0.0;
  double hi = 2.0;
  /// values[i] = P_b[i] - P_a[i]
  std::vector<double> values;

  std::size_t bins() const { return values.size(); }
  double bin_lo(std::size_t i) const;
  double bin_hi(std::size_t i) const;
};

/// Elementwise P_b - P_a. Throws UsageError on mismatched binning or when
/// either histogram is empty.
DiffSeries proportion_difference(const Histogram& a, const Histogram& b);

/// 100 * (new - base) / base; nullopt when base is 0.
std::optional<double> improvement_percent(double base_ap, double new_ap);

struct SvgStyle {
  int width = 640;
  int height = 360;
  std::string title;
  std::string x_label = "G_cs (m)";
  std::string y_label;
  std::string bar_color = "#4a78b5";
  std::string negative_color = "#c0504d";
};

/// Self-contained SVG 1.1 bar chart with axes and a zero line; one
/// <rect class="bar"> per bin. Byte-identical output for identical input.
std::string render_svg(const DiffSeries& series, const SvgStyle& style = {});
std::string render_svg(const Histogram& histogram, const SvgStyle& style = {});

/// bin_lo,bin_hi,count,p
void write_histogram_csv(const Histogram& h, std::ostream& out);
/// bin_lo,bin_hi,p_a,p_b,diff
void write_diff_csv(const Histogram& a, const Histogram& b, std::ostream& out);

/// class,difficulty,metric,ap_a,ap_b,improvement_pct for entries present in
/// both reports, in report_a's row order.
void write_comparison_csv(const EvalReport& report_a, const EvalReport& report_b,
                          std::ostream& out);

}  // namespace csm
