#include "csm/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace csm {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string num(double v) { return fmt("%.3f", v); }

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double edge_at(double lo, double hi, std::size_t bins, std::size_t i) {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
}

// Shared bar-chart renderer; values may be negative.
std::string render_bars(double lo, double hi, std::span<const double> values,
                        const SvgStyle& style) {
  const double left = 60.0, right = 20.0, top = 36.0, bottom = 48.0;
  const double plot_w = style.width - left - right;
  const double plot_h = style.height - top - bottom;

  double vmax = 0.0, vmin = 0.0;
  for (double v : values) {
    vmax = std::max(vmax, v);
    vmin = std::min(vmin, v);
  }
  if (vmax == vmin) {
    vmax = 1.0;
    vmin = vmin < 0.0 ? -1.0 : 0.0;
  }
  const double pad = 0.05 * (vmax - vmin);
  const double ymax = vmax + (vmax > 0.0 ? pad : 0.0);
  const double ymin = vmin - (vmin < 0.0 ? pad : 0.0);
  auto ypix = [&](double v) { return top + (ymax - v) / (ymax - ymin) * plot_h; };
  const double y0 = ypix(0.0);
  const double bar_w = plot_w / static_cast<double>(std::max<std::size_t>(values.size(), 1));

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width
    << "\" height=\"" << style.height << "\" viewBox=\"0 0 " << style.width << ' '
    << style.height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
    << "\" fill=\"#ffffff\"/>\n";
  if (!style.title.empty()) {
    s << "<text x=\"" << num(style.width / 2.0)
      << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << escape_xml(style.title) << "</text>\n";
  }
  s << "<g class=\"bars\">\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double y = std::min(ypix(v), y0);
    const double h = std::abs(ypix(v) - y0);
    s << "<rect class=\"bar\" x=\"" << num(left + bar_w * static_cast<double>(i)) << "\" y=\""
      << num(y) << "\" width=\"" << num(bar_w * 0.9) << "\" height=\"" << num(h)
      << "\" fill=\"" << (v < 0.0 ? style.negative_color : style.bar_color) << "\"/>\n";
  }
  s << "</g>\n";
  // Axes and zero line.
  s << "<line class=\"axis\" x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\""
    << num(left) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"#000000\"/>\n"
    << "<line class=\"axis\" x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
    << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"#000000\"/>\n"
    << "<line class=\"zero\" x1=\"" << num(left) << "\" y1=\"" << num(y0) << "\" x2=\""
    << num(left + plot_w) << "\" y2=\"" << num(y0) << "\" stroke=\"#555555\"/>\n";
  // Ticks: five along x, ymin/0/ymax along y.
  for (int t = 0; t <= 4; ++t) {
    const double xv = lo + (hi - lo) * t / 4.0;
    const double xp = left + plot_w * t / 4.0;
    s << "<text x=\"" << num(xp) << "\" y=\"" << num(top + plot_h + 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt("%.2f", xv)
      << "</text>\n";
  }
  for (double yv : {ymin, 0.0, ymax}) {
    s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(ypix(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt("%.3f", yv)
      << "</text>\n";
  }
  s << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(style.height - 8.0)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << escape_xml(style.x_label) << "</text>\n";
  if (!style.y_label.empty()) {
    s << "<text x=\"14\" y=\"" << num(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
      << num(top + plot_h / 2) << ")\">" << escape_xml(style.y_label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace

double Histogram::bin_lo(std::size_t i) const { return edge_at(lo, hi, counts.size(), i); }
double Histogram::bin_hi(std::size_t i) const { return edge_at(lo, hi, counts.size(), i + 1); }

std::optional<std::vector<double>> Histogram::proportions() const {
  if (total_pairs == 0) return std::nullopt;
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(total_pairs);
  }
  return p;
}

Histogram gcs_histogram(std::span<const double> gaps, double lo, double hi, std::size_t bins) {
  if (bins == 0) throw UsageError("histogram needs at least one bin");
  if (!(lo < hi)) throw UsageError("histogram interval must satisfy lo < hi");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  h.total_pairs = gaps.size();
  for (double g : gaps) {
    if (!(g >= lo && g <= hi)) continue;
    auto idx = static_cast<std::size_t>(std::floor((g - lo) / (hi - lo) * static_cast<double>(bins)));
    // Guard the division against landing one bin off near an edge.
    while (idx > 0 && g < edge_at(lo, hi, bins, idx)) --idx;
    while (idx + 1 < bins && g >= edge_at(lo, hi, bins, idx + 1)) ++idx;
    h.counts[std::min(idx, bins - 1)]++;
  }
  return h;
}

double DiffSeries::bin_lo(std::size_t i) const { return edge_at(lo, hi, values.size(), i); }
double DiffSeries::bin_hi(std::size_t i) const { return edge_at(lo, hi, values.size(), i + 1); }

DiffSeries proportion_difference(const Histogram& a, const Histogram& b) {
  if (a.bins() != b.bins() || a.lo != b.lo || a.hi != b.hi) {
    throw UsageError("proportion_difference needs identical interval and bin count");
  }
  const auto pa = a.proportions();
  const auto pb = b.proportions();
  if (!pa || !pb) throw UsageError("proportion_difference: a histogram has no pairs");
  DiffSeries d;
  d.lo = a.lo;
  d.hi = a.hi;
  d.values.resize(a.bins());
  for (std::size_t i = 0; i < a.bins(); ++i) d.values[i] = (*pb)[i] - (*pa)[i];
  return d;
}

std::optional<double> improvement_percent(double base_ap, double new_ap) {
  if (base_ap == 0.0) return std::nullopt;
  return 100.0 * (new_ap - base_ap) / base_ap;
}

std::string render_svg(const DiffSeries& series, const SvgStyle& style) {
  SvgStyle s = style;
  if (s.y_label.empty()) s.y_label = "proportion difference";
  return render_bars(series.lo, series.hi, series.values, s);
}

std::string render_svg(const Histogram& histogram, const SvgStyle& style) {
  SvgStyle s = style;
  if (s.y_label.empty()) s.y_label = "proportion";
  const auto p = histogram.proportions();
  const std::vector<double> values = p ? *p : std::vector<double>(histogram.bins(), 0.0);
  return render_bars(histogram.lo, histogram.hi, values, s);
}

void write_histogram_csv(const Histogram& h, std::ostream& out) {
  const auto p = h.proportions();
  out << "bin_lo,bin_hi,count,p\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out << fmt("%.4f", h.bin_lo(i)) << ',' << fmt("%.4f", h.bin_hi(i)) << ',' << h.counts[i]
        << ',' << (p ? fmt("%.6f", (*p)[i]) : "") << '\n';
  }
  if (!out) throw IoError("histogram write failure");
}

void write_diff_csv(const Histogram& a, const Histogram& b, std::ostream& out) {
  const DiffSeries d = proportion_difference(a, b);
  const auto pa = *a.proportions();
  const auto pb = *b.proportions();
  out << "bin_lo,bin_hi,p_a,p_b,diff\n";
  for (std::size_t i = 0; i < d.bins(); ++i) {
    out << fmt("%.4f", d.bin_lo(i)) << ',' << fmt("%.4f", d.bin_hi(i)) << ','
        << fmt("%.6f", pa[i]) << ',' << fmt("%.6f", pb[i]) << ',' << fmt("%.6f", d.values[i])
        << '\n';
  }
  if (!out) throw IoError("diff write failure");
}

void write_comparison_csv(const EvalReport& report_a, const EvalReport& report_b,
                          std::ostream& out) {
  out << "class,difficulty,metric,ap_a,ap_b,improvement_pct\n";
  for (const auto& ea : report_a.entries) {
    const ReportEntry* eb = nullptr;
    for (const auto& e : report_b.entries) {
      if (e.class_label == ea.class_label && e.difficulty == ea.difficulty &&
          e.config.kind == ea.config.kind && e.config.alpha == ea.config.alpha &&
          e.config.iou_threshold == ea.config.iou_threshold) {
        eb = &e;
        break;
      }
    }
    if (eb == nullptr) continue;
    std::string improvement;
    if (ea.ap && eb->ap) {
      if (auto pct = improvement_percent(*ea.ap, *eb->ap)) {
        improvement = fmt("%.1f", *pct);
      }
    }
    out << ea.class_label << ',' << difficulty_name(ea.difficulty) << ','
        << metric_name(ea.config.kind) << ',' << (ea.ap ? fmt("%.4f", *ea.ap) : "") << ','
        << (eb->ap ? fmt("%.4f", *eb->ap) : "") << ',' << improvement << '\n';
  }
  if (!out) throw IoError("comparison write failure");
}

}  // namespace csm
