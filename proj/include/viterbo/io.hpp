#pragma once

// Output formats: RFC-4180 CSV tables, plain-primitive SVG figures and
// ordered JSON summaries.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "viterbo/cerf.hpp"
#include "viterbo/errors.hpp"
#include "viterbo/hodograph.hpp"
#include "viterbo/jet_space.hpp"
#include "viterbo/scenarios.hpp"
#include "viterbo/spectra.hpp"

namespace viterbo {

using ojson = nlohmann::ordered_json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw PreconditionError("CSV header must not be empty");
  }

  CsvTable& row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw PreconditionError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
    return *this;
  }

  std::size_t rows() const { return rows_.size(); }

  static std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += escape(cells[i]);
      }
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

inline CsvTable spectrum_csv(const ViterboSpectrum& s) {
  CsvTable t({"k", "value", "degree", "boundary", "q", "w"});
  for (std::size_t k = 0; k < s.size(); ++k) {
    const SpectralValue& v = s.values[k];
    t.row({cell(k + 1), cell(v.value), cell(v.degree), cell(v.boundary), cell(v.q), join_doubles(v.w)});
  }
  return t;
}

inline CsvTable cerf_branches_csv(const CerfDiagram& d) {
  CsvTable t({"branch", "boundary", "t", "z", "q", "w"});
  for (const CerfBranch& br : d.branches)
    for (const BranchSample& s : br.samples)
      t.row({cell(br.id), cell(br.boundary), cell(s.t), cell(s.z), cell(s.q), join_doubles(s.w)});
  return t;
}

inline CsvTable cerf_events_csv(const CerfDiagram& d) {
  CsvTable t({"kind", "t", "z", "q"});
  for (const CerfEvent& e : d.events) t.row({to_string(e.kind), cell(e.t), cell(e.z), cell(e.q)});
  return t;
}

inline CsvTable trajectory_csv(const ViterboTrajectory& tr) {
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < tr.curves.size(); ++k) header.push_back("c" + std::to_string(k + 1));
  CsvTable t(std::move(header));
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    std::vector<std::string> r{cell(tr.times[j])};
    for (const auto& c : tr.curves) r.push_back(cell(c[j]));
    t.row(std::move(r));
  }
  return t;
}

inline CsvTable loop_csv(const LegendrianLoop& loop) {
  CsvTable t({"i", "q", "p", "u"});
  for (std::size_t i = 0; i < loop.size(); ++i)
    t.row({cell(i), cell(loop[i].q()), cell(loop[i].p()), cell(loop[i].u())});
  return t;
}

inline CsvTable front_csv(const Front& f) {
  CsvTable t({"i", "q", "q_lift", "u", "cusp"});
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const bool cusp = std::find(f.cusps.begin(), f.cusps.end(), i) != f.cusps.end();
    t.row({cell(i), cell(f.points[i].q), cell(f.points[i].q_lift), cell(f.points[i].u), cell(cusp)});
  }
  return t;
}

inline CsvTable hodograph_csv(const std::vector<ContactElement>& curve) {
  CsvTable t({"i", "x1", "x2", "theta"});
  for (std::size_t i = 0; i < curve.size(); ++i)
    t.row({cell(i), cell(curve[i].x[0]), cell(curve[i].x[1]), cell(curve[i].theta)});
  return t;
}

inline CsvTable lambda_scan_csv(const LambdaScan& s) {
  std::vector<std::string> header{"lambda"};
  for (std::size_t k = 0; k < s.curves.size(); ++k) header.push_back("c" + std::to_string(k + 1));
  CsvTable t(std::move(header));
  for (std::size_t j = 0; j < s.lambdas.size(); ++j) {
    std::vector<std::string> r{cell(s.lambdas[j])};
    for (const auto& c : s.curves) r.push_back(cell(c[j]));
    t.row(std::move(r));
  }
  return t;
}

inline CsvTable crossings_csv(const std::vector<LambdaCrossing>& xs) {
  CsvTable t({"k", "lambda", "q", "w", "residual", "interior", "verified", "tangential"});
  for (const LambdaCrossing& x : xs)
    t.row({cell(x.k), cell(x.lambda), cell(x.q), join_doubles(x.w), cell(x.residual), cell(x.interior),
           cell(x.verified), cell(x.tangential)});
  return t;
}

inline CsvTable lambda_k_csv(const LambdaKReport& r) {
  CsvTable t({"s", "q", "p", "u", "lambda", "residual", "tangential"});
  for (const LambdaKPoint& p : r.points)
    t.row({cell(p.s), cell(p.q), cell(p.p), cell(p.u), cell(p.lambda), cell(p.residual), cell(p.tangential)});
  return t;
}

// ---------------------------------------------------------------------------
// SVG

/// Fixed-size canvas mapping a data box onto pixels, y pointing up.
class SvgCanvas {
 public:
  SvgCanvas(double x0, double x1, double y0, double y1, int width = 640, int height = 400)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), w_(width), h_(height) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) {
      y0_ -= 0.5;
      y1_ += 0.5;
    }
    const double pad = 0.05 * (y1_ - y0_);
    y0_ -= pad;
    y1_ += pad;
  }

  double px(double x) const { return margin + (x - x0_) / (x1_ - x0_) * (w_ - 2 * margin); }
  double py(double y) const { return h_ - margin - (y - y0_) / (y1_ - y0_) * (h_ - 2 * margin); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width = 1.0) {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
          << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      body_ << (i ? " " : "") << fmt(px(pts[i].first)) << ',' << fmt(py(pts[i].second));
    body_ << "\"/>\n";
  }

  void line(double xa, double ya, double xb, double yb, const std::string& stroke, double width = 1.0) {
    body_ << "<line x1=\"" << fmt(px(xa)) << "\" y1=\"" << fmt(py(ya)) << "\" x2=\"" << fmt(px(xb))
          << "\" y2=\"" << fmt(py(yb)) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width
          << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << r
          << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s) {
    std::string esc;
    for (char c : s) {
      if (c == '<') esc += "&lt;";
      else if (c == '>') esc += "&gt;";
      else if (c == '&') esc += "&amp;";
      else esc += c;
    }
    body_ << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(py(y))
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << esc << "</text>\n";
  }

  void axes() {
    if (y0_ < 0 && y1_ > 0) line(x0_, 0, x1_, 0, "#bbbbbb");
    body_ << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << w_ - 2 * margin
          << "\" height=\"" << h_ - 2 * margin << "\" fill=\"none\" stroke=\"#888888\"/>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << ' ' << h_ << "\">\n"
        << "<rect width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

  static constexpr double margin = 30.0;

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  double x0_, x1_, y0_, y1_;
  int w_, h_;
  std::ostringstream body_;
};

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[i % 6];
}

/// Front in the (q, u) plane, lifted q so the curve is drawn without jumps.
inline std::string front_svg(const std::vector<Front>& fronts) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Front& f : fronts)
    for (const FrontPoint& p : f.points) {
      x0 = std::min(x0, p.q_lift);
      x1 = std::max(x1, p.q_lift);
      y0 = std::min(y0, p.u);
      y1 = std::max(y1, p.u);
    }
  if (fronts.empty() || x0 > x1) return SvgCanvas(0, 1, 0, 1).str();
  SvgCanvas svg(x0, x1, y0, y1);
  svg.axes();
  for (std::size_t k = 0; k < fronts.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (const FrontPoint& p : fronts[k].points) pts.emplace_back(p.q_lift, p.u);
    if (!pts.empty()) pts.push_back(pts.front());
    svg.polyline(pts, palette(k), 1.5);
    for (std::size_t c : fronts[k].cusps) svg.circle(fronts[k].points[c].q_lift, fronts[k].points[c].u, 3, "black");
  }
  return svg.str();
}

inline std::string cerf_svg(const CerfDiagram& d, const ViterboTrajectory* tr = nullptr) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const CerfBranch& br : d.branches)
    for (const BranchSample& s : br.samples) {
      x0 = std::min(x0, s.t);
      x1 = std::max(x1, s.t);
      y0 = std::min(y0, s.z);
      y1 = std::max(y1, s.z);
    }
  if (x0 > x1) return SvgCanvas(0, 1, 0, 1).str();
  SvgCanvas svg(x0, x1, y0, y1);
  svg.axes();
  for (const CerfBranch& br : d.branches) {
    std::vector<std::pair<double, double>> pts;
    for (const BranchSample& s : br.samples) pts.emplace_back(s.t, s.z);
    svg.polyline(pts, br.boundary ? "#ff7f0e" : "#444444", 1.0);
  }
  if (tr != nullptr)
    for (std::size_t k = 0; k < tr->curves.size(); ++k) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t j = 0; j < tr->times.size(); ++j) pts.emplace_back(tr->times[j], tr->curves[k][j]);
      svg.polyline(pts, palette(k), 2.0);
    }
  for (const CerfEvent& e : d.events)
    svg.circle(e.t, e.z, 3.5, e.kind == EventKind::cusp ? "#d62728" :
                              e.kind == EventKind::crossing ? "#2ca02c" : "#9467bd");
  return svg.str();
}

inline std::string curves_svg(const std::vector<double>& x, const std::vector<std::vector<double>>& curves,
                              const std::vector<double>& marks = {}) {
  double y0 = 1e300, y1 = -1e300;
  for (const auto& c : curves)
    for (double v : c) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  if (x.empty() || y0 > y1) return SvgCanvas(0, 1, 0, 1).str();
  SvgCanvas svg(x.front(), x.back(), y0, y1);
  svg.axes();
  for (std::size_t k = 0; k < curves.size(); ++k) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < x.size(); ++j) pts.emplace_back(x[j], curves[k][j]);
    svg.polyline(pts, palette(k), 1.5);
  }
  for (double m : marks) svg.circle(m, 0.0, 3.5, "black");
  return svg.str();
}

/// Base points of a curve of contact elements with short coorientation ticks.
inline std::string hodograph_svg(const std::vector<ContactElement>& curve) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const ContactElement& e : curve) {
    x0 = std::min(x0, e.x[0]);
    x1 = std::max(x1, e.x[0]);
    y0 = std::min(y0, e.x[1]);
    y1 = std::max(y1, e.x[1]);
  }
  if (curve.empty()) return SvgCanvas(0, 1, 0, 1).str();
  const double span = std::max({x1 - x0, y1 - y0, 1.0});
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  SvgCanvas svg(cx - 0.6 * span, cx + 0.6 * span, cy - 0.6 * span, cy + 0.6 * span, 480, 480);
  svg.axes();
  std::vector<std::pair<double, double>> pts;
  for (const ContactElement& e : curve) pts.emplace_back(e.x[0], e.x[1]);
  pts.push_back(pts.front());
  svg.polyline(pts, palette(0), 1.5);
  const std::size_t stride = std::max<std::size_t>(1, curve.size() / 32);
  const double tick = 0.04 * span;
  for (std::size_t i = 0; i < curve.size(); i += stride) {
    const Vec2 n = unit(curve[i].theta);
    svg.line(curve[i].x[0], curve[i].x[1], curve[i].x[0] + tick * n[0], curve[i].x[1] + tick * n[1],
             palette(1));
  }
  return svg.str();
}

// ---------------------------------------------------------------------------
// JSON summaries

inline ojson to_json(const ViterboSpectrum& s) {
  ojson j;
  j["index"] = s.index;
  j["C"] = s.bounds.C;
  ojson vals = ojson::array();
  for (const SpectralValue& v : s.values) {
    ojson e;
    e["value"] = v.value;
    e["degree"] = v.degree;
    e["boundary"] = v.boundary;
    e["q"] = v.q;
    e["w"] = v.w;
    vals.push_back(e);
  }
  j["values"] = vals;
  return j;
}

inline ojson to_json(const LegendrianReport& r) {
  ojson j;
  j["max_defect"] = r.max_defect;
  j["max_defect_rate"] = r.max_defect_rate;
  j["worst_edge"] = r.worst_edge;
  j["pass"] = r.pass;
  return j;
}

inline ojson to_json(const PositivityReport& r) {
  ojson j;
  j["min_alpha"] = r.min_alpha;
  j["frame"] = r.frame;
  j["sample"] = r.sample;
  j["pass"] = r.pass;
  return j;
}

inline ojson to_json(const PositiveFamilyReport& r) {
  ojson j;
  j["min_speed"] = r.min_speed;
  j["t"] = r.t;
  j["q"] = r.q;
  j["pass"] = r.pass;
  return j;
}

inline ojson to_json(const SlopeReport& r) {
  ojson j;
  j["min_slope"] = r.min_slope;
  j["max_slope"] = r.max_slope;
  j["checked"] = r.checked;
  j["pass"] = r.pass ? ojson(*r.pass) : ojson(nullptr);
  return j;
}

inline ojson to_json(const LambdaCrossing& x) {
  ojson j;
  j["k"] = x.k;
  j["lambda"] = x.lambda;
  j["q"] = x.q;
  j["w"] = x.w;
  j["residual"] = x.residual;
  j["interior"] = x.interior;
  j["verified"] = x.verified;
  j["tangential"] = x.tangential;
  return j;
}

inline ojson to_json(const LambdaScan& s) {
  ojson j;
  j["betti"] = s.betti;
  j["n_lambda"] = s.lambdas.size();
  j["lambda_max"] = s.lambdas.empty() ? 0.0 : s.lambdas.back();
  ojson first = ojson::array(), last = ojson::array();
  for (const auto& c : s.curves) {
    first.push_back(c.front());
    last.push_back(c.back());
  }
  j["c_at_0"] = first;
  j["c_at_lambda_max"] = last;
  ojson xs = ojson::array();
  for (const auto& x : s.crossings) xs.push_back(to_json(x));
  j["crossings"] = xs;
  j["distinct_lambdas"] = s.distinct_lambdas;
  j["final_negative"] = s.final_negative;
  j["pass"] = s.pass;
  return j;
}

inline ojson to_json(const LambdaKReport& r) {
  ojson j;
  j["k"] = r.k;
  j["count"] = r.count;
  j["positive"] = r.positive;
  j["negative"] = r.negative;
  j["degenerate"] = r.degenerate;
  j["tangential"] = r.has_tangential;
  double worst = 0.0;
  for (const auto& p : r.points) worst = std::max(worst, p.residual);
  j["max_residual"] = worst;
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << text;
  if (!out) throw PreconditionError("failed writing " + path.string());
}

}  // namespace viterbo
