// Copyright 2026 The fgcil Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fgcil/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fgcil::svg {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 480;
constexpr double kMargin = 60;

const char* colour(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  }
};

void header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& xl, const std::string& yl) {
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
    const double xv = f.x0 + (f.x1 - f.x0) * t / 4.0;
    out << "<text x=\"" << kMargin - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv) << "</text>\n";
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kMargin + 16
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 14 << "\" text-anchor=\"middle\">"
      << escape(xl) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\">" << escape(yl) << "</text>\n";
}

void legend(std::ostringstream& out, const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kMargin + 16.0 * static_cast<double>(i);
    out << "<rect x=\"" << kWidth - kMargin - 170 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << colour(i) << "\"/>\n";
    out << "<text x=\"" << kWidth - kMargin - 155 << "\" y=\"" << y << "\">" << escape(labels[i])
        << "</text>\n";
  }
}

}  // namespace

std::string scatter(const std::string& title, const Matrix& points, const std::vector<ClassId>& labels,
                    const Matrix* rays) {
  double lim = 1e-9;
  for (Index k = 0; k < points.rows(); ++k) {
    lim = std::max({lim, std::abs(points(k, 0)), std::abs(points(k, 1))});
  }
  if (rays != nullptr) {
    for (Index k = 0; k < rays->rows(); ++k) {
      lim = std::max({lim, std::abs((*rays)(k, 0)), std::abs((*rays)(k, 1))});
    }
  }
  lim *= 1.1;
  const Frame f{-lim, lim, -lim, lim};
  std::ostringstream out;
  header(out, title);
  axes(out, f, "x", "y");
  for (Index k = 0; k < points.rows(); ++k) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(k)]);
    out << "<circle cx=\"" << f.px(points(k, 0)) << "\" cy=\"" << f.py(points(k, 1))
        << "\" r=\"3\" fill=\"" << colour(c) << "\" fill-opacity=\"0.7\"/>\n";
  }
  if (rays != nullptr) {
    for (Index k = 0; k < rays->rows(); ++k) {
      out << "<line x1=\"" << f.px(0) << "\" y1=\"" << f.py(0) << "\" x2=\"" << f.px((*rays)(k, 0))
          << "\" y2=\"" << f.py((*rays)(k, 1)) << "\" stroke=\"" << colour(static_cast<std::size_t>(k))
          << "\" stroke-width=\"2\" stroke-dasharray=\"4 2\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series) {
  double x0 = 0, x1 = 1;
  bool first = true;
  for (const auto& s : series) {
    for (double x : s.x) {
      x0 = first ? x : std::min(x0, x);
      x1 = first ? x : std::max(x1, x);
      first = false;
    }
  }
  if (x1 <= x0) x1 = x0 + 1;
  const Frame f{x0, x1, 0.0, 1.0};
  std::ostringstream out;
  header(out, title);
  axes(out, f, x_label, y_label);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    names.push_back(s.label);
    out << "<polyline fill=\"none\" stroke=\"" << colour(i) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) out << f.px(s.x[k]) << ',' << f.py(s.y[k]) << ' ';
    out << "\"/>\n";
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      out << "<circle cx=\"" << f.px(s.x[k]) << "\" cy=\"" << f.py(s.y[k]) << "\" r=\"3\" fill=\""
          << colour(i) << "\"/>\n";
    }
  }
  legend(out, names);
  out << "</svg>\n";
  return out.str();
}

std::string bar_plot(const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<std::string>& categories,
                     const std::vector<Series>& series) {
  const Frame f{0.0, static_cast<double>(std::max<std::size_t>(categories.size(), 1)), 0.0, 1.0};
  std::ostringstream out;
  header(out, title);
  axes(out, f, x_label, y_label);
  const double slot = (kWidth - 2 * kMargin) / static_cast<double>(std::max<std::size_t>(categories.size(), 1));
  const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    names.push_back(series[i].label);
    for (std::size_t c = 0; c < series[i].y.size() && c < categories.size(); ++c) {
      const double x = kMargin + slot * static_cast<double>(c) + slot * 0.1 + bar * static_cast<double>(i);
      const double top = f.py(series[i].y[c]);
      out << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << bar << "\" height=\""
          << (kHeight - kMargin) - top << "\" fill=\"" << colour(i) << "\"/>\n";
    }
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    out << "<text x=\"" << kMargin + slot * (static_cast<double>(c) + 0.5) << "\" y=\""
        << kHeight - kMargin + 30 << "\" text-anchor=\"middle\">" << escape(categories[c]) << "</text>\n";
  }
  legend(out, names);
  out << "</svg>\n";
  return out.str();
}

}  // namespace fgcil::svg
