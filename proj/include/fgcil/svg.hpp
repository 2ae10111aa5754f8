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

#ifndef FGCIL_SVG_HPP
#define FGCIL_SVG_HPP

#include <string>
#include <vector>

#include "fgcil/types.hpp"

namespace fgcil::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Points coloured by label; optional arrows from the origin for `rays`.
std::string scatter(const std::string& title, const Matrix& points, const std::vector<ClassId>& labels,
                    const Matrix* rays = nullptr);

std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

// One bar group per category, one bar per series (series.y holds the heights).
std::string bar_plot(const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<std::string>& categories,
                     const std::vector<Series>& series);

}  // namespace fgcil::svg

#endif  // FGCIL_SVG_HPP
