// Copyright 2026 The dcsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dcsurv/survival.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "dcsurv/error.hpp"
#include "dcsurv/io.hpp"

namespace dcsurv {

const char* arm_name(Arm arm) { return arm == Arm::kTreated ? "treated" : "control"; }

SurvivalCurve kaplan_meier(std::span<const double> times, std::span<const int> events) {
  if (times.size() != events.size()) throw DataError("times and events differ in length");
  if (times.empty()) throw DataError("Kaplan-Meier needs a non-empty sample");
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(times[i] >= 0.0)) throw DataError("survival times must be nonnegative");
    if (events[i] != 0 && events[i] != 1) throw DataError("event indicators must be 0 or 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  SurvivalCurve curve;
  curve.subjects = n;
  double s = 1.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = times[order[i]];
    const int at_risk = static_cast<int>(n - i);
    int d = 0;
    std::size_t j = i;
    for (; j < n && times[order[j]] == t; ++j) d += events[order[j]];
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      curve.times.push_back(t);
      curve.survival.push_back(s);
      curve.at_risk.push_back(at_risk);
      curve.events.push_back(d);
    }
    i = j;
  }
  return curve;
}

SurvivalCurve kaplan_meier(const Outcomes& outcomes, const std::vector<SampleId>& subset) {
  std::unordered_map<SampleId, std::size_t> pos;
  for (std::size_t i = 0; i < outcomes.size(); ++i) pos[outcomes.ids[i]] = i;
  std::vector<double> t;
  std::vector<int> e;
  for (SampleId id : subset) {
    auto it = pos.find(id);
    if (it == pos.end()) throw DataError("sample id " + std::to_string(id) + " has no outcome");
    t.push_back(outcomes.time[it->second]);
    e.push_back(outcomes.event[it->second]);
  }
  return kaplan_meier(t, e);
}

double eval_step(const SurvivalCurve& curve, double t) {
  auto it = std::upper_bound(curve.times.begin(), curve.times.end(), t);
  if (it == curve.times.begin()) return 1.0;
  return curve.survival[static_cast<std::size_t>(it - curve.times.begin()) - 1];
}

ArmCurves km_by_group(const MatchedSet& matched, const Outcomes& outcomes) {
  std::unordered_map<SampleId, std::size_t> pos;
  for (std::size_t i = 0; i < outcomes.size(); ++i) pos[outcomes.ids[i]] = i;
  auto arm_curve = [&](const std::vector<SampleId>& members, Arm arm) {
    if (members.empty()) {
      throw DataError(std::string("the ") + arm_name(arm) + " arm is empty after matching");
    }
    std::vector<double> t;
    std::vector<int> e;
    for (SampleId id : members) {
      auto it = pos.find(id);
      if (it == pos.end()) throw DataError("matched id " + std::to_string(id) + " has no outcome");
      const int expected = arm == Arm::kTreated ? 1 : 0;
      if (outcomes.treatment[it->second] != expected) {
        throw DataError("matched id " + std::to_string(id) + " is not in the " +
                        arm_name(arm) + " arm");
      }
      t.push_back(outcomes.time[it->second]);
      e.push_back(outcomes.event[it->second]);
    }
    SurvivalCurve c = kaplan_meier(t, e);
    c.group = arm;
    return c;
  };
  return {arm_curve(matched.treated_members(), Arm::kTreated),
          arm_curve(matched.control_members(), Arm::kControl)};
}

std::string curves_to_csv(const ArmCurves& curves) {
  std::string out = "group,time,survival,at_risk,events\n";
  for (const SurvivalCurve* c : {&curves.treated, &curves.control}) {
    for (std::size_t i = 0; i < c->times.size(); ++i) {
      out += arm_name(c->group);
      out += ',' + io::format_double(c->times[i]) + ',' + io::format_double(c->survival[i]) +
             ',' + std::to_string(c->at_risk[i]) + ',' + std::to_string(c->events[i]) + '\n';
    }
  }
  return out;
}

std::string curves_to_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double kWidth = 720, kHeight = 440, kLeft = 60, kRight = 180, kTop = 40,
                   kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  double t_max = 0.0;
  for (const auto& s : series) {
    for (const SurvivalCurve* c : {&s.curves.treated, &s.curves.control}) {
      if (!c->times.empty()) t_max = std::max(t_max, c->times.back());
    }
  }
  if (t_max <= 0.0) t_max = 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double t) { return kLeft + plot_w * t / t_max; };
  auto py = [&](double s) { return kTop + plot_h * (1.0 - s); };
  auto num = [](double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << px(t_max)
      << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft << "\" y2=\""
      << py(1) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double s = k / 4.0;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(s) + 4
        << "\" text-anchor=\"end\">" << num(s) << "</text>\n";
    const double t = t_max * k / 4.0;
    svg << "<text x=\"" << px(t) << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">"
        << num(t) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">time</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" transform=\"rotate(-90 16 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\">survival</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % (sizeof(kColors) / sizeof(kColors[0]))];
    for (const SurvivalCurve* c : {&series[k].curves.treated, &series[k].curves.control}) {
      std::ostringstream path;
      double s = 1.0;
      path << "M" << num(px(0)) << "," << num(py(1));
      for (std::size_t i = 0; i < c->times.size(); ++i) {
        path << " L" << num(px(c->times[i])) << "," << num(py(s));
        s = c->survival[i];
        path << " L" << num(px(c->times[i])) << "," << num(py(s));
      }
      path << " L" << num(px(t_max)) << "," << num(py(s));
      svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\""
          << (c->group == Arm::kControl ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    }
    const double ly = kTop + 16.0 * static_cast<double>(k);
    svg << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kRight + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 42 << "\" y=\"" << ly + 4 << "\">"
        << series[k].label << "</text>\n";
  }
  svg << "<text x=\"" << kWidth - kRight + 12 << "\" y=\""
      << kTop + 16.0 * static_cast<double>(series.size()) + 8
      << "\" fill=\"#555\">solid: treated, dashed: control</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dcsurv
