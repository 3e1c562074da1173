#pragma once

// CSV, JSON and SVG output of convergence studies, and JSON lines for SQP logs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "neumann_control/benchmark.hpp"
#include "neumann_control/error.hpp"
#include "neumann_control/optimizer.hpp"

namespace neumann_control {

inline constexpr const char* kCsvHeader =
    "level,h,ndof_domain,nedges_boundary,err_u,eoc_u,err_y,eoc_y,err_p,eoc_p,err_superclose,eoc_superclose,meas_K1";

namespace detail {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

inline double number_from(const nlohmann::json& j) { return j.is_null() ? kNoEoc : j.get<double>(); }

}  // namespace detail

inline void write_csv(std::ostream& out, const ConvergenceReport& report) {
  using detail::format_number;
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.level << ',' << format_number(r.h) << ',' << r.ndof_domain << ',' << r.nedges_boundary << ','
        << format_number(r.err_u) << ',' << format_number(r.eoc_u) << ',' << format_number(r.err_y) << ','
        << format_number(r.eoc_y) << ',' << format_number(r.err_p) << ',' << format_number(r.eoc_p) << ','
        << format_number(r.err_superclose) << ',' << format_number(r.eoc_superclose) << ',' << format_number(r.meas_k1)
        << '\n';
  }
}

inline nlohmann::json to_json(const ConvergenceReport& report) {
  using detail::number_or_null;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"level", r.level},
                    {"h", r.h},
                    {"ndof_domain", r.ndof_domain},
                    {"nedges_boundary", r.nedges_boundary},
                    {"err_u", r.err_u},
                    {"eoc_u", number_or_null(r.eoc_u)},
                    {"err_y", r.err_y},
                    {"eoc_y", number_or_null(r.eoc_y)},
                    {"err_p", r.err_p},
                    {"eoc_p", number_or_null(r.eoc_p)},
                    {"err_superclose", r.err_superclose},
                    {"eoc_superclose", number_or_null(r.eoc_superclose)},
                    {"meas_K1", r.meas_k1}});
  }
  return {{"omega", report.omega}, {"mu", report.mu}, {"radius", report.radius}, {"rows", rows}};
}

inline ConvergenceReport report_from_json(const nlohmann::json& j) {
  using detail::number_from;
  ConvergenceReport report;
  report.omega = j.at("omega").get<double>();
  report.mu = j.at("mu").get<double>();
  report.radius = j.at("radius").get<double>();
  for (const auto& r : j.at("rows")) {
    ConvergenceRow row;
    row.level = r.at("level").get<int>();
    row.h = r.at("h").get<double>();
    row.ndof_domain = r.at("ndof_domain").get<std::size_t>();
    row.nedges_boundary = r.at("nedges_boundary").get<std::size_t>();
    row.err_u = r.at("err_u").get<double>();
    row.eoc_u = number_from(r.at("eoc_u"));
    row.err_y = r.at("err_y").get<double>();
    row.eoc_y = number_from(r.at("eoc_y"));
    row.err_p = r.at("err_p").get<double>();
    row.eoc_p = number_from(r.at("eoc_p"));
    row.err_superclose = r.at("err_superclose").get<double>();
    row.eoc_superclose = number_from(r.at("eoc_superclose"));
    row.meas_k1 = r.at("meas_K1").get<double>();
    report.rows.push_back(row);
  }
  return report;
}

inline void write_json(std::ostream& out, const ConvergenceReport& report) { out << to_json(report).dump(2) << '\n'; }

/// Log-log plot of err_u, err_y, err_p against h with reference slopes 2 and
/// 1/2 + lambda. Every curve is one <path> element.
inline void write_svg(std::ostream& out, const ConvergenceReport& report) {
  if (report.rows.empty()) throw InvalidArgument("write_svg: empty report");
  constexpr double width = 640, height = 480, margin = 60;
  double hmin = report.rows.back().h, hmax = report.rows.front().h;
  double emin = 1e300, emax = 0.0;
  for (const auto& r : report.rows) {
    for (double e : {r.err_u, r.err_y, r.err_p}) {
      if (e > 0.0) {
        emin = std::min(emin, e);
        emax = std::max(emax, e);
      }
    }
  }
  if (hmin == hmax) hmax = 2.0 * hmin;
  if (!(emin < emax)) emax = 10.0 * emin;
  const double lx0 = std::log10(hmin), lx1 = std::log10(hmax);
  const double ly0 = std::log10(emin) - 0.5, ly1 = std::log10(emax) + 0.5;
  auto px = [&](double h) { return margin + (std::log10(h) - lx0) / (lx1 - lx0) * (width - 2 * margin); };
  auto py = [&](double e) { return height - margin - (std::log10(e) - ly0) / (ly1 - ly0) * (height - 2 * margin); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";

  struct Curve {
    const char* name;
    const char* color;
    double ConvergenceRow::*field;
  };
  const Curve curves[] = {{"err_u", "#1f77b4", &ConvergenceRow::err_u},
                          {"err_y", "#d62728", &ConvergenceRow::err_y},
                          {"err_p", "#2ca02c", &ConvergenceRow::err_p}};
  for (const auto& c : curves) {
    std::ostringstream d;
    bool first = true;
    for (const auto& r : report.rows) {
      const double e = r.*(c.field);
      if (!(e > 0.0)) continue;
      d << (first ? "M" : " L") << px(r.h) << ',' << py(e);
      first = false;
    }
    out << "<path id=\"" << c.name << "\" d=\"" << d.str() << "\" fill=\"none\" stroke=\"" << c.color << "\"/>\n";
  }

  // Reference slopes anchored at the coarsest err_u.
  const double lambda = std::numbers::pi / report.omega;
  const double anchor = report.rows.front().err_u > 0.0 ? report.rows.front().err_u : emax;
  for (double slope : {2.0, 0.5 + lambda}) {
    const double e_end = anchor * std::pow(hmin / hmax, slope);
    out << "<path class=\"reference\" data-slope=\"" << slope << "\" d=\"M" << px(hmax) << ',' << py(anchor) << " L"
        << px(hmin) << ',' << py(e_end) << "\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">h</text>\n";
  out << "</svg>\n";
}

enum class ReportFormat { Csv, Json, Svg };

inline ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "svg") return ReportFormat::Svg;
  throw InvalidArgument("unknown report format '" + name + "'");
}

inline void emit_report(const ConvergenceReport& report, ReportFormat format, const std::string& path) {
  if (report.rows.empty()) throw InvalidArgument("emit_report: empty report");
  std::ofstream out(path);
  if (!out) throw Error("emit_report: cannot write '" + path + "'");
  switch (format) {
    case ReportFormat::Csv: write_csv(out, report); break;
    case ReportFormat::Json: write_json(out, report); break;
    case ReportFormat::Svg: write_svg(out, report); break;
  }
  if (!out) throw Error("emit_report: write to '" + path + "' failed");
}

/// {outer_iter, residual, J_h, active_lower, active_upper, pdas_iters} on one line.
inline std::string to_json_line(const SqpLogEntry& e) {
  const nlohmann::json j = {{"outer_iter", e.outer_iter},     {"residual", e.residual},
                            {"J_h", e.cost},                  {"active_lower", e.active_lower},
                            {"active_upper", e.active_upper}, {"pdas_iters", e.pdas_iters}};
  return j.dump();
}

}  // namespace neumann_control
