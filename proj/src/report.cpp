#include "doalab/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace doalab {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "': " + std::strerror(errno));
  return f;
}

void check_written(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // avoid "-0.000000"
  if (std::strcmp(buf, "-0.000000") == 0) return "0.000000";
  return buf;
}

void write_csv(std::ostream& out, const RmseReport& report) {
  out << "sweep_value,method,rmse_db,crb_db,trials,failures\n";
  for (const SweepPoint& p : report.points) {
    const double crb = p.crb_db.value_or(std::numeric_limits<double>::quiet_NaN());
    for (const MethodPoint& m : p.methods) {
      out << format_number(p.value) << ',' << m.method << ',' << format_number(m.rmse_db) << ','
          << format_number(crb) << ',' << m.trials << ',' << m.failures << '\n';
    }
  }
}

void write_csv(const std::string& path, const RmseReport& report) {
  std::ofstream f = open_out(path);
  write_csv(f, report);
  check_written(f, path);
}

void write_svg(std::ostream& out, const RmseReport& report) {
  constexpr double kW = 640, kH = 420, kLeft = 64, kRight = 170, kTop = 24, kBottom = 52;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  std::vector<std::pair<double, double>> crb;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto grow_y = [&](double y) {
    if (!std::isfinite(y)) return;
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  };
  for (const SweepPoint& p : report.points) {
    xmin = std::min(xmin, p.value);
    xmax = std::max(xmax, p.value);
    if (p.crb_db && std::isfinite(*p.crb_db)) {
      crb.emplace_back(p.value, *p.crb_db);
      grow_y(*p.crb_db);
    }
    for (const MethodPoint& m : p.methods) {
      if (!series.count(m.method)) order.push_back(m.method);
      series[m.method].emplace_back(p.value, m.rmse_db);
      grow_y(m.rmse_db);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmin -= 1, xmax += 1;
  if (!std::isfinite(ymin)) ymin = -1, ymax = 1;
  if (ymax == ymin) ymin -= 1, ymax += 1;
  ymin = std::floor(ymin / 5) * 5;
  ymax = std::ceil(ymax / 5) * 5;

  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };
  auto path_of = [&](const std::vector<std::pair<double, double>>& pts) {
    std::string d;
    bool pen_up = true;
    char buf[64];
    for (const auto& [x, y] : pts) {
      if (!std::isfinite(y)) {
        pen_up = true;
        continue;
      }
      std::snprintf(buf, sizeof buf, "%c%.2f,%.2f ", pen_up ? 'M' : 'L', sx(x), sy(y));
      d += buf;
      pen_up = false;
    }
    return d;
  };

  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#444\"/>\n",
                kLeft, kTop, pw, ph);
  out << buf;
  for (double y = ymin; y <= ymax + 1e-9; y += 5) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" x2=\"%.1f\" y1=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%.2f\" text-anchor=\"end\">%g</text>\n",
                  kLeft, kLeft + pw, sy(y), sy(y), kLeft - 6, sy(y) + 4, y);
    out << buf;
  }
  for (const SweepPoint& p : report.points) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.1f\" text-anchor=\"middle\">%g</text>\n", sx(p.value),
                  kTop + ph + 16, p.value);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%s</text>\n", kLeft + pw / 2,
                kH - 12, to_string(report.axis).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text transform=\"translate(16,%.1f) rotate(-90)\" text-anchor=\"middle\">RMSE (dB deg)</text>\n",
                kTop + ph / 2);
  out << buf;

  double ly = kTop + 8;
  auto legend = [&](const std::string& label, const char* colour, bool dashed) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" x2=\"%.1f\" y1=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"%s/>"
                  "<text x=\"%.1f\" y=\"%.1f\">",
                  kLeft + pw + 12, kLeft + pw + 36, ly, ly, colour, dashed ? " stroke-dasharray=\"5,3\"" : "",
                  kLeft + pw + 42, ly + 4);
    out << buf << label << "</text>\n";
    ly += 18;
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char* colour = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
    out << "<path fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" d=\"" << path_of(series[order[i]])
        << "\"/>\n";
    legend(order[i], colour, false);
  }
  if (!crb.empty()) {
    out << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\" d=\"" << path_of(crb)
        << "\"/>\n";
    legend("numeric CRB", "black", true);
  }
  out << "</svg>\n";
}

void write_svg(const std::string& path, const RmseReport& report) {
  std::ofstream f = open_out(path);
  write_svg(f, report);
  check_written(f, path);
}

}  // namespace doalab
