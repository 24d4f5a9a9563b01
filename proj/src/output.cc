#include "cotrans/output.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "cotrans/errors.h"

namespace cotrans {

std::string axis_name(int k) {
  static const char* names[] = {"x", "y", "z"};
  return k < 3 ? names[k] : fmt::format("c{}", k);
}

namespace {

void append_num(std::string& out, double v) { fmt::format_to(std::back_inserter(out), ",{:.17g}", v); }

void append_vec_header(std::string& out, const std::string& prefix, int dim) {
  for (int k = 0; k < dim; ++k) out += "," + prefix + "_" + axis_name(k);
}

int log_dim(const TrajectoryLog& log) { return log.states.empty() ? 0 : log.states.front().dimension(); }
int log_robots(const TrajectoryLog& log) { return log.states.empty() ? 0 : log.states.front().robot_count(); }

}  // namespace

std::string trajectory_csv(const TrajectoryLog& log) {
  const int n = log_dim(log);
  const int count = log_robots(log);
  std::string out = "t";
  append_vec_header(out, "p_o", n);
  append_vec_header(out, "v_o", n);
  for (int i = 1; i <= count; ++i) {
    append_vec_header(out, fmt::format("p_{}", i), n);
    append_vec_header(out, fmt::format("p_star_{}", i), n);
    out += fmt::format(",s_star_{}", i);
    append_vec_header(out, fmt::format("force_{}", i), n);
  }
  out += '\n';
  for (std::size_t k = 0; k < log.size(); ++k) {
    fmt::format_to(std::back_inserter(out), "{:.17g}", log.times[k]);
    const SystemState& s = log.states[k];
    for (int j = 0; j < n; ++j) append_num(out, s.p_o(j));
    for (int j = 0; j < n; ++j) append_num(out, s.v_o(j));
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < n; ++j) append_num(out, s.robots(j, i));
      for (int j = 0; j < n; ++j) append_num(out, log.p_star[k](j, i));
      append_num(out, log.s_star[k](i));
      for (int j = 0; j < n; ++j) append_num(out, log.contact_forces[k](j, i));
    }
    out += '\n';
  }
  return out;
}

std::string errors_csv(const TrajectoryLog& log) {
  std::string out = "t,vel_error_norm,pos_error_norm_max,qp_residual,saturated\n";
  for (std::size_t k = 0; k < log.size(); ++k) {
    fmt::format_to(std::back_inserter(out), "{:.17g},{:.17g},{:.17g},{:.17g},{}\n", log.times[k],
                   log.vel_error_norm[k], log.pos_error_norm_max[k], log.qp_residual[k],
                   log.saturation_flags[k] ? 1 : 0);
  }
  return out;
}

std::string velocities_csv(const TrajectoryLog& log) {
  const int n = log_dim(log);
  const int count = log_robots(log);
  std::string out = "t";
  append_vec_header(out, "v_o", n);
  append_vec_header(out, "v_c", n);
  for (int i = 1; i <= count; ++i) append_vec_header(out, fmt::format("v_{}", i), n);
  out += '\n';
  for (std::size_t k = 0; k < log.size(); ++k) {
    fmt::format_to(std::back_inserter(out), "{:.17g}", log.times[k]);
    for (int j = 0; j < n; ++j) append_num(out, log.states[k].v_o(j));
    for (int j = 0; j < n; ++j) append_num(out, log.command_velocity[k](j));
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < n; ++j) append_num(out, log.robot_velocities[k](j, i));
    }
    out += '\n';
  }
  return out;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  std::string label;
  bool dashed = false;
};

struct Circle {
  double cx, cy, r;
  std::string stroke;
  std::string fill;
};

double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

// Minimal static line chart.
class Chart {
 public:
  Chart(std::string title, std::string xlabel, std::string ylabel, bool equal_aspect = false)
      : title_(std::move(title)),
        xlabel_(std::move(xlabel)),
        ylabel_(std::move(ylabel)),
        equal_aspect_(equal_aspect) {}

  void add(Series s) { series_.push_back(std::move(s)); }
  void add(Circle c) { circles_.push_back(std::move(c)); }

  std::string render() const {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto grow = [&](double x, double y) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    };
    for (const Series& s : series_) {
      for (std::size_t k = 0; k < s.x.size(); ++k) grow(s.x[k], s.y[k]);
    }
    for (const Circle& c : circles_) {
      grow(c.cx - c.r, c.cy - c.r);
      grow(c.cx + c.r, c.cy + c.r);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double pad_x = 0.04 * (x1 - x0), pad_y = 0.06 * (y1 - y0);
    x0 -= pad_x, x1 += pad_x, y0 -= pad_y, y1 += pad_y;

    const double left = 70, top = 40, plot_w = 620, plot_h = equal_aspect_ ? 620 : 360;
    if (equal_aspect_) {
      const double span = std::max(x1 - x0, y1 - y0);
      const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
      x0 = cx - span / 2, x1 = cx + span / 2, y0 = cy - span / 2, y1 = cy + span / 2;
    }
    const double width = left + plot_w + 170, height = top + plot_h + 60;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * plot_h; };

    std::string out;
    auto w = [&out](const char* f, const auto&... args) {
      fmt::format_to(std::back_inserter(out), fmt::runtime(f), args...);
    };
    w("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height);
    w("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    w("<text x=\"{}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
      left + plot_w / 2, title_);
    w("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
      top, plot_w, plot_h);

    const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1; t += xs) {
      w("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#e0e0e0\"/>\n", px(t),
        top, top + plot_h);
      w("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", px(t), top + plot_h + 16,
        std::abs(t) < 1e-12 * xs ? 0.0 : t);
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1; t += ys) {
      w("<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"#e0e0e0\"/>\n", py(t),
        left, left + plot_w);
      w("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", left - 6, py(t) + 4,
        std::abs(t) < 1e-12 * ys ? 0.0 : t);
    }
    w("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + plot_w / 2,
      top + plot_h + 40, xlabel_);
    w("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      top + plot_h / 2, ylabel_);

    for (const Circle& c : circles_) {
      w("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" stroke=\"{}\" fill=\"{}\" "
        "fill-opacity=\"0.35\"/>\n",
        px(c.cx), py(c.cy), c.r / (x1 - x0) * plot_w, c.stroke, c.fill);
    }
    int legend_row = 0;
    for (const Series& s : series_) {
      if (s.x.empty()) continue;
      const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 2000);
      w("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"", s.color,
        s.dashed ? " stroke-dasharray=\"6 4\"" : "");
      for (std::size_t k = 0; k < s.x.size(); k += stride) w("{:.2f},{:.2f} ", px(s.x[k]), py(s.y[k]));
      w("{:.2f},{:.2f}\"/>\n", px(s.x.back()), py(s.y.back()));
      if (!s.label.empty()) {
        const double ly = top + 10 + 18 * legend_row++;
        w("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
          left + plot_w + 12, ly, left + plot_w + 36, s.color,
          s.dashed ? " stroke-dasharray=\"6 4\"" : "");
        w("<text x=\"{}\" y=\"{}\">{}</text>\n", left + plot_w + 42, ly + 4, s.label);
      }
    }
    out += "</svg>\n";
    return out;
  }

 private:
  std::string title_, xlabel_, ylabel_;
  bool equal_aspect_;
  std::vector<Series> series_;
  std::vector<Circle> circles_;
};

}  // namespace

std::string trajectory_svg(const TrajectoryLog& log, const ScenarioConfig& cfg) {
  Chart chart("Object and robot paths", "x [m]", "y [m]", true);
  if (log.size() == 0 || log_dim(log) < 2) return chart.render();
  const int count = log_robots(log);
  Series obj{{}, {}, "#00a0b0", "object", false};
  std::vector<Series> robots(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    robots[static_cast<std::size_t>(i)].color = "#333333";
    robots[static_cast<std::size_t>(i)].label = i == 0 ? "robots" : "";
  }
  for (std::size_t k = 0; k < log.size(); ++k) {
    const SystemState& s = log.states[k];
    obj.x.push_back(s.p_o(0));
    obj.y.push_back(s.p_o(1));
    for (int i = 0; i < count; ++i) {
      robots[static_cast<std::size_t>(i)].x.push_back(s.robots(0, i));
      robots[static_cast<std::size_t>(i)].y.push_back(s.robots(1, i));
    }
  }
  constexpr int kSnapshots = 7;
  for (int m = 0; m < kSnapshots; ++m) {
    const std::size_t k = (log.size() - 1) * static_cast<std::size_t>(m) / (kSnapshots - 1);
    const SystemState& s = log.states[k];
    chart.add(Circle{s.p_o(0), s.p_o(1), cfg.geom.object_radius, "#008090", "#00e5ff"});
    for (int i = 0; i < count; ++i) {
      chart.add(Circle{s.robots(0, i), s.robots(1, i), cfg.geom.robot_radius, "black", "#222222"});
    }
  }
  chart.add(std::move(obj));
  for (Series& r : robots) chart.add(std::move(r));
  return chart.render();
}

std::string errors_svg(const TrajectoryLog& log) {
  Chart chart("Tracking errors", "t [s]", "error");
  chart.add(Series{log.times, log.pos_error_norm_max, kPalette[0], "max_i |p_i - p*_i|", false});
  chart.add(Series{log.times, log.vel_error_norm, kPalette[1], "|v_o - v_c|", false});
  return chart.render();
}

std::string object_velocity_svg(const TrajectoryLog& log) {
  Chart chart("Object velocity and command", "t [s]", "velocity [m/s]");
  const int n = log_dim(log);
  for (int j = 0; j < n; ++j) {
    Series vo{log.times, {}, kPalette[j % 8], "v_o," + axis_name(j), false};
    Series vc{log.times, {}, kPalette[j % 8], "v_c," + axis_name(j), true};
    for (std::size_t k = 0; k < log.size(); ++k) {
      vo.y.push_back(log.states[k].v_o(j));
      vc.y.push_back(log.command_velocity[k](j));
    }
    chart.add(std::move(vo));
    chart.add(std::move(vc));
  }
  return chart.render();
}

std::string robot_velocities_svg(const TrajectoryLog& log) {
  Chart chart("Robot velocity commands", "t [s]", "velocity [m/s]");
  const int n = log_dim(log);
  const int count = log_robots(log);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < n; ++j) {
      Series s{log.times, {}, kPalette[i % 8], fmt::format("v_{},{}", i + 1, axis_name(j)), j > 0};
      for (std::size_t k = 0; k < log.size(); ++k) s.y.push_back(log.robot_velocities[k](j, i));
      chart.add(std::move(s));
    }
  }
  return chart.render();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    const std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ParseError(line_no, fmt::format("line {}: expected {} cells, found {}", line_no,
                                            table.header.size(), cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const std::string& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        throw ParseError(line_no, fmt::format("line {}: '{}' is not a number", line_no, c));
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace cotrans
