#include "deriloss/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "deriloss/error.hpp"

namespace deriloss::svg {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string fixed(double v, int prec = 2) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, prec);
  return ec == std::errc() ? std::string(buf, p) : "0";
}

std::string tick_label(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return ec == std::errc() ? std::string(buf, p) : "?";
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  static Axis fit(const std::vector<double>& v) {
    Axis a;
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    a.log = *mn > 0.0 && *mx / *mn >= 100.0;
    a.lo = a.log ? std::log10(*mn) : *mn;
    a.hi = a.log ? std::log10(*mx) : *mx;
    if (a.hi == a.lo) {
      a.lo -= 0.5;
      a.hi += 0.5;
    }
    return a;
  }
  double map(double v) const { return ((log ? std::log10(v) : v) - lo) / (hi - lo); }
  double unmap(double f) const {
    const double x = lo + f * (hi - lo);
    return log ? std::pow(10.0, x) : x;
  }
};

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::ConfigError, "CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty())
      t.header = split(line);
    else
      t.rows.push_back(split(line));
  }
  if (t.header.empty()) throw Error(ErrorKind::Io, "CSV is empty");
  if (t.rows.empty()) throw Error(ErrorKind::Io, "CSV has a header but no data rows");
  return t;
}

std::string plot_csv(const std::string& csv_text, const PlotOptions& options) {
  const CsvTable t = parse_csv(csv_text);
  if (t.header.size() < 2) throw Error(ErrorKind::Io, "CSV needs at least two columns");
  const std::size_t xc = options.x_column ? t.column(*options.x_column) : 0;
  std::size_t yc = 1;
  if (options.y_column) {
    yc = t.column(*options.y_column);
  } else {
    for (const char* pref : {"m", "E"}) {
      if (std::find(t.header.begin(), t.header.end(), pref) != t.header.end()) {
        yc = t.column(pref);
        break;
      }
    }
  }

  std::vector<double> xs, ys;
  for (const auto& r : t.rows) {
    if (xc >= r.size() || yc >= r.size()) continue;
    const auto x = to_double(r[xc]);
    const auto y = to_double(r[yc]);
    if (x && y) {
      xs.push_back(*x);
      ys.push_back(*y);
    }
  }
  if (xs.empty()) throw Error(ErrorKind::Io, "CSV has no numeric points in the selected columns");
  Axis ax = Axis::fit(xs);
  Axis ay = Axis::fit(ys);
  // A log axis cannot show nonpositive values; those points are dropped.
  if (ax.log || ay.log) {
    std::vector<double> x2, y2;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if ((!ax.log || xs[i] > 0) && (!ay.log || ys[i] > 0)) {
        x2.push_back(xs[i]);
        y2.push_back(ys[i]);
      }
    xs.swap(x2);
    ys.swap(y2);
  }

  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fixed(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(options.title.empty() ? t.header[yc] + " vs " + t.header[xc] : options.title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double px = L + f * pw;
    const double py = T + ph - f * ph;
    os << "<line x1=\"" << fixed(px) << "\" y1=\"" << T + ph << "\" x2=\"" << fixed(px) << "\" y2=\"" << T + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(px) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << tick_label(ax.unmap(f)) << "</text>\n";
    os << "<line x1=\"" << L - 5 << "\" y1=\"" << fixed(py) << "\" x2=\"" << L << "\" y2=\"" << fixed(py)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << fixed(py + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << tick_label(ay.unmap(f)) << "</text>\n";
  }
  os << "<text x=\"" << fixed(L + pw / 2) << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(t.header[xc]) << (ax.log ? " (log)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << fixed(T + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << fixed(T + ph / 2) << ")\">" << escape(t.header[yc]) << (ay.log ? " (log)" : "") << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ' ';
    os << fixed(L + ax.map(xs[i]) * pw) << ',' << fixed(T + ph - ay.map(ys[i]) * ph);
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

}  // namespace deriloss::svg
