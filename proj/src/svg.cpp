#include "synclab/svg.hpp"

#include <cstdio>
#include <fstream>

#include "synclab/errors.hpp"

namespace synclab {

namespace {

constexpr double kW = 640.0, kH = 480.0;
constexpr double kL = 70.0, kR = 20.0, kT = 40.0, kB = 50.0;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(double x0, double x1, double y0, double y1, const std::string& title,
                 const std::string& xlabel, const std::string& ylabel)
    : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
  if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
  if (!(y1_ > y0_)) y1_ = y0_ + 1.0;
  body_ += "<rect x='" + num(kL) + "' y='" + num(kT) + "' width='" + num(kW - kL - kR) +
           "' height='" + num(kH - kT - kB) + "' fill='white' stroke='black'/>\n";
  body_ += "<text x='" + num(kW / 2) + "' y='24' text-anchor='middle' font-size='15'>" + title +
           "</text>\n";
  body_ += "<text x='" + num(kW / 2) + "' y='" + num(kH - 10) +
           "' text-anchor='middle' font-size='13'>" + xlabel + "</text>\n";
  body_ += "<text x='16' y='" + num(kH / 2) + "' text-anchor='middle' font-size='13' transform='rotate(-90 16 " +
           num(kH / 2) + ")'>" + ylabel + "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    double fx = x0_ + (x1_ - x0_) * k / 4.0;
    double fy = y0_ + (y1_ - y0_) * k / 4.0;
    body_ += "<text x='" + num(sx(fx)) + "' y='" + num(kH - kB + 18) +
             "' text-anchor='middle' font-size='11'>" + num(fx) + "</text>\n";
    body_ += "<text x='" + num(kL - 6) + "' y='" + num(sy(fy) + 4) +
             "' text-anchor='end' font-size='11'>" + num(fy) + "</text>\n";
  }
}

double SvgPlot::sx(double x) const { return kL + (x - x0_) / (x1_ - x0_) * (kW - kL - kR); }

double SvgPlot::sy(double y) const { return kH - kB - (y - y0_) / (y1_ - y0_) * (kH - kT - kB); }

void SvgPlot::scatter(const std::vector<double>& x, const std::vector<double>& y, double radius,
                      const std::string& color) {
  for (size_t k = 0; k < x.size() && k < y.size(); ++k) {
    body_ += "<circle cx='" + num(sx(x[k])) + "' cy='" + num(sy(y[k])) + "' r='" + num(radius) +
             "' fill='" + color + "'/>\n";
  }
}

void SvgPlot::polyline(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& color) {
  std::string pts;
  for (size_t k = 0; k < x.size() && k < y.size(); ++k) {
    pts += num(sx(x[k])) + "," + num(sy(y[k])) + " ";
  }
  body_ += "<polyline points='" + pts + "' fill='none' stroke='" + color + "'/>\n";
}

void SvgPlot::circle(double cx, double cy, double r, const std::string& color) {
  double rx = r / (x1_ - x0_) * (kW - kL - kR);
  double ry = r / (y1_ - y0_) * (kH - kT - kB);
  body_ += "<ellipse cx='" + num(sx(cx)) + "' cy='" + num(sy(cy)) + "' rx='" + num(rx) +
           "' ry='" + num(ry) + "' fill='none' stroke='" + color + "'/>\n";
}

void SvgPlot::vline(double x, const std::string& color) {
  body_ += "<line x1='" + num(sx(x)) + "' y1='" + num(kT) + "' x2='" + num(sx(x)) + "' y2='" +
           num(kH - kB) + "' stroke='" + color + "' stroke-dasharray='4 3'/>\n";
}

void SvgPlot::bar(double lo, double hi, double height, const std::string& color) {
  double xl = sx(lo), xr = sx(hi), yb = sy(y0_), yt = sy(height);
  if (yt > yb) return;
  body_ += "<rect x='" + num(xl) + "' y='" + num(yt) + "' width='" + num(xr - xl) +
           "' height='" + num(yb - yt) + "' fill='" + color + "' stroke='black' stroke-width='0.5'/>\n";
}

void SvgPlot::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NumericalError("cannot open " + path + " for writing");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
      << "' viewBox='0 0 " << kW << " " << kH << "'>\n"
      << body_ << "</svg>\n";
  if (!out) throw NumericalError("write failed for " + path);
}

}  // namespace synclab
