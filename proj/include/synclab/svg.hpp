#pragma once

#include <string>
#include <vector>

namespace synclab {

// Minimal SVG plotting, presentation only: every quantitative result also lands in a CSV.
// Data coordinates map linearly into a fixed frame with light axes and tick labels.
class SvgPlot {
 public:
  SvgPlot(double x0, double x1, double y0, double y1, const std::string& title,
          const std::string& xlabel, const std::string& ylabel);

  void scatter(const std::vector<double>& x, const std::vector<double>& y, double radius,
               const std::string& color);
  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color);
  // Circle in data coordinates (x scale), e.g. unit circles and disk bounds.
  void circle(double cx, double cy, double r, const std::string& color);
  void vline(double x, const std::string& color);
  // Filled bars, e.g. histograms: [lo, hi) x [0, height].
  void bar(double lo, double hi, double height, const std::string& color);

  void save(const std::string& path) const;

 private:
  double sx(double x) const;
  double sy(double y) const;

  double x0_, x1_, y0_, y1_;
  std::string body_;
};

}  // namespace synclab
