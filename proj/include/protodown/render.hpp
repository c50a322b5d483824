#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "protodown/diffexpr.hpp"
#include "protodown/enrich.hpp"
#include "protodown/heatmap.hpp"
#include "protodown/preprocess.hpp"
#include "protodown/qc.hpp"

namespace protodown::render {

struct Style {
  std::string fill = "none";
  std::string stroke = "none";
  double stroke_width = 1.0;
  double opacity = 1.0;
};

enum class Shape { rect, circle, line, text, polyline };

struct Element {
  Shape shape;
  std::vector<double> v;  // rect: x y w h; circle: cx cy r; line: x1 y1 x2 y2; text: x y; polyline: x0 y0 x1 y1 ...
  Style style;
  std::string cls;
  std::string text;
  std::string title;  // tooltip
  double font_size = 12.0;
  std::string anchor = "start";
  double rotate = 0.0;
};

/// Display list in pixel units (96 per inch). Serialization order is
/// insertion order.
class Canvas {
 public:
  Canvas(double width, double height);

  void rect(double x, double y, double w, double h, Style s, std::string cls = {});
  void circle(double cx, double cy, double r, Style s, std::string cls = {}, std::string title = {});
  void line(double x1, double y1, double x2, double y2, Style s, std::string cls = {});
  void text(double x, double y, std::string t, double size, std::string anchor = "start", double rotate = 0.0,
            std::string fill = "#222222");
  void polyline(std::vector<double> pts, Style s, std::string cls = {});

  double width() const { return width_; }
  double height() const { return height_; }
  const std::vector<Element>& elements() const { return elements_; }

  std::string to_svg() const;
  /// Rasterized at `dpi` (pixel scale dpi / 96) with a pHYs chunk.
  std::vector<std::uint8_t> to_png(double dpi = 300.0) const;

 private:
  double width_;
  double height_;
  std::vector<Element> elements_;
};

std::string svg_escape(const std::string& s);

Canvas volcano(const diffexpr::VolcanoData& v, const std::string& title = "Volcano plot");
Canvas heatmap(const heatmap::HeatmapData& h, const std::string& title = "Heatmap");
Canvas boxplot(const std::vector<qc::BoxStats>& boxes, const std::string& title = "Intensity distribution");
Canvas histogram(const qc::Histogram& h, const std::string& title);
Canvas qq(const qc::QQPoints& q, const std::string& title);
Canvas imputation_overlay(const qc::ImputationOverlay& o, const std::string& title = "Imputed vs observed");
Canvas dispersion(const std::vector<qc::DispersionRow>& rows, const std::string& title = "Dispersion");
Canvas scatter(const qc::ScatterData& s, const std::string& title = "Sample scatter");
Canvas correlation(const std::vector<std::vector<double>>& r, const std::vector<std::string>& samples,
                   const std::string& title = "Sample correlation");
Canvas pca(const qc::PcaResult& p, const GroupDesign* design, const std::string& title = "PCA");
Canvas venn(const preprocess::VennResult& v, const std::string& title = "Identified proteins per group");
Canvas enrichment_dot(const enrich::EnrichPlots& e);
Canvas enrichment_bar(const enrich::EnrichPlots& e);
Canvas enrichment_manhattan(const enrich::EnrichPlots& e);

}  // namespace protodown::render
