#include "protodown/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <zlib.h>

namespace protodown::render {

namespace {

const std::vector<std::string> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  if (std::abs(v) < 0.005) v = 0.0;  // no "-0.00"
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  if (std::abs(v) < 1e-12) return "0";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string hex2(int v) {
  static const char* h = "0123456789abcdef";
  v = std::clamp(v, 0, 255);
  return {h[v >> 4], h[v & 15]};
}

int parse_hex(const std::string& c, int at) { return std::stoi(c.substr(static_cast<std::size_t>(at), 2), nullptr, 16); }

std::string mix(const std::string& a, const std::string& b, double t) {
  t = std::clamp(t, 0.0, 1.0);
  std::string out = "#";
  for (int i = 1; i < 7; i += 2) {
    const double va = parse_hex(a, i);
    const double vb = parse_hex(b, i);
    out += hex2(static_cast<int>(std::lround(va + (vb - va) * t)));
  }
  return out;
}

/// Blue-white-red for t in [-1, 1].
std::string diverging(double t) {
  if (!std::isfinite(t)) return "#cccccc";
  return t < 0 ? mix("#ffffff", "#2166ac", -t) : mix("#ffffff", "#b2182b", t);
}

Style filled(const std::string& fill, double opacity = 1.0) {
  Style s;
  s.fill = fill;
  s.opacity = opacity;
  return s;
}

Style stroked(const std::string& stroke, double width = 1.0) {
  Style s;
  s.stroke = stroke;
  s.stroke_width = width;
  return s;
}

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range range_of(const std::vector<double>& v, double pad = 0.05) {
  Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
  }
  if (!std::isfinite(r.lo)) return {0.0, 1.0};
  if (r.hi - r.lo < 1e-12) return {r.lo - 1.0, r.hi + 1.0};
  const double p = (r.hi - r.lo) * pad;
  return {r.lo - p, r.hi + p};
}

struct Frame {
  double left = 70, top = 50, w = 480, h = 360;
  Range x, y;
  double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * w; }
  double py(double v) const { return top + h - (v - y.lo) / (y.hi - y.lo) * h; }
};

Canvas make_canvas(const Frame& f, double extra_right = 40) { return Canvas(f.left + f.w + extra_right, f.top + f.h + 60); }

void title(Canvas& c, const std::string& t, double size = 14) { c.text(c.width() / 2, 28, t, size, "middle"); }

void axes(Canvas& c, const Frame& f, const std::string& xlabel, const std::string& ylabel, bool xticks = true) {
  c.rect(f.left, f.top, f.w, f.h, stroked("#444444"), "frame");
  if (xticks) {
    for (double t : nice_ticks(f.x.lo, f.x.hi)) {
      const double x = f.px(t);
      c.line(x, f.top + f.h, x, f.top + f.h + 5, stroked("#444444"), "tick");
      c.text(x, f.top + f.h + 18, label_num(t), 10, "middle");
    }
  }
  for (double t : nice_ticks(f.y.lo, f.y.hi)) {
    const double y = f.py(t);
    c.line(f.left - 5, y, f.left, y, stroked("#444444"), "tick");
    c.text(f.left - 8, y + 3, label_num(t), 10, "end");
  }
  c.text(f.left + f.w / 2, f.top + f.h + 40, xlabel, 12, "middle");
  c.text(18, f.top + f.h / 2, ylabel, 12, "middle", -90);
}

void legend(Canvas& c, double x, double y, const std::vector<std::pair<std::string, std::string>>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double yy = y + static_cast<double>(i) * 16;
    c.rect(x, yy - 9, 10, 10, filled(items[i].second), "legend");
    c.text(x + 14, yy, items[i].first, 10);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

Canvas::Canvas(double width, double height) : width_(width), height_(height) {}

void Canvas::rect(double x, double y, double w, double h, Style s, std::string cls) {
  elements_.push_back({Shape::rect, {x, y, w, h}, std::move(s), std::move(cls)});
}

void Canvas::circle(double cx, double cy, double r, Style s, std::string cls, std::string title) {
  Element e{Shape::circle, {cx, cy, r}, std::move(s), std::move(cls)};
  e.title = std::move(title);
  elements_.push_back(std::move(e));
}

void Canvas::line(double x1, double y1, double x2, double y2, Style s, std::string cls) {
  elements_.push_back({Shape::line, {x1, y1, x2, y2}, std::move(s), std::move(cls)});
}

void Canvas::text(double x, double y, std::string t, double size, std::string anchor, double rotate, std::string fill) {
  Element e{Shape::text, {x, y}, filled(std::move(fill)), {}};
  e.text = std::move(t);
  e.font_size = size;
  e.anchor = std::move(anchor);
  e.rotate = rotate;
  elements_.push_back(std::move(e));
}

void Canvas::polyline(std::vector<double> pts, Style s, std::string cls) {
  elements_.push_back({Shape::polyline, std::move(pts), std::move(s), std::move(cls)});
}

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

namespace {

std::string style_attrs(const Style& s) {
  std::string out = " fill=\"" + s.fill + "\"";
  if (s.stroke != "none") out += " stroke=\"" + s.stroke + "\" stroke-width=\"" + num(s.stroke_width) + "\"";
  if (s.opacity < 1.0) out += " opacity=\"" + num(s.opacity) + "\"";
  return out;
}

}  // namespace

std::string Canvas::to_svg() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
         "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) + "\" fill=\"#ffffff\"/>\n";
  for (const auto& e : elements_) {
    const std::string cls = e.cls.empty() ? "" : " class=\"" + svg_escape(e.cls) + "\"";
    switch (e.shape) {
      case Shape::rect:
        out += "<rect" + cls + " x=\"" + num(e.v[0]) + "\" y=\"" + num(e.v[1]) + "\" width=\"" + num(e.v[2]) +
               "\" height=\"" + num(e.v[3]) + "\"" + style_attrs(e.style) + "/>\n";
        break;
      case Shape::circle:
        out += "<circle" + cls + " cx=\"" + num(e.v[0]) + "\" cy=\"" + num(e.v[1]) + "\" r=\"" + num(e.v[2]) + "\"" +
               style_attrs(e.style);
        out += e.title.empty() ? "/>\n" : "><title>" + svg_escape(e.title) + "</title></circle>\n";
        break;
      case Shape::line:
        out += "<line" + cls + " x1=\"" + num(e.v[0]) + "\" y1=\"" + num(e.v[1]) + "\" x2=\"" + num(e.v[2]) +
               "\" y2=\"" + num(e.v[3]) + "\"" + style_attrs(e.style) + "/>\n";
        break;
      case Shape::polyline: {
        std::string pts;
        for (std::size_t i = 0; i + 1 < e.v.size(); i += 2) {
          if (!pts.empty()) pts += ' ';
          pts += num(e.v[i]) + "," + num(e.v[i + 1]);
        }
        out += "<polyline" + cls + " points=\"" + pts + "\"" + style_attrs(e.style) + "/>\n";
        break;
      }
      case Shape::text: {
        out += "<text x=\"" + num(e.v[0]) + "\" y=\"" + num(e.v[1]) + "\" font-size=\"" + num(e.font_size) +
               "\" text-anchor=\"" + e.anchor + "\" fill=\"" + e.style.fill + "\"";
        if (e.rotate != 0.0) {
          out += " transform=\"rotate(" + num(e.rotate) + " " + num(e.v[0]) + " " + num(e.v[1]) + ")\"";
        }
        out += ">" + svg_escape(e.text) + "</text>\n";
        break;
      }
    }
  }
  out += "</svg>\n";
  return out;
}

namespace {

cv::Scalar bgr(const std::string& hex) {
  if (hex.size() != 7 || hex[0] != '#') return {0, 0, 0};
  return {static_cast<double>(parse_hex(hex, 5)), static_cast<double>(parse_hex(hex, 3)),
          static_cast<double>(parse_hex(hex, 1))};
}

int thick(double w, double scale) { return std::max(1, static_cast<int>(std::lround(w * scale))); }

cv::Point pt(double x, double y, double scale) {
  return {static_cast<int>(std::lround(x * scale)), static_cast<int>(std::lround(y * scale))};
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

/// Inserts a pHYs chunk after IHDR unless the encoder already wrote one.
std::vector<std::uint8_t> with_phys(const std::vector<std::uint8_t>& png, double dpi) {
  const std::size_t ihdr_end = 8 + 4 + 4 + 13 + 4;
  if (png.size() < ihdr_end) return png;
  for (std::size_t pos = 8; pos + 8 <= png.size();) {
    const std::uint32_t len = (std::uint32_t(png[pos]) << 24) | (std::uint32_t(png[pos + 1]) << 16) |
                              (std::uint32_t(png[pos + 2]) << 8) | std::uint32_t(png[pos + 3]);
    if (std::equal(png.begin() + static_cast<long>(pos) + 4, png.begin() + static_cast<long>(pos) + 8, "pHYs")) {
      return png;
    }
    pos += 12 + len;
  }
  const auto ppm = static_cast<std::uint32_t>(std::lround(dpi / 0.0254));
  std::vector<std::uint8_t> chunk;
  put_u32(chunk, 9);
  const std::size_t type_at = chunk.size();
  for (char ch : std::string("pHYs")) chunk.push_back(static_cast<std::uint8_t>(ch));
  put_u32(chunk, ppm);
  put_u32(chunk, ppm);
  chunk.push_back(1);  // metre
  const auto crc = crc32(0L, chunk.data() + type_at, static_cast<uInt>(chunk.size() - type_at));
  put_u32(chunk, static_cast<std::uint32_t>(crc));
  std::vector<std::uint8_t> out(png.begin(), png.begin() + static_cast<long>(ihdr_end));
  out.insert(out.end(), chunk.begin(), chunk.end());
  out.insert(out.end(), png.begin() + static_cast<long>(ihdr_end), png.end());
  return out;
}

void draw_text(cv::Mat& img, const Element& e, double scale) {
  if (e.text.empty()) return;
  const int font = cv::FONT_HERSHEY_SIMPLEX;
  const double fs = e.font_size * scale / 30.0;
  const int th = std::max(1, static_cast<int>(std::lround(scale * 0.6)));
  int base = 0;
  const auto size = cv::getTextSize(e.text, font, fs, th, &base);
  double shift = 0;
  if (e.anchor == "middle") shift = size.width / 2.0;
  if (e.anchor == "end") shift = size.width;
  const auto color = bgr(e.style.fill);
  if (e.rotate == 0.0) {
    cv::putText(img, e.text, cv::Point(static_cast<int>(std::lround(e.v[0] * scale - shift)),
                                       static_cast<int>(std::lround(e.v[1] * scale))),
                font, fs, color, th, cv::LINE_AA);
    return;
  }
  // rotated labels: draw on a patch, turn it, paste the inked pixels
  cv::Mat patch(size.height + base + 2, size.width + 2, CV_8UC3, cv::Scalar(255, 255, 255));
  cv::putText(patch, e.text, cv::Point(1, size.height), font, fs, color, th, cv::LINE_AA);
  cv::Mat turned;
  cv::rotate(patch, turned, e.rotate < 0 ? cv::ROTATE_90_COUNTERCLOCKWISE : cv::ROTATE_90_CLOCKWISE);
  const int x = static_cast<int>(std::lround(e.v[0] * scale)) - turned.cols / 2;
  const int y = static_cast<int>(std::lround(e.v[1] * scale - shift));
  cv::Rect dst(x, y, turned.cols, turned.rows);
  cv::Rect clip = dst & cv::Rect(0, 0, img.cols, img.rows);
  if (clip.empty()) return;
  cv::Mat src = turned(cv::Rect(clip.x - x, clip.y - y, clip.width, clip.height));
  cv::Mat gray;
  cv::cvtColor(src, gray, cv::COLOR_BGR2GRAY);
  src.copyTo(img(clip), gray < 250);
}

}  // namespace

std::vector<std::uint8_t> Canvas::to_png(double dpi) const {
  const double scale = dpi / 96.0;
  cv::Mat img(static_cast<int>(std::ceil(height_ * scale)), static_cast<int>(std::ceil(width_ * scale)), CV_8UC3,
              cv::Scalar(255, 255, 255));
  for (const auto& e : elements_) {
    switch (e.shape) {
      case Shape::rect: {
        const auto a = pt(e.v[0], e.v[1], scale);
        const auto b = pt(e.v[0] + e.v[2], e.v[1] + e.v[3], scale);
        if (e.style.fill != "none") {
          if (e.style.opacity < 1.0) {
            cv::Rect r = cv::Rect(a, b) & cv::Rect(0, 0, img.cols, img.rows);
            if (!r.empty()) {
              cv::Mat roi = img(r);
              cv::Mat layer(roi.size(), roi.type(), bgr(e.style.fill));
              cv::addWeighted(layer, e.style.opacity, roi, 1.0 - e.style.opacity, 0.0, roi);
            }
          } else {
            cv::rectangle(img, a, b, bgr(e.style.fill), cv::FILLED);
          }
        }
        if (e.style.stroke != "none") cv::rectangle(img, a, b, bgr(e.style.stroke), thick(e.style.stroke_width, scale));
        break;
      }
      case Shape::circle: {
        const auto c = pt(e.v[0], e.v[1], scale);
        const int r = std::max(1, static_cast<int>(std::lround(e.v[2] * scale)));
        if (e.style.fill != "none") cv::circle(img, c, r, bgr(e.style.fill), cv::FILLED, cv::LINE_AA);
        if (e.style.stroke != "none") {
          cv::circle(img, c, r, bgr(e.style.stroke), thick(e.style.stroke_width, scale), cv::LINE_AA);
        }
        break;
      }
      case Shape::line:
        cv::line(img, pt(e.v[0], e.v[1], scale), pt(e.v[2], e.v[3], scale), bgr(e.style.stroke),
                 thick(e.style.stroke_width, scale), cv::LINE_AA);
        break;
      case Shape::polyline: {
        std::vector<cv::Point> pts;
        for (std::size_t i = 0; i + 1 < e.v.size(); i += 2) pts.push_back(pt(e.v[i], e.v[i + 1], scale));
        cv::polylines(img, pts, false, bgr(e.style.stroke), thick(e.style.stroke_width, scale), cv::LINE_AA);
        break;
      }
      case Shape::text: draw_text(img, e, scale); break;
    }
  }
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", img, buf)) throw StateError("PNG encoding failed");
  return with_phys(buf, dpi);
}

// ---------------------------------------------------------------------------

Canvas volcano(const diffexpr::VolcanoData& v, const std::string& t) {
  Frame f;
  std::vector<double> xs{-v.fc_threshold, v.fc_threshold}, ys{0.0, v.y_threshold};
  for (const auto& p : v.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  f.x = range_of(xs);
  f.y = range_of(ys);
  f.y.lo = 0.0;
  Canvas c = make_canvas(f, 140);
  title(c, t);
  axes(c, f, "log2 fold change", v.adjusted ? "-log10 adjusted p" : "-log10 p");
  for (const auto& p : v.points) {
    std::string color = "#9e9e9e";
    if (p.status == diffexpr::Status::up) color = "#d62728";
    if (p.status == diffexpr::Status::down) color = "#1f77b4";
    c.circle(f.px(p.x), f.py(p.y), 3, filled(color, 0.8), "point", p.protein_id);
  }
  Style dash = stroked("#555555");
  c.line(f.px(-v.fc_threshold), f.top, f.px(-v.fc_threshold), f.top + f.h, dash, "threshold");
  c.line(f.px(v.fc_threshold), f.top, f.px(v.fc_threshold), f.top + f.h, dash, "threshold");
  if (v.y_threshold <= f.y.hi) c.line(f.left, f.py(v.y_threshold), f.left + f.w, f.py(v.y_threshold), dash, "threshold");
  std::size_t ex_a = 0, ex_b = 0;
  for (const auto& [id, s] : v.exclusives) (s == diffexpr::Status::exclusive_a ? ex_a : ex_b)++;
  legend(c, f.left + f.w + 12, f.top + 10, {{"up", "#d62728"}, {"down", "#1f77b4"}, {"not significant", "#9e9e9e"}});
  c.text(f.left + f.w + 12, f.top + 70, "exclusive A: " + std::to_string(ex_a), 10);
  c.text(f.left + f.w + 12, f.top + 86, "exclusive B: " + std::to_string(ex_b), 10);
  return c;
}

namespace {

/// Dendrogram as polylines. `pos` maps a leaf to its slot along the axis.
void dendrogram(Canvas& c, const heatmap::Dendrogram& d, std::size_t n, bool vertical, double base, double depth,
                double start, double step) {
  if (d.merges.empty()) return;
  std::vector<double> pos(n + d.merges.size()), hgt(n + d.merges.size(), 0.0);
  for (std::size_t i = 0; i < d.leaf_order.size(); ++i) pos[d.leaf_order[i]] = start + (static_cast<double>(i) + 0.5) * step;
  double top = 0.0;
  for (const auto& m : d.merges) top = std::max(top, m.height);
  if (top <= 0.0) top = 1.0;
  for (std::size_t k = 0; k < d.merges.size(); ++k) {
    const auto& m = d.merges[k];
    pos[n + k] = (pos[m.left] + pos[m.right]) / 2;
    hgt[n + k] = m.height;
    auto off = [&](double h) { return base - h / top * depth; };
    std::vector<double> pts;
    if (vertical) {
      pts = {pos[m.left], off(hgt[m.left]), pos[m.left], off(m.height), pos[m.right], off(m.height), pos[m.right],
             off(hgt[m.right])};
    } else {
      pts = {off(hgt[m.left]), pos[m.left], off(m.height), pos[m.left], off(m.height), pos[m.right], off(hgt[m.right]),
             pos[m.right]};
    }
    c.polyline(pts, stroked("#333333"), "dendrogram");
  }
}

}  // namespace

Canvas heatmap(const heatmap::HeatmapData& h, const std::string& t) {
  if (h.empty()) {
    Canvas c(480, 160);
    title(c, t);
    c.text(240, 90, h.notice.empty() ? "nothing to show" : h.notice, 12, "middle");
    return c;
  }
  const std::size_t nr = h.row_ids.size(), nc = h.col_ids.size();
  const double cell_w = std::clamp(420.0 / static_cast<double>(nc), 12.0, 60.0);
  const double cell_h = std::clamp(500.0 / static_cast<double>(nr), 0.5, 16.0);
  const double left = 110, top = 110;
  const bool row_labels = nr <= 60;
  Canvas c(left + cell_w * static_cast<double>(nc) + (row_labels ? 120 : 20) + 70,
           top + cell_h * static_cast<double>(nr) + 40);
  title(c, t);
  const auto& ro = h.rows.leaf_order;
  const auto& co = h.cols.leaf_order;
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      const double z = h.z[ro[i]][co[j]];
      c.rect(left + static_cast<double>(j) * cell_w, top + static_cast<double>(i) * cell_h, cell_w, cell_h,
             filled(diverging(z / 3.0)), "cell");
    }
    if (row_labels) {
      c.text(left + cell_w * static_cast<double>(nc) + 4, top + (static_cast<double>(i) + 0.75) * cell_h, h.row_ids[ro[i]],
             std::min(10.0, cell_h));
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    c.text(left + (static_cast<double>(j) + 0.5) * cell_w, top - 4, h.col_ids[co[j]], 10, "start", -90);
  }
  dendrogram(c, h.rows, nr, false, left - 4, 90, top, cell_h);
  dendrogram(c, h.cols, nc, true, top - 60, 40, left, cell_w);
  // colour key
  const double kx = c.width() - 50;
  for (int i = 0; i < 20; ++i) {
    const double zv = 3.0 - 6.0 * i / 19.0;
    c.rect(kx, top + i * 8.0, 14, 8, filled(diverging(zv / 3.0)), "key");
  }
  c.text(kx + 18, top + 8, "3", 9);
  c.text(kx + 18, top + 160, "-3", 9);
  return c;
}

Canvas boxplot(const std::vector<qc::BoxStats>& boxes, const std::string& t) {
  Frame f;
  f.w = std::max(240.0, 50.0 * static_cast<double>(boxes.size()));
  std::vector<double> ys;
  for (const auto& b : boxes) {
    ys.insert(ys.end(), {b.lower_whisker, b.upper_whisker});
    ys.insert(ys.end(), b.outliers.begin(), b.outliers.end());
  }
  f.x = {0.0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1))};
  f.y = range_of(ys);
  Canvas c = make_canvas(f);
  title(c, t);
  axes(c, f, "sample", "log2 intensity", false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double cx = f.px(static_cast<double>(i) + 0.5);
    const double hw = std::min(18.0, f.w / static_cast<double>(boxes.size()) * 0.35);
    const auto color = kPalette[i % kPalette.size()];
    c.line(cx, f.py(b.lower_whisker), cx, f.py(b.q1), stroked("#333333"), "whisker");
    c.line(cx, f.py(b.q3), cx, f.py(b.upper_whisker), stroked("#333333"), "whisker");
    Style box = filled(color, 0.6);
    box.stroke = "#333333";
    c.rect(cx - hw, f.py(b.q3), 2 * hw, f.py(b.q1) - f.py(b.q3), box, "box");
    c.line(cx - hw, f.py(b.median), cx + hw, f.py(b.median), stroked("#000000", 2), "median");
    for (double o : b.outliers) c.circle(cx, f.py(o), 2, stroked("#333333"), "outlier");
    c.text(cx, f.top + f.h + 14, b.column, 9, "end", -45);
  }
  return c;
}

Canvas histogram(const qc::Histogram& h, const std::string& t) {
  Frame f;
  f.x = h.edges.empty() ? Range{} : Range{h.edges.front(), h.edges.back()};
  if (!(f.x.hi > f.x.lo)) f.x = {f.x.lo - 0.5, f.x.lo + 0.5};
  double top = 1.0;
  for (double v : h.counts) top = std::max(top, v);
  f.y = {0.0, top * 1.05};
  Canvas c = make_canvas(f);
  title(c, t);
  axes(c, f, "value", "count");
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    double x0 = f.px(h.edges[i]), x1 = f.px(h.edges[i + 1]);
    if (x1 - x0 < 1e-9) {
      x0 = f.left;
      x1 = f.left + f.w;
    }
    Style s = filled("#4c72b0");
    s.stroke = "#ffffff";
    s.stroke_width = 0.5;
    c.rect(x0, f.py(h.counts[i]), x1 - x0, f.py(0) - f.py(h.counts[i]), s, "bar");
  }
  return c;
}

Canvas qq(const qc::QQPoints& q, const std::string& t) {
  Frame f;
  f.x = range_of(q.theoretical);
  f.y = range_of(q.sample);
  Canvas c = make_canvas(f);
  title(c, t);
  axes(c, f, "theoretical quantile", "sample quantile");
  if (q.sample.size() >= 2) {
    double m = 0, s = 0;
    for (double v : q.sample) m += v;
    m /= static_cast<double>(q.sample.size());
    for (double v : q.sample) s += (v - m) * (v - m);
    s = std::sqrt(s / static_cast<double>(q.sample.size() - 1));
    const double x0 = f.x.lo, x1 = f.x.hi;
    c.line(f.px(x0), f.py(std::clamp(m + s * x0, f.y.lo, f.y.hi)), f.px(x1), f.py(std::clamp(m + s * x1, f.y.lo, f.y.hi)),
           stroked("#d62728"), "reference");
  }
  for (std::size_t i = 0; i < q.sample.size(); ++i) {
    c.circle(f.px(q.theoretical[i]), f.py(q.sample[i]), 2, filled("#4c72b0", 0.7), "point");
  }
  return c;
}

Canvas imputation_overlay(const qc::ImputationOverlay& o, const std::string& t) {
  Frame f;
  f.x = o.edges.empty() ? Range{} : Range{o.edges.front(), o.edges.back()};
  if (!(f.x.hi > f.x.lo)) f.x = {f.x.lo - 0.5, f.x.lo + 0.5};
  double top = 1.0;
  for (double v : o.observed) top = std::max(top, v);
  for (double v : o.imputed) top = std::max(top, v);
  f.y = {0.0, top * 1.05};
  Canvas c = make_canvas(f, 120);
  title(c, t);
  axes(c, f, "log2 intensity", "count");
  auto bars = [&](const std::vector<double>& counts, const std::string& color, const std::string& cls) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] <= 0) continue;
      const double x0 = f.px(o.edges[i]), x1 = f.px(o.edges[i + 1]);
      c.rect(x0, f.py(counts[i]), std::max(0.5, x1 - x0), f.py(0) - f.py(counts[i]), filled(color, 0.55), cls);
    }
  };
  bars(o.observed, "#4c72b0", "observed");
  bars(o.imputed, "#dd8452", "imputed");
  legend(c, f.left + f.w + 12, f.top + 10, {{"observed", "#4c72b0"}, {"imputed", "#dd8452"}});
  return c;
}

Canvas dispersion(const std::vector<qc::DispersionRow>& rows, const std::string& t) {
  Frame f;
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r.mean);
    ys.push_back(r.cv);
  }
  f.x = range_of(xs);
  f.y = range_of(ys);
  f.y.lo = std::min(0.0, f.y.lo);
  Canvas c = make_canvas(f);
  title(c, t);
  axes(c, f, "mean log2 intensity", "coefficient of variation");
  for (const auto& r : rows) c.circle(f.px(r.mean), f.py(r.cv), 2, filled("#4c72b0", 0.6), "point", r.protein_id);
  return c;
}

Canvas scatter(const qc::ScatterData& s, const std::string& t) {
  Frame f;
  f.x = range_of(s.x);
  f.y = range_of(s.y);
  Canvas c = make_canvas(f);
  title(c, t);
  axes(c, f, s.x_column, s.y_column);
  const double lo = std::max(f.x.lo, f.y.lo), hi = std::min(f.x.hi, f.y.hi);
  if (hi > lo) c.line(f.px(lo), f.py(lo), f.px(hi), f.py(hi), stroked("#bbbbbb"), "identity");
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    c.circle(f.px(s.x[i]), f.py(s.y[i]), 2, filled("#4c72b0", 0.6), "point", s.ids[i]);
  }
  return c;
}

Canvas correlation(const std::vector<std::vector<double>>& r, const std::vector<std::string>& samples,
                   const std::string& t) {
  const std::size_t n = samples.size();
  const double cell = std::clamp(400.0 / std::max<double>(1.0, static_cast<double>(n)), 10.0, 50.0);
  const double left = 110, top = 60;
  Canvas c(left + cell * static_cast<double>(n) + 80, top + cell * static_cast<double>(n) + 110);
  title(c, t);
  double lo = 1.0;
  for (const auto& row : r) {
    for (double v : row) {
      if (std::isfinite(v)) lo = std::min(lo, v);
    }
  }
  const double span = std::max(1e-9, 1.0 - lo);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = r[i][j];
      c.rect(left + static_cast<double>(j) * cell, top + static_cast<double>(i) * cell, cell, cell,
             filled(std::isfinite(v) ? mix("#f7fbff", "#08306b", (v - lo) / span) : "#cccccc"), "cell");
      if (n <= 12 && std::isfinite(v)) {
        c.text(left + (static_cast<double>(j) + 0.5) * cell, top + (static_cast<double>(i) + 0.6) * cell,
               num(v), std::min(10.0, cell / 3), "middle", 0.0, (v - lo) / span > 0.6 ? "#ffffff" : "#222222");
      }
    }
    c.text(left - 4, top + (static_cast<double>(i) + 0.6) * cell, samples[i], 9, "end");
    c.text(left + (static_cast<double>(i) + 0.5) * cell, top + cell * static_cast<double>(n) + 6, samples[i], 9, "end",
           -90);
  }
  return c;
}

Canvas pca(const qc::PcaResult& p, const GroupDesign* design, const std::string& t) {
  Frame f;
  std::vector<double> xs, ys;
  for (const auto& s : p.scores) {
    xs.push_back(s.empty() ? 0.0 : s[0]);
    ys.push_back(s.size() > 1 ? s[1] : 0.0);
  }
  f.x = range_of(xs, 0.15);
  f.y = range_of(ys, 0.15);
  Canvas c = make_canvas(f, 140);
  title(c, t);
  auto pct = [&](std::size_t k) {
    return k < p.variance_explained.size() ? " (" + num(100.0 * p.variance_explained[k]) + "%)" : std::string();
  };
  axes(c, f, "PC1" + pct(0), "PC2" + pct(1));
  std::map<std::string, std::string> color_of;
  std::vector<std::pair<std::string, std::string>> items;
  if (design) {
    for (std::size_t g = 0; g < design->groups.size(); ++g) {
      const auto color = kPalette[g % kPalette.size()];
      items.emplace_back(design->groups[g].name, color);
      for (const auto& col : design->groups[g].columns) color_of[col] = color;
    }
  }
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    auto it = color_of.find(p.samples[i]);
    const auto color = it == color_of.end() ? std::string("#555555") : it->second;
    c.circle(f.px(xs[i]), f.py(ys[i]), 5, filled(color), "point", p.samples[i]);
    c.text(f.px(xs[i]) + 7, f.py(ys[i]) - 5, p.samples[i], 9);
  }
  legend(c, f.left + f.w + 12, f.top + 10, items);
  return c;
}

Canvas venn(const preprocess::VennResult& v, const std::string& t) {
  const std::size_t g = v.groups.size();
  Canvas c(600, 460);
  title(c, t);
  if (g == 2 || g == 3) {
    struct C {
      double x, y;
    };
    const std::vector<C> centers = g == 2 ? std::vector<C>{{240, 240}, {360, 240}}
                                          : std::vector<C>{{250, 210}, {350, 210}, {300, 297}};
    for (std::size_t i = 0; i < g; ++i) {
      Style s = filled(kPalette[i], 0.25);
      s.stroke = kPalette[i];
      c.circle(centers[i].x, centers[i].y, 110, s, "set");
    }
    // label anchor per membership bit pattern
    std::map<std::size_t, C> at;
    if (g == 2) {
      at = {{1, {190, 244}}, {2, {410, 244}}, {3, {300, 244}}};
    } else {
      at = {{1, {205, 180}}, {2, {395, 180}}, {4, {300, 360}}, {3, {300, 165}},
            {5, {250, 275}}, {6, {350, 275}}, {7, {300, 240}}};
    }
    for (const auto& [mask, p] : at) c.text(p.x, p.y, std::to_string(v.regions[mask - 1]), 14, "middle");
    c.text(130, 95, v.groups[0], 13, "middle");
    c.text(470, 95, v.groups[1], 13, "middle");
    if (g == 3) c.text(300, 440, v.groups[2], 13, "middle");
    return c;
  }
  // four groups: one bar per exact-membership region
  Frame f;
  f.left = 180;
  f.w = 360;
  f.h = 15.0 * static_cast<double>(v.regions.size());
  f.top = 50;
  double top = 1.0;
  for (auto n : v.regions) top = std::max(top, static_cast<double>(n));
  f.x = {0.0, top * 1.1};
  Canvas bars(620, f.top + f.h + 60);
  title(bars, t);
  for (std::size_t m = 1; m <= v.regions.size(); ++m) {
    std::string label;
    for (std::size_t k = 0; k < g; ++k) {
      if (m & (std::size_t(1) << k)) label += (label.empty() ? "" : " & ") + v.groups[k];
    }
    const double y = f.top + static_cast<double>(m - 1) * 15.0;
    bars.rect(f.left, y + 2, f.px(static_cast<double>(v.regions[m - 1])) - f.left, 11, filled("#4c72b0"), "bar");
    bars.text(f.left - 4, y + 11, label, 9, "end");
    bars.text(f.px(static_cast<double>(v.regions[m - 1])) + 4, y + 11, std::to_string(v.regions[m - 1]), 9);
  }
  return bars;
}

Canvas enrichment_dot(const enrich::EnrichPlots& e) {
  Frame f;
  f.left = 260;
  f.h = std::max(120.0, 22.0 * static_cast<double>(e.dot.size()));
  std::vector<double> xs{0.0};
  double kmax = 1.0, cmin = 0.0, cmax = 1.0;
  for (const auto& d : e.dot) {
    xs.push_back(d.gene_ratio);
    kmax = std::max(kmax, d.size);
    cmax = std::max(cmax, d.color);
  }
  f.x = range_of(xs, 0.1);
  f.y = {0.0, static_cast<double>(std::max<std::size_t>(e.dot.size(), 1))};
  Canvas c = make_canvas(f, 120);
  title(c, e.title, e.font_size + 2);
  axes(c, f, "gene ratio", "", true);
  if (e.dot.empty()) c.text(f.left + f.w / 2, f.top + f.h / 2, "no terms to show", 12, "middle");
  for (std::size_t i = 0; i < e.dot.size(); ++i) {
    const auto& d = e.dot[i];
    const double y = f.top + (static_cast<double>(i) + 0.5) * f.h / static_cast<double>(e.dot.size());
    const double r = 3.0 + 7.0 * std::sqrt(d.size / kmax);
    c.circle(f.px(d.gene_ratio), y, r, filled(mix("#3182bd", "#de2d26", (d.color - cmin) / (cmax - cmin))), "point",
             d.term_id);
    c.text(f.left - 6, y + 4, d.term_name.empty() ? d.term_id : d.term_name, e.font_size, "end");
  }
  c.text(f.left + f.w + 10, f.top + 12, "-log10 p_adj", 10);
  c.rect(f.left + f.w + 10, f.top + 20, 12, 12, filled("#de2d26"), "legend");
  c.text(f.left + f.w + 26, f.top + 30, label_num(cmax), 9);
  c.rect(f.left + f.w + 10, f.top + 36, 12, 12, filled("#3182bd"), "legend");
  c.text(f.left + f.w + 26, f.top + 46, "0", 9);
  return c;
}

Canvas enrichment_bar(const enrich::EnrichPlots& e) {
  Frame f;
  f.left = 260;
  f.h = std::max(120.0, 22.0 * static_cast<double>(e.bar.size()));
  std::vector<double> xs{0.0};
  std::vector<std::string> sources;
  for (const auto& b : e.bar) {
    xs.push_back(b.value);
    if (std::find(sources.begin(), sources.end(), b.source) == sources.end()) sources.push_back(b.source);
  }
  f.x = range_of(xs, 0.05);
  f.x.lo = 0.0;
  f.y = {0.0, 1.0};
  Canvas c = make_canvas(f, 130);
  title(c, e.title, e.font_size + 2);
  axes(c, f, "-log10 adjusted p", "", true);
  if (e.bar.empty()) c.text(f.left + f.w / 2, f.top + f.h / 2, "no terms to show", 12, "middle");
  std::vector<std::pair<std::string, std::string>> items;
  for (std::size_t s = 0; s < sources.size(); ++s) items.emplace_back(sources[s], kPalette[s % kPalette.size()]);
  for (std::size_t i = 0; i < e.bar.size(); ++i) {
    const auto& b = e.bar[i];
    const auto s = static_cast<std::size_t>(std::find(sources.begin(), sources.end(), b.source) - sources.begin());
    const double slot = f.h / static_cast<double>(e.bar.size());
    const double y = f.top + static_cast<double>(i) * slot;
    c.rect(f.left, y + slot * 0.15, f.px(b.value) - f.left, slot * 0.7, filled(kPalette[s % kPalette.size()]), "bar");
    c.text(f.left - 6, y + slot * 0.6, b.term_name.empty() ? b.term_id : b.term_name, e.font_size, "end");
  }
  legend(c, f.left + f.w + 12, f.top + 10, items);
  return c;
}

Canvas enrichment_manhattan(const enrich::EnrichPlots& e) {
  Frame f;
  f.w = std::max(480.0, 4.0 * static_cast<double>(e.manhattan.size()));
  std::vector<double> ys{0.0};
  std::vector<std::string> sources;
  for (const auto& m : e.manhattan) {
    ys.push_back(m.y);
    if (std::find(sources.begin(), sources.end(), m.source) == sources.end()) sources.push_back(m.source);
  }
  f.x = {-0.5, std::max(0.5, static_cast<double>(e.manhattan.size()) - 0.5)};
  f.y = range_of(ys);
  f.y.lo = 0.0;
  Canvas c = make_canvas(f);
  title(c, e.title, e.font_size + 2);
  axes(c, f, "", "-log10 adjusted p", false);
  if (e.manhattan.empty()) c.text(f.left + f.w / 2, f.top + f.h / 2, "no terms to show", 12, "middle");
  for (const auto& m : e.manhattan) {
    const auto s = static_cast<std::size_t>(std::find(sources.begin(), sources.end(), m.source) - sources.begin());
    c.circle(f.px(m.x), f.py(m.y), m.significant ? 4 : 2.5, filled(kPalette[s % kPalette.size()], 0.8), "point",
             m.term_id);
  }
  // source labels under each block
  for (const auto& src : sources) {
    double lo = 1e300, hi = -1e300;
    for (const auto& m : e.manhattan) {
      if (m.source == src) {
        lo = std::min(lo, m.x);
        hi = std::max(hi, m.x);
      }
    }
    c.text(f.px((lo + hi) / 2), f.top + f.h + 18, src, e.font_size, "middle");
  }
  return c;
}

}  // namespace protodown::render
