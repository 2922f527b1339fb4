#include "supergaze/plotting.hpp"

#include <algorithm>
#include <cmath>

#include "supergaze/gaze_codec.hpp"
#include "supergaze/image_io.hpp"

namespace supergaze::plot {

namespace {

constexpr Rgb kWhite{1.0, 1.0, 1.0};
constexpr Rgb kGridGray{0.82, 0.82, 0.82};
constexpr Rgb kFrameGray{0.45, 0.45, 0.45};
constexpr Rgb kTrainColor{0.13, 0.55, 0.30};  // green
constexpr Rgb kValColor{0.85, 0.55, 0.05};    // orange
constexpr Rgb kTestColor{0.45, 0.25, 0.70};   // purple
constexpr Rgb kInvalidRing{0.85, 0.10, 0.10};
constexpr Rgb kPointBlue{0.15, 0.35, 0.80};

Rgb subset_color(const std::string& subset) {
  if (subset == "train") return kTrainColor;
  if (subset == "val") return kValColor;
  return kTestColor;
}

}  // namespace

Canvas::Canvas(int width, int height, Rgb background) : image_(height, width) {
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      image_.at(0, y, x) = background.r;
      image_.at(1, y, x) = background.g;
      image_.at(2, y, x) = background.b;
    }
  }
}

void Canvas::set_pixel(int x, int y, Rgb color) {
  if (x < 0 || y < 0 || x >= width() || y >= height()) return;
  image_.at(0, y, x) = color.r;
  image_.at(1, y, x) = color.g;
  image_.at(2, y, x) = color.b;
}

void Canvas::draw_line(int x0, int y0, int x1, int y1, Rgb color) {
  // Bresenham over the dominant axis.
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set_pixel(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::draw_rect(int x0, int y0, int x1, int y1, Rgb color) {
  draw_line(x0, y0, x1, y0, color);
  draw_line(x1, y0, x1, y1, color);
  draw_line(x1, y1, x0, y1, color);
  draw_line(x0, y1, x0, y0, color);
}

void Canvas::fill_disc(int cx, int cy, int radius, Rgb color) {
  for (int y = cy - radius; y <= cy + radius; ++y) {
    for (int x = cx - radius; x <= cx + radius; ++x) {
      const int dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius) set_pixel(x, y, color);
    }
  }
}

void Canvas::draw_circle(int cx, int cy, int radius, Rgb color) {
  // Midpoint circle, eight-way symmetric.
  int x = radius, y = 0, err = 1 - radius;
  while (x >= y) {
    set_pixel(cx + x, cy + y, color);
    set_pixel(cx + y, cy + x, color);
    set_pixel(cx - y, cy + x, color);
    set_pixel(cx - x, cy + y, color);
    set_pixel(cx - x, cy - y, color);
    set_pixel(cx - y, cy - x, color);
    set_pixel(cx + y, cy - x, color);
    set_pixel(cx + x, cy - y, color);
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
}

ImageTensor face_center_plot(const std::vector<data::GazeSample>& samples,
                             const data::ValidIntervals& intervals, int size) {
  Canvas canvas(size, size, kWhite);
  const int margin = std::max(8, size / 16);
  const double span = static_cast<double>(size - 2 * margin);
  auto px = [&](double u) { return margin + static_cast<int>(std::lround(u * span)); };

  // Unit-square frame and a light quarter grid.
  for (int i = 1; i < 4; ++i) {
    canvas.draw_line(px(i / 4.0), px(0.0), px(i / 4.0), px(1.0), kGridGray);
    canvas.draw_line(px(0.0), px(i / 4.0), px(1.0), px(i / 4.0), kGridGray);
  }
  canvas.draw_rect(px(0.0), px(0.0), px(1.0), px(1.0), kFrameGray);

  for (const std::string subset : {"train", "val", "test"}) {
    const data::SubsetIntervals& iv = intervals.for_subset(subset);
    canvas.draw_rect(px(iv.x.lo), px(iv.y.lo), px(iv.x.hi), px(iv.y.hi), subset_color(subset));
  }

  for (const data::GazeSample& s : samples) {
    if (!s.face_box) continue;
    const double cx = s.face_box->center_x();
    const double cy = s.face_box->center_y();
    canvas.fill_disc(px(cx), px(cy), 2, subset_color(s.subset));
    if (!data::classify_validity(cx, cy, intervals, s.subset)) {
      canvas.draw_circle(px(cx), px(cy), 4, kInvalidRing);
    }
  }
  return canvas.image();
}

ImageTensor polar_error_plot(const std::vector<eval::SamplePrediction>& predictions, int size,
                             double max_ae_deg) {
  Canvas canvas(size, size, kWhite);
  const int cx = size / 2, cy = size / 2;
  const int rim = size / 2 - std::max(8, size / 16);

  if (max_ae_deg <= 0.0) {
    for (const auto& p : predictions) max_ae_deg = std::max(max_ae_deg, p.ae_deg);
    max_ae_deg = std::max(max_ae_deg, 5.0);  // keep rings visible on near-zero error
  }

  for (int i = 1; i <= 4; ++i) canvas.draw_circle(cx, cy, rim * i / 4, kGridGray);
  canvas.draw_line(cx - rim, cy, cx + rim, cy, kGridGray);
  canvas.draw_line(cx, cy - rim, cx, cy + rim, kGridGray);
  canvas.draw_circle(cx, cy, rim, kFrameGray);

  for (const auto& p : predictions) {
    const double r = std::min(p.ae_deg / max_ae_deg, 1.0) * rim;
    const double yaw = codec::deg_to_rad(p.yaw_deg);
    // Yaw 0 points up; positive yaw sweeps clockwise (to the viewer's right).
    const int x = cx + static_cast<int>(std::lround(r * std::sin(yaw)));
    const int y = cy - static_cast<int>(std::lround(r * std::cos(yaw)));
    canvas.fill_disc(x, y, 2, kPointBlue);
  }
  return canvas.image();
}

void save_plot(const ImageTensor& image, const std::filesystem::path& path) {
  save_png(path, image, /*bit_depth=*/8);
}

}  // namespace supergaze::plot
