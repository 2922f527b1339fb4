#include "supergaze/image.hpp"

#include <algorithm>

#include "supergaze/errors.hpp"

namespace supergaze {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Keys cubic kernel with a = -0.5.
double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::fabs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace

ImageTensor resize_bilinear(const ImageTensor& img, int out_height, int out_width) {
  if (out_height <= 0 || out_width <= 0) {
    throw ConfigError("resize target must be positive");
  }
  if (img.height() == out_height && img.width() == out_width) return img;

  ImageTensor out(out_height, out_width);
  const double sy = static_cast<double>(img.height()) / out_height;
  const double sx = static_cast<double>(img.width()) / out_width;

  for (int y = 0; y < out_height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      for (int c = 0; c < ImageTensor::kChannels; ++c) {
        const double top = (1.0 - wx) * img.at_clamped(c, y0, x0) +
                           wx * img.at_clamped(c, y0, x0 + 1);
        const double bot = (1.0 - wx) * img.at_clamped(c, y0 + 1, x0) +
                           wx * img.at_clamped(c, y0 + 1, x0 + 1);
        out.at(c, y, x) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

ImageTensor resize_bicubic(const ImageTensor& img, int out_height, int out_width) {
  if (out_height <= 0 || out_width <= 0) {
    throw ConfigError("resize target must be positive");
  }
  if (img.height() == out_height && img.width() == out_width) return img;

  ImageTensor out(out_height, out_width);
  const double sy = static_cast<double>(img.height()) / out_height;
  const double sx = static_cast<double>(img.width()) / out_width;

  for (int y = 0; y < out_height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    double wy[4];
    for (int k = 0; k < 4; ++k) wy[k] = cubic_weight(fy - (y0 - 1 + k));
    for (int x = 0; x < out_width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      double wx[4];
      for (int k = 0; k < 4; ++k) wx[k] = cubic_weight(fx - (x0 - 1 + k));
      for (int c = 0; c < ImageTensor::kChannels; ++c) {
        double acc = 0.0;
        for (int ky = 0; ky < 4; ++ky) {
          double row = 0.0;
          for (int kx = 0; kx < 4; ++kx) {
            row += wx[kx] * img.at_clamped(c, y0 - 1 + ky, x0 - 1 + kx);
          }
          acc += wy[ky] * row;
        }
        out.at(c, y, x) = clamp01(acc);
      }
    }
  }
  return out;
}

ImageTensor crop(const ImageTensor& img, int x0, int y0, int w, int h) {
  x0 = std::clamp(x0, 0, img.width() - 1);
  y0 = std::clamp(y0, 0, img.height() - 1);
  w = std::clamp(w, 1, img.width() - x0);
  h = std::clamp(h, 1, img.height() - y0);

  ImageTensor out(h, w);
  for (int c = 0; c < ImageTensor::kChannels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.at(c, y, x) = img.at(c, y0 + y, x0 + x);
      }
    }
  }
  return out;
}

ImageTensor center_crop(const ImageTensor& img, int size) {
  if (size <= 0 || size > img.width() || size > img.height()) {
    throw ConfigError("center crop size exceeds image bounds");
  }
  const int x0 = (img.width() - size) / 2;
  const int y0 = (img.height() - size) / 2;
  return crop(img, x0, y0, size, size);
}

ImageTensor crop_resize(const ImageTensor& img, const PixelBox& box, int out_height,
                        int out_width) {
  const int x0 = static_cast<int>(std::floor(box.x0));
  const int y0 = static_cast<int>(std::floor(box.y0));
  const int x1 = static_cast<int>(std::ceil(box.x1));
  const int y1 = static_cast<int>(std::ceil(box.y1));
  const ImageTensor patch = crop(img, x0, y0, x1 - x0, y1 - y0);
  return resize_bilinear(patch, out_height, out_width);
}

}  // namespace supergaze
