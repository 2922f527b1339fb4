#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace supergaze {

/// Axis-aligned box in image pixel coordinates, [x0, x1) x [y0, y1).
struct PixelBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool positive_area() const { return width() > 0.0 && height() > 0.0; }
};

/// Axis-aligned box in resolution-normalized coordinates, all in [0, 1].
struct NormBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool positive_area() const { return x1 > x0 && y1 > y0; }
  bool inside_unit() const {
    return x0 >= 0.0 && y0 >= 0.0 && x1 <= 1.0 && y1 <= 1.0;
  }
  double center_x() const { return 0.5 * (x0 + x1); }
  double center_y() const { return 0.5 * (y0 + y1); }

  PixelBox to_pixels(int width, int height) const {
    return {x0 * width, y0 * height, x1 * width, y1 * height};
  }
  static NormBox from_pixels(const PixelBox& b, int width, int height) {
    return {b.x0 / width, b.y0 / height, b.x1 / width, b.y1 / height};
  }
};

/// 3-channel planar RGB image, values in [0, 1], row-major per plane.
class ImageTensor {
public:
  static constexpr int kChannels = 3;

  ImageTensor() = default;
  ImageTensor(int height, int width)
      : height_(height), width_(width),
        data_(static_cast<std::size_t>(kChannels) * height * width, 0.0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }

  double& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  /// Edge-replicating access for resampling taps.
  double at_clamped(int c, int y, int x) const {
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    return at(c, y, x);
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const ImageTensor& o) const {
    return height_ == o.height_ && width_ == o.width_ && data_ == o.data_;
  }

private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Bilinear resize with half-pixel center mapping
/// (src = (dst + 0.5) * in/out - 0.5) and edge replication. This is the
/// single resampler used for every crop and rescale in the pipeline.
ImageTensor resize_bilinear(const ImageTensor& img, int out_height, int out_width);

/// Bicubic resize (Keys kernel, a = -0.5), same coordinate convention as
/// resize_bilinear. Output is clamped back into [0, 1].
ImageTensor resize_bicubic(const ImageTensor& img, int out_height, int out_width);

/// Integer sub-image copy; the box is clamped to the image bounds.
ImageTensor crop(const ImageTensor& img, int x0, int y0, int w, int h);

/// Central s x s crop. Odd margins split with floor on the top/left side
/// (224 -> 175 leaves 24 on the left and 25 on the right).
ImageTensor center_crop(const ImageTensor& img, int size);

/// Crop a pixel box (snapped outward to the integer grid) and resize the
/// result with resize_bilinear.
ImageTensor crop_resize(const ImageTensor& img, const PixelBox& box, int out_height,
                        int out_width);

}  // namespace supergaze
