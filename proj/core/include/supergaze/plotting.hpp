#pragma once

#include <filesystem>
#include <vector>

#include "supergaze/data.hpp"
#include "supergaze/evaluation.hpp"
#include "supergaze/image.hpp"

namespace supergaze::plot {

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
};

/// Minimal software rasterizer over an RGB image tensor.
class Canvas {
public:
  Canvas(int width, int height, Rgb background);

  int width() const { return image_.width(); }
  int height() const { return image_.height(); }

  void set_pixel(int x, int y, Rgb color);
  void draw_line(int x0, int y0, int x1, int y1, Rgb color);
  void draw_rect(int x0, int y0, int x1, int y1, Rgb color);   // outline
  void fill_disc(int cx, int cy, int radius, Rgb color);
  void draw_circle(int cx, int cy, int radius, Rgb color);     // outline

  const ImageTensor& image() const { return image_; }

private:
  ImageTensor image_;
};

/// Scatter of annotated face centers over the unit square with the
/// per-subset validity rectangles overlaid. Samples without a face box are
/// skipped. Train/val/test points use distinct colors; centers falling
/// outside their subset's rectangle are ringed in red.
ImageTensor face_center_plot(const std::vector<data::GazeSample>& samples,
                             const data::ValidIntervals& intervals, int size = 640);

/// Polar scatter of per-sample angular error: the angle is the ground-truth
/// yaw (0 degrees pointing up, positive to the right), the radius the error
/// in degrees. Reference rings mark quarter fractions of the radial limit.
ImageTensor polar_error_plot(const std::vector<eval::SamplePrediction>& predictions,
                             int size = 640, double max_ae_deg = 0.0 /* 0: fit to data */);

/// Rasters the plot to an 8-bit PNG.
void save_plot(const ImageTensor& image, const std::filesystem::path& path);

}  // namespace supergaze::plot
