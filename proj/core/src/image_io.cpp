#include "supergaze/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "supergaze/errors.hpp"

namespace supergaze {

ImageTensor load_image(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH);
  if (m.empty()) {
    throw PipelineError(path.string(), "failed to decode image");
  }

  const double scale = m.depth() == CV_16U ? 65535.0 : 255.0;
  ImageTensor img(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      double b, g, r;
      if (m.depth() == CV_16U) {
        const auto px = m.at<cv::Vec3w>(y, x);
        b = px[0]; g = px[1]; r = px[2];
      } else {
        const auto px = m.at<cv::Vec3b>(y, x);
        b = px[0]; g = px[1]; r = px[2];
      }
      img.at(0, y, x) = r / scale;
      img.at(1, y, x) = g / scale;
      img.at(2, y, x) = b / scale;
    }
  }
  return img;
}

void save_png(const std::filesystem::path& path, const ImageTensor& img, int bit_depth) {
  if (img.empty()) {
    throw PipelineError(path.string(), "refusing to write an empty image");
  }
  if (bit_depth != 8 && bit_depth != 16) {
    throw ConfigError("png bit depth must be 8 or 16");
  }
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }

  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  cv::Mat m(img.height(), img.width(), bit_depth == 16 ? CV_16UC3 : CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      auto quant = [&](int c) {
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        return std::lround(v * scale);
      };
      if (bit_depth == 16) {
        m.at<cv::Vec3w>(y, x) = cv::Vec3w(static_cast<ushort>(quant(2)),
                                          static_cast<ushort>(quant(1)),
                                          static_cast<ushort>(quant(0)));
      } else {
        m.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<uchar>(quant(2)),
                                          static_cast<uchar>(quant(1)),
                                          static_cast<uchar>(quant(0)));
      }
    }
  }
  if (!cv::imwrite(path.string(), m)) {
    throw PipelineError(path.string(), "failed to write png");
  }
}

}  // namespace supergaze
