#include "supergaze/detectors.hpp"

#include <algorithm>

#include "supergaze/errors.hpp"

namespace supergaze::prep {

namespace {

struct Extent {
  int min_x = 0, min_y = 0, max_x = -1, max_y = -1;
  bool any() const { return max_x >= min_x && max_y >= min_y; }
  void add(int x, int y) {
    if (!any()) {
      min_x = max_x = x;
      min_y = max_y = y;
    } else {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  PixelBox box(double pad = 0.0) const {
    return {min_x - pad, min_y - pad, max_x + 1.0 + pad, max_y + 1.0 + pad};
  }
};

bool is_face_pixel(const ImageTensor& img, int y, int x) {
  return img.at(0, y, x) > 0.6 && img.at(1, y, x) > 0.6 && img.at(2, y, x) < 0.3;
}

bool is_eye_pixel(const ImageTensor& img, int y, int x) {
  return img.at(2, y, x) > 0.6 && img.at(0, y, x) < 0.3 && img.at(1, y, x) < 0.3;
}

}  // namespace

std::optional<FaceDetection> BlobFaceDetector::detect(const ImageTensor& img,
                                                      const std::string&) const {
  Extent face;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (is_face_pixel(img, y, x)) face.add(x, y);
    }
  }
  if (!face.any()) return std::nullopt;

  const PixelBox face_box = face.box();
  const double cx = 0.5 * (face_box.x0 + face_box.x1);

  Extent left, right;
  for (int y = static_cast<int>(face_box.y0); y < static_cast<int>(face_box.y1); ++y) {
    for (int x = static_cast<int>(face_box.x0); x < static_cast<int>(face_box.x1); ++x) {
      if (y < 0 || x < 0 || y >= img.height() || x >= img.width()) continue;
      if (!is_eye_pixel(img, y, x)) continue;
      if (x < cx) {
        left.add(x, y);
      } else {
        right.add(x, y);
      }
    }
  }

  FaceDetection det;
  det.face = face_box;
  if (left.any()) det.eyes.left = left.box(1.0);
  if (right.any()) det.eyes.right = right.box(1.0);
  return det;
}

std::unique_ptr<LandmarkDetector> make_detector(const std::string& name) {
  if (name == "null" || name == "none") return std::make_unique<NullDetector>();
  if (name == "blob") return std::make_unique<BlobFaceDetector>();
  throw ConfigError("unknown detector '" + name + "' (expected: null, blob)");
}

}  // namespace supergaze::prep
