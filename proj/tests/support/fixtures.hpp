#pragma once

// Synthetic images and datasets shared by the unit and acceptance tests.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "supergaze/data.hpp"
#include "supergaze/gaze_codec.hpp"
#include "supergaze/image.hpp"
#include "supergaze/image_io.hpp"
#include "supergaze/rng.hpp"
#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;
using supergaze::ImageTensor;
using supergaze::NormBox;

/// Fresh unique directory under the system temp root.
inline fs::path temp_dir(const std::string& tag) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("supergaze-" + tag + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

inline void paint_rect(ImageTensor& img, int x0, int y0, int x1, int y1, double r, double g,
                       double b) {
  for (int y = std::max(0, y0); y < std::min(img.height(), y1); ++y) {
    for (int x = std::max(0, x0); x < std::min(img.width(), x1); ++x) {
      img.at(0, y, x) = r;
      img.at(1, y, x) = g;
      img.at(2, y, x) = b;
    }
  }
}

/// Gray frame with a bright yellow face rectangle (and blue eye dots when
/// requested) that the color-signature detector finds. The box is given
/// in normalized coordinates.
inline ImageTensor face_frame(int height, int width, const NormBox& face, bool with_eyes = true) {
  ImageTensor img(height, width);
  img.fill(0.5);
  const auto px = face.to_pixels(width, height);
  paint_rect(img, static_cast<int>(px.x0), static_cast<int>(px.y0), static_cast<int>(px.x1),
             static_cast<int>(px.y1), 0.95, 0.85, 0.1);
  if (with_eyes) {
    const int ey = static_cast<int>(px.y0 + 0.3 * px.height());
    const int lx = static_cast<int>(px.x0 + 0.25 * px.width());
    const int rx = static_cast<int>(px.x0 + 0.75 * px.width());
    paint_rect(img, lx - 1, ey - 1, lx + 2, ey + 2, 0.05, 0.05, 0.95);
    paint_rect(img, rx - 1, ey - 1, rx + 2, ey + 2, 0.05, 0.05, 0.95);
  }
  return img;
}

/// Head image whose white marker position encodes the gaze direction:
/// the marker center moves right with yaw and up with pitch, staying
/// inside the region every multiscale center crop retains.
inline ImageTensor gaze_marker_image(double yaw_deg, double pitch_deg, int size = 224) {
  ImageTensor img(size, size);
  img.fill(0.35);
  const double scale = size / 224.0;
  const int cx = static_cast<int>(size / 2 + yaw_deg / 60.0 * 50.0 * scale);
  const int cy = static_cast<int>(size / 2 - pitch_deg / 30.0 * 40.0 * scale);
  const int half = std::max(2, static_cast<int>(8 * scale));
  paint_rect(img, cx - half, cy - half, cx + half, cy + half, 1.0, 1.0, 1.0);
  return img;
}

struct LabeledImage {
  ImageTensor image;
  supergaze::codec::GazeVector gaze;
  double yaw_deg = 0.0, pitch_deg = 0.0;
};

/// Deterministic n-sample fixture covering yaw in [-60, 60] and pitch in
/// [-30, 30] on a grid with marker-encoded gaze.
inline std::vector<LabeledImage> learnable_fixture(int n, int image_size = 224) {
  std::vector<LabeledImage> out;
  out.reserve(n);
  const int cols = 8;
  for (int i = 0; i < n; ++i) {
    const int row = i / cols, col = i % cols;
    const int rows = (n + cols - 1) / cols;
    const double yaw = -60.0 + 120.0 * col / std::max(1, cols - 1);
    const double pitch = -30.0 + 60.0 * row / std::max(1, rows - 1);
    LabeledImage s;
    s.yaw_deg = yaw;
    s.pitch_deg = pitch;
    s.gaze = supergaze::codec::angles_to_vector(
        {supergaze::codec::deg_to_rad(yaw), supergaze::codec::deg_to_rad(pitch)});
    s.image = gaze_marker_image(yaw, pitch, image_size);
    out.push_back(std::move(s));
  }
  return out;
}

/// Rectification fixture: n_frames annotated frames whose images carry a
/// detectable face at a valid position; n_planted of the annotations are
/// replaced by off-cluster (bystander) boxes. Frames are kept in memory.
struct RectFixture {
  std::vector<supergaze::data::GazeSample> samples;
  std::map<std::string, ImageTensor> frames;
  std::vector<std::string> planted;  // image paths of corrupted annotations

  std::function<ImageTensor(const supergaze::data::GazeSample&)> loader() const {
    return [this](const supergaze::data::GazeSample& s) { return frames.at(s.image_path); };
  }
};

inline RectFixture rectification_fixture(int n_frames, int n_planted, int frame_size = 64,
                                         uint64_t seed = 7) {
  RectFixture fx;
  supergaze::Rng rng(seed);
  for (int i = 0; i < n_frames; ++i) {
    // True face: center well inside every subset's valid intervals.
    const double cx = rng.uniform(0.40, 0.60);
    const double cy = rng.uniform(0.45, 0.58);
    const double hw = 0.10, hh = 0.12;
    const NormBox true_box{cx - hw, cy - hh, cx + hw, cy + hh};

    supergaze::data::GazeSample s;
    s.image_path = "frame" + std::to_string(i) + ".png";
    s.subject_id = "subj" + std::to_string(i % 10);
    s.sequence_id = "seq" + std::to_string(i / 100);
    s.frame_index = i;
    const double yaw = rng.uniform(-180.0, 180.0);
    const double pitch = rng.uniform(-60.0, 60.0);
    s.gaze = supergaze::codec::angles_to_vector(
        {supergaze::codec::deg_to_rad(yaw), supergaze::codec::deg_to_rad(pitch)});
    s.subset = i % 10 == 8 ? "val" : (i % 10 == 9 ? "test" : "train");
    s.face_box = true_box;

    if (i < n_planted) {
      // Bystander box: center far outside every published interval.
      const double bx = rng.uniform(0.03, 0.12);
      const double by = rng.uniform(0.05, 0.20);
      s.face_box = NormBox{bx - 0.02, by - 0.03, bx + 0.02, by + 0.03};
      fx.planted.push_back(s.image_path);
    }

    fx.frames.emplace(s.image_path, face_frame(frame_size, frame_size, true_box));
    fx.samples.push_back(std::move(s));
  }
  return fx;
}

/// Writes the fixture to disk as a dataset directory (PNG frames plus a
/// JSONL annotation file) for CLI subprocess tests.
inline void write_dataset_dir(const RectFixture& fx, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, img] : fx.frames) supergaze::save_png(dir / name, img, 8);
  supergaze::data::save_jsonl(dir / "annotations.jsonl", fx.samples);
}

/// Hand-formatted CSV in the mirrored-axes dataset convention
/// (independent of the library's serializers).
inline void write_gaze360_csv(const fs::path& path,
                              const std::vector<supergaze::data::GazeSample>& samples) {
  std::ofstream out(path);
  out << std::setprecision(17);
  out << "image_path,subject_id,sequence_id,frame_index,gaze_x,gaze_y,gaze_z,"
         "face_x0,face_y0,face_x1,face_y1,left_x0,left_y0,left_x1,left_y1,"
         "right_x0,right_y0,right_x1,right_y1,subset\n";
  for (const auto& s : samples) {
    // The loader negates all axes, so emit the negated internal vector.
    out << s.image_path << ',' << s.subject_id << ',' << s.sequence_id << ',' << s.frame_index
        << ',' << -s.gaze.x << ',' << -s.gaze.y << ',' << -s.gaze.z << ',';
    auto box = [&out](const std::optional<NormBox>& b) {
      if (b) {
        out << b->x0 << ',' << b->y0 << ',' << b->x1 << ',' << b->y1;
      } else {
        out << ",,,";
      }
    };
    box(s.face_box);
    out << ',';
    box(s.left_eye_box);
    out << ',';
    box(s.right_eye_box);
    out << ',' << s.subset << '\n';
  }
}

}  // namespace fixtures
