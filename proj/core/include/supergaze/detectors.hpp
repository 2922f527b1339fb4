#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "supergaze/image.hpp"

namespace supergaze::prep {

/// Eye bounding boxes in image pixel coordinates. Either side may be
/// absent (undetected); absent eyes become zero-filled crops downstream.
struct EyeRegions {
  std::optional<PixelBox> left;
  std::optional<PixelBox> right;
};

/// One face localization: the face box plus eye boxes derived from the
/// detector's landmarks.
struct FaceDetection {
  PixelBox face;
  EyeRegions eyes;
};

/// Pluggable face/eye landmark detector. source_id identifies the frame
/// (usually its image path); detectors that work from stored annotations
/// key on it, image-driven detectors ignore it.
class LandmarkDetector {
public:
  virtual ~LandmarkDetector() = default;
  virtual std::optional<FaceDetection> detect(const ImageTensor& img,
                                              const std::string& source_id) const = 0;
  virtual std::string name() const = 0;
};

/// Detects nothing, ever.
class NullDetector : public LandmarkDetector {
public:
  std::optional<FaceDetection> detect(const ImageTensor&,
                                      const std::string&) const override {
    return std::nullopt;
  }
  std::string name() const override { return "null"; }
};

/// Color-signature detector for synthetic frames: the face is the
/// bounding box of bright yellow pixels (r, g high, b low), eyes are
/// blue dots inside it, split left/right of the face center.
///
/// This stands in for an external landmark model in tests and synthetic
/// rectification runs; real detectors plug in behind LandmarkDetector.
class BlobFaceDetector : public LandmarkDetector {
public:
  std::optional<FaceDetection> detect(const ImageTensor& img,
                                      const std::string& source_id) const override;
  std::string name() const override { return "blob"; }
};

/// Replays stored per-frame detections keyed by source id.
class AnnotationDetector : public LandmarkDetector {
public:
  explicit AnnotationDetector(std::map<std::string, FaceDetection> table)
      : table_(std::move(table)) {}

  std::optional<FaceDetection> detect(const ImageTensor&,
                                      const std::string& source_id) const override {
    auto it = table_.find(source_id);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  std::string name() const override { return "annotations"; }

private:
  std::map<std::string, FaceDetection> table_;
};

/// Factory for the run-configuration detector names: "null", "blob".
std::unique_ptr<LandmarkDetector> make_detector(const std::string& name);

}  // namespace supergaze::prep
