#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "supergaze/detectors.hpp"
#include "supergaze/image.hpp"
#include "supergaze/superres.hpp"

namespace supergaze::prep {

constexpr int kHeadResolution = 224;
constexpr int kEyeResolution = 64;
constexpr int kTemporalWindow = 7;

/// Ordered list of center-crop sizes; every entry must be positive and
/// at most the base head resolution.
struct ScaleSchedule {
  std::vector<int> scales;

  /// {224, 200, 175, 150}
  static ScaleSchedule static_default();
  /// {224, 200, 175, 150, 175, 200, 224}: zoom in toward the central
  /// frame, zoom out after it.
  static ScaleSchedule temporal_default();

  void validate(int base_resolution = kHeadResolution) const;
  std::size_t size() const { return scales.size(); }
};

/// Where the enhancer runs in the pipeline.
enum class SrMode {
  kNone,          ///< no enhancement anywhere
  kHead,          ///< enhance head images, eyes cropped from originals
  kHeadEyeCrops,  ///< enhance head images, eyes cropped from the enhanced head
  kHeadAndEyes,   ///< enhance head images and each eye crop separately
};

SrMode parse_sr_mode(const std::string& s);
std::string to_string(SrMode m);

/// Run the detector; failures (including thrown ones) yield absent regions.
EyeRegions detect_eyes(const ImageTensor& head, const LandmarkDetector& detector,
                       const std::string& source_id = "");

/// Crop each present region to kEyeResolution squares; absent regions
/// produce all-zero (black) images. Returned as (left, right).
std::pair<ImageTensor, ImageTensor> crop_eyes(const ImageTensor& head,
                                              const EyeRegions& regions);

/// Enhance and resize to kHeadResolution regardless of the enhancer's
/// native upscale factor. Enhancer failures propagate as PipelineError
/// carrying source_id.
ImageTensor enhance(const ImageTensor& head, const SuperResolver& sr,
                    const std::string& source_id = "");

/// One output per scale: the central s x s patch resized back to the
/// base resolution; the base scale returns the input unchanged.
std::vector<ImageTensor> multiscale(const ImageTensor& head, const ScaleSchedule& schedule);

/// Apply the palindromic temporal schedule to exactly kTemporalWindow
/// frames, frame k scaled with schedule entry k.
std::vector<ImageTensor> temporal_schedule(const std::vector<ImageTensor>& frames);

/// Model-ready tensors for one frame.
struct FrameInputs {
  std::vector<ImageTensor> head_scales;
  ImageTensor left_eye;
  ImageTensor right_eye;
};

/// Model-ready tensors for a temporal window: scheduled head frames plus
/// per-frame (left, right) eye crops in frame order.
struct TemporalInputs {
  std::vector<ImageTensor> head_frames;
  std::vector<std::pair<ImageTensor, ImageTensor>> eyes;
};

/// Full input pipeline: eye detection on the original frame, enhancement
/// per SrMode, multiscale or temporal-zoom scaling.
class Preprocessor {
public:
  Preprocessor(SrMode mode, ScaleSchedule schedule,
               std::shared_ptr<const LandmarkDetector> detector,
               std::shared_ptr<const SuperResolver> sr);

  /// prior_regions, when given (stored annotations), bypass detection.
  FrameInputs static_inputs(const ImageTensor& head, const std::string& source_id = "",
                            const std::optional<EyeRegions>& prior_regions = std::nullopt) const;

  TemporalInputs temporal_inputs(
      const std::vector<ImageTensor>& frames, const std::vector<std::string>& source_ids = {},
      const std::vector<std::optional<EyeRegions>>& prior_regions = {}) const;

  SrMode sr_mode() const { return mode_; }
  const ScaleSchedule& schedule() const { return schedule_; }

private:
  /// Enhanced-or-plain head at base resolution, plus the eye pair for
  /// this frame under the active SrMode.
  FrameInputs frame_inputs(const ImageTensor& head, const std::string& source_id,
                           const std::optional<EyeRegions>& prior_regions,
                           ImageTensor* base_head_out) const;

  SrMode mode_;
  ScaleSchedule schedule_;
  std::shared_ptr<const LandmarkDetector> detector_;
  std::shared_ptr<const SuperResolver> sr_;
};

}  // namespace supergaze::prep
