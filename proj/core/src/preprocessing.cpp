#include "supergaze/preprocessing.hpp"

#include <algorithm>

#include "supergaze/errors.hpp"

namespace supergaze::prep {

ScaleSchedule ScaleSchedule::static_default() { return {{224, 200, 175, 150}}; }

ScaleSchedule ScaleSchedule::temporal_default() {
  return {{224, 200, 175, 150, 175, 200, 224}};
}

void ScaleSchedule::validate(int base_resolution) const {
  if (scales.empty()) throw ConfigError("scale schedule must be nonempty");
  for (int s : scales) {
    if (s <= 0 || s > base_resolution) {
      throw ConfigError("scale " + std::to_string(s) + " outside (0, " +
                        std::to_string(base_resolution) + "]");
    }
  }
}

SrMode parse_sr_mode(const std::string& s) {
  if (s == "none") return SrMode::kNone;
  if (s == "head") return SrMode::kHead;
  if (s == "head-eyecrops" || s == "head_eyecrops") return SrMode::kHeadEyeCrops;
  if (s == "head-and-eyes" || s == "head_and_eyes") return SrMode::kHeadAndEyes;
  throw ConfigError("unknown sr mode '" + s +
                    "' (expected: none, head, head-eyecrops, head-and-eyes)");
}

std::string to_string(SrMode m) {
  switch (m) {
    case SrMode::kNone: return "none";
    case SrMode::kHead: return "head";
    case SrMode::kHeadEyeCrops: return "head-eyecrops";
    case SrMode::kHeadAndEyes: return "head-and-eyes";
  }
  return "none";
}

EyeRegions detect_eyes(const ImageTensor& head, const LandmarkDetector& detector,
                       const std::string& source_id) {
  try {
    const auto det = detector.detect(head, source_id);
    if (!det) return {};
    return det->eyes;
  } catch (const std::exception&) {
    return {};
  }
}

namespace {

ImageTensor crop_one_eye(const ImageTensor& head, const std::optional<PixelBox>& region) {
  if (!region || !region->positive_area()) {
    return ImageTensor(kEyeResolution, kEyeResolution);
  }
  return crop_resize(head, *region, kEyeResolution, kEyeResolution);
}

PixelBox scale_box(const PixelBox& b, double fx, double fy) {
  return {b.x0 * fx, b.y0 * fy, b.x1 * fx, b.y1 * fy};
}

}  // namespace

std::pair<ImageTensor, ImageTensor> crop_eyes(const ImageTensor& head,
                                              const EyeRegions& regions) {
  return {crop_one_eye(head, regions.left), crop_one_eye(head, regions.right)};
}

ImageTensor enhance(const ImageTensor& head, const SuperResolver& sr,
                    const std::string& source_id) {
  ImageTensor enhanced;
  try {
    enhanced = sr.enhance(head, source_id);
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(source_id, std::string("enhancer '") + sr.name() +
                                       "' failed: " + e.what());
  }
  if (enhanced.empty()) {
    throw PipelineError(source_id, "enhancer '" + sr.name() + "' returned an empty image");
  }
  return resize_bilinear(enhanced, kHeadResolution, kHeadResolution);
}

std::vector<ImageTensor> multiscale(const ImageTensor& head, const ScaleSchedule& schedule) {
  if (head.height() != kHeadResolution || head.width() != kHeadResolution) {
    throw ConfigError("multiscale expects a " + std::to_string(kHeadResolution) +
                      " square head image");
  }
  schedule.validate(kHeadResolution);

  std::vector<ImageTensor> out;
  out.reserve(schedule.size());
  for (int s : schedule.scales) {
    if (s == kHeadResolution) {
      out.push_back(head);
    } else {
      out.push_back(resize_bilinear(center_crop(head, s), kHeadResolution, kHeadResolution));
    }
  }
  return out;
}

std::vector<ImageTensor> temporal_schedule(const std::vector<ImageTensor>& frames) {
  const ScaleSchedule schedule = ScaleSchedule::temporal_default();
  if (frames.size() != schedule.size()) {
    throw ConfigError("temporal schedule expects exactly " +
                      std::to_string(schedule.size()) + " frames, got " +
                      std::to_string(frames.size()));
  }
  std::vector<ImageTensor> out;
  out.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    ScaleSchedule one{{schedule.scales[k]}};
    out.push_back(multiscale(frames[k], one).front());
  }
  return out;
}

Preprocessor::Preprocessor(SrMode mode, ScaleSchedule schedule,
                           std::shared_ptr<const LandmarkDetector> detector,
                           std::shared_ptr<const SuperResolver> sr)
    : mode_(mode), schedule_(std::move(schedule)), detector_(std::move(detector)),
      sr_(std::move(sr)) {
  schedule_.validate(kHeadResolution);
  if (!detector_) throw ConfigError("preprocessor needs a landmark detector");
  if (!sr_) throw ConfigError("preprocessor needs an enhancer");
}

FrameInputs Preprocessor::frame_inputs(const ImageTensor& head, const std::string& source_id,
                                       const std::optional<EyeRegions>& prior_regions,
                                       ImageTensor* base_head_out) const {
  if (head.empty()) throw PipelineError(source_id, "empty head image");

  const EyeRegions regions =
      prior_regions ? *prior_regions : detect_eyes(head, *detector_, source_id);

  // Base head at working resolution; bilinear when no enhancer is active.
  ImageTensor base;
  if (mode_ == SrMode::kNone) {
    base = resize_bilinear(head, kHeadResolution, kHeadResolution);
  } else {
    base = enhance(head, *sr_, source_id);
  }

  FrameInputs out;
  switch (mode_) {
    case SrMode::kNone:
    case SrMode::kHead: {
      auto eyes = crop_eyes(head, regions);
      out.left_eye = std::move(eyes.first);
      out.right_eye = std::move(eyes.second);
      break;
    }
    case SrMode::kHeadEyeCrops: {
      // Regions were found on the original frame; remap them onto the
      // enhanced base image before cropping.
      const double fx = static_cast<double>(kHeadResolution) / head.width();
      const double fy = static_cast<double>(kHeadResolution) / head.height();
      EyeRegions scaled;
      if (regions.left) scaled.left = scale_box(*regions.left, fx, fy);
      if (regions.right) scaled.right = scale_box(*regions.right, fx, fy);
      auto eyes = crop_eyes(base, scaled);
      out.left_eye = std::move(eyes.first);
      out.right_eye = std::move(eyes.second);
      break;
    }
    case SrMode::kHeadAndEyes: {
      auto enhance_eye = [&](const std::optional<PixelBox>& region,
                             const char* side) -> ImageTensor {
        if (!region || !region->positive_area()) {
          return ImageTensor(kEyeResolution, kEyeResolution);
        }
        const int x0 = static_cast<int>(std::floor(region->x0));
        const int y0 = static_cast<int>(std::floor(region->y0));
        const int x1 = static_cast<int>(std::ceil(region->x1));
        const int y1 = static_cast<int>(std::ceil(region->y1));
        ImageTensor patch = crop(head, x0, y0, x1 - x0, y1 - y0);
        ImageTensor enhanced;
        try {
          enhanced = sr_->enhance(patch, source_id.empty() ? "" : source_id + ":" + side);
        } catch (const std::exception& e) {
          throw PipelineError(source_id, std::string("eye enhancer failed: ") + e.what());
        }
        return resize_bilinear(enhanced, kEyeResolution, kEyeResolution);
      };
      out.left_eye = enhance_eye(regions.left, "left");
      out.right_eye = enhance_eye(regions.right, "right");
      break;
    }
  }

  if (base_head_out) *base_head_out = std::move(base);
  return out;
}

FrameInputs Preprocessor::static_inputs(const ImageTensor& head, const std::string& source_id,
                                        const std::optional<EyeRegions>& prior_regions) const {
  ImageTensor base;
  FrameInputs out = frame_inputs(head, source_id, prior_regions, &base);
  out.head_scales = multiscale(base, schedule_);
  return out;
}

TemporalInputs Preprocessor::temporal_inputs(
    const std::vector<ImageTensor>& frames, const std::vector<std::string>& source_ids,
    const std::vector<std::optional<EyeRegions>>& prior_regions) const {
  if (frames.size() != static_cast<std::size_t>(kTemporalWindow)) {
    throw ConfigError("temporal input expects exactly " + std::to_string(kTemporalWindow) +
                      " frames, got " + std::to_string(frames.size()));
  }
  if (schedule_.size() != frames.size()) {
    throw ConfigError("temporal schedule length must match the frame count");
  }

  TemporalInputs out;
  std::vector<ImageTensor> bases(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string id = k < source_ids.size() ? source_ids[k] : "";
    const std::optional<EyeRegions> prior =
        k < prior_regions.size() ? prior_regions[k] : std::nullopt;
    FrameInputs fi = frame_inputs(frames[k], id, prior, &bases[k]);
    out.eyes.emplace_back(std::move(fi.left_eye), std::move(fi.right_eye));
  }
  for (std::size_t k = 0; k < frames.size(); ++k) {
    ScaleSchedule one{{schedule_.scales[k]}};
    out.head_frames.push_back(multiscale(bases[k], one).front());
  }
  return out;
}

}  // namespace supergaze::prep
