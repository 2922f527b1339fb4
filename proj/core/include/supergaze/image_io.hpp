#pragma once

#include <filesystem>

#include "supergaze/image.hpp"

namespace supergaze {

/// Decode an image file (PNG/JPEG/...) into RGB doubles in [0, 1].
/// 16-bit PNGs keep their full quantization. Throws PipelineError with
/// the path as the frame id when decoding fails.
ImageTensor load_image(const std::filesystem::path& path);

/// Write a lossless PNG. bit_depth is 8 or 16; 16 is the default so
/// cached enhanced images survive a round trip with negligible loss.
void save_png(const std::filesystem::path& path, const ImageTensor& img,
              int bit_depth = 16);

}  // namespace supergaze
