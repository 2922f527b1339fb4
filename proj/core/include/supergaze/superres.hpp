#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "supergaze/image.hpp"

namespace supergaze::prep {

/// Pluggable image enhancer. Implementations may upscale by any native
/// factor; callers resize the result to the resolution they need.
/// source_id identifies the frame for cache-backed adapters.
class SuperResolver {
public:
  virtual ~SuperResolver() = default;
  virtual ImageTensor enhance(const ImageTensor& img, const std::string& source_id) const = 0;
  virtual std::string name() const = 0;
};

/// Passthrough enhancer.
class IdentitySuperResolver : public SuperResolver {
public:
  ImageTensor enhance(const ImageTensor& img, const std::string&) const override {
    return img;
  }
  std::string name() const override { return "identity"; }
};

/// Bicubic x4 reference enhancer.
class BicubicSuperResolver : public SuperResolver {
public:
  explicit BicubicSuperResolver(int factor = 4) : factor_(factor) {}

  ImageTensor enhance(const ImageTensor& img, const std::string&) const override {
    return resize_bicubic(img, img.height() * factor_, img.width() * factor_);
  }
  std::string name() const override { return "bicubic"; }

private:
  int factor_;
};

/// Mirrored-tree store of enhanced images: source <root>/<rel> maps to
/// <cache_root>/<rel>.sr.png, written as lossless 16-bit PNG.
class SrCache {
public:
  SrCache(std::filesystem::path source_root, std::filesystem::path cache_root)
      : source_root_(std::move(source_root)), cache_root_(std::move(cache_root)) {}

  std::filesystem::path cache_path(const std::string& source_id) const;
  bool contains(const std::string& source_id) const;
  ImageTensor load(const std::string& source_id) const;
  void store(const std::string& source_id, const ImageTensor& img) const;

  const std::filesystem::path& source_root() const { return source_root_; }
  const std::filesystem::path& cache_root() const { return cache_root_; }

private:
  std::filesystem::path source_root_;
  std::filesystem::path cache_root_;
};

/// Serves enhanced images from an SrCache, falling back to the wrapped
/// enhancer on a miss (and writing the result back when allowed). The
/// store is single-writer: prefill it offline with build_sr_cache for
/// parallel runs.
class CachedSuperResolver : public SuperResolver {
public:
  CachedSuperResolver(std::shared_ptr<SuperResolver> inner, SrCache cache,
                      bool write_on_miss = true)
      : inner_(std::move(inner)), cache_(std::move(cache)), write_on_miss_(write_on_miss) {}

  ImageTensor enhance(const ImageTensor& img, const std::string& source_id) const override;
  std::string name() const override { return "cached:" + inner_->name(); }

private:
  std::shared_ptr<SuperResolver> inner_;
  SrCache cache_;
  bool write_on_miss_;
};

/// Offline cache prefill: enhance every listed source image (paths
/// relative to the cache's source root) and store the results.
void build_sr_cache(const std::vector<std::string>& source_ids, const SuperResolver& sr,
                    const SrCache& cache);

/// Factory for run-configuration enhancer names: "identity", "bicubic",
/// or "cached:<cache_root>" (bicubic behind a cache rooted at source_root).
std::shared_ptr<SuperResolver> make_super_resolver(const std::string& spec,
                                                   const std::filesystem::path& source_root);

}  // namespace supergaze::prep
