#include "supergaze/superres.hpp"

#include "supergaze/errors.hpp"
#include "supergaze/image_io.hpp"

namespace supergaze::prep {

std::filesystem::path SrCache::cache_path(const std::string& source_id) const {
  return cache_root_ / (source_id + ".sr.png");
}

bool SrCache::contains(const std::string& source_id) const {
  return std::filesystem::exists(cache_path(source_id));
}

ImageTensor SrCache::load(const std::string& source_id) const {
  return load_image(cache_path(source_id));
}

void SrCache::store(const std::string& source_id, const ImageTensor& img) const {
  save_png(cache_path(source_id), img, 16);
}

ImageTensor CachedSuperResolver::enhance(const ImageTensor& img,
                                         const std::string& source_id) const {
  if (!source_id.empty() && cache_.contains(source_id)) {
    return cache_.load(source_id);
  }
  ImageTensor enhanced = inner_->enhance(img, source_id);
  if (write_on_miss_ && !source_id.empty()) {
    cache_.store(source_id, enhanced);
  }
  return enhanced;
}

void build_sr_cache(const std::vector<std::string>& source_ids, const SuperResolver& sr,
                    const SrCache& cache) {
  for (const auto& id : source_ids) {
    if (cache.contains(id)) continue;
    const ImageTensor src = load_image(cache.source_root() / id);
    cache.store(id, sr.enhance(src, id));
  }
}

std::shared_ptr<SuperResolver> make_super_resolver(const std::string& spec,
                                                   const std::filesystem::path& source_root) {
  if (spec == "identity") return std::make_shared<IdentitySuperResolver>();
  if (spec == "bicubic") return std::make_shared<BicubicSuperResolver>();
  if (spec.rfind("cached:", 0) == 0) {
    const std::string root = spec.substr(7);
    if (root.empty()) throw ConfigError("cached enhancer needs a cache root: cached:<dir>");
    return std::make_shared<CachedSuperResolver>(std::make_shared<BicubicSuperResolver>(),
                                                 SrCache(source_root, root));
  }
  throw ConfigError("unknown enhancer '" + spec +
                    "' (expected: identity, bicubic, cached:<dir>)");
}

}  // namespace supergaze::prep
