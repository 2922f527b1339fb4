#include "supergaze/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "supergaze/errors.hpp"

namespace supergaze::ckpt {
namespace {

constexpr char kMagic[8] = {'S', 'G', 'Z', 'C', 'K', 'P', 'T', '\n'};
constexpr std::uint32_t kVersion = 1;

struct Header {
  nlohmann::json json;
  std::uint64_t payload_start = 0;
};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

Header read_header(std::ifstream& in, const std::filesystem::path& path) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw SchemaError("not a checkpoint file: " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || version != kVersion)
    throw SchemaError("unsupported checkpoint version in " + path.string());
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in) throw SchemaError("truncated checkpoint header: " + path.string());
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw SchemaError("truncated checkpoint header: " + path.string());
  Header h;
  h.json = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (h.json.is_discarded())
    throw SchemaError("malformed checkpoint header JSON in " + path.string());
  h.payload_start = sizeof kMagic + sizeof version + sizeof header_len + header_len;
  return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const nn::ParamRefs& params) {
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto* p : params) {
    tensors.push_back({{"name", p->name},
                       {"shape", p->value.shape()},
                       {"offset", offset},
                       {"count", p->value.size()}});
    offset += p->value.size() * sizeof(double);
  }
  nlohmann::json header = {{"version", kVersion}, {"config", config}, {"tensors", tensors}};
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError(path.string(), "cannot open checkpoint for writing");
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : params)
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  out.flush();
  if (!out) throw PipelineError(path.string(), "checkpoint write failed");
}

nlohmann::json load_checkpoint(const std::filesystem::path& path, const nn::ParamRefs& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint not found: " + path.string());
  Header h = read_header(in, path);

  struct Entry {
    std::vector<int> shape;
    std::uint64_t offset = 0;
    std::uint64_t count = 0;
  };
  std::map<std::string, Entry> index;
  for (const auto& t : h.json.at("tensors")) {
    Entry e;
    e.shape = t.at("shape").get<std::vector<int>>();
    e.offset = t.at("offset").get<std::uint64_t>();
    e.count = t.at("count").get<std::uint64_t>();
    index[t.at("name").get<std::string>()] = e;
  }
  if (index.size() != params.size())
    throw SchemaError("checkpoint holds " + std::to_string(index.size()) + " tensors, model has " +
                      std::to_string(params.size()));
  for (auto* p : params) {
    auto it = index.find(p->name);
    if (it == index.end()) throw SchemaError("checkpoint is missing tensor '" + p->name + "'");
    const Entry& e = it->second;
    if (e.shape != p->value.shape() || e.count != p->value.size())
      throw SchemaError("shape mismatch for tensor '" + p->name + "'");
    in.seekg(static_cast<std::streamoff>(h.payload_start + e.offset));
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(e.count * sizeof(double)));
    if (!in) throw SchemaError("truncated checkpoint payload for '" + p->name + "'");
  }
  return h.json.at("config");
}

std::vector<std::string> load_matching(const std::filesystem::path& path,
                                       const nn::ParamRefs& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint not found: " + path.string());
  Header h = read_header(in, path);

  std::map<std::string, const nlohmann::json*> index;
  for (const auto& t : h.json.at("tensors")) index[t.at("name").get<std::string>()] = &t;

  std::vector<std::string> loaded;
  for (auto* p : params) {
    auto it = index.find(p->name);
    if (it == index.end()) continue;
    const nlohmann::json& t = *it->second;
    if (t.at("shape").get<std::vector<int>>() != p->value.shape()) continue;
    in.seekg(static_cast<std::streamoff>(h.payload_start + t.at("offset").get<std::uint64_t>()));
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!in) throw SchemaError("truncated checkpoint payload for '" + p->name + "'");
    loaded.push_back(p->name);
  }
  return loaded;
}

nlohmann::json peek_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint not found: " + path.string());
  return read_header(in, path).json.at("config");
}

std::vector<TensorInfo> list_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint not found: " + path.string());
  Header h = read_header(in, path);
  std::vector<TensorInfo> out;
  for (const auto& t : h.json.at("tensors"))
    out.push_back({t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>()});
  return out;
}

}  // namespace supergaze::ckpt
