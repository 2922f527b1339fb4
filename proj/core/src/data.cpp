#include "supergaze/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "supergaze/errors.hpp"
#include "supergaze/image_io.hpp"
#include "supergaze/preprocessing.hpp"

namespace supergaze::data {
namespace {

constexpr const char* kSchemaName = "supergaze-annotations";
constexpr int kSchemaVersion = 1;

bool known_subset(const std::string& s) { return s == "train" || s == "val" || s == "test"; }

nlohmann::json box_to_json(const std::optional<NormBox>& b) {
  if (!b) return nullptr;
  return nlohmann::json::array({b->x0, b->y0, b->x1, b->y1});
}

std::optional<NormBox> box_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 4 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number() || !j[3].is_number())
    throw SchemaError("box must be [x0, y0, x1, y1]");
  return NormBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

/// Semantic validation shared by every loader; returns a reason string
/// when the record must be skipped, and normalizes the gaze in place.
std::optional<std::string> sanitize(GazeSample& s) {
  if (!known_subset(s.subset)) return "unknown subset '" + s.subset + "'";
  const double n = s.gaze.norm();
  if (!(n > 0.0) || !std::isfinite(n)) return "gaze vector has no direction";
  s.gaze = s.gaze.normalized();
  for (const auto* box : {&s.face_box, &s.left_eye_box, &s.right_eye_box}) {
    if (!*box) continue;
    if (!(*box)->positive_area()) return "box without positive area";
    if (!(*box)->inside_unit()) return "box outside the unit square";
  }
  return std::nullopt;
}

void warn(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

[[noreturn]] void schema_failure(const std::filesystem::path& path,
                                 const std::vector<std::string>& offenders) {
  std::string msg = "malformed annotations in " + path.string() + ":";
  for (const auto& o : offenders) msg += "\n  " + o;
  throw SchemaError(msg);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read annotations: " + path.string());
  return in;
}

}  // namespace

// ---------------------------------------------------------------- intervals

ValidIntervals ValidIntervals::published_defaults() {
  ValidIntervals v;
  v.train = {{0.29, 0.74}, {0.39, 0.69}};
  v.val = {{0.30, 0.72}, {0.41, 0.61}};
  v.test = {{0.31, 0.74}, {0.40, 0.63}};
  return v;
}

namespace {

Interval interval_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SchemaError("interval " + where + " must be [lo, hi]");
  Interval iv{j[0].get<double>(), j[1].get<double>()};
  if (!(iv.lo >= 0.0 && iv.lo < iv.hi && iv.hi <= 1.0))
    throw SchemaError("interval " + where + " must satisfy 0 <= lo < hi <= 1");
  return iv;
}

SubsetIntervals subset_from_json(const nlohmann::json& j, const std::string& subset) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y"))
    throw SchemaError("intervals for '" + subset + "' must hold x and y");
  return {interval_from_json(j.at("x"), subset + ".x"),
          interval_from_json(j.at("y"), subset + ".y")};
}

}  // namespace

ValidIntervals ValidIntervals::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("intervals file must hold a JSON object");
  ValidIntervals v;
  v.train = subset_from_json(j.value("train", nlohmann::json()), "train");
  v.val = subset_from_json(j.value("val", nlohmann::json()), "val");
  v.test = subset_from_json(j.value("test", nlohmann::json()), "test");
  return v;
}

ValidIntervals ValidIntervals::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read intervals file: " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw SchemaError("intervals file is not valid JSON: " + path.string());
  return from_json(j);
}

nlohmann::json ValidIntervals::to_json() const {
  auto sub = [](const SubsetIntervals& s) {
    return nlohmann::json{{"x", {s.x.lo, s.x.hi}}, {"y", {s.y.lo, s.y.hi}}};
  };
  return {{"train", sub(train)}, {"val", sub(val)}, {"test", sub(test)}};
}

const SubsetIntervals& ValidIntervals::for_subset(const std::string& subset) const {
  if (subset == "train") return train;
  if (subset == "val") return val;
  if (subset == "test") return test;
  throw ConfigError("no valid intervals configured for subset '" + subset + "'");
}

// ------------------------------------------------------------------- report

RectificationReport::Counts RectificationReport::totals() const {
  Counts t;
  for (const auto& [subset, c] : per_subset) {
    t.inspected += c.inspected;
    t.valid += c.valid;
    t.invalid += c.invalid;
    t.redetected += c.redetected;
    t.discarded += c.discarded;
  }
  return t;
}

nlohmann::json RectificationReport::to_json() const {
  auto counts = [](const Counts& c) {
    return nlohmann::json{{"inspected", c.inspected},
                          {"valid", c.valid},
                          {"invalid", c.invalid},
                          {"redetected", c.redetected},
                          {"discarded", c.discarded}};
  };
  nlohmann::json per;
  for (const auto& [subset, c] : per_subset) per[subset] = counts(c);
  return {{"per_subset", per},
          {"totals", counts(totals())},
          {"rectified_frames", rectified_frames},
          {"warnings", warnings}};
}

// -------------------------------------------------------------------- jsonl

std::vector<GazeSample> load_jsonl(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings) {
  std::ifstream in = open_or_throw(path);
  std::vector<GazeSample> out;
  std::vector<std::string> offenders;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      offenders.push_back("line " + std::to_string(line_no) + ": not a JSON object");
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (j.value("schema", "") != kSchemaName || j.value("version", -1) != kSchemaVersion)
        schema_failure(path, {"line " + std::to_string(line_no) +
                              ": missing or unsupported header (expected schema '" +
                              std::string(kSchemaName) + "', version " +
                              std::to_string(kSchemaVersion) + ")"});
      continue;
    }
    try {
      GazeSample s;
      if (!j.contains("image_path") || !j.at("image_path").is_string())
        throw SchemaError("missing image_path");
      s.image_path = j.at("image_path").get<std::string>();
      s.subject_id = j.value("subject_id", "");
      s.sequence_id = j.value("sequence_id", "");
      s.frame_index = j.value("frame_index", 0);
      if (!j.contains("gaze") || !j.at("gaze").is_array() || j.at("gaze").size() != 3)
        throw SchemaError("gaze must be a 3-vector");
      s.gaze = {j.at("gaze")[0].get<double>(), j.at("gaze")[1].get<double>(),
                j.at("gaze")[2].get<double>()};
      s.face_box = box_from_json(j.value("face_box", nlohmann::json()));
      s.left_eye_box = box_from_json(j.value("left_eye_box", nlohmann::json()));
      s.right_eye_box = box_from_json(j.value("right_eye_box", nlohmann::json()));
      if (!j.contains("subset") || !j.at("subset").is_string())
        throw SchemaError("missing subset");
      s.subset = j.at("subset").get<std::string>();
      if (auto why = sanitize(s)) {
        warn(warnings, path.string() + " line " + std::to_string(line_no) + " skipped: " + *why);
        continue;
      }
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      offenders.push_back("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      offenders.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!offenders.empty()) schema_failure(path, offenders);
  return out;
}

void save_jsonl(const std::filesystem::path& path, const std::vector<GazeSample>& samples) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError(path.string(), "cannot open annotations for writing");
  out << nlohmann::json{{"schema", kSchemaName}, {"version", kSchemaVersion}}.dump() << '\n';
  for (const auto& s : samples) {
    nlohmann::json j{{"image_path", s.image_path},
                     {"subject_id", s.subject_id},
                     {"sequence_id", s.sequence_id},
                     {"frame_index", s.frame_index},
                     {"gaze", {s.gaze.x, s.gaze.y, s.gaze.z}},
                     {"subset", s.subset}};
    if (s.face_box) j["face_box"] = box_to_json(s.face_box);
    if (s.left_eye_box) j["left_eye_box"] = box_to_json(s.left_eye_box);
    if (s.right_eye_box) j["right_eye_box"] = box_to_json(s.right_eye_box);
    out << j.dump() << '\n';
  }
  out.flush();
  if (!out) throw PipelineError(path.string(), "annotation write failed");
}

// ---------------------------------------------------------------------- csv

namespace {

/// Shared CSV reader. Columns:
/// image_path, subject_id, sequence_id, frame_index, gaze_x, gaze_y,
/// gaze_z, face_x0..face_y1, left_x0..left_y1, right_x0..right_y1, subset
/// (20 columns; the four cells of an absent box are left empty). A header
/// line starting with "image_path" is permitted and skipped.
std::vector<GazeSample> load_csv(const std::filesystem::path& path,
                                 const std::function<codec::GazeVector(double, double, double)>&
                                     convert,
                                 std::vector<std::string>* warnings) {
  std::ifstream in = open_or_throw(path);
  std::vector<GazeSample> out;
  std::vector<std::string> offenders;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("image_path", 0) == 0) continue;

    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != 20) {
      offenders.push_back("line " + std::to_string(line_no) + ": expected 20 columns, got " +
                          std::to_string(cells.size()));
      continue;
    }

    bool bad = false;
    auto num = [&](const std::string& c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (...) {
        used = 0;
      }
      if (used != c.size() || c.empty()) bad = true;
      return v;
    };
    auto box = [&](int base) -> std::optional<NormBox> {
      const bool all_empty = cells[base].empty() && cells[base + 1].empty() &&
                             cells[base + 2].empty() && cells[base + 3].empty();
      if (all_empty) return std::nullopt;
      return NormBox{num(cells[base]), num(cells[base + 1]), num(cells[base + 2]),
                     num(cells[base + 3])};
    };

    GazeSample s;
    s.image_path = cells[0];
    s.subject_id = cells[1];
    s.sequence_id = cells[2];
    s.frame_index = static_cast<int>(num(cells[3]));
    const double gx = num(cells[4]), gy = num(cells[5]), gz = num(cells[6]);
    s.face_box = box(7);
    s.left_eye_box = box(11);
    s.right_eye_box = box(15);
    s.subset = cells[19];
    if (bad || s.image_path.empty()) {
      offenders.push_back("line " + std::to_string(line_no) + ": non-numeric or missing field");
      continue;
    }
    s.gaze = convert(gx, gy, gz);
    if (auto why = sanitize(s)) {
      warn(warnings, path.string() + " line " + std::to_string(line_no) + " skipped: " + *why);
      continue;
    }
    out.push_back(std::move(s));
  }
  if (!offenders.empty()) schema_failure(path, offenders);
  return out;
}

}  // namespace

std::vector<GazeSample> load_gaze360_csv(const std::filesystem::path& path,
                                         std::vector<std::string>* warnings) {
  return load_csv(
      path, [](double x, double y, double z) { return codec::GazeVector{-x, -y, -z}; }, warnings);
}

std::vector<GazeSample> load_gfie_csv(const std::filesystem::path& path,
                                      std::vector<std::string>* warnings) {
  return load_csv(
      path, [](double x, double y, double z) { return codec::GazeVector{x, -y, z}; }, warnings);
}

std::vector<GazeSample> load_dataset(const std::filesystem::path& root, const std::string& format,
                                     std::vector<std::string>* warnings) {
  std::filesystem::path file = root;
  if (std::filesystem::is_directory(root))
    file = root / (format == "jsonl" ? "annotations.jsonl" : "annotations.csv");
  if (format == "jsonl") return load_jsonl(file, warnings);
  if (format == "gaze360") return load_gaze360_csv(file, warnings);
  if (format == "gfie") return load_gfie_csv(file, warnings);
  throw ConfigError("unknown dataset format '" + format + "'");
}

// ------------------------------------------------------------ rectification

std::vector<std::pair<double, double>> face_center_distribution(
    const std::vector<GazeSample>& samples) {
  std::vector<std::pair<double, double>> centers;
  for (const auto& s : samples)
    if (s.face_box) centers.emplace_back(s.face_box->center_x(), s.face_box->center_y());
  return centers;
}

bool classify_validity(double cx, double cy, const ValidIntervals& intervals,
                       const std::string& subset) {
  const SubsetIntervals& iv = intervals.for_subset(subset);
  return iv.x.contains(cx) && iv.y.contains(cy);
}

namespace {

std::optional<NormBox> clamp_unit_box(NormBox b) {
  b.x0 = std::clamp(b.x0, 0.0, 1.0);
  b.y0 = std::clamp(b.y0, 0.0, 1.0);
  b.x1 = std::clamp(b.x1, 0.0, 1.0);
  b.y1 = std::clamp(b.y1, 0.0, 1.0);
  if (!b.positive_area()) return std::nullopt;
  return b;
}

}  // namespace

std::pair<std::vector<GazeSample>, RectificationReport> rectify(
    const std::vector<GazeSample>& samples, const ValidIntervals& intervals,
    const prep::LandmarkDetector& detector,
    const std::function<ImageTensor(const GazeSample&)>& frame_loader) {
  std::vector<GazeSample> out = samples;
  RectificationReport report;
  for (auto& s : out) {
    if (!s.face_box) continue;  // boxless samples are not inspected
    auto& counts = report.per_subset[s.subset];
    ++counts.inspected;
    if (classify_validity(s.face_box->center_x(), s.face_box->center_y(), intervals, s.subset)) {
      ++counts.valid;
      continue;
    }
    ++counts.invalid;
    s.face_box.reset();
    s.left_eye_box.reset();
    s.right_eye_box.reset();
    try {
      const ImageTensor frame = frame_loader(s);
      const auto det = detector.detect(frame, s.image_path);
      if (det) {
        const auto face =
            clamp_unit_box(NormBox::from_pixels(det->face, frame.width(), frame.height()));
        if (face && classify_validity(face->center_x(), face->center_y(), intervals, s.subset)) {
          s.face_box = face;
          if (det->eyes.left)
            s.left_eye_box =
                clamp_unit_box(NormBox::from_pixels(*det->eyes.left, frame.width(), frame.height()));
          if (det->eyes.right)
            s.right_eye_box = clamp_unit_box(
                NormBox::from_pixels(*det->eyes.right, frame.width(), frame.height()));
          ++counts.redetected;
          report.rectified_frames.push_back(s.image_path);
          continue;
        }
      }
      ++counts.discarded;
    } catch (const std::exception& e) {
      ++counts.discarded;
      report.warnings.push_back("detection failed on " + s.image_path + ": " + e.what());
    }
  }
  return {std::move(out), std::move(report)};
}

std::function<ImageTensor(const GazeSample&)> disk_frame_loader(
    const std::filesystem::path& root) {
  return [root](const GazeSample& s) {
    std::filesystem::path p(s.image_path);
    if (p.is_relative()) p = root / p;
    return load_image(p);
  };
}

// ----------------------------------------------------------------- windows

std::vector<TemporalWindow> temporal_windows(const std::vector<GazeSample>& samples) {
  std::map<std::string, std::vector<std::size_t>> sequences;
  for (std::size_t i = 0; i < samples.size(); ++i)
    sequences[samples[i].sequence_id].push_back(i);

  const std::size_t window = static_cast<std::size_t>(prep::kTemporalWindow);
  std::vector<TemporalWindow> out;
  for (auto& [seq, idx] : sequences) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return samples[a].frame_index < samples[b].frame_index;
    });
    std::size_t run_start = 0;
    for (std::size_t k = 1; k <= idx.size(); ++k) {
      const bool run_breaks =
          k == idx.size() ||
          samples[idx[k]].frame_index != samples[idx[k - 1]].frame_index + 1;
      if (!run_breaks) continue;
      if (k - run_start >= window) {
        for (std::size_t s = run_start; s + window <= k; ++s) {
          TemporalWindow w;
          w.frame_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(s),
                                 idx.begin() + static_cast<std::ptrdiff_t>(s + window));
          w.label_index = idx[s + window / 2];
          out.push_back(std::move(w));
        }
      }
      run_start = k;
    }
  }
  return out;
}

}  // namespace supergaze::data
