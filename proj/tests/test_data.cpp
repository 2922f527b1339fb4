#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "supergaze/data.hpp"
#include "supergaze/errors.hpp"
#include "support/fixtures.hpp"

using namespace supergaze;
namespace fs = std::filesystem;

namespace {

data::GazeSample sample(const std::string& path, double yaw_deg, double pitch_deg,
                        const std::string& subset, std::optional<NormBox> face = std::nullopt) {
  data::GazeSample s;
  s.image_path = path;
  s.subject_id = "s1";
  s.sequence_id = "q1";
  s.frame_index = 0;
  s.gaze = codec::angles_to_vector({codec::deg_to_rad(yaw_deg), codec::deg_to_rad(pitch_deg)});
  s.subset = subset;
  s.face_box = face;
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("jsonl round trip preserves every field and leads with the header") {
  const fs::path dir = fixtures::temp_dir("jsonl");
  std::vector<data::GazeSample> samples;
  samples.push_back(sample("a.png", 30, -5, "train", NormBox{0.2, 0.3, 0.5, 0.6}));
  samples.back().left_eye_box = NormBox{0.25, 0.35, 0.30, 0.40};
  samples.back().frame_index = 17;
  samples.push_back(sample("b.png", -120, 20, "test"));  // boxless

  data::save_jsonl(dir / "ann.jsonl", samples);

  std::ifstream raw(dir / "ann.jsonl");
  std::string first_line;
  std::getline(raw, first_line);
  const auto header = nlohmann::json::parse(first_line);
  CHECK(header.at("schema") == "supergaze-annotations");
  CHECK(header.at("version") == 1);

  std::vector<std::string> warnings;
  const auto loaded = data::load_jsonl(dir / "ann.jsonl", &warnings);
  CHECK(warnings.empty());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].image_path == "a.png");
  CHECK(loaded[0].frame_index == 17);
  CHECK(loaded[0].subset == "train");
  REQUIRE(loaded[0].face_box.has_value());
  CHECK(loaded[0].face_box->x0 == doctest::Approx(0.2));
  REQUIRE(loaded[0].left_eye_box.has_value());
  CHECK_FALSE(loaded[0].right_eye_box.has_value());
  CHECK(loaded[0].gaze.x == doctest::Approx(samples[0].gaze.x).epsilon(1e-12));
  CHECK(loaded[1].image_path == "b.png");
  CHECK_FALSE(loaded[1].face_box.has_value());

  fs::remove_all(dir);
}

TEST_CASE("jsonl structural failures are schema errors, missing files config errors") {
  const fs::path dir = fixtures::temp_dir("jsonl-bad");

  CHECK_THROWS_AS(data::load_jsonl(dir / "absent.jsonl"), ConfigError);

  // First line must be the header object.
  write_text(dir / "noheader.jsonl",
             R"({"image_path":"a.png","gaze":[0,0,1],"subset":"train"})" "\n");
  CHECK_THROWS_AS(data::load_jsonl(dir / "noheader.jsonl"), SchemaError);

  // Wrong schema version is rejected up front.
  write_text(dir / "badver.jsonl",
             R"({"schema":"supergaze-annotations","version":9})" "\n");
  CHECK_THROWS_AS(data::load_jsonl(dir / "badver.jsonl"), SchemaError);

  // Structural offenders after the header: unparseable line, missing
  // required keys, malformed box.
  const std::string header = R"({"schema":"supergaze-annotations","version":1})" "\n";
  write_text(dir / "garbled.jsonl", header + "this is not json\n");
  CHECK_THROWS_AS(data::load_jsonl(dir / "garbled.jsonl"), SchemaError);

  write_text(dir / "nokeys.jsonl", header + R"({"subject_id":"x"})" "\n");
  CHECK_THROWS_AS(data::load_jsonl(dir / "nokeys.jsonl"), SchemaError);

  write_text(dir / "badbox.jsonl",
             header +
                 R"({"image_path":"a.png","gaze":[0,0,1],"subset":"train","face_box":[0.1,0.2]})"
                 "\n");
  CHECK_THROWS_AS(data::load_jsonl(dir / "badbox.jsonl"), SchemaError);

  try {
    data::load_jsonl(dir / "garbled.jsonl");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  fs::remove_all(dir);
}

TEST_CASE("semantically invalid records are skipped with warnings, not fatal") {
  const fs::path dir = fixtures::temp_dir("jsonl-semantic");
  const std::string header = R"({"schema":"supergaze-annotations","version":1})" "\n";
  write_text(dir / "ann.jsonl",
             header +
                 // fine
                 R"({"image_path":"ok.png","gaze":[0,0,1],"subset":"train"})" "\n" +
                 // zero gaze vector: no direction
                 R"({"image_path":"zero.png","gaze":[0,0,0],"subset":"train"})" "\n" +
                 // unknown subset
                 R"({"image_path":"sub.png","gaze":[0,0,1],"subset":"holdout"})" "\n" +
                 // empty-area box
                 R"({"image_path":"area.png","gaze":[0,0,1],"subset":"val","face_box":[0.5,0.5,0.5,0.9]})" "\n" +
                 // box escaping the unit square
                 R"({"image_path":"unit.png","gaze":[0,0,1],"subset":"val","face_box":[0.5,0.5,1.2,0.9]})" "\n");

  std::vector<std::string> warnings;
  const auto loaded = data::load_jsonl(dir / "ann.jsonl", &warnings);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].image_path == "ok.png");
  CHECK(warnings.size() == 4);

  // Non-unit gaze is normalized on load.
  write_text(dir / "norm.jsonl",
             header + R"({"image_path":"n.png","gaze":[0,0,4],"subset":"train"})" "\n");
  const auto n = data::load_jsonl(dir / "norm.jsonl");
  REQUIRE(n.size() == 1);
  CHECK(n[0].gaze.z == doctest::Approx(1.0).epsilon(1e-12));

  fs::remove_all(dir);
}

TEST_CASE("mirrored-axes csv loads back into the internal convention") {
  const fs::path dir = fixtures::temp_dir("csv360");
  std::vector<data::GazeSample> samples;
  samples.push_back(sample("a.png", 160, 10, "train", NormBox{0.1, 0.2, 0.4, 0.5}));
  samples.push_back(sample("b.png", -45, -25, "test"));
  fixtures::write_gaze360_csv(dir / "ann.csv", samples);

  const auto loaded = data::load_gaze360_csv(dir / "ann.csv");
  REQUIRE(loaded.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loaded[i].gaze.x == doctest::Approx(samples[i].gaze.x).epsilon(1e-9));
    CHECK(loaded[i].gaze.y == doctest::Approx(samples[i].gaze.y).epsilon(1e-9));
    CHECK(loaded[i].gaze.z == doctest::Approx(samples[i].gaze.z).epsilon(1e-9));
  }
  REQUIRE(loaded[0].face_box.has_value());
  CHECK(loaded[0].face_box->x1 == doctest::Approx(0.4));
  CHECK_FALSE(loaded[1].face_box.has_value());

  fs::remove_all(dir);
}

TEST_CASE("y-down csv convention flips the vertical axis only") {
  const fs::path dir = fixtures::temp_dir("csvgfie");
  // Native (0.2, 0.3, 0.9) in a y-down frame -> internal (0.2, -0.3, 0.9).
  std::ostringstream line;
  line << "img.png,s1,q1,0,0.2,0.3,0.9";
  for (int i = 0; i < 12; ++i) line << ',';
  line << ",train\n";
  write_text(dir / "ann.csv", line.str());

  const auto loaded = data::load_gfie_csv(dir / "ann.csv");
  REQUIRE(loaded.size() == 1);
  const double n = std::sqrt(0.2 * 0.2 + 0.3 * 0.3 + 0.9 * 0.9);
  CHECK(loaded[0].gaze.x == doctest::Approx(0.2 / n).epsilon(1e-12));
  CHECK(loaded[0].gaze.y == doctest::Approx(-0.3 / n).epsilon(1e-12));
  CHECK(loaded[0].gaze.z == doctest::Approx(0.9 / n).epsilon(1e-12));

  write_text(dir / "short.csv", "img.png,s1,q1,0,1,0,0,train\n");
  CHECK_THROWS_AS(data::load_gfie_csv(dir / "short.csv"), SchemaError);

  fs::remove_all(dir);
}

TEST_CASE("dataset dispatch resolves directories and rejects unknown formats") {
  const fs::path dir = fixtures::temp_dir("dispatch");
  data::save_jsonl(dir / "annotations.jsonl", {sample("a.png", 0, 0, "train")});
  CHECK(data::load_dataset(dir, "jsonl").size() == 1);
  CHECK(data::load_dataset(dir / "annotations.jsonl", "jsonl").size() == 1);
  CHECK_THROWS_AS(data::load_dataset(dir, "lmdb"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("published valid intervals and closed-boundary membership") {
  const auto iv = data::ValidIntervals::published_defaults();
  CHECK(iv.train.x.lo == 0.29);
  CHECK(iv.train.x.hi == 0.74);
  CHECK(iv.train.y.lo == 0.39);
  CHECK(iv.train.y.hi == 0.69);
  CHECK(iv.val.x.lo == 0.30);
  CHECK(iv.val.x.hi == 0.72);
  CHECK(iv.val.y.lo == 0.41);
  CHECK(iv.val.y.hi == 0.61);
  CHECK(iv.test.x.lo == 0.31);
  CHECK(iv.test.x.hi == 0.74);
  CHECK(iv.test.y.lo == 0.40);
  CHECK(iv.test.y.hi == 0.63);

  // Both interval ends are inside.
  CHECK(data::classify_validity(0.29, 0.39, iv, "train"));
  CHECK(data::classify_validity(0.74, 0.69, iv, "train"));
  CHECK_FALSE(data::classify_validity(0.289999, 0.5, iv, "train"));
  CHECK_FALSE(data::classify_validity(0.5, 0.690001, iv, "train"));
  CHECK_THROWS_AS(data::classify_validity(0.5, 0.5, iv, "holdout"), ConfigError);

  // JSON round trip.
  const auto back = data::ValidIntervals::from_json(iv.to_json());
  CHECK(back.test.y.hi == iv.test.y.hi);

  CHECK_THROWS_AS(data::ValidIntervals::from_json(nlohmann::json::array()), SchemaError);
  nlohmann::json bad = iv.to_json();
  bad["val"]["x"] = {0.8, 0.2};  // lo >= hi
  CHECK_THROWS_AS(data::ValidIntervals::from_json(bad), SchemaError);

  CHECK_THROWS_AS(data::ValidIntervals::load("/nonexistent/intervals.json"), ConfigError);
}

TEST_CASE("rectification replaces bystander boxes and never touches gaze") {
  const auto fx = fixtures::rectification_fixture(40, 6);
  const auto iv = data::ValidIntervals::published_defaults();
  prep::BlobFaceDetector detector;

  auto [fixed, report] = data::rectify(fx.samples, iv, detector, fx.loader());
  REQUIRE(fixed.size() == fx.samples.size());

  const auto totals = report.totals();
  CHECK(totals.inspected == 40);
  CHECK(totals.invalid == 6);
  CHECK(totals.valid == 34);
  CHECK(totals.redetected == 6);
  CHECK(totals.discarded == 0);
  CHECK(report.rectified_frames.size() == 6);

  for (std::size_t i = 0; i < fixed.size(); ++i) {
    // Gaze annotations are never modified.
    CHECK(fixed[i].gaze.x == fx.samples[i].gaze.x);
    CHECK(fixed[i].gaze.y == fx.samples[i].gaze.y);
    CHECK(fixed[i].gaze.z == fx.samples[i].gaze.z);
    REQUIRE(fixed[i].face_box.has_value());
    CHECK(data::classify_validity(fixed[i].face_box->center_x(), fixed[i].face_box->center_y(),
                                  iv, fixed[i].subset));
  }

  // Idempotent: a second pass finds nothing invalid.
  auto [again, report2] = data::rectify(fixed, iv, detector, fx.loader());
  CHECK(report2.totals().invalid == 0);
  CHECK(report2.totals().redetected == 0);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    REQUIRE(again[i].face_box.has_value());
    CHECK(again[i].face_box->x0 == fixed[i].face_box->x0);
  }
}

TEST_CASE("rectification records failures: no detection and loader errors") {
  auto fx = fixtures::rectification_fixture(10, 2);
  const auto iv = data::ValidIntervals::published_defaults();

  // A detector that never fires: invalid boxes are dropped and discarded.
  prep::NullDetector never;
  auto [dropped, report] = data::rectify(fx.samples, iv, never, fx.loader());
  CHECK(report.totals().invalid == 2);
  CHECK(report.totals().discarded == 2);
  CHECK(report.totals().redetected == 0);
  int boxless = 0;
  for (const auto& s : dropped)
    if (!s.face_box) ++boxless;
  CHECK(boxless == 2);

  // A loader that throws produces a warning and a discard.
  prep::BlobFaceDetector blob;
  auto throwing_loader = [&](const data::GazeSample& s) -> ImageTensor {
    if (s.image_path == fx.planted[0]) throw PipelineError(s.image_path, "disk gone");
    return fx.frames.at(s.image_path);
  };
  auto [partial, report2] = data::rectify(fx.samples, iv, blob, throwing_loader);
  CHECK(report2.totals().redetected == 1);
  CHECK(report2.totals().discarded == 1);
  REQUIRE(report2.warnings.size() == 1);
  CHECK(report2.warnings[0].find(fx.planted[0]) != std::string::npos);

  // Boxless samples are not inspected at all.
  auto samples = fx.samples;
  for (auto& s : samples) s.face_box.reset();
  auto [untouched, report3] = data::rectify(samples, iv, blob, fx.loader());
  CHECK(report3.totals().inspected == 0);
  CHECK(untouched.size() == samples.size());
}

TEST_CASE("face centers come only from samples that carry boxes") {
  std::vector<data::GazeSample> samples;
  samples.push_back(sample("a.png", 0, 0, "train", NormBox{0.2, 0.2, 0.4, 0.4}));
  samples.push_back(sample("b.png", 0, 0, "train"));
  const auto centers = data::face_center_distribution(samples);
  REQUIRE(centers.size() == 1);
  CHECK(centers[0].first == doctest::Approx(0.3));
  CHECK(centers[0].second == doctest::Approx(0.3));
}

TEST_CASE("temporal windows slide over consecutive frames with a central label") {
  std::vector<data::GazeSample> samples;
  // Sequence A: frames 0..9 contiguous (shuffled on input).
  for (int f : {4, 0, 7, 2, 9, 1, 5, 8, 3, 6}) {
    auto s = sample("a" + std::to_string(f) + ".png", 0, 0, "train");
    s.sequence_id = "A";
    s.frame_index = f;
    samples.push_back(s);
  }
  // Sequence B: a 6-frame run (too short), then a 7-frame run after a gap.
  for (int f = 0; f < 6; ++f) {
    auto s = sample("b" + std::to_string(f) + ".png", 0, 0, "train");
    s.sequence_id = "B";
    s.frame_index = f;
    samples.push_back(s);
  }
  for (int f = 10; f < 17; ++f) {
    auto s = sample("b" + std::to_string(f) + ".png", 0, 0, "train");
    s.sequence_id = "B";
    s.frame_index = f;
    samples.push_back(s);
  }

  const auto windows = data::temporal_windows(samples);
  // A contributes 10-7+1 = 4 windows, B exactly one.
  REQUIRE(windows.size() == 5);
  for (const auto& w : windows) {
    REQUIRE(w.frame_indices.size() == 7);
    // Frames are consecutive and share a sequence.
    for (std::size_t k = 1; k < 7; ++k) {
      CHECK(samples[w.frame_indices[k]].frame_index ==
            samples[w.frame_indices[k - 1]].frame_index + 1);
      CHECK(samples[w.frame_indices[k]].sequence_id ==
            samples[w.frame_indices[0]].sequence_id);
    }
    // The label sits on the central (4th) frame.
    CHECK(w.label_index == w.frame_indices[3]);
  }
}
