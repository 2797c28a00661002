#include <doctest.h>

#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "foodcal/ingest.hpp"
#include "foodcal/synth.hpp"
#include "test_util.hpp"

using namespace foodcal;
namespace fs = std::filesystem;

namespace {

Image gradient(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(x % 256), static_cast<std::uint8_t>(y % 256), 77});
  return img;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string record_json(const std::string& id, const std::string& label, const std::string& top, const std::string& side,
                        const std::string& extra = "") {
  return R"({"pair_id": ")" + id + R"(", "food_label": ")" + label + R"(", "top_image": ")" + top +
         R"(", "side_image": ")" + side + "\"" + extra + "}";
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("png round trip and size limits") {
  testutil::TempDir dir("img");
  const Image img = gradient(640, 480);
  save_png(dir / "a.png", img);
  const Image back = load_image(dir / "a.png");
  CHECK(back.width() == 640);
  CHECK(back.height() == 480);
  CHECK(back == img);

  save_png(dir / "small.png", gradient(16, 16));
  CHECK_ERROR_KIND(load_image(dir / "small.png"), ErrorKind::TooSmall);
  save_png(dir / "edge.png", gradient(32, 32));
  CHECK_NOTHROW(load_image(dir / "edge.png"));
  CHECK_ERROR_KIND(load_image(dir / "missing.png"), ErrorKind::MissingFile);
  write_text(dir / "junk.png", "not an image at all");
  CHECK_ERROR_KIND(load_image(dir / "junk.png"), ErrorKind::DecodeError);
}

TEST_CASE("jpeg, whole and truncated") {
  testutil::TempDir dir("jpg");
  cv::Mat m(48, 64, CV_8UC3, cv::Scalar(10, 120, 230));  // BGR
  REQUIRE(cv::imwrite((dir / "a.jpg").string(), m));
  const Image img = load_image(dir / "a.jpg");
  CHECK(img.width() == 64);
  const Rgb c = img.at(5, 5);
  CHECK(std::abs(int(c.r) - 230) <= 3);
  CHECK(std::abs(int(c.b) - 10) <= 3);

  std::ifstream in(dir / "a.jpg", std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  bytes.resize(bytes.size() * 2 / 3);
  std::ofstream(dir / "cut.jpg", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  CHECK_ERROR_KIND(load_image(dir / "cut.jpg"), ErrorKind::DecodeError);
}

TEST_CASE("mask png") {
  testutil::TempDir dir("mask");
  Mask m(40, 40);
  m.set(3, 4);
  save_mask_png(dir / "m.png", m);
  const cv::Mat back = cv::imread((dir / "m.png").string(), cv::IMREAD_UNCHANGED);
  REQUIRE(back.channels() == 1);
  CHECK(back.at<std::uint8_t>(4, 3) == 255);
  CHECK(back.at<std::uint8_t>(0, 0) == 0);
}

TEST_CASE("manifest round trip") {
  testutil::TempDir dir("manifest");
  const fs::path path = write_synthetic_dataset(dir.path(), 3, 4);
  const Manifest m = load_manifest(path);
  REQUIRE(m.records.size() == 3);
  CHECK(m.dataset_root == dir.path().lexically_normal() / "");
  CHECK(fs::exists(m.resolve(m.records[0].top_image)));

  save_manifest(dir / "copy.json", m);
  const Manifest again = load_manifest(dir / "copy.json");
  CHECK(again.records == m.records);
  CHECK(manifest_to_json(again) == manifest_to_json(m));
}

TEST_CASE("record rejections") {
  testutil::TempDir dir("reject");
  save_png(dir / "t.png", gradient(40, 40));
  save_png(dir / "s.png", gradient(40, 40));
  const std::string recs = "[" + record_json("a", "apple", "t.png", "s.png", R"(, "true_volume_cm3": 100)") + "," +
                           record_json("a", "apple", "t.png", "s.png") + "," +
                           record_json("b", "apple", "t.png", "s.png", R"(, "true_volume_cm3": 0)") + "," +
                           record_json("c", "apple", "t.png", "t.png") + "," +
                           record_json("d", "pizza", "t.png", "s.png") + "," +
                           record_json("e", "apple", "t.png", "nope.png") + "," +
                           record_json("f", "Fired_Dough_Twist", "t.png", "s.png",
                                       R"(, "annotations": {"top": [{"label": "coin", "xmin": 5, "ymin": 5, "xmax": 2, "ymax": 9}]})") +
                           "," + record_json("g", "mix", "t.png", "s.png", R"(, "true_mass_g": -3)") + "]";
  write_text(dir / "m.json", R"({"dataset_root": ".", "records": )" + recs + "}");
  const ManifestLoad load = load_manifest_lenient(dir / "m.json");
  REQUIRE(load.manifest.records.size() == 1);
  CHECK(load.manifest.records[0].pair_id == "a");
  REQUIRE(load.rejected.size() == 7);
  CHECK(load.rejected[0].reason == "duplicate");
  CHECK(load.rejected[1].reason == "nonpositive volume");
  CHECK(load.rejected[2].pair_id == "c");
  CHECK(load.rejected[3].reason.find("pizza") != std::string::npos);
  CHECK(load.rejected[4].reason.find("not found") != std::string::npos);
  CHECK(load.rejected[5].reason.find("degenerate") != std::string::npos);
  CHECK(load.rejected[6].reason == "nonpositive mass");

  try {
    load_manifest(dir / "m.json");
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(e.kind() == ErrorKind::InvariantViolation);
    CHECK(e.diagnostics().size() == 7);
  }
}

TEST_CASE("parse errors name the line or the field") {
  testutil::TempDir dir("parse");
  write_text(dir / "syntax.json", "{\n  \"dataset_root\": \".\",\n  \"records\": [,]\n}");
  try {
    load_manifest(dir / "syntax.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  write_text(dir / "field.json", R"({"dataset_root": ".", "records": [{"pair_id": "a"}, {"pair_id": 3}]})");
  try {
    load_manifest(dir / "field.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("records[0].food_label") != std::string::npos);
  }
  CHECK_ERROR_KIND(load_manifest(dir / "absent.json"), ErrorKind::MissingFile);
}

TEST_CASE("voc xml annotations") {
  testutil::TempDir dir("voc");
  write_text(dir / "a.xml", R"(<annotation><filename>apple001T(1).JPG</filename>
  <object><name>coin</name><bndbox><xmin>10</xmin><ymin>20</ymin><xmax>60</xmax><ymax>70</ymax></bndbox></object>
  <object><name>Apple</name><pose>Unspecified</pose><bndbox><xmin>100.0</xmin><ymin>50</ymin><xmax>300</xmax><ymax>260</ymax></bndbox></object>
  </annotation>)");
  const auto boxes = annotations_from_voc_xml(dir / "a.xml");
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].is_coin());
  CHECK(boxes[1].label == "apple");
  CHECK(boxes[1].box == Box{100, 50, 300, 260});
  write_text(dir / "b.xml", "<annotation><object><name>coin</name></object></annotation>");
  CHECK_ERROR_KIND(annotations_from_voc_xml(dir / "b.xml"), ErrorKind::ParseError);
}

}
