#include <doctest.h>

#include <fstream>
#include <random>

#include "foodcal/detect.hpp"
#include "test_util.hpp"

using namespace foodcal;

namespace {

Detection det(std::string label, Box b, double score = 1.0) { return {std::move(label), b, score}; }

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("scene rules in order") {
  const Box b{1, 1, 20, 20};
  CHECK_ERROR_KIND(validate_scene({det("apple", b)}), ErrorKind::NoCoin);
  CHECK_ERROR_KIND(validate_scene({det("coin", b), det("coin", b), det("apple", b)}), ErrorKind::MultipleCoins);
  CHECK_ERROR_KIND(validate_scene({det("coin", b)}), ErrorKind::NoFood);
  CHECK_ERROR_KIND(validate_scene({det("coin", b), det("apple", b), det("apple", {30, 30, 40, 40})}),
                   ErrorKind::DuplicateFoodLabels);
  CHECK_ERROR_KIND(validate_scene({det("coin", b), det("apple", b), det("pear", b), det("plum", b)}),
                   ErrorKind::TooManyFoods);
  CHECK_ERROR_KIND(validate_scene({}), ErrorKind::NoCoin);

  const SceneDetections s = validate_scene({det("apple", b), det("coin", {0, 0, 5, 5}), det("banana", b)});
  CHECK(s.coin.box == Box{0, 0, 5, 5});
  REQUIRE(s.foods.size() == 2);
  CHECK(s.foods[0].label == "apple");
}

TEST_CASE("annotation replay clips and reports") {
  const Image img(50, 40);
  AnnotationProvider p({det("coin", {-5, 2, 10, 12}), det("apple", {20, 10, 45, 35})});
  std::vector<std::string> diag;
  const SceneDetections s = detect(img, p, &diag);
  CHECK(s.coin.box == Box{0, 2, 10, 12});
  CHECK(diag.size() == 1);

  AnnotationProvider outside({det("coin", {60, 2, 70, 12}), det("apple", {20, 10, 45, 35})});
  CHECK_ERROR_KIND(detect(img, outside), ErrorKind::InvalidBox);
}

TEST_CASE("sidecar threshold and overlap rule") {
  const Image img(100, 100);
  SidecarProvider p("x.png",
                    {det("coin", {5, 5, 25, 25}, 0.9), det("apple", {30, 30, 80, 80}, 0.6),
                     det("apple", {32, 31, 81, 79}, 0.8), det("pear", {0, 0, 10, 10}, 0.2)},
                    0.5);
  std::vector<std::string> diag;
  const SceneDetections s = detect(img, p, &diag);
  REQUIRE(s.foods.size() == 1);
  CHECK(s.foods[0].box == Box{32, 31, 81, 79});
  CHECK(s.foods[0].score == 0.8);

  SidecarProvider strict("x.png", {det("coin", {5, 5, 25, 25}, 0.9), det("apple", {30, 30, 80, 80}, 0.6)}, 0.7);
  CHECK_ERROR_KIND(detect(img, strict), ErrorKind::NoFood);

  SidecarProvider apart("x.png",
                        {det("coin", {5, 5, 25, 25}, 0.9), det("apple", {30, 30, 50, 50}, 0.9),
                         det("apple", {60, 60, 90, 90}, 0.9)},
                        0.5);
  CHECK_ERROR_KIND(detect(img, apart), ErrorKind::DuplicateFoodLabels);
}

TEST_CASE("sidecar and annotation providers agree on the same boxes") {
  std::mt19937_64 rng(8);
  const Image img(120, 90);
  const char* labels[] = {"coin", "apple", "pear", "coin", "egg"};
  for (int t = 0; t < 300; ++t) {
    std::vector<Detection> boxes;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      const int x0 = int(rng() % 130) - 5, y0 = int(rng() % 100) - 5;
      boxes.push_back(det(labels[rng() % 5], {x0, y0, x0 + int(rng() % 40), y0 + int(rng() % 40)}));
    }
    // Same-label overlaps are merged by the sidecar path only.
    bool overlap = false;
    for (std::size_t i = 0; i < boxes.size(); ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j)
        overlap |= boxes[i].label == boxes[j].label && box_iou(boxes[i].box, boxes[j].box) >= 0.5;
    if (overlap) continue;

    const AnnotationProvider a(boxes);
    const SidecarProvider s("x.png", boxes, 0.5);
    std::optional<ErrorKind> ea, es;
    SceneDetections da, ds;
    try {
      da = detect(img, a);
    } catch (const Error& e) {
      ea = e.kind();
    }
    try {
      ds = detect(img, s);
    } catch (const Error& e) {
      es = e.kind();
    }
    CAPTURE(t);
    REQUIRE(ea == es);
    if (!ea) {
      CHECK(da.coin.box == ds.coin.box);
      REQUIRE(da.foods.size() == ds.foods.size());
      for (std::size_t i = 0; i < da.foods.size(); ++i) CHECK(da.foods[i].box == ds.foods[i].box);
    }
  }
}

TEST_CASE("sidecar files") {
  testutil::TempDir dir("sidecar");
  std::ofstream(dir / "ok.json") << R"({"image": "a.png", "detections": [
      {"label": "Coin", "score": 0.9, "xmin": 1, "ymin": 2, "xmax": 30, "ymax": 31},
      {"label": "apple", "score": 0.7, "xmin": 40, "ymin": 2, "xmax": 90, "ymax": 60}]})";
  std::ofstream(dir / "score.json") << R"({"detections": [{"label": "coin", "score": 1.5, "xmin": 1, "ymin": 2, "xmax": 3, "ymax": 4}]})";
  std::ofstream(dir / "field.json") << R"({"detections": [{"label": "coin", "score": 0.5, "xmin": 1, "ymin": 2, "xmax": 3}]})";
  std::ofstream(dir / "shape.json") << R"([1, 2])";
  std::ofstream(dir / "broken.json") << R"({"detections": [)";

  const auto p = sidecar_provider(dir / "ok.json");
  const SceneDetections s = detect(Image(100, 100), *p);
  CHECK(s.coin.label == "coin");
  CHECK(s.foods.at(0).box == Box{40, 2, 90, 60});
  CHECK_ERROR_KIND(sidecar_provider(dir / "score.json"), ErrorKind::SchemaError);
  CHECK_ERROR_KIND(sidecar_provider(dir / "field.json"), ErrorKind::SchemaError);
  CHECK_ERROR_KIND(sidecar_provider(dir / "shape.json"), ErrorKind::SchemaError);
  CHECK_ERROR_KIND(sidecar_provider(dir / "broken.json"), ErrorKind::ParseError);
  CHECK_ERROR_KIND(sidecar_provider(dir / "none.json"), ErrorKind::MissingFile);
}

TEST_CASE("records without annotations for a view") {
  ImagePairRecord r;
  r.pair_id = "p";
  r.annotations_top = std::vector<Detection>{};
  CHECK_NOTHROW(annotation_provider(r, View::Top));
  CHECK_ERROR_KIND(annotation_provider(r, View::Side), ErrorKind::MissingAnnotations);
}

}
