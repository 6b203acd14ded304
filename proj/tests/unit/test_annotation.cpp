#include <doctest.h>

#include <filesystem>

#include "gigacrowd/anno/annotation.hpp"
#include "gigacrowd/anno/densify.hpp"
#include "gigacrowd/anno/scene_io.hpp"
#include "gigacrowd/errors.hpp"
#include "support/random_scene.hpp"

using namespace gigacrowd;
using namespace gigacrowd::anno;

namespace {

Keyframe key(int frame, double x, double y = 0.0, double w = 10.0, double h = 20.0) {
  return Keyframe{frame, {x, y, w, h, BoxKind::VisibleBody}, Occlusion::Without, std::nullopt};
}

ErrorKind error_kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

Scene small_scene() {
  Scene s;
  s.meta = {1000, 800, 30.0, 100, 6};
  for (int id : {1, 2, 3}) {
    Track t;
    t.person_id = id;
    t.keyframes = {key(0, 10.0 * id), key(6, 10.0 * id + 6)};
    s.tracks.push_back(t);
  }
  s.groups.push_back({7, {1, 2}, GroupCategory::Family, Intimacy::High});
  s.interactions.push_back({1, 2, {InteractionType::Talking}, 3, 40, Confidence::High});
  return s;
}

}  // namespace

TEST_CASE("densify interpolates linearly between keyframes") {
  Track t;
  t.person_id = 1;
  t.keyframes = {key(0, 0.0), key(6, 12.0)};
  auto dense = densify_track(t);
  REQUIRE(dense.size() == 7);
  CHECK(dense[3].frame == 3);
  CHECK(dense[3].box.x == 6.0);
}

TEST_CASE("densify of a single keyframe is that box") {
  Track t;
  t.person_id = 4;
  t.keyframes = {key(17, 3.5, 2.0)};
  auto dense = densify_track(t);
  REQUIRE(dense.size() == 1);
  CHECK(dense[0].frame == 17);
  CHECK(dense[0].box == t.keyframes[0].box);
}

TEST_CASE("densify passes through every keyframe and carries categorical fields forward") {
  Track t;
  t.person_id = 2;
  t.keyframes = {key(0, 0.1, 0.7, 3.3, 9.1), key(6, 1.0 / 3.0, 100.25, 5.0, 9.0), key(12, 77.7, -3.0, 0.0, 1.0)};
  t.keyframes[0].occlusion = Occlusion::Partial;
  t.keyframes[0].face = FaceOrientation::SW;
  t.keyframes[1].occlusion = Occlusion::Heavy;
  auto dense = densify_track(t);
  REQUIRE(dense.size() == 13);
  for (const Keyframe& k : t.keyframes) CHECK(dense[static_cast<std::size_t>(k.frame)].box == k.box);
  CHECK(dense[5].occlusion == Occlusion::Partial);
  CHECK(dense[5].face == FaceOrientation::SW);
  CHECK(dense[6].occlusion == Occlusion::Heavy);
  CHECK_FALSE(dense[7].face.has_value());
}

TEST_CASE("densify rejects empty tracks") {
  Track t;
  t.person_id = 9;
  CHECK(error_kind_of([&] { densify_track(t); }) == ErrorKind::InvalidTrack);
}

TEST_CASE("densify properties over random tracks") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Scene s = testing::random_scene(seed);
    for (const Track& t : s.tracks) {
      auto dense = densify_track(t);
      REQUIRE(dense.size() == static_cast<std::size_t>(t.last_frame() - t.first_frame() + 1));
      for (std::size_t i = 0; i < dense.size(); ++i) CHECK(dense[i].frame == t.first_frame() + static_cast<int>(i));
      for (std::size_t k = 0; k + 1 < t.keyframes.size(); ++k) {
        const auto& lo = t.keyframes[k].box;
        const auto& hi = t.keyframes[k + 1].box;
        for (int f = t.keyframes[k].frame; f <= t.keyframes[k + 1].frame; ++f) {
          const auto& b = dense[static_cast<std::size_t>(f - t.first_frame())].box;
          CHECK(b.x >= std::min(lo.x, hi.x));
          CHECK(b.x <= std::max(lo.x, hi.x));
          CHECK(b.h >= std::min(lo.h, hi.h));
          CHECK(b.h <= std::max(lo.h, hi.h));
        }
      }
      const int mid = (t.first_frame() + t.last_frame()) / 2;
      CHECK(box_at(t, mid) == dense[static_cast<std::size_t>(mid - t.first_frame())]);
    }
  }
}

TEST_CASE("occlusion ratio") {
  BoundingBox full{0, 0, 10, 20, BoxKind::FullBody};
  CHECK(occlusion_ratio(full, full) == 1.0);
  CHECK(occlusion_ratio({3, 3, 0, 5, BoxKind::VisibleBody}, full) == 0.0);
  CHECK(occlusion_ratio({0, 0, 10, 10, BoxKind::VisibleBody}, full) == doctest::Approx(0.5));
  CHECK(error_kind_of([&] { occlusion_ratio(full, {0, 0, 0, 10, BoxKind::FullBody}); }) ==
        ErrorKind::DegenerateBox);
}

TEST_CASE("orientation bins") {
  CHECK(orientation_angle(FaceOrientation::E) == 0.0);
  CHECK(orientation_angle(FaceOrientation::N) == doctest::Approx(1.5707963267948966));
  CHECK(orientation_from_direction(1.0, 0.0) == FaceOrientation::E);
  CHECK(orientation_from_direction(0.0, -1.0) == FaceOrientation::N);
  CHECK(orientation_from_direction(-1.0, 1.0) == FaceOrientation::SW);
}

TEST_CASE("scene round trip is the identity over generated scenes") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    Scene s = testing::random_scene(seed);
    validate(s);
    CHECK(scene_from_json(nlohmann::json::parse(scene_to_json(s).dump())) == s);
  }
  auto path = std::filesystem::temp_directory_path() / "gigacrowd_scene_roundtrip.json";
  Scene s = small_scene();
  save_scene(s, path);
  CHECK(load_scene(path) == s);
  std::filesystem::remove(path);
}

TEST_CASE("validation rejects broken scenes") {
  SUBCASE("begin after end") {
    auto doc = scene_to_json(small_scene());
    doc["interactions"][0]["begin"] = 50;
    doc["interactions"][0]["end"] = 10;
    CHECK(error_kind_of([&] { scene_from_json(doc); }) == ErrorKind::Validation);
  }
  SUBCASE("overlapping group membership") {
    auto doc = scene_to_json(small_scene());
    doc["groups"].push_back({{"group_id", 8}, {"members", {2, 3}}, {"category", "business"}, {"intimacy", "low"}});
    CHECK(error_kind_of([&] { scene_from_json(doc); }) == ErrorKind::Validation);
  }
  SUBCASE("interaction across groups") {
    Scene s = small_scene();
    s.interactions[0].b = 3;
    CHECK(error_kind_of([&] { validate(s); }) == ErrorKind::Validation);
  }
  SUBCASE("keyframes out of order") {
    Scene s = small_scene();
    std::swap(s.tracks[0].keyframes[0], s.tracks[0].keyframes[1]);
    CHECK(error_kind_of([&] { validate(s); }) == ErrorKind::Validation);
  }
  SUBCASE("head point with extent") {
    Scene s = small_scene();
    s.tracks[1].keyframes[0].box.kind = BoxKind::HeadPoint;
    CHECK(error_kind_of([&] { validate(s); }) == ErrorKind::Validation);
  }
}

TEST_CASE("parse errors name the offending field") {
  auto doc = scene_to_json(small_scene());
  doc["tracks"][1]["keyframes"][0]["occlusion"] = "mostly";
  try {
    scene_from_json(doc);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("tracks[1].keyframes[0].occlusion") != std::string::npos);
  }
  doc = scene_to_json(small_scene());
  doc["meta"].erase("fps");
  CHECK(error_kind_of([&] { scene_from_json(doc); }) == ErrorKind::Parse);
}

TEST_CASE("predicted group files omit category and intimacy") {
  std::vector<Group> groups{{1, {3, 5}, std::nullopt, std::nullopt}, {2, {1, 4, 9}, std::nullopt, std::nullopt}};
  CHECK(groups_from_json(groups_to_json(groups)) == groups);
  CHECK(groups_from_json(scene_to_json(small_scene())) == small_scene().groups);
}
