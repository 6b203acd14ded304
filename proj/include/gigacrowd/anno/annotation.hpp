#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gigacrowd::anno {

enum class BoxKind { VisibleBody, FullBody, Head, HeadPoint };

// Pixel box in frame coordinates, (x, y) is the top-left corner.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  BoxKind kind = BoxKind::VisibleBody;

  double area() const noexcept { return w * h; }
  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  double center_x() const noexcept { return x + 0.5 * w; }
  double center_y() const noexcept { return y + 0.5 * h; }

  bool operator==(const BoundingBox&) const = default;
};

enum class Occlusion { Without, Partial, Heavy, Disappearing };

// Eight compass bins; north is "up" in the image.
enum class FaceOrientation { N, NE, E, SE, S, SW, W, NW };

// Center angle of a bin in radians, mathematical convention with y up:
// E = 0, N = pi/2, W = pi, S = -pi/2.
double orientation_angle(FaceOrientation bin) noexcept;

// Bin whose center is closest to the direction (dx, dy) given in image
// coordinates (y pointing down).
FaceOrientation orientation_from_direction(double dx, double dy) noexcept;

struct Keyframe {
  int frame = 0;
  BoundingBox box;
  Occlusion occlusion = Occlusion::Without;
  std::optional<FaceOrientation> face;

  bool operator==(const Keyframe&) const = default;
};

enum class AgeClass { Child, YouthMiddleAged, Elderly };
enum class Posture { Walking, Standing, Sitting, Riding, HeldInArms };
enum class RiderType { Bicycle, Tricycle, Motorcycle };

struct TrackAttributes {
  std::optional<AgeClass> age;
  std::optional<Posture> posture;
  std::optional<RiderType> rider;

  bool empty() const noexcept { return !age && !posture && !rider; }
  bool operator==(const TrackAttributes&) const = default;
};

struct Track {
  int person_id = 0;
  std::vector<Keyframe> keyframes;
  TrackAttributes attributes;
  // Fake person / dense crowd / ignore regions; excluded from metrics.
  bool ignore = false;

  int first_frame() const { return keyframes.front().frame; }
  int last_frame() const { return keyframes.back().frame; }

  bool operator==(const Track&) const = default;
};

enum class GroupCategory { Acquaintance, Family, Business };
enum class Intimacy { Low, Middle, High };

// Members are kept sorted ascending. Category and intimacy are mandatory in
// annotated scenes and absent on predicted groups.
struct Group {
  int group_id = 0;
  std::vector<int> members;
  std::optional<GroupCategory> category;
  std::optional<Intimacy> intimacy;

  bool operator==(const Group&) const = default;
};

enum class InteractionType { PhysicalContact, BodyLanguage, FaceExpressions, EyeContact, Talking };
enum class Confidence { Low, Middle, High };

struct Interaction {
  int a = 0;
  int b = 0;
  std::vector<InteractionType> types;
  int begin_frame = 0;
  int end_frame = 0;
  Confidence confidence = Confidence::Middle;

  bool involves(int p, int q) const noexcept {
    return (a == p && b == q) || (a == q && b == p);
  }
  bool operator==(const Interaction&) const = default;
};

struct SceneMeta {
  int width = 0;
  int height = 0;
  double fps = 30.0;
  int num_frames = 0;
  int keyframe_interval = 10;

  bool operator==(const SceneMeta&) const = default;
};

struct Scene {
  SceneMeta meta;
  std::vector<Track> tracks;
  std::vector<Group> groups;
  std::vector<Interaction> interactions;

  const Track* find_track(int person_id) const noexcept;
  // Group id of a person, or nullopt for singletons.
  std::optional<int> group_of(int person_id) const noexcept;

  bool operator==(const Scene&) const = default;
};

// Throws Error{Validation} naming the first violated invariant.
void validate_track(const Track& track);
void validate(const Scene& scene);

// Ratio of visible to estimated full-body area, clamped to [0, 1].
// Throws Error{DegenerateBox} when the full-body box has no area.
double occlusion_ratio(const BoundingBox& visible, const BoundingBox& full);

// String forms used in files. Parsing rejects unknown strings.
std::string_view to_string(BoxKind v) noexcept;
std::string_view to_string(Occlusion v) noexcept;
std::string_view to_string(FaceOrientation v) noexcept;
std::string_view to_string(AgeClass v) noexcept;
std::string_view to_string(Posture v) noexcept;
std::string_view to_string(RiderType v) noexcept;
std::string_view to_string(GroupCategory v) noexcept;
std::string_view to_string(Intimacy v) noexcept;
std::string_view to_string(InteractionType v) noexcept;
std::string_view to_string(Confidence v) noexcept;

std::optional<BoxKind> parse_box_kind(std::string_view s) noexcept;
std::optional<Occlusion> parse_occlusion(std::string_view s) noexcept;
std::optional<FaceOrientation> parse_face_orientation(std::string_view s) noexcept;
std::optional<AgeClass> parse_age_class(std::string_view s) noexcept;
std::optional<Posture> parse_posture(std::string_view s) noexcept;
std::optional<RiderType> parse_rider_type(std::string_view s) noexcept;
std::optional<GroupCategory> parse_group_category(std::string_view s) noexcept;
std::optional<Intimacy> parse_intimacy(std::string_view s) noexcept;
std::optional<InteractionType> parse_interaction_type(std::string_view s) noexcept;
std::optional<Confidence> parse_confidence(std::string_view s) noexcept;

}  // namespace gigacrowd::anno
