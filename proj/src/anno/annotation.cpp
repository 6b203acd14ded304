#include "gigacrowd/anno/annotation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "gigacrowd/errors.hpp"

namespace gigacrowd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::InvalidTrack: return "invalid_track";
    case ErrorKind::DegenerateBox: return "degenerate_box";
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Validation: return "validation_error";
    case ErrorKind::Consistency: return "consistency_error";
    case ErrorKind::UndefinedMetric: return "undefined_metric";
    case ErrorKind::Configuration: return "configuration_error";
    case ErrorKind::TrainingData: return "training_data_error";
    case ErrorKind::ContractViolation: return "contract_violation";
    case ErrorKind::Io: return "io_error";
  }
  return "unknown";
}

}  // namespace gigacrowd

namespace gigacrowd::anno {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<BoxKind, 4> kBoxKinds{{
    {BoxKind::VisibleBody, "visible_body"},
    {BoxKind::FullBody, "full_body"},
    {BoxKind::Head, "head"},
    {BoxKind::HeadPoint, "head_point"},
}};
constexpr NameTable<Occlusion, 4> kOcclusions{{
    {Occlusion::Without, "without"},
    {Occlusion::Partial, "partial"},
    {Occlusion::Heavy, "heavy"},
    {Occlusion::Disappearing, "disappearing"},
}};
constexpr NameTable<FaceOrientation, 8> kOrientations{{
    {FaceOrientation::N, "n"},
    {FaceOrientation::NE, "ne"},
    {FaceOrientation::E, "e"},
    {FaceOrientation::SE, "se"},
    {FaceOrientation::S, "s"},
    {FaceOrientation::SW, "sw"},
    {FaceOrientation::W, "w"},
    {FaceOrientation::NW, "nw"},
}};
constexpr NameTable<AgeClass, 3> kAges{{
    {AgeClass::Child, "child"},
    {AgeClass::YouthMiddleAged, "youth_middle_aged"},
    {AgeClass::Elderly, "elderly"},
}};
constexpr NameTable<Posture, 5> kPostures{{
    {Posture::Walking, "walking"},
    {Posture::Standing, "standing"},
    {Posture::Sitting, "sitting"},
    {Posture::Riding, "riding"},
    {Posture::HeldInArms, "held_in_arms"},
}};
constexpr NameTable<RiderType, 3> kRiders{{
    {RiderType::Bicycle, "bicycle"},
    {RiderType::Tricycle, "tricycle"},
    {RiderType::Motorcycle, "motorcycle"},
}};
constexpr NameTable<GroupCategory, 3> kCategories{{
    {GroupCategory::Acquaintance, "acquaintance"},
    {GroupCategory::Family, "family"},
    {GroupCategory::Business, "business"},
}};
constexpr NameTable<Intimacy, 3> kIntimacies{{
    {Intimacy::Low, "low"},
    {Intimacy::Middle, "middle"},
    {Intimacy::High, "high"},
}};
constexpr NameTable<InteractionType, 5> kInteractionTypes{{
    {InteractionType::PhysicalContact, "physical_contact"},
    {InteractionType::BodyLanguage, "body_language"},
    {InteractionType::FaceExpressions, "face_expressions"},
    {InteractionType::EyeContact, "eye_contact"},
    {InteractionType::Talking, "talking"},
}};
constexpr NameTable<Confidence, 3> kConfidences{{
    {Confidence::Low, "low"},
    {Confidence::Middle, "middle"},
    {Confidence::High, "high"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) noexcept {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const NameTable<E, N>& table, std::string_view s) noexcept {
  for (const auto& [v, name] : table)
    if (name == s) return v;
  return std::nullopt;
}

bool finite(const BoundingBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h);
}

[[noreturn]] void invalid(const std::string& what) { fail(ErrorKind::Validation, what); }

}  // namespace

std::string_view to_string(BoxKind v) noexcept { return name_of(kBoxKinds, v); }
std::string_view to_string(Occlusion v) noexcept { return name_of(kOcclusions, v); }
std::string_view to_string(FaceOrientation v) noexcept { return name_of(kOrientations, v); }
std::string_view to_string(AgeClass v) noexcept { return name_of(kAges, v); }
std::string_view to_string(Posture v) noexcept { return name_of(kPostures, v); }
std::string_view to_string(RiderType v) noexcept { return name_of(kRiders, v); }
std::string_view to_string(GroupCategory v) noexcept { return name_of(kCategories, v); }
std::string_view to_string(Intimacy v) noexcept { return name_of(kIntimacies, v); }
std::string_view to_string(InteractionType v) noexcept { return name_of(kInteractionTypes, v); }
std::string_view to_string(Confidence v) noexcept { return name_of(kConfidences, v); }

std::optional<BoxKind> parse_box_kind(std::string_view s) noexcept { return value_of(kBoxKinds, s); }
std::optional<Occlusion> parse_occlusion(std::string_view s) noexcept { return value_of(kOcclusions, s); }
std::optional<FaceOrientation> parse_face_orientation(std::string_view s) noexcept {
  return value_of(kOrientations, s);
}
std::optional<AgeClass> parse_age_class(std::string_view s) noexcept { return value_of(kAges, s); }
std::optional<Posture> parse_posture(std::string_view s) noexcept { return value_of(kPostures, s); }
std::optional<RiderType> parse_rider_type(std::string_view s) noexcept { return value_of(kRiders, s); }
std::optional<GroupCategory> parse_group_category(std::string_view s) noexcept {
  return value_of(kCategories, s);
}
std::optional<Intimacy> parse_intimacy(std::string_view s) noexcept { return value_of(kIntimacies, s); }
std::optional<InteractionType> parse_interaction_type(std::string_view s) noexcept {
  return value_of(kInteractionTypes, s);
}
std::optional<Confidence> parse_confidence(std::string_view s) noexcept {
  return value_of(kConfidences, s);
}

double orientation_angle(FaceOrientation bin) noexcept {
  constexpr double q = std::numbers::pi / 4.0;
  switch (bin) {
    case FaceOrientation::E: return 0.0;
    case FaceOrientation::NE: return q;
    case FaceOrientation::N: return 2.0 * q;
    case FaceOrientation::NW: return 3.0 * q;
    case FaceOrientation::W: return std::numbers::pi;
    case FaceOrientation::SW: return -3.0 * q;
    case FaceOrientation::S: return -2.0 * q;
    case FaceOrientation::SE: return -q;
  }
  return 0.0;
}

FaceOrientation orientation_from_direction(double dx, double dy) noexcept {
  // Image y points down; flip so that "up" is north.
  const double angle = std::atan2(-dy, dx);
  int sector = static_cast<int>(std::lround(angle / (std::numbers::pi / 4.0)));
  sector = ((sector % 8) + 8) % 8;
  constexpr std::array<FaceOrientation, 8> by_sector{
      FaceOrientation::E, FaceOrientation::NE, FaceOrientation::N, FaceOrientation::NW,
      FaceOrientation::W, FaceOrientation::SW, FaceOrientation::S, FaceOrientation::SE};
  return by_sector[static_cast<std::size_t>(sector)];
}

const Track* Scene::find_track(int person_id) const noexcept {
  for (const Track& t : tracks)
    if (t.person_id == person_id) return &t;
  return nullptr;
}

std::optional<int> Scene::group_of(int person_id) const noexcept {
  for (const Group& g : groups)
    if (std::binary_search(g.members.begin(), g.members.end(), person_id)) return g.group_id;
  return std::nullopt;
}

void validate_track(const Track& track) {
  const std::string who = "track " + std::to_string(track.person_id);
  if (track.keyframes.empty()) invalid(who + ": no keyframes");
  int previous = -1;
  for (const Keyframe& k : track.keyframes) {
    if (k.frame < 0) invalid(who + ": negative frame index");
    if (k.frame <= previous) invalid(who + ": keyframes not strictly increasing at frame " + std::to_string(k.frame));
    previous = k.frame;
    if (!finite(k.box)) invalid(who + ": non-finite box at frame " + std::to_string(k.frame));
    if (k.box.w < 0.0 || k.box.h < 0.0) invalid(who + ": negative box size at frame " + std::to_string(k.frame));
    if (k.box.kind == BoxKind::HeadPoint && (k.box.w != 0.0 || k.box.h != 0.0))
      invalid(who + ": head_point must have zero size");
  }
}

void validate(const Scene& scene) {
  const SceneMeta& m = scene.meta;
  if (m.width <= 0 || m.height <= 0) invalid("meta: frame size must be positive");
  if (!(m.fps > 0.0) || !std::isfinite(m.fps)) invalid("meta: fps must be positive");
  if (m.num_frames <= 0) invalid("meta: num_frames must be positive");
  if (m.keyframe_interval <= 0) invalid("meta: keyframe_interval must be positive");

  std::unordered_set<int> ids;
  for (const Track& t : scene.tracks) {
    if (!ids.insert(t.person_id).second) invalid("duplicate person_id " + std::to_string(t.person_id));
    validate_track(t);
    if (t.last_frame() >= m.num_frames)
      invalid("track " + std::to_string(t.person_id) + ": keyframe beyond num_frames");
  }

  std::unordered_set<int> group_ids;
  std::unordered_map<int, int> owner;
  for (const Group& g : scene.groups) {
    const std::string who = "group " + std::to_string(g.group_id);
    if (!group_ids.insert(g.group_id).second) invalid("duplicate group_id " + std::to_string(g.group_id));
    if (g.members.size() < 2) invalid(who + ": fewer than 2 members");
    if (!std::is_sorted(g.members.begin(), g.members.end()) ||
        std::adjacent_find(g.members.begin(), g.members.end()) != g.members.end())
      invalid(who + ": members must be unique");
    for (int p : g.members) {
      if (!ids.contains(p)) invalid(who + ": unknown member " + std::to_string(p));
      auto [it, inserted] = owner.emplace(p, g.group_id);
      if (!inserted)
        invalid("person " + std::to_string(p) + " belongs to groups " + std::to_string(it->second) +
                " and " + std::to_string(g.group_id));
    }
  }

  for (const Interaction& x : scene.interactions) {
    const std::string who = "interaction " + std::to_string(x.a) + "-" + std::to_string(x.b);
    if (x.a == x.b) invalid(who + ": self interaction");
    if (x.types.empty()) invalid(who + ": no interaction types");
    if (x.begin_frame > x.end_frame) invalid(who + ": begin after end");
    if (x.begin_frame < 0 || x.end_frame >= m.num_frames) invalid(who + ": frames out of range");
    auto ga = owner.find(x.a);
    auto gb = owner.find(x.b);
    if (ga == owner.end() || gb == owner.end() || ga->second != gb->second)
      invalid(who + ": persons do not share a group");
  }
}

double occlusion_ratio(const BoundingBox& visible, const BoundingBox& full) {
  const double full_area = full.area();
  if (!(full_area > 0.0)) fail(ErrorKind::DegenerateBox, "full-body box has zero area");
  return std::clamp(visible.area() / full_area, 0.0, 1.0);
}

}  // namespace gigacrowd::anno
