#include "gigacrowd/anno/scene_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gigacrowd/errors.hpp"
#include "gigacrowd/json_node.hpp"

namespace gigacrowd::anno {
namespace {

using nlohmann::json;
using Node = JsonNode;

json box_to_json(const BoundingBox& b) {
  return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"kind", to_string(b.kind)}};
}

BoundingBox box_from(const Node& n) {
  BoundingBox b;
  b.x = n.at("x").number();
  b.y = n.at("y").number();
  b.w = n.at("w").number();
  b.h = n.at("h").number();
  b.kind = n.at("kind").enumeration(parse_box_kind);
  return b;
}

std::vector<int> members_from(const Node& n) {
  std::vector<int> members;
  for (const Node& m : n.items()) members.push_back(m.integer());
  std::sort(members.begin(), members.end());
  return members;
}

Track track_from(const Node& n) {
  Track t;
  t.person_id = n.at("person_id").integer();
  if (n.has("ignore")) t.ignore = n.at("ignore").boolean();
  if (n.has("attributes")) {
    Node a = n.at("attributes");
    if (a.has("age")) t.attributes.age = a.at("age").enumeration(parse_age_class);
    if (a.has("posture")) t.attributes.posture = a.at("posture").enumeration(parse_posture);
    if (a.has("rider")) t.attributes.rider = a.at("rider").enumeration(parse_rider_type);
  }
  for (const Node& k : n.at("keyframes").items()) {
    Keyframe kf;
    kf.frame = k.at("frame").integer();
    kf.box = box_from(k.at("box"));
    kf.occlusion = k.at("occlusion").enumeration(parse_occlusion);
    if (k.has("face_orientation")) kf.face = k.at("face_orientation").enumeration(parse_face_orientation);
    t.keyframes.push_back(kf);
  }
  return t;
}

}  // namespace

json scene_to_json(const Scene& scene) {
  json doc;
  doc["meta"] = {{"width", scene.meta.width},
                 {"height", scene.meta.height},
                 {"fps", scene.meta.fps},
                 {"num_frames", scene.meta.num_frames},
                 {"keyframe_interval", scene.meta.keyframe_interval}};
  json tracks = json::array();
  for (const Track& t : scene.tracks) {
    json jt;
    jt["person_id"] = t.person_id;
    if (t.ignore) jt["ignore"] = true;
    if (!t.attributes.empty()) {
      json a = json::object();
      if (t.attributes.age) a["age"] = to_string(*t.attributes.age);
      if (t.attributes.posture) a["posture"] = to_string(*t.attributes.posture);
      if (t.attributes.rider) a["rider"] = to_string(*t.attributes.rider);
      jt["attributes"] = a;
    }
    json keys = json::array();
    for (const Keyframe& k : t.keyframes) {
      json jk = {{"frame", k.frame}, {"box", box_to_json(k.box)}, {"occlusion", to_string(k.occlusion)}};
      if (k.face) jk["face_orientation"] = to_string(*k.face);
      keys.push_back(std::move(jk));
    }
    jt["keyframes"] = std::move(keys);
    tracks.push_back(std::move(jt));
  }
  doc["tracks"] = std::move(tracks);

  json groups = json::array();
  for (const Group& g : scene.groups) {
    json jg = {{"group_id", g.group_id}, {"members", g.members}};
    if (g.category) jg["category"] = to_string(*g.category);
    if (g.intimacy) jg["intimacy"] = to_string(*g.intimacy);
    groups.push_back(std::move(jg));
  }
  doc["groups"] = std::move(groups);

  json interactions = json::array();
  for (const Interaction& x : scene.interactions) {
    json types = json::array();
    for (InteractionType t : x.types) types.push_back(to_string(t));
    interactions.push_back({{"a", x.a},
                            {"b", x.b},
                            {"types", std::move(types)},
                            {"begin", x.begin_frame},
                            {"end", x.end_frame},
                            {"confidence", to_string(x.confidence)}});
  }
  doc["interactions"] = std::move(interactions);
  return doc;
}

Scene scene_from_json(const json& doc) {
  Node root(doc, "");
  Scene scene;
  Node meta = root.at("meta");
  scene.meta.width = meta.at("width").integer();
  scene.meta.height = meta.at("height").integer();
  scene.meta.fps = meta.at("fps").number();
  scene.meta.num_frames = meta.at("num_frames").integer();
  scene.meta.keyframe_interval = meta.at("keyframe_interval").integer();

  for (const Node& t : root.at("tracks").items()) scene.tracks.push_back(track_from(t));

  for (const Node& g : root.at("groups").items()) {
    Group group;
    group.group_id = g.at("group_id").integer();
    group.members = members_from(g.at("members"));
    group.category = g.at("category").enumeration(parse_group_category);
    group.intimacy = g.at("intimacy").enumeration(parse_intimacy);
    scene.groups.push_back(std::move(group));
  }

  for (const Node& x : root.at("interactions").items()) {
    Interaction it;
    it.a = x.at("a").integer();
    it.b = x.at("b").integer();
    for (const Node& t : x.at("types").items()) it.types.push_back(t.enumeration(parse_interaction_type));
    it.begin_frame = x.at("begin").integer();
    it.end_frame = x.at("end").integer();
    it.confidence = x.at("confidence").enumeration(parse_confidence);
    scene.interactions.push_back(std::move(it));
  }

  validate(scene);
  return scene;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, path.string() + ": malformed JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

Scene load_scene(const std::filesystem::path& path) { return scene_from_json(read_json_file(path)); }

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  write_text_file(path, scene_to_json(scene).dump(1) + "\n");
}

json groups_to_json(const std::vector<Group>& groups) {
  json arr = json::array();
  for (const Group& g : groups) arr.push_back({{"group_id", g.group_id}, {"members", g.members}});
  return {{"groups", std::move(arr)}};
}

std::vector<Group> groups_from_json(const json& doc) {
  Node root(doc, "");
  if (root.has("meta")) return scene_from_json(doc).groups;
  std::vector<Group> groups;
  for (const Node& g : root.at("groups").items()) {
    Group group;
    group.group_id = g.at("group_id").integer();
    group.members = members_from(g.at("members"));
    if (group.members.size() < 2) g.at("members").error("a group needs at least 2 members");
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<Group> load_groups(const std::filesystem::path& path) {
  return groups_from_json(read_json_file(path));
}

void save_groups(const std::vector<Group>& groups, const std::filesystem::path& path) {
  write_text_file(path, groups_to_json(groups).dump(1) + "\n");
}

}  // namespace gigacrowd::anno
