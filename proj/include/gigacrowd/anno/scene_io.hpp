#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigacrowd/anno/annotation.hpp"

namespace gigacrowd::anno {

// JSON scene schema:
//   meta {width, height, fps, num_frames, keyframe_interval}
//   tracks [{person_id, attributes?, ignore?, keyframes [{frame, box {x,y,w,h,kind},
//            occlusion, face_orientation?}]}]
//   groups [{group_id, members, category, intimacy}]
//   interactions [{a, b, types, begin, end, confidence}]
nlohmann::json scene_to_json(const Scene& scene);

// Throws Error{Parse} naming the offending field path, then validates and
// throws Error{Validation} on invariant violations.
Scene scene_from_json(const nlohmann::json& doc);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

// Predicted groups: {"groups": [{group_id, members}]}. Reading also accepts a
// full scene file, in which case its annotated groups are returned.
nlohmann::json groups_to_json(const std::vector<Group>& groups);
std::vector<Group> groups_from_json(const nlohmann::json& doc);
std::vector<Group> load_groups(const std::filesystem::path& path);
void save_groups(const std::vector<Group>& groups, const std::filesystem::path& path);

// Shared file helpers; both throw Error{Io}.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gigacrowd::anno
