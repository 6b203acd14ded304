#include <malloc.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "gigacrowd/cli/cli.hpp"
#include "gigacrowd/json_node.hpp"

namespace gigacrowd::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto where = path.string() + ":" + std::to_string(number) + ": ";
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, where + "expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) {
          return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
        }))
      fail(ErrorKind::Parse, where + "bad key \"" + key + "\"");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!seen.insert(key).second) fail(ErrorKind::Parse, where + "duplicate key \"" + key + "\"");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void tune_allocator() noexcept {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

nlohmann::json tracked_boxes_to_json(const std::vector<eval::TrackedBox>& boxes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const eval::TrackedBox& b : boxes)
    arr.push_back({{"frame", b.frame},
                   {"id", b.id},
                   {"x", b.box.x},
                   {"y", b.box.y},
                   {"w", b.box.w},
                   {"h", b.box.h},
                   {"kind", anno::to_string(b.box.kind)}});
  return arr;
}

std::vector<eval::TrackedBox> tracked_boxes_from_json(const nlohmann::json& doc) {
  JsonNode root(doc, "");
  std::vector<eval::TrackedBox> out;
  for (const JsonNode& n : root.items()) {
    eval::TrackedBox b;
    b.frame = n.at("frame").integer();
    b.id = n.at("id").integer();
    b.box.x = n.at("x").number();
    b.box.y = n.at("y").number();
    b.box.w = n.at("w").number();
    b.box.h = n.at("h").number();
    if (n.has("kind")) b.box.kind = n.at("kind").enumeration(anno::parse_box_kind);
    if (b.box.w < 0.0 || b.box.h < 0.0) n.error("negative box size");
    out.push_back(b);
  }
  return out;
}

}  // namespace gigacrowd::cli
