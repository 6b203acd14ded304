#pragma once

// Small hand-rolled generator of valid scenes for property tests. Kept
// independent of the crowd simulator so annotation and metric tests do not
// depend on it.

#include <algorithm>
#include <random>

#include "gigacrowd/anno/annotation.hpp"

namespace gigacrowd::testing {

inline anno::Scene random_scene(std::uint64_t seed, int max_tracks = 8) {
  using namespace anno;
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Scene s;
  s.meta = {pick(200, 4000), pick(200, 3000), 30.0, pick(20, 120), pick(1, 15)};
  const int n = pick(1, max_tracks);
  for (int i = 0; i < n; ++i) {
    Track t;
    t.person_id = 10 * i + pick(0, 9);
    t.ignore = pick(0, 9) == 0;
    if (pick(0, 1)) t.attributes.age = static_cast<AgeClass>(pick(0, 2));
    if (pick(0, 1)) t.attributes.posture = static_cast<Posture>(pick(0, 4));
    if (pick(0, 3) == 0) t.attributes.rider = static_cast<RiderType>(pick(0, 2));
    int frame = pick(0, s.meta.num_frames / 2);
    while (frame < s.meta.num_frames) {
      Keyframe k;
      k.frame = frame;
      k.box = {uni(0, s.meta.width), uni(0, s.meta.height), uni(1, 200), uni(1, 400),
               static_cast<BoxKind>(pick(0, 2))};
      k.occlusion = static_cast<Occlusion>(pick(0, 3));
      if (pick(0, 2)) k.face = static_cast<FaceOrientation>(pick(0, 7));
      t.keyframes.push_back(k);
      frame += pick(1, 12);
    }
    s.tracks.push_back(std::move(t));
  }
  // Disjoint groups over a shuffled prefix of the persons.
  std::vector<int> ids;
  for (const Track& t : s.tracks) ids.push_back(t.person_id);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::size_t next = 0;
  int gid = 1;
  while (ids.size() - next >= 2 && pick(0, 2) > 0) {
    const std::size_t size = std::min<std::size_t>(ids.size() - next, static_cast<std::size_t>(pick(2, 4)));
    Group g;
    g.group_id = gid++;
    g.members.assign(ids.begin() + static_cast<long>(next), ids.begin() + static_cast<long>(next + size));
    std::sort(g.members.begin(), g.members.end());
    g.category = static_cast<GroupCategory>(pick(0, 2));
    g.intimacy = static_cast<Intimacy>(pick(0, 2));
    next += size;
    Interaction x;
    x.a = g.members[0];
    x.b = g.members[1];
    x.types = {static_cast<InteractionType>(pick(0, 4))};
    if (pick(0, 1)) x.types.push_back(InteractionType::Talking);
    x.begin_frame = pick(0, s.meta.num_frames - 1);
    x.end_frame = pick(x.begin_frame, s.meta.num_frames - 1);
    x.confidence = static_cast<Confidence>(pick(0, 2));
    s.interactions.push_back(x);
    s.groups.push_back(std::move(g));
  }
  return s;
}

}  // namespace gigacrowd::testing
