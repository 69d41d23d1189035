#include "bevreg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "bevreg/errors.hpp"

namespace bevreg {

namespace {

constexpr std::uint64_t kSimilarityStream = 0x51a1'7a11'0000'0001ULL;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double random_heading(std::mt19937_64& rng) { return normalize_angle(uniform(rng, -kPi, kPi)); }

std::set<int> visible_ids(const SceneGroundTruth& gt, std::size_t camera, const SceneSpec& spec) {
  std::set<int> ids;
  for (std::size_t s = 0; s < gt.subjects.size(); ++s) {
    if (is_visible(gt, camera, s, spec)) ids.insert(gt.subjects[s].id);
  }
  return ids;
}

bool overlap_ok(const SceneGroundTruth& gt, const SceneSpec& spec) {
  if (spec.min_common_visible <= 0) return true;
  const std::set<int> first = visible_ids(gt, 0, spec);
  for (std::size_t c = 1; c < gt.cameras.size(); ++c) {
    const std::set<int> other = visible_ids(gt, c, spec);
    std::vector<int> common;
    std::set_intersection(first.begin(), first.end(), other.begin(), other.end(), std::back_inserter(common));
    if (static_cast<int>(common.size()) < spec.min_common_visible) return false;
  }
  return true;
}

std::optional<SceneGroundTruth> draw_scene(const SceneSpec& spec, std::mt19937_64& rng) {
  const int n_free = std::uniform_int_distribution<int>(spec.min_free_subjects, spec.max_free_subjects)(rng);

  std::vector<Eigen::Vector2d> wearer_positions;
  for (int w = 0; w < spec.camera_wearers; ++w) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const Eigen::Vector2d p(uniform(rng, 0.0, spec.arena_width), uniform(rng, 0.0, spec.arena_height));
      placed = std::all_of(wearer_positions.begin(), wearer_positions.end(),
                           [&](const Eigen::Vector2d& q) { return (p - q).norm() >= spec.min_wearer_spacing; });
      if (placed) wearer_positions.push_back(p);
    }
    if (!placed) return std::nullopt;
  }

  SceneGroundTruth gt;
  Eigen::Vector2d crowd_centroid(0.5 * spec.arena_width, 0.5 * spec.arena_height);
  std::vector<SubjectState> free_subjects;
  if (n_free > 0) crowd_centroid.setZero();
  for (int i = 0; i < n_free; ++i) {
    const double x = uniform(rng, 0.0, spec.arena_width);
    const double y = uniform(rng, 0.0, spec.arena_height);
    free_subjects.push_back({spec.camera_wearers + i, Pose2D(x, y, random_heading(rng))});
    crowd_centroid += Eigen::Vector2d(x, y) / static_cast<double>(n_free);
  }

  for (int w = 0; w < spec.camera_wearers; ++w) {
    const Eigen::Vector2d& p = wearer_positions[static_cast<std::size_t>(w)];
    double heading = 0.0;
    if (spec.camera_aim_jitter) {
      const Eigen::Vector2d to_crowd = crowd_centroid - p;
      heading = std::atan2(to_crowd.y(), to_crowd.x()) + uniform(rng, -*spec.camera_aim_jitter, *spec.camera_aim_jitter);
    } else {
      heading = random_heading(rng);
    }
    const Pose2D pose(p.x(), p.y(), heading);
    gt.subjects.push_back({w, pose});
    gt.cameras.push_back({w, w, pose});
  }
  std::move(free_subjects.begin(), free_subjects.end(), std::back_inserter(gt.subjects));
  return gt;
}

}  // namespace

void SceneSpec::validate() const {
  if (!(arena_width > 0.0 && arena_height > 0.0)) throw ConfigError("arena dimensions must be positive");
  if (min_free_subjects < 0 || max_free_subjects < min_free_subjects) {
    throw ConfigError("free subject range must satisfy 0 <= min <= max");
  }
  if (camera_wearers < 1) throw ConfigError("at least one camera wearer is required");
  if (!(fov > 0.0 && fov <= kTwoPi)) throw ConfigError("fov must lie in (0, 2*pi]");
  if (!(max_range > 0.0)) throw ConfigError("max_range must be positive");
  if (!(min_wearer_spacing >= 0.0)) throw ConfigError("min_wearer_spacing must be non-negative");
  if (camera_aim_jitter && !(*camera_aim_jitter >= 0.0)) throw ConfigError("camera_aim_jitter must be non-negative");
  if (!(occlusion_radius > 0.0)) throw ConfigError("occlusion_radius must be positive");
  if (max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
}

void NoiseModel::validate() const {
  if (!(sigma_pos >= 0.0 && sigma_ang >= 0.0 && sim_sigma >= 0.0)) throw ConfigError("noise sigmas must be >= 0");
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw ConfigError("drop_prob must lie in [0, 1]");
  if (!(sim_same_mean >= 0.0 && sim_same_mean <= 1.0 && sim_diff_mean >= 0.0 && sim_diff_mean <= 1.0)) {
    throw ConfigError("similarity means must lie in [0, 1]");
  }
}

const SubjectState* SceneGroundTruth::find_subject(int id) const {
  for (const auto& s : subjects) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::uint64_t seed_combine(std::uint64_t base, std::uint64_t value) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL + (value * 0xbf58476d1ce4e5b9ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SceneGroundTruth generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    auto gt = draw_scene(spec, rng);
    if (gt && overlap_ok(*gt, spec)) return std::move(*gt);
  }
  throw ConfigError("no scene satisfying min_common_visible=" + std::to_string(spec.min_common_visible) + " after " +
                    std::to_string(spec.max_attempts) + " attempts");
}

bool is_visible(const SceneGroundTruth& gt, std::size_t camera_index, std::size_t subject_index,
                const SceneSpec& spec) {
  const CameraState& cam = gt.cameras.at(camera_index);
  const SubjectState& subject = gt.subjects.at(subject_index);
  if (subject.id == cam.wearer_id) return false;

  const Pose2D rel = to_local_frame(cam.pose, subject.pose);
  const double range = std::hypot(rel.x, rel.y);
  if (range > spec.max_range) return false;
  if (std::abs(std::atan2(rel.y, rel.x)) > 0.5 * spec.fov) return false;

  if (spec.occlusion) {
    for (const auto& other : gt.subjects) {
      if (other.id == subject.id || other.id == cam.wearer_id) continue;
      const Pose2D o = to_local_frame(cam.pose, other.pose);
      // Projection of the occluder onto the viewing ray.
      const double along = (o.x * rel.x + o.y * rel.y) / range;
      if (along <= 0.0 || along >= range) continue;
      const double across = std::abs(o.x * rel.y - o.y * rel.x) / range;
      if (across < spec.occlusion_radius) return false;
    }
  }
  return true;
}

ViewObservation observe_view(const SceneGroundTruth& gt, std::size_t camera_index, const SceneSpec& spec,
                             const NoiseModel& noise) {
  noise.validate();
  const CameraState& cam = gt.cameras.at(camera_index);
  ViewObservation obs;
  obs.view_id = cam.view_id;
  for (std::size_t s = 0; s < gt.subjects.size(); ++s) {
    if (!is_visible(gt, camera_index, s, spec)) continue;
    const SubjectState& subject = gt.subjects[s];
    // One stream per (camera, subject) keeps a detection's noise independent
    // of which other subjects happen to be visible.
    std::mt19937_64 rng(seed_combine(seed_combine(noise.seed, static_cast<std::uint64_t>(cam.view_id)),
                                     static_cast<std::uint64_t>(subject.id)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double ex = gauss(rng);
    const double ey = gauss(rng);
    const double ea = gauss(rng);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u < noise.drop_prob) continue;

    const Pose2D rel = to_local_frame(cam.pose, subject.pose);
    Detection det;
    det.pose = Pose2D(rel.x + noise.sigma_pos * ex, rel.y + noise.sigma_pos * ey, rel.theta + noise.sigma_ang * ea);
    det.identity = subject.id;
    obs.detections.push_back(std::move(det));
  }
  return obs;
}

SimilarityMatrix synth_similarity(const ViewObservation& a, const ViewObservation& b, const NoiseModel& noise) {
  noise.validate();
  for (const auto* obs : {&a, &b}) {
    for (const auto& d : obs->detections) {
      if (!d.identity) {
        throw ContractError("view " + std::to_string(obs->view_id) + " has a detection without identity");
      }
    }
  }
  std::mt19937_64 rng(seed_combine(
      seed_combine(seed_combine(noise.seed, kSimilarityStream), static_cast<std::uint64_t>(a.view_id)),
      static_cast<std::uint64_t>(b.view_id)));
  std::normal_distribution<double> gauss(0.0, 1.0);

  SimilarityMatrix m;
  m.row_view = a.view_id;
  m.col_view = b.view_id;
  m.values.resize(static_cast<Eigen::Index>(a.detections.size()), static_cast<Eigen::Index>(b.detections.size()));
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const bool same = *a.detections[static_cast<std::size_t>(i)].identity ==
                        *b.detections[static_cast<std::size_t>(j)].identity;
      const double z = gauss(rng);
      if (noise.sim_sigma == 0.0) {
        m.values(i, j) = same ? 1.0 : 0.0;
      } else {
        const double mean = same ? noise.sim_same_mean : noise.sim_diff_mean;
        m.values(i, j) = std::clamp(mean + noise.sim_sigma * z, 0.0, 1.0);
      }
    }
  }
  return m;
}

std::vector<ViewObservation> observe_all(const SceneGroundTruth& gt, const SceneSpec& spec, const NoiseModel& noise) {
  std::vector<ViewObservation> out;
  out.reserve(gt.cameras.size());
  for (std::size_t c = 0; c < gt.cameras.size(); ++c) out.push_back(observe_view(gt, c, spec, noise));
  return out;
}

SimilarityCollection synth_all(const std::vector<ViewObservation>& observations, const NoiseModel& noise) {
  SimilarityCollection out;
  for (std::size_t a = 0; a < observations.size(); ++a) {
    for (std::size_t b = a + 1; b < observations.size(); ++b) {
      out.insert(synth_similarity(observations[a], observations[b], noise));
    }
  }
  return out;
}

SceneGroundTruth ground_truth_in_frame(const SceneGroundTruth& gt, const Pose2D& frame) {
  SceneGroundTruth out = gt;
  for (auto& s : out.subjects) s.pose = to_local_frame(frame, s.pose);
  for (auto& c : out.cameras) c.pose = to_local_frame(frame, c.pose);
  return out;
}

}  // namespace bevreg
