#include "bevreg/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "bevreg/errors.hpp"
#include "json_reader.hpp"

namespace bevreg::io {

namespace {

// Wraps parsing of data files so schema violations surface as ContractError.
template <class F>
auto parse_data(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed ") + what + ": " + e.what());
  }
}

Json pose_fields(const Pose2D& p) { return Json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

Pose2D pose_from(const Json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("theta").get<double>()};
}

Json node_to_json(const NodeId& n) { return Json{{"view_id", n.view}, {"index", n.index}}; }

NodeId node_from(const Json& j) { return {j.at("view_id").get<ViewId>(), j.at("index").get<int>()}; }

Json summary_fields(const char* prefix, const ErrorSummary& s) {
  const std::string p(prefix);
  Json j;
  j[p + "_pos_avg"] = s.pos_avg;
  j[p + "_ori_avg"] = s.ori_avg;
  j[p + "_pos_median"] = s.pos_median;
  for (std::size_t i = 0; i < kPositionThresholds.size(); ++i) {
    j[fmt::format("{}_pos@{:.1f}", p, kPositionThresholds[i])] = s.pos_at[i];
  }
  for (std::size_t i = 0; i < kOrientationThresholdsDeg.size(); ++i) {
    j[fmt::format("{}_ori@{}", p, kOrientationThresholdsDeg[i])] = s.ori_at[i];
  }
  j[p + "_evaluated"] = s.evaluated;
  j[p + "_missing"] = s.missing;
  return j;
}

}  // namespace

Json scene_spec_to_json(const SceneSpec& spec) {
  Json j;
  j["arena_width"] = spec.arena_width;
  j["arena_height"] = spec.arena_height;
  j["min_free_subjects"] = spec.min_free_subjects;
  j["max_free_subjects"] = spec.max_free_subjects;
  j["camera_wearers"] = spec.camera_wearers;
  j["fov_deg"] = rad_to_deg(spec.fov);
  j["max_range"] = spec.max_range;
  j["min_wearer_spacing"] = spec.min_wearer_spacing;
  j["min_common_visible"] = spec.min_common_visible;
  j["camera_aim_jitter_deg"] = spec.camera_aim_jitter ? Json(rad_to_deg(*spec.camera_aim_jitter)) : Json(nullptr);
  j["occlusion"] = spec.occlusion;
  j["occlusion_radius"] = spec.occlusion_radius;
  j["max_attempts"] = spec.max_attempts;
  j["seed"] = spec.seed;
  return j;
}

SceneSpec scene_spec_from_json(const Json& j) {
  SceneSpec spec;
  detail::StrictObject obj(j, "scene");
  obj.read("arena_width", spec.arena_width);
  obj.read("arena_height", spec.arena_height);
  obj.read("min_free_subjects", spec.min_free_subjects);
  obj.read("max_free_subjects", spec.max_free_subjects);
  obj.read("camera_wearers", spec.camera_wearers);
  double fov_deg = rad_to_deg(spec.fov);
  obj.read("fov_deg", fov_deg);
  spec.fov = deg_to_rad(fov_deg);
  obj.read("max_range", spec.max_range);
  obj.read("min_wearer_spacing", spec.min_wearer_spacing);
  obj.read("min_common_visible", spec.min_common_visible);
  if (const Json* jitter = obj.child("camera_aim_jitter_deg")) {
    if (jitter->is_null()) {
      spec.camera_aim_jitter.reset();
    } else if (jitter->is_number()) {
      spec.camera_aim_jitter = deg_to_rad(jitter->get<double>());
    } else {
      throw ConfigError("scene.camera_aim_jitter_deg: expected a number or null");
    }
  }
  obj.read("occlusion", spec.occlusion);
  obj.read("occlusion_radius", spec.occlusion_radius);
  obj.read("max_attempts", spec.max_attempts);
  obj.read("seed", spec.seed);
  obj.finish();
  spec.validate();
  return spec;
}

Json scene_to_json(const SceneSpec& spec, const SceneGroundTruth& gt) {
  Json j;
  j["spec"] = scene_spec_to_json(spec);
  j["subjects"] = Json::array();
  for (const auto& s : gt.subjects) {
    Json e{{"id", s.id}};
    e.update(pose_fields(s.pose));
    j["subjects"].push_back(std::move(e));
  }
  j["cameras"] = Json::array();
  for (const auto& c : gt.cameras) {
    Json e{{"view_id", c.view_id}, {"wearer_id", c.wearer_id}};
    e.update(pose_fields(c.pose));
    j["cameras"].push_back(std::move(e));
  }
  return j;
}

SceneGroundTruth scene_from_json(const Json& j, SceneSpec* spec_out) {
  return parse_data("scene file", [&] {
    if (spec_out) *spec_out = scene_spec_from_json(j.at("spec"));
    SceneGroundTruth gt;
    for (const auto& s : j.at("subjects")) gt.subjects.push_back({s.at("id").get<int>(), pose_from(s)});
    for (const auto& c : j.at("cameras")) {
      gt.cameras.push_back({c.at("view_id").get<ViewId>(), c.at("wearer_id").get<int>(), pose_from(c)});
    }
    return gt;
  });
}

Json observation_to_json(const ViewObservation& obs) {
  Json j{{"view_id", obs.view_id}, {"detections", Json::array()}};
  for (const auto& d : obs.detections) {
    Json e{{"id", d.identity ? Json(*d.identity) : Json(nullptr)}};
    e.update(pose_fields(d.pose));
    if (!d.descriptor.empty()) e["descriptor"] = d.descriptor;
    j["detections"].push_back(std::move(e));
  }
  return j;
}

ViewObservation observation_from_json(const Json& j) {
  return parse_data("observation file", [&] {
    ViewObservation obs;
    obs.view_id = j.at("view_id").get<ViewId>();
    for (const auto& e : j.at("detections")) {
      Detection d;
      d.pose = pose_from(e);
      if (e.contains("id") && !e.at("id").is_null()) d.identity = e.at("id").get<int>();
      if (e.contains("descriptor")) d.descriptor = e.at("descriptor").get<std::vector<double>>();
      obs.detections.push_back(std::move(d));
    }
    return obs;
  });
}

Json similarity_to_json(const SimilarityMatrix& m) {
  Json values = Json::array();
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) row.push_back(m.values(i, c));
    values.push_back(std::move(row));
  }
  return Json{{"row_view", m.row_view}, {"col_view", m.col_view}, {"values", std::move(values)}};
}

SimilarityMatrix similarity_from_json(const Json& j) {
  return parse_data("similarity file", [&] {
    SimilarityMatrix m;
    m.row_view = j.at("row_view").get<ViewId>();
    m.col_view = j.at("col_view").get<ViewId>();
    const auto& rows = j.at("values");
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : Eigen::Index{0};
    m.values.resize(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != n_cols) throw ShapeError("ragged similarity matrix");
      for (Eigen::Index c = 0; c < n_cols; ++c) m.values(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    m.validate();
    return m;
  });
}

Json registered_scene_to_json(const std::string& scene_id, const RegisteredScene& scene, SelectionStrategy strategy) {
  Json j;
  j["scene_id"] = scene_id;
  j["reference_view"] = scene.reference_view;
  j["strategy"] = to_string(strategy);
  j["status"] = scene.unregistered.empty() ? "ok" : "failed";

  std::set<ViewId> views;
  for (const auto& [v, p] : scene.camera_poses) views.insert(v);
  for (const auto& [v, r] : scene.unregistered) views.insert(v);
  j["cameras"] = Json::array();
  for (ViewId v : views) {
    Json cam{{"view_id", v}};
    if (auto it = scene.unregistered.find(v); it != scene.unregistered.end()) {
      cam["registered"] = false;
      cam["error"] = it->second;
      j["cameras"].push_back(std::move(cam));
      continue;
    }
    cam["registered"] = true;
    cam.update(pose_fields(scene.camera_poses.at(v)));
    if (auto it = scene.registrations.find(v); it != scene.registrations.end()) {
      const PairRegistration& reg = it->second;
      cam["effective_k"] = reg.effective_k;
      cam["selected"] = reg.selected;
      cam["warning"] = reg.warning;
      cam["centroid"] = Json::array({reg.candidates.centroid.x(), reg.candidates.centroid.y()});
      Json cands = Json::array();
      for (std::size_t i = 0; i < reg.candidates.size(); ++i) {
        const Candidate& c = reg.candidates.candidates[i];
        cands.push_back(Json{{"dx", c.transform.dx},
                             {"dy", c.transform.dy},
                             {"dtheta", c.transform.dtheta},
                             {"row", c.source.row},
                             {"col", c.source.col},
                             {"score", c.source.score},
                             {"distance", reg.candidates.distances[i]},
                             {"selected", i == reg.selected}});
      }
      cam["candidates"] = std::move(cands);
    }
    j["cameras"].push_back(std::move(cam));
  }

  j["views"] = Json::array();
  for (const auto& v : scene.projected) {
    Json poses = Json::array();
    for (const auto& p : v.poses) poses.push_back(pose_fields(p));
    j["views"].push_back(Json{{"view_id", v.view_id}, {"poses", std::move(poses)}});
  }

  j["subjects"] = Json::array();
  for (const auto& s : scene.subjects) {
    Json e = pose_fields(s.pose);
    e["rule"] = to_string(s.rule);
    e["representative"] = node_to_json(s.representative);
    Json sources = Json::array();
    for (const auto& m : s.sources.members) sources.push_back(node_to_json(m));
    e["sources"] = std::move(sources);
    j["subjects"].push_back(std::move(e));
  }
  return j;
}

RegisteredScene registered_scene_from_json(const Json& j) {
  return parse_data("registered scene file", [&] {
    RegisteredScene scene;
    scene.reference_view = j.at("reference_view").get<ViewId>();
    for (const auto& cam : j.at("cameras")) {
      const ViewId v = cam.at("view_id").get<ViewId>();
      if (!cam.at("registered").get<bool>()) {
        scene.unregistered[v] = cam.value("error", std::string{});
        continue;
      }
      scene.camera_poses[v] = pose_from(cam);
      if (!cam.contains("candidates")) continue;
      PairRegistration reg;
      reg.effective_k = cam.at("effective_k").get<int>();
      reg.selected = cam.at("selected").get<std::size_t>();
      reg.warning = cam.value("warning", std::string{});
      const auto& centroid = cam.at("centroid");
      reg.candidates.centroid = Eigen::Vector2d(centroid.at(0).get<double>(), centroid.at(1).get<double>());
      for (const auto& c : cam.at("candidates")) {
        Candidate cand;
        cand.transform = RigidTransform2D(c.at("dx").get<double>(), c.at("dy").get<double>(), c.at("dtheta").get<double>());
        cand.source = {c.at("row").get<Eigen::Index>(), c.at("col").get<Eigen::Index>(), c.at("score").get<double>()};
        reg.candidates.candidates.push_back(cand);
        reg.candidates.distances.push_back(c.at("distance").get<double>());
      }
      if (reg.selected >= reg.candidates.size()) throw ContractError("selected candidate index out of range");
      reg.transform = reg.candidates.candidates[reg.selected].transform;
      scene.registrations.emplace(v, std::move(reg));
    }
    for (const auto& v : j.at("views")) {
      ViewPoses vp{v.at("view_id").get<ViewId>(), {}};
      for (const auto& p : v.at("poses")) vp.poses.push_back(pose_from(p));
      scene.projected.push_back(std::move(vp));
    }
    for (const auto& s : j.at("subjects")) {
      FusedSubject fused;
      fused.pose = pose_from(s);
      fused.rule = parse_fusion_rule(s.at("rule").get<std::string>());
      fused.representative = node_from(s.at("representative"));
      for (const auto& m : s.at("sources")) fused.sources.members.push_back(node_from(m));
      scene.clusters.push_back(fused.sources);
      scene.subjects.push_back(std::move(fused));
    }
    return scene;
  });
}

Json report_to_json(const MetricsReport& report) {
  Json j;
  j["n_scenes"] = report.n_scenes;
  j.update(summary_fields("cam", report.camera));
  j.update(summary_fields("sub", report.subject));
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["geo_similarity"] = report.geo_similarity ? Json(*report.geo_similarity) : Json(nullptr);
  return j;
}

const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> columns = {
      "scene_id",    "cam_pos_avg", "cam_ori_avg", "cam_pos@0.5", "cam_pos@1.0",   "cam_pos@1.5",    "cam_ori@5",
      "cam_ori@10",  "cam_ori@15",  "sub_pos_avg", "sub_ori_avg", "sub_pos@0.5",   "sub_pos@1.0",    "sub_pos@1.5",
      "sub_ori@5",   "sub_ori@10",  "sub_ori@15",  "precision",   "recall",        "f1",             "geo_similarity"};
  return columns;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

std::string report_csv_row(const std::string& scene_id, const MetricsReport& r) {
  std::vector<double> values;
  for (const ErrorSummary* s : {&r.camera, &r.subject}) {
    values.push_back(s->pos_avg);
    values.push_back(s->ori_avg);
    values.insert(values.end(), s->pos_at.begin(), s->pos_at.end());
    values.insert(values.end(), s->ori_at.begin(), s->ori_at.end());
  }
  values.push_back(r.precision);
  values.push_back(r.recall);
  values.push_back(r.f1);
  values.push_back(r.geo_similarity.value_or(std::numeric_limits<double>::quiet_NaN()));

  std::string row = scene_id;
  for (double v : values) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void require_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("directory does not exist: " + dir.string());
}

std::string observation_file_name(ViewId view) { return fmt::format("obs_view_{}.json", view); }

std::string similarity_file_name(ViewId rows, ViewId cols) { return fmt::format("sim_{}_{}.json", rows, cols); }

std::string pseudo_label_file_name(ViewId rows, ViewId cols) { return fmt::format("pseudo_{}_{}.json", rows, cols); }

}  // namespace bevreg::io
