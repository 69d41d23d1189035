#include "bevreg/config.hpp"

#include "bevreg/errors.hpp"
#include "json_reader.hpp"

namespace bevreg {

using io::Json;
using io::detail::StrictObject;

namespace {

template <class F>
void section(StrictObject& parent, const char* key, F&& f) {
  if (const Json* child = parent.child(key)) {
    StrictObject obj(*child, key);
    f(obj);
    obj.finish();
  }
}

void read_degrees(StrictObject& obj, const char* key, double& radians) {
  double deg = rad_to_deg(radians);
  obj.read(key, deg);
  radians = deg_to_rad(deg);
}

}  // namespace

void RunConfig::validate() const {
  scene.validate();
  noise.validate();
  matching.validate();
  pseudo_label.validate();
  if (scenes < 1) throw ConfigError("scenes must be at least 1");
  if (jobs < 0) throw ConfigError("jobs must be non-negative");
  if (registration.reference_view && (*registration.reference_view < 0 ||
                                      *registration.reference_view >= scene.camera_wearers)) {
    throw ConfigError("reference_view must name one of the cameras");
  }
}

RunConfig config_from_json(const Json& j) {
  RunConfig cfg;
  StrictObject root(j, "config");
  root.read("scenes", cfg.scenes);
  root.read("base_seed", cfg.base_seed);
  root.read("jobs", cfg.jobs);
  if (const Json* out = root.child("out_dir")) {
    if (!out->is_null()) {
      if (!out->is_string()) throw ConfigError("config.out_dir: expected a string");
      cfg.out_dir = out->get<std::string>();
    }
  }
  if (const Json* scene = root.child("scene")) {
    if (scene->is_object() && scene->contains("seed")) throw ConfigError("scene.seed: derived from base_seed, not settable");
    cfg.scene = io::scene_spec_from_json(*scene);
  }
  section(root, "noise", [&](StrictObject& o) {
    o.read("sigma_pos", cfg.noise.sigma_pos);
    read_degrees(o, "sigma_ang_deg", cfg.noise.sigma_ang);
    o.read("drop_prob", cfg.noise.drop_prob);
    o.read("sim_same_mean", cfg.noise.sim_same_mean);
    o.read("sim_diff_mean", cfg.noise.sim_diff_mean);
    o.read("sim_sigma", cfg.noise.sim_sigma);
  });
  section(root, "matching", [&](StrictObject& o) {
    o.read("similarity_threshold", cfg.matching.similarity_threshold);
    o.read("distance_threshold", cfg.matching.distance_threshold);
    read_degrees(o, "angle_threshold_deg", cfg.matching.angle_threshold);
    o.read("top_k", cfg.matching.top_k);
    o.read("enforce_constraints", cfg.matching.enforce_constraints);
  });
  section(root, "pseudo_label", [&](StrictObject& o) {
    o.read("alpha", cfg.pseudo_label.alpha);
    o.read("epsilon", cfg.pseudo_label.epsilon);
  });
  section(root, "registration", [&](StrictObject& o) {
    if (const Json* ref = o.child("reference_view")) {
      if (ref->is_null()) {
        cfg.registration.reference_view.reset();
      } else if (ref->is_number_integer()) {
        cfg.registration.reference_view = ref->get<ViewId>();
      } else {
        throw ConfigError("registration.reference_view: expected an integer or null");
      }
    }
    o.read("strict_k", cfg.registration.strict_k);
    std::string strategy = to_string(cfg.registration.strategy);
    o.read("strategy", strategy);
    cfg.registration.strategy = parse_selection_strategy(strategy);
  });
  section(root, "evaluation", [&](StrictObject& o) {
    std::string mode = to_string(cfg.correspondence);
    o.read("correspondence", mode);
    cfg.correspondence = parse_correspondence(mode);
  });
  root.finish();
  cfg.validate();
  return cfg;
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["scenes"] = cfg.scenes;
  j["base_seed"] = cfg.base_seed;
  j["jobs"] = cfg.jobs;
  j["out_dir"] = cfg.out_dir ? Json(cfg.out_dir->string()) : Json(nullptr);
  Json scene = io::scene_spec_to_json(cfg.scene);
  scene.erase("seed");
  j["scene"] = std::move(scene);
  j["noise"] = Json{{"sigma_pos", cfg.noise.sigma_pos},
                    {"sigma_ang_deg", rad_to_deg(cfg.noise.sigma_ang)},
                    {"drop_prob", cfg.noise.drop_prob},
                    {"sim_same_mean", cfg.noise.sim_same_mean},
                    {"sim_diff_mean", cfg.noise.sim_diff_mean},
                    {"sim_sigma", cfg.noise.sim_sigma}};
  j["matching"] = Json{{"similarity_threshold", cfg.matching.similarity_threshold},
                       {"distance_threshold", cfg.matching.distance_threshold},
                       {"angle_threshold_deg", rad_to_deg(cfg.matching.angle_threshold)},
                       {"top_k", cfg.matching.top_k},
                       {"enforce_constraints", cfg.matching.enforce_constraints}};
  j["pseudo_label"] = Json{{"alpha", cfg.pseudo_label.alpha}, {"epsilon", cfg.pseudo_label.epsilon}};
  j["registration"] = Json{
      {"reference_view", cfg.registration.reference_view ? Json(*cfg.registration.reference_view) : Json(nullptr)},
      {"strict_k", cfg.registration.strict_k},
      {"strategy", to_string(cfg.registration.strategy)}};
  j["evaluation"] = Json{{"correspondence", to_string(cfg.correspondence)}};
  return j;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return RunConfig{};
  try {
    return config_from_json(io::read_json_file(*path));
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace bevreg
