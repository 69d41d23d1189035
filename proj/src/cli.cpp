#include "bevreg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "bevreg/config.hpp"
#include "bevreg/errors.hpp"
#include "bevreg/io.hpp"
#include "bevreg/pipeline.hpp"

namespace bevreg {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> scenes;
  std::optional<std::string> strategy;
  std::optional<int> reference_view;
  bool strict_k = false;
  std::optional<int> jobs;
  std::optional<std::string> correspondence;
};

struct Options {
  Overrides common;
  std::string out;
  std::string in;
  std::string registered;
  std::string gt;
  std::string axis;
  std::vector<std::string> values;
  bool emit_pseudo_labels = false;
};

RunConfig resolve_config(const Overrides& o, const std::optional<fs::path>& fallback = std::nullopt) {
  std::optional<fs::path> path;
  if (o.config) {
    path = *o.config;
  } else if (fallback && fs::exists(*fallback)) {
    path = *fallback;
  }
  RunConfig cfg = load_config(path);
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.scenes) cfg.scenes = *o.scenes;
  if (o.strategy) cfg.registration.strategy = parse_selection_strategy(*o.strategy);
  if (o.reference_view) cfg.registration.reference_view = *o.reference_view;
  if (o.strict_k) cfg.registration.strict_k = true;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.correspondence) cfg.correspondence = parse_correspondence(*o.correspondence);
  cfg.validate();
  return cfg;
}

fs::path output_dir(const std::string& flag, const RunConfig& cfg) {
  fs::path out = !flag.empty() ? fs::path(flag) : cfg.out_dir.value_or(fs::path{});
  if (out.empty()) throw ConfigError("no output directory given (--out)");
  io::require_directory(out);
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Scene directories below `root` that contain `marker`, sorted by name.
std::vector<std::string> list_scenes(const fs::path& root, const char* marker) {
  io::require_directory(root);
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / marker)) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

struct SceneInputs {
  std::vector<ViewObservation> observations;
  SimilarityCollection similarities;
};

SceneInputs read_scene_inputs(const fs::path& dir, bool with_similarities) {
  static const std::regex obs_re(R"(obs_view_(-?\d+)\.json)");
  static const std::regex sim_re(R"(sim_(-?\d+)_(-?\d+)\.json)");
  std::vector<fs::path> obs_files, sim_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, obs_re)) obs_files.push_back(entry.path());
    if (with_similarities && std::regex_match(name, sim_re)) sim_files.push_back(entry.path());
  }
  std::sort(obs_files.begin(), obs_files.end());
  std::sort(sim_files.begin(), sim_files.end());

  SceneInputs in;
  for (const auto& f : obs_files) in.observations.push_back(io::observation_from_json(io::read_json_file(f)));
  std::sort(in.observations.begin(), in.observations.end(),
            [](const ViewObservation& a, const ViewObservation& b) { return a.view_id < b.view_id; });
  for (const auto& f : sim_files) in.similarities.insert(io::similarity_from_json(io::read_json_file(f)));
  if (in.observations.empty()) throw ContractError("no observation files in " + dir.string());
  return in;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o.common);
  const fs::path root = output_dir(o.out, cfg);
  io::write_json_file(root / "config.json", config_to_json(cfg));

  parallel_for(static_cast<std::size_t>(cfg.scenes), cfg.jobs, [&](std::size_t i) {
    const SimulatedScene s = simulate_scene(cfg, static_cast<int>(i));
    const fs::path dir = root / s.id;
    make_dir(dir);
    io::write_json_file(dir / io::kSceneFile, io::scene_to_json(s.spec, s.gt));
    for (const auto& obs : s.observations) {
      io::write_json_file(dir / io::observation_file_name(obs.view_id), io::observation_to_json(obs));
    }
    for (const auto& [key, m] : s.similarities.entries()) {
      io::write_json_file(dir / io::similarity_file_name(key.first, key.second), io::similarity_to_json(m));
    }
  });
  out << fmt::format("simulated {} scenes into {}\n", cfg.scenes, root.string());
  return kExitOk;
}

int cmd_register(const Options& o, std::ostream& out) {
  const fs::path in_root(o.in);
  io::require_directory(in_root);
  const RunConfig cfg = resolve_config(o.common, in_root / "config.json");
  const fs::path root = output_dir(o.out, cfg);
  const std::vector<std::string> ids = list_scenes(in_root, io::kSceneFile);
  if (ids.empty()) throw ContractError("no scene directories in " + in_root.string());

  std::vector<std::map<ViewId, std::string>> failures(ids.size());
  std::vector<std::size_t> reduced_k(ids.size(), 0);
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    const SceneInputs inputs = read_scene_inputs(in_root / ids[i], true);
    const RegisteredScene scene = register_scene(cfg, ids[i], inputs.observations, inputs.similarities);
    const fs::path dir = root / ids[i];
    make_dir(dir);
    io::write_json_file(dir / io::kRegisteredFile,
                        io::registered_scene_to_json(ids[i], scene, cfg.registration.strategy));
    if (o.emit_pseudo_labels) {
      for (const auto& m : pseudo_labels(scene, cfg.pseudo_label)) {
        io::write_json_file(dir / io::pseudo_label_file_name(m.row_view, m.col_view), io::similarity_to_json(m));
      }
    }
    failures[i] = scene.unregistered;
    for (const auto& [view, reg] : scene.registrations) {
      if (!reg.warning.empty()) ++reduced_k[i];
    }
  });

  Json summary;
  summary["scenes"] = ids.size();
  summary["strategy"] = to_string(cfg.registration.strategy);
  Json failed = Json::array();
  std::size_t reduced = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    reduced += reduced_k[i];
    if (failures[i].empty()) continue;
    Json views = Json::array();
    for (const auto& [view, reason] : failures[i]) views.push_back(Json{{"view_id", view}, {"reason", reason}});
    failed.push_back(Json{{"scene_id", ids[i]}, {"views", std::move(views)}});
  }
  summary["failed_scenes"] = failed.size();
  summary["reduced_k_registrations"] = reduced;
  summary["failures"] = std::move(failed);
  io::write_json_file(root / "summary.json", summary);
  out << fmt::format("registered {} scenes ({} failed) into {}\n", ids.size(), summary["failed_scenes"].get<std::size_t>(),
                     root.string());
  return kExitOk;
}

void write_report(const fs::path& root, std::span<const SceneMetrics> scenes, const MetricsReport& aggregate,
                  const std::vector<MetricsReport>& per_scene) {
  Json j;
  j["aggregate"] = io::report_to_json(aggregate);
  Json list = Json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    Json e{{"scene_id", scenes[i].scene_id}};
    e.update(io::report_to_json(per_scene[i]));
    list.push_back(std::move(e));
  }
  j["scenes"] = std::move(list);

  std::string csv;
  for (const auto& c : io::report_csv_columns()) csv += (csv.empty() ? "" : ",") + c;
  csv += '\n';
  for (std::size_t i = 0; i < scenes.size(); ++i) csv += io::report_csv_row(scenes[i].scene_id, per_scene[i]) + '\n';
  csv += io::report_csv_row("aggregate", aggregate) + '\n';

  io::write_json_file(root / "report.json", j);
  io::write_text_file(root / "report.csv", csv);
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o.common);
  const fs::path root = output_dir(o.out, cfg);
  const fs::path reg_root(o.registered);
  const fs::path gt_root(o.gt);
  const std::vector<std::string> ids = list_scenes(reg_root, io::kRegisteredFile);
  const std::vector<std::string> gt_ids = list_scenes(gt_root, io::kSceneFile);
  if (ids.empty()) throw ContractError("no registered scenes in " + reg_root.string());
  if (ids != gt_ids) throw ContractError("scene ids of " + reg_root.string() + " and " + gt_root.string() + " differ");

  std::vector<SceneMetrics> scenes(ids.size());
  parallel_for(ids.size(), cfg.jobs, [&](std::size_t i) {
    const RegisteredScene reg = io::registered_scene_from_json(io::read_json_file(reg_root / ids[i] / io::kRegisteredFile));
    const SceneGroundTruth gt = io::scene_from_json(io::read_json_file(gt_root / ids[i] / io::kSceneFile));
    const SceneInputs inputs = read_scene_inputs(gt_root / ids[i], false);
    scenes[i] = evaluate_scene(ids[i], reg, gt, inputs.observations, cfg.correspondence);
  });

  std::vector<MetricsReport> per_scene;
  for (const auto& s : scenes) {
    per_scene.push_back(make_report(s));
    per_scene.back().check_invariants();
  }
  const MetricsReport total = aggregate(scenes);
  total.check_invariants();
  write_report(root, scenes, total, per_scene);
  out << fmt::format("evaluated {} scenes: cam_pos_avg={} f1={}\n", ids.size(), io::format_double(total.camera.pos_avg),
                     io::format_double(total.f1));
  return kExitOk;
}

void apply_axis(RunConfig& cfg, const std::string& axis, const std::string& value) {
  auto number = [&]() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) throw ConfigError("sweep value '" + value + "' is not a number");
    return v;
  };
  if (axis == "sigma_pos") {
    cfg.noise.sigma_pos = number();
  } else if (axis == "sigma_ang") {
    cfg.noise.sigma_ang = deg_to_rad(number());
  } else if (axis == "sim_sigma") {
    cfg.noise.sim_sigma = number();
  } else if (axis == "K") {
    const double k = number();
    if (k != static_cast<int>(k)) throw ConfigError("K must be an integer");
    cfg.matching.top_k = static_cast<int>(k);
  } else if (axis == "selection_strategy") {
    cfg.registration.strategy = parse_selection_strategy(value);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  cfg.validate();
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const RunConfig base = resolve_config(o.common);
  const fs::path root = output_dir(o.out, base);
  if (o.values.empty()) throw ConfigError("sweep needs at least one value (--values)");
  std::vector<RunConfig> configs;
  for (const auto& v : o.values) {
    RunConfig cfg = base;
    apply_axis(cfg, o.axis, v);
    configs.push_back(std::move(cfg));
  }

  Json points = Json::array();
  std::string csv =
      "value,cam_pos_avg,cam_ori_avg,cam_pos_median,sub_pos_avg,sub_ori_avg,precision,recall,f1,geo_similarity\n";
  for (std::size_t p = 0; p < configs.size(); ++p) {
    const RunConfig& cfg = configs[p];
    std::vector<SceneMetrics> scenes(static_cast<std::size_t>(cfg.scenes));
    parallel_for(scenes.size(), cfg.jobs, [&](std::size_t i) { scenes[i] = run_scene(cfg, static_cast<int>(i)); });
    const MetricsReport report = aggregate(scenes);
    report.check_invariants();
    points.push_back(Json{{"value", o.values[p]}, {"report", io::report_to_json(report)}});
    const double geo = report.geo_similarity.value_or(std::numeric_limits<double>::quiet_NaN());
    csv += o.values[p];
    for (double v : {report.camera.pos_avg, report.camera.ori_avg, report.camera.pos_median, report.subject.pos_avg,
                     report.subject.ori_avg, report.precision, report.recall, report.f1, geo}) {
      csv += ',' + io::format_double(v);
    }
    csv += '\n';
  }
  Json j{{"axis", o.axis}, {"scenes", base.scenes}, {"base_seed", base.base_seed}, {"points", std::move(points)}};
  io::write_json_file(root / "sweep.json", j);
  io::write_text_file(root / "plot_data.csv", csv);
  out << fmt::format("swept {} over {} values into {}\n", o.axis, o.values.size(), root.string());
  return kExitOk;
}

void add_common(CLI::App* cmd, Overrides& o, bool with_scenes) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Base seed");
  if (with_scenes) cmd->add_option("--scenes", o.scenes, "Number of scenes");
  cmd->add_option("--jobs", o.jobs, "Worker threads (0: all cores)");
}

void add_registration(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--strategy", o.strategy, "Candidate selection: centroid, max or random");
  cmd->add_option("--reference-view", o.reference_view, "Reference camera (default: lowest view id)");
  cmd->add_flag("--strict-k", o.strict_k, "Fail instead of reducing K when too few pairs pass the thresholds");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Registration of first-person camera views and subjects in a common top-down frame"};
  app.name("bevreg");
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Generate synthetic scenes, observations and similarity matrices");
  add_common(simulate, o.common, true);
  simulate->add_option("--out", o.out, "Existing output directory");

  auto* reg = app.add_subcommand("register", "Register cameras and subjects of simulated scenes");
  add_common(reg, o.common, false);
  add_registration(reg, o.common);
  reg->add_option("--in", o.in, "Directory written by simulate")->required();
  reg->add_option("--out", o.out, "Existing output directory");
  reg->add_flag("--emit-pseudo-labels", o.emit_pseudo_labels, "Also write spatial pseudo-label matrices");

  auto* evaluate = app.add_subcommand("evaluate", "Score registered scenes against ground truth");
  add_common(evaluate, o.common, false);
  evaluate->add_option("--registered", o.registered, "Directory written by register")->required();
  evaluate->add_option("--gt", o.gt, "Directory written by simulate")->required();
  evaluate->add_option("--out", o.out, "Existing output directory");
  evaluate->add_option("--correspondence", o.common.correspondence, "Subject matching: identity or hungarian");

  auto* sweep = app.add_subcommand("sweep", "Aggregate metrics while varying one parameter");
  add_common(sweep, o.common, true);
  add_registration(sweep, o.common);
  sweep->add_option("--axis", o.axis, "sigma_pos, sigma_ang (degrees), sim_sigma, K or selection_strategy")->required();
  sweep->add_option("--values", o.values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--out", o.out, "Existing output directory");
  sweep->add_option("--correspondence", o.common.correspondence, "Subject matching: identity or hungarian");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  // CLI11 keeps an explicitly empty value as one empty string.
  std::erase_if(o.values, [](const std::string& v) { return v.empty(); });

  try {
    if (simulate->parsed()) return cmd_simulate(o, out);
    if (reg->parsed()) return cmd_register(o, out);
    if (evaluate->parsed()) return cmd_evaluate(o, out);
    return cmd_sweep(o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace bevreg
