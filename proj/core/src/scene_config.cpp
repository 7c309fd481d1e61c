#include "axiscat/scene_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace axiscat {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double get_num(const json& j, const std::string& where, const std::string& key,
               std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + ": missing '" + key + "'");
  }
  if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& where, const std::string& key,
            std::optional<int> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + ": missing '" + key + "'");
  }
  if (!j.at(key).is_number_integer())
    throw ConfigError(where + ": '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(where + ": '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

Vec3 get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw ConfigError(where + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

RigidMotion parse_motion(const json& j, const std::string& where) {
  require_keys(j, where, {"translation", "rotation"});
  Vec3 t = Vec3::Zero();
  if (j.contains("translation")) t = get_vec3(j.at("translation"), where + ".translation");
  if (!j.contains("rotation")) return RigidMotion::translation(t);
  const json& r = j.at("rotation");
  if (r.contains("quaternion")) {
    require_keys(r, where + ".rotation", {"quaternion"});
    const json& q = r.at("quaternion");
    if (!q.is_array() || q.size() != 4)
      throw ConfigError(where + ".rotation.quaternion: expected [w, x, y, z]");
    return RigidMotion::quaternion(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                   q[3].get<double>(), t);
  }
  require_keys(r, where + ".rotation", {"axis", "angle"});
  const Vec3 axis = get_vec3(r.at("axis"), where + ".rotation.axis");
  const double angle = get_num(r, where + ".rotation", "angle");
  return RigidMotion::axis_angle(axis, angle, t);
}

json motion_to_json(const RigidMotion& m) {
  json j;
  const auto& t = m.translation_part();
  j["translation"] = {t.x(), t.y(), t.z()};
  const auto& q = m.rotation();
  j["rotation"] = {{"quaternion", {q.w(), q.x(), q.y(), q.z()}}};
  return j;
}

}  // namespace

SceneConfig SceneConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

SceneConfig SceneConfig::from_json(const json& j) {
  require_keys(j, "config",
               {"equation", "kappa", "wavelengths_per_diameter", "bodies", "solver",
                "compression", "verification", "incident", "study", "output"});
  SceneConfig cfg;

  if (!j.contains("equation") || !j.at("equation").is_string())
    throw ConfigError("config: 'equation' must be \"laplace\" or \"helmholtz\"");
  cfg.equation = j.at("equation").get<std::string>();
  if (cfg.equation != "laplace" && cfg.equation != "helmholtz")
    throw ConfigError("config: 'equation' must be \"laplace\" or \"helmholtz\"");

  if (j.contains("kappa")) cfg.kappa = get_num(j, "config", "kappa");
  if (j.contains("wavelengths_per_diameter"))
    cfg.wavelengths_per_diameter = get_num(j, "config", "wavelengths_per_diameter");
  if (cfg.equation == "laplace") {
    if (cfg.wavelengths_per_diameter)
      throw ConfigError("config: wavelengths_per_diameter requires helmholtz");
    if (cfg.kappa && *cfg.kappa != 0) throw ConfigError("config: laplace requires kappa = 0");
  } else {
    if (bool(cfg.kappa) == bool(cfg.wavelengths_per_diameter))
      throw ConfigError(
          "config: helmholtz needs exactly one of 'kappa' or 'wavelengths_per_diameter'");
    if (cfg.kappa && !(*cfg.kappa > 0)) throw ConfigError("config: kappa must be > 0");
    if (cfg.wavelengths_per_diameter && !(*cfg.wavelengths_per_diameter > 0))
      throw ConfigError("config: wavelengths_per_diameter must be > 0");
  }

  if (!j.contains("bodies") || !j.at("bodies").is_array() || j.at("bodies").empty())
    throw ConfigError("config: 'bodies' must be a non-empty array");
  int body_idx = 0;
  for (const json& b : j.at("bodies")) {
    const std::string where = "bodies[" + std::to_string(body_idx++) + "]";
    require_keys(b, where, {"shape", "params", "motion", "r_panels", "gauss_order", "n_fourier"});
    BodyConfig bc;
    if (!b.contains("shape") || !b.at("shape").is_string())
      throw ConfigError(where + ": missing 'shape'");
    bc.shape = b.at("shape").get<std::string>();
    bc.params = b.contains("params") ? b.at("params") : json::object();
    if (b.contains("motion")) bc.motion = parse_motion(b.at("motion"), where + ".motion");
    bc.r_panels = get_int(b, where, "r_panels", 8);
    bc.gauss_order = get_int(b, where, "gauss_order", 10);
    bc.n_fourier = get_int(b, where, "n_fourier", 41);
    if (bc.r_panels < 1) throw ConfigError(where + ": r_panels must be >= 1");
    if (bc.gauss_order < 2) throw ConfigError(where + ": gauss_order must be >= 2");
    if (bc.n_fourier < 4 || bc.n_fourier % 2 == 0)
      throw ConfigError(where + ": n_fourier must be odd and >= 4");
    cfg.bodies.push_back(std::move(bc));
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    require_keys(s, "solver", {"tol", "max_iter", "precond", "restart"});
    cfg.solver.tol = get_num(s, "solver", "tol", 1e-9);
    cfg.solver.max_iter = get_int(s, "solver", "max_iter", 300);
    cfg.solver.precond = get_bool(s, "solver", "precond", true);
    cfg.solver.restart = get_int(s, "solver", "restart", 0);
    if (!(cfg.solver.tol > 0) || !(cfg.solver.tol < 1))
      throw ConfigError("solver: tol must be in (0, 1)");
    if (cfg.solver.max_iter < 1) throw ConfigError("solver: max_iter must be >= 1");
    if (cfg.solver.restart < 0) throw ConfigError("solver: restart must be >= 0");
  }

  if (j.contains("compression")) {
    const json& c = j.at("compression");
    require_keys(c, "compression",
                 {"enabled", "epsilon", "proxy_radius_factor", "min_proxy_points",
                  "separation_aware"});
    cfg.compression.enabled = get_bool(c, "compression", "enabled", false);
    cfg.compression.epsilon = get_num(c, "compression", "epsilon", 1e-10);
    cfg.compression.proxy_radius_factor =
        get_num(c, "compression", "proxy_radius_factor", 1.75);
    cfg.compression.min_proxy_points = get_int(c, "compression", "min_proxy_points", 200);
    cfg.compression.separation_aware = get_bool(c, "compression", "separation_aware", true);
    if (!(cfg.compression.epsilon > 0) || !(cfg.compression.epsilon < 1))
      throw ConfigError("compression: epsilon must be in (0, 1)");
    if (!(cfg.compression.proxy_radius_factor > 1))
      throw ConfigError("compression: proxy_radius_factor must be > 1");
  }

  if (j.contains("verification")) {
    const json& v = j.at("verification");
    require_keys(v, "verification",
                 {"enabled", "seed", "n_targets", "margin_spacings", "source_ball_fraction"});
    cfg.verification.enabled = get_bool(v, "verification", "enabled", true);
    if (v.contains("seed")) cfg.verification.seed = v.at("seed").get<std::uint64_t>();
    cfg.verification.n_targets = get_int(v, "verification", "n_targets", 10);
    cfg.verification.margin_spacings = get_num(v, "verification", "margin_spacings", 2.0);
    cfg.verification.source_ball_fraction =
        get_num(v, "verification", "source_ball_fraction", 0.35);
    if (cfg.verification.n_targets < 1)
      throw ConfigError("verification: n_targets must be >= 1");
    if (!(cfg.verification.source_ball_fraction > 0) ||
        !(cfg.verification.source_ball_fraction < 1))
      throw ConfigError("verification: source_ball_fraction must be in (0, 1)");
  }

  if (j.contains("incident")) {
    const json& inc = j.at("incident");
    require_keys(inc, "incident", {"type", "direction"});
    if (!inc.contains("type") || !inc.at("type").is_string())
      throw ConfigError("incident: missing 'type'");
    cfg.incident.type = inc.at("type").get<std::string>();
    if (cfg.incident.type != "verification_sources" && cfg.incident.type != "plane_wave")
      throw ConfigError("incident: type must be verification_sources or plane_wave");
    if (inc.contains("direction"))
      cfg.incident.direction = get_vec3(inc.at("direction"), "incident.direction");
  }
  if (!cfg.verification.enabled && cfg.incident.type == "verification_sources")
    throw ConfigError("config: disable verification only with an explicit incident field");

  if (j.contains("study")) {
    const json& st = j.at("study");
    require_keys(st, "study", {"resolutions"});
    if (!st.contains("resolutions") || !st.at("resolutions").is_array())
      throw ConfigError("study: 'resolutions' must be an array");
    for (const json& r : st.at("resolutions")) {
      require_keys(r, "study.resolutions[]", {"r_panels", "gauss_order", "n_fourier"});
      StudyResolution sr;
      sr.r_panels = get_int(r, "study.resolutions[]", "r_panels");
      sr.gauss_order = get_int(r, "study.resolutions[]", "gauss_order",
                               cfg.bodies.front().gauss_order);
      sr.n_fourier = get_int(r, "study.resolutions[]", "n_fourier");
      cfg.study_resolutions.push_back(sr);
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    require_keys(o, "output", {"dir"});
    if (o.contains("dir")) cfg.output_dir = o.at("dir").get<std::string>();
  }

  // Shape parameters are validated eagerly so config errors surface here.
  for (const auto& b : cfg.bodies) cfg.make_curve(b);
  return cfg;
}

GeneratingCurve SceneConfig::make_curve(const BodyConfig& body) const {
  const json& p = body.params;
  const std::string where = "body '" + body.shape + "' params";
  try {
    if (body.shape == "ellipsoid") {
      require_keys(p, where, {"a", "c"});
      return GeneratingCurve::ellipsoid(get_num(p, where, "a", 0.5),
                                        get_num(p, where, "c", 1.0));
    }
    if (body.shape == "bowl") {
      require_keys(p, where, {"mid_radius", "half_thickness", "opening_angle"});
      return GeneratingCurve::bowl(get_num(p, where, "mid_radius", 1.0),
                                   get_num(p, where, "half_thickness", 0.2),
                                   get_num(p, where, "opening_angle", kPi / 6));
    }
    if (body.shape == "starfish") {
      require_keys(p, where, {"lobes", "amplitude", "tube_radius", "ring_radius"});
      return GeneratingCurve::starfish(get_int(p, where, "lobes", 5),
                                       get_num(p, where, "amplitude", 0.3),
                                       get_num(p, where, "tube_radius", 0.5),
                                       get_num(p, where, "ring_radius", 1.0));
    }
    if (body.shape == "custom") {
      require_keys(p, where, {"r", "z"});
      if (!p.contains("r") || !p.contains("z"))
        throw ConfigError(where + ": custom shape needs 'r' and 'z' sample arrays");
      std::vector<double> r = p.at("r").get<std::vector<double>>();
      std::vector<double> z = p.at("z").get<std::vector<double>>();
      return GeneratingCurve::custom(r, z);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError("unknown shape '" + body.shape + "'");
}

double SceneConfig::resolve_kappa() const {
  if (equation == "laplace") return 0;
  if (kappa) return *kappa;
  double max_diam = 0;
  for (const auto& b : bodies) max_diam = std::max(max_diam, make_curve(b).diameter());
  // wavelength = diameter / wpd  =>  kappa = 2 pi wpd / diameter
  return kTwoPi * (*wavelengths_per_diameter) / max_diam;
}

KernelSpec SceneConfig::make_spec() const {
  if (equation == "laplace") return KernelSpec::laplace();
  return KernelSpec::helmholtz(WaveNumber(resolve_kappa()));
}

nlohmann::json SceneConfig::to_json() const {
  json j;
  j["equation"] = equation;
  if (kappa) j["kappa"] = *kappa;
  if (wavelengths_per_diameter) j["wavelengths_per_diameter"] = *wavelengths_per_diameter;
  j["bodies"] = json::array();
  for (const auto& b : bodies) {
    json jb;
    jb["shape"] = b.shape;
    jb["params"] = b.params;
    jb["motion"] = motion_to_json(b.motion);
    jb["r_panels"] = b.r_panels;
    jb["gauss_order"] = b.gauss_order;
    jb["n_fourier"] = b.n_fourier;
    j["bodies"].push_back(std::move(jb));
  }
  j["solver"] = {{"tol", solver.tol},
                 {"max_iter", solver.max_iter},
                 {"precond", solver.precond},
                 {"restart", solver.restart}};
  j["compression"] = {{"enabled", compression.enabled},
                      {"epsilon", compression.epsilon},
                      {"proxy_radius_factor", compression.proxy_radius_factor},
                      {"min_proxy_points", compression.min_proxy_points},
                      {"separation_aware", compression.separation_aware}};
  j["verification"] = {{"enabled", verification.enabled},
                       {"seed", verification.seed},
                       {"n_targets", verification.n_targets},
                       {"margin_spacings", verification.margin_spacings},
                       {"source_ball_fraction", verification.source_ball_fraction}};
  j["incident"] = {{"type", incident.type},
                   {"direction",
                    {incident.direction.x(), incident.direction.y(), incident.direction.z()}}};
  if (!study_resolutions.empty()) {
    json rs = json::array();
    for (const auto& r : study_resolutions)
      rs.push_back({{"r_panels", r.r_panels},
                    {"gauss_order", r.gauss_order},
                    {"n_fourier", r.n_fourier}});
    j["study"] = {{"resolutions", std::move(rs)}};
  }
  if (!output_dir.empty()) j["output"] = {{"dir", output_dir}};
  return j;
}

// ---------------------------------------------------------------------------

nlohmann::json RunReport::to_json() const {
  json j;
  j["schema"] = schema;
  j["config"] = config_echo;
  j["scene"] = {{"num_bodies", num_bodies},
                {"total_nodes", total_nodes},
                {"nodes_per_body", nodes_per_body},
                {"min_separation", min_separation},
                {"warnings", warnings},
                {"kappa", kappa}};
  j["solver"] = {{"iterations", iterations},
                 {"residual_history", residual_history},
                 {"converged", converged},
                 {"stagnated", stagnated},
                 {"preconditioned", preconditioned},
                 {"gmres_tol", gmres_tol},
                 {"residual_type", residual_type}};
  j["compression"] = {{"enabled", compressed},
                      {"ranks", ranks},
                      {"n_compressed", n_compressed},
                      {"epsilon", epsilon},
                      {"seed", compression_seed}};
  j["verification"] = {{"enabled", verified},
                       {"seed", verification_seed},
                       {"n_targets", n_targets},
                       {"e_rel_inf", e_rel_inf}};
  j["timings"] = {{"t_pre", t_pre},
                  {"t_solve", t_solve},
                  {"t_compress", t_compress},
                  {"t_total", t_total}};
  return j;
}

RunReport RunReport::from_json(const json& j) {
  RunReport r;
  r.schema = j.at("schema").get<std::string>();
  if (r.schema != kReportSchema)
    throw ConfigError("report schema mismatch: expected " + std::string(kReportSchema) +
                      ", got " + r.schema);
  r.config_echo = j.at("config");
  const json& sc = j.at("scene");
  r.num_bodies = sc.at("num_bodies").get<int>();
  r.total_nodes = sc.at("total_nodes").get<long>();
  r.nodes_per_body = sc.at("nodes_per_body").get<std::vector<int>>();
  r.min_separation = sc.at("min_separation").get<double>();
  r.warnings = sc.at("warnings").get<std::vector<std::string>>();
  r.kappa = sc.at("kappa").get<double>();
  const json& so = j.at("solver");
  r.iterations = so.at("iterations").get<int>();
  r.residual_history = so.at("residual_history").get<std::vector<double>>();
  r.converged = so.at("converged").get<bool>();
  r.stagnated = so.at("stagnated").get<bool>();
  r.preconditioned = so.at("preconditioned").get<bool>();
  r.gmres_tol = so.at("gmres_tol").get<double>();
  r.residual_type = so.at("residual_type").get<std::string>();
  const json& co = j.at("compression");
  r.compressed = co.at("enabled").get<bool>();
  r.ranks = co.at("ranks").get<std::vector<int>>();
  r.n_compressed = co.at("n_compressed").get<long>();
  r.epsilon = co.at("epsilon").get<double>();
  r.compression_seed = co.at("seed").get<std::uint64_t>();
  const json& ve = j.at("verification");
  r.verified = ve.at("enabled").get<bool>();
  r.verification_seed = ve.at("seed").get<std::uint64_t>();
  r.n_targets = ve.at("n_targets").get<int>();
  r.e_rel_inf = ve.at("e_rel_inf").get<double>();
  const json& ti = j.at("timings");
  r.t_pre = ti.at("t_pre").get<double>();
  r.t_solve = ti.at("t_solve").get<double>();
  r.t_compress = ti.at("t_compress").get<double>();
  r.t_total = ti.at("t_total").get<double>();
  return r;
}

std::string study_csv_row(const std::string& label, const RunReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << label << ',' << r.total_nodes << ','
     << (r.nodes_per_body.empty() ? 0 : r.nodes_per_body.front()) << ',' << r.num_bodies << ','
     << r.iterations << ',' << r.t_pre << ',' << r.t_compress << ',' << r.t_solve << ','
     << r.e_rel_inf << ',' << r.n_compressed << ',' << (r.converged ? 1 : 0);
  return os.str();
}

}  // namespace axiscat
