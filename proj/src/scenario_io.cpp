#include "geoatt/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "geoatt/errors.hpp"

namespace geoatt::io {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Object view that remembers which keys were consumed, so leftovers can be
// reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(fmt::format("{}: missing key '{}'", path(key), key));
    return j_.at(key);
  }

  double number(const std::string& key) { return as_number(at(key), path(key)); }
  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  [[nodiscard]] std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError(fmt::format("unknown key '{}'", path(item.key())));
      }
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + ": not finite");
    return x;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected 3 numbers");
  return Vec3(Fields::as_number(v[0], where), Fields::as_number(v[1], where),
              Fields::as_number(v[2], where));
}

Mat3 mat3(const json& v, const std::string& where) {
  Mat3 m;
  if (v.is_array() && v.size() == 3 && v[0].is_array()) {
    for (int i = 0; i < 3; ++i) m.row(i) = vec3(v[i], where).transpose();
    return m;
  }
  if (v.is_array() && v.size() == 9) {
    for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = Fields::as_number(v[k], where);
    return m;
  }
  throw ConfigError(where + ": expected a 3x3 nested array or 9 numbers");
}

so3::Rotation rotation_at(const json& j, const std::string& where) {
  if (j.is_array()) {
    const Mat3 m = mat3(j, where);
    try {
      return so3::Rotation(m);
    } catch (const DomainInvalid& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  Fields f(j, where);
  const Vec3 axis = vec3(f.at("axis"), f.path("axis"));
  const double angle = f.number("angle_deg");
  f.finish();
  if (!(axis.norm() > 0.0)) throw ConfigError(where + ": axis must be nonzero");
  return so3::exp_so3(axis.normalized() * angle * kDeg);
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat_json(const Mat3& m) {
  json out = json::array();
  for (int k = 0; k < 9; ++k) out.push_back(m(k / 3, k % 3));
  return out;
}

dynamics::DisturbanceModel disturbance_at(const json& j, const std::string& where) {
  Fields f(j, where);
  const std::string kind = f.text("kind");
  dynamics::DisturbanceModel out = dynamics::DisturbanceModel::none();
  if (kind == "none") {
    const double p = f.number_or("p", 3.0);
    if (p < 1 || p != std::floor(p)) throw ConfigError(f.path("p") + ": positive integer");
    out = dynamics::DisturbanceModel::none(static_cast<int>(p));
  } else if (kind == "constant") {
    out = dynamics::DisturbanceModel::constant(vec3(f.at("bias"), f.path("bias")));
  } else if (kind == "time_varying") {
    const Vec3 bias = vec3(f.at("bias"), f.path("bias"));
    const double amp = f.number("amplitude");
    const double freq = f.number("frequency");
    out = dynamics::DisturbanceModel::time_varying(bias, amp, freq);
  } else {
    throw ConfigError(fmt::format("{}: unknown disturbance kind '{}'", f.path("kind"), kind));
  }
  if (f.has("bound_W") || f.has("bound_delta")) {
    out.set_bounds(f.number_or("bound_W", out.bound_W()),
                   f.number_or("bound_delta", out.bound_delta()));
  }
  f.finish();
  return out;
}

template <class T, class Fn>
T wrap_domain(const std::string& where, Fn fn) {
  try {
    return fn();
  } catch (const DomainInvalid& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const Degenerate& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

so3::Rotation rotation_from_json(const json& j) { return rotation_at(j, "rotation"); }

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + item + "' is not KEY=VALUE");
    }
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
      if (part.empty()) throw ConfigError("override '" + key + "' has an empty path segment");
      const bool last = dot == std::string::npos;
      if (node->is_array()) {
        std::size_t idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoul(part, &used);
          if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
          throw ConfigError("override '" + key + "': '" + part + "' is not an array index");
        }
        if (idx >= node->size()) {
          throw ConfigError("override '" + key + "': index " + part + " out of range");
        }
        node = &(*node)[idx];
      } else if (node->is_object() || node->is_null()) {
        node = &(*node)[part];
      } else {
        throw ConfigError("override '" + key + "': cannot descend into a scalar");
      }
      if (last) break;
      start = dot + 1;
    }
    *node = std::move(value);
  }
}

sim::Scenario scenario_from_json(const json& doc) {
  Fields f(doc, "");

  const std::string name = f.has("name") ? f.text("name") : std::string("scenario");

  const Mat3 j_mat = mat3(f.at("J"), "J");
  const dynamics::InertiaMatrix inertia =
      wrap_domain<dynamics::InertiaMatrix>("J", [&] { return dynamics::InertiaMatrix(j_mat); });

  Fields pf(f.at("params"), "params");
  control::ControllerParams params{.kR = pf.number("kR"),
                                   .kOmega = pf.number("kOmega"),
                                   .kDelta = pf.number_or("kDelta", 0.0),
                                   .c = pf.number_or("c", 0.0),
                                   .J = inertia,
                                   .mode = control::Mode::kSmooth,
                                   .gravity = std::nullopt};
  if (pf.has("mode")) {
    const std::string mode = pf.text("mode");
    const auto parsed = control::mode_from_string(mode);
    if (!parsed) throw ConfigError("params.mode: unknown mode '" + mode + "'");
    params.mode = *parsed;
  }
  pf.finish();
  wrap_domain<bool>("params", [&] {
    control::validate(params);
    return true;
  });

  const Vec3 g = vec3(f.at("G"), "G");
  geometry::AttractiveWeights weights =
      wrap_domain<geometry::AttractiveWeights>("G", [&] { return geometry::AttractiveWeights(g); });
  const geometry::BarrierShape shape =
      wrap_domain<geometry::BarrierShape>("alpha", [&] { return geometry::BarrierShape(f.number("alpha")); });
  const Vec3 r = vec3(f.at("r"), "r");
  const so3::UnitVec3 sensor =
      wrap_domain<so3::UnitVec3>("r", [&] { return so3::UnitVec3::normalized(r); });

  std::vector<geometry::ConstraintCone> cones;
  std::vector<Vec3> given;
  const json& jc = f.at("cones");
  if (!jc.is_array()) throw ConfigError("cones: expected an array");
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = fmt::format("cones.{}", i);
    Fields cf(jc[i], where);
    const Vec3 v = vec3(cf.at("v"), cf.path("v"));
    const double theta = cf.number("theta_deg");
    cf.finish();
    given.push_back(v);
    cones.push_back(wrap_domain<geometry::ConstraintCone>(where, [&] {
      return geometry::ConstraintCone(so3::UnitVec3::normalized(v), theta * kDeg);
    }));
  }

  sim::Scenario s{
      .name = name,
      .params = params,
      .model = geometry::ErrorModel{weights, sensor, std::move(cones), shape},
      .R0 = rotation_at(f.at("R0"), "R0"),
      .Rd = f.has("Rd") ? rotation_at(f.at("Rd"), "Rd") : so3::Rotation::identity(),
  };
  if (f.has("Omega0")) s.omega0 = vec3(f.at("Omega0"), "Omega0");
  if (f.has("disturbance")) s.disturbance = disturbance_at(f.at("disturbance"), "disturbance");
  if (f.has("gravity")) {
    Fields gf(f.at("gravity"), "gravity");
    dynamics::GravityMoment gm;
    gm.r_cg = vec3(gf.at("r_cg"), "gravity.r_cg");
    gm.mass = gf.number("mass");
    gm.g = gf.number_or("g", 9.81);
    gf.finish();
    s.params.gravity = gm;
  }
  if (f.has("waypoints")) {
    const json& jw = f.at("waypoints");
    if (!jw.is_array()) throw ConfigError("waypoints: expected an array");
    for (std::size_t i = 0; i < jw.size(); ++i) {
      const std::string where = fmt::format("waypoints.{}", i);
      Fields wf(jw[i], where);
      sim::Waypoint w{rotation_at(wf.at("R"), wf.path("R")), wf.number("dwell_s")};
      wf.finish();
      s.waypoints.push_back(w);
    }
  }
  s.T = f.number_or("T", s.T);
  s.dt = f.number_or("dt", s.dt);
  if (f.has("seed")) {
    const json& js = f.at("seed");
    if (!js.is_number_unsigned() && !(js.is_number_integer() && js.get<long long>() >= 0)) {
      throw ConfigError("seed: expected a non-negative integer");
    }
    s.seed = js.get<std::uint64_t>();
  }
  if (f.has("integrator")) {
    const std::string m = f.text("integrator");
    const auto parsed = dynamics::integrator_from_string(m);
    if (!parsed) throw ConfigError("integrator: unknown method '" + m + "'");
    s.integrator = *parsed;
  }
  if (f.has("substeps")) {
    const double n = f.number("substeps");
    if (n < 0 || n != std::floor(n) || n > 1e6) {
      throw ConfigError("substeps: expected a non-negative integer");
    }
    s.substeps = static_cast<int>(n);
  }
  s.waypoint_psi_threshold = f.number_or("waypoint_psi_threshold", s.waypoint_psi_threshold);
  s.estimate_clamp_factor = f.number_or("estimate_clamp_factor", s.estimate_clamp_factor);
  if (f.has("psi_cap")) s.psi_cap = f.number("psi_cap");
  if (f.has("beta_caps")) {
    const json& jb = f.at("beta_caps");
    if (!jb.is_array()) throw ConfigError("beta_caps: expected an array");
    for (const json& b : jb) s.beta_caps.push_back(Fields::as_number(b, "beta_caps"));
  }
  const std::string note = sim::renormalization_note(given);
  if (!note.empty()) s.notes.push_back(note);
  if (f.has("notes")) {
    const json& jn = f.at("notes");
    if (!jn.is_array()) throw ConfigError("notes: expected an array of strings");
    for (const json& n : jn) {
      if (!n.is_string()) throw ConfigError("notes: expected an array of strings");
      s.notes.push_back(n.get<std::string>());
    }
  }
  f.finish();
  return s;
}

json scenario_to_json(const sim::Scenario& s) {
  using Kind = dynamics::DisturbanceModel::Kind;
  json j;
  j["name"] = s.name;
  json jm = json::array();
  for (int i = 0; i < 3; ++i) {
    jm.push_back(vec_json(s.params.J.matrix().row(i).transpose()));
  }
  j["J"] = jm;
  j["params"] = {{"kR", s.params.kR},
                 {"kOmega", s.params.kOmega},
                 {"kDelta", s.params.kDelta},
                 {"c", s.params.c},
                 {"mode", std::string(control::to_string(s.params.mode))}};
  j["G"] = vec_json(s.model.weights.diagonal());
  j["alpha"] = s.model.shape.alpha();
  j["r"] = vec_json(s.model.sensor.vec());
  json jc = json::array();
  for (const auto& c : s.model.cones) {
    jc.push_back({{"v", vec_json(c.v())}, {"theta_deg", c.theta() / kDeg}});
  }
  j["cones"] = jc;
  j["R0"] = mat_json(s.R0.matrix());
  j["Rd"] = mat_json(s.Rd.matrix());
  j["Omega0"] = vec_json(s.omega0);
  const auto& d = s.disturbance;
  switch (d.kind()) {
    case Kind::kNone:
      j["disturbance"] = {{"kind", "none"}, {"p", d.dim()}};
      break;
    case Kind::kConstant:
      j["disturbance"] = {{"kind", "constant"}, {"bias", vec_json(d.bias())}};
      break;
    case Kind::kTimeVarying:
      j["disturbance"] = {{"kind", "time_varying"},
                          {"bias", vec_json(d.bias())},
                          {"amplitude", d.amplitude()},
                          {"frequency", d.frequency()}};
      break;
    case Kind::kCustom:
      throw ConfigError("custom disturbances cannot be serialized");
  }
  if (s.params.gravity) {
    j["gravity"] = {{"r_cg", vec_json(s.params.gravity->r_cg)},
                    {"mass", s.params.gravity->mass},
                    {"g", s.params.gravity->g}};
  }
  if (!s.waypoints.empty()) {
    json jw = json::array();
    for (const auto& w : s.waypoints) {
      jw.push_back({{"R", mat_json(w.R.matrix())}, {"dwell_s", w.dwell_s}});
    }
    j["waypoints"] = jw;
  }
  j["T"] = s.T;
  j["dt"] = s.dt;
  j["seed"] = s.seed;
  j["integrator"] = std::string(dynamics::to_string(s.integrator));
  j["substeps"] = s.substeps;
  j["waypoint_psi_threshold"] = s.waypoint_psi_threshold;
  j["estimate_clamp_factor"] = s.estimate_clamp_factor;
  if (s.psi_cap) j["psi_cap"] = *s.psi_cap;
  if (!s.beta_caps.empty()) j["beta_caps"] = s.beta_caps;
  // Renormalization notes are regenerated on load from the cone vectors.
  json notes = json::array();
  for (const auto& n : s.notes) {
    if (n.rfind("constraint vectors renormalized", 0) != 0) notes.push_back(n);
  }
  if (!notes.empty()) j["notes"] = notes;
  return j;
}

sim::Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = load_json(path);
  apply_overrides(doc, overrides);
  return scenario_from_json(doc);
}

RunSummary summarize(const sim::Scenario& s, const sim::RunResult& r) {
  const sim::MonitorReport m = sim::monitors(r.log);
  RunSummary out;
  out.scenario = s.name;
  out.terminal_psi = m.terminal_psi;
  out.terminal_delta_error_inf = m.terminal_delta_error_inf;
  out.min_margin_deg = m.min_margin_deg;
  out.lyapunov_violations = m.lyapunov_violations;
  out.lyapunov_applicable = m.lyapunov_applicable;
  out.max_lyapunov_increase = m.max_lyapunov_increase;
  out.max_psi_rate_residual = m.max_psi_rate_residual;
  out.wall_time_s = r.wall_time_s;
  out.steps = r.log.records.empty() ? 0 : r.log.records.size() - 1;
  out.substeps = sim::effective_substeps(s);
  out.violation = r.violation;
  out.exit_status = r.completed() ? ExitStatus::kOk : ExitStatus::kConstraintViolated;
  return out;
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["schema"] = 1;
  j["scenario"] = s.scenario;
  j["terminal_psi"] = s.terminal_psi;
  j["terminal_delta_error_inf"] = s.terminal_delta_error_inf;
  j["min_margin_deg"] = s.min_margin_deg;
  j["lyapunov_violations"] = s.lyapunov_violations;
  j["lyapunov_applicable"] = s.lyapunov_applicable;
  j["max_lyapunov_increase"] = s.max_lyapunov_increase;
  j["max_psi_rate_residual"] = s.max_psi_rate_residual;
  j["wall_time_s"] = s.wall_time_s;
  j["steps"] = s.steps;
  j["substeps"] = s.substeps;
  j["exit_status"] = static_cast<int>(s.exit_status);
  if (s.violation) {
    j["violation"] = {{"t", s.violation->t}, {"cone", s.violation->cone_index + 1}};
  } else {
    j["violation"] = nullptr;
  }
  return j;
}

void write_summary(const RunSummary& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << summary_to_json(s).dump(2) << '\n';
  if (!f) throw Error("write failed for " + path);
}

}  // namespace geoatt::io
