#include "htlip/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace htlip::config {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"profile",
       {"kind", "case_id", "amplitude_deg", "amplitude_m", "omega_rad_s", "phase_rad",
        "lever_arm_m", "margin_s2", "sample_file", "time_offset_s"}},
      {"model", {"z0_m", "g_m_s2", "mu", "u_min_m", "u_max_m", "dtau_s"}},
      {"reference", {"v_des_m_s"}},
      {"controller",
       {"gain_mode", "fbar_mode", "causal_window_s", "eps", "friction_bounds", "stability_rows",
        "tick_s", "dt_s"}},
      {"simulation",
       {"duration_s", "e0_m", "e0dot_m_s", "seed", "dtau_jitter", "error_bound_m",
        "sway_schedule"}},
      {"disturbance",
       {"kind", "time_s", "end_s", "magnitude_m_s", "magnitude_s2", "magnitude_m_s2", "axis",
        "omega_rad_s"}},
      {"montecarlo",
       {"trials", "e0_pos_m", "e0_vel_m_s", "push_count", "push_max_m_s", "push_window_start_s",
        "push_window_end_s", "push_axis", "fbar_noise_max_s2"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

void check_key(const std::string& section, const std::string& key) {
  const auto it = schema().find(section);
  if (it == schema().end()) throw ConfigError("unknown section [" + section + "]");
  if (!it->second.contains(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
}

const std::string* lookup(const Table* t, const std::string& key) {
  if (t == nullptr) return nullptr;
  const auto it = t->values.find(key);
  return it == t->values.end() ? nullptr : &it->second;
}

double as_double(const Table* t, const std::string& key, double fallback) {
  const auto* raw = lookup(t, key);
  if (raw == nullptr) return fallback;
  double v = 0.0;
  const auto* first = raw->data();
  const auto* last = raw->data() + raw->size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("key '" + t->section + "." + key + "': expected a number, got '" + *raw + "'");
  return v;
}

long long as_integer(const Table* t, const std::string& key, long long fallback) {
  const auto* raw = lookup(t, key);
  if (raw == nullptr) return fallback;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), v);
  if (ec != std::errc() || ptr != raw->data() + raw->size())
    throw ConfigError("key '" + t->section + "." + key + "': expected an integer, got '" + *raw + "'");
  return v;
}

std::string as_string(const Table* t, const std::string& key, const std::string& fallback) {
  const auto* raw = lookup(t, key);
  return raw == nullptr ? fallback : *raw;
}

Axis parse_axis(const std::string& s, const std::string& key) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  throw ConfigError("key '" + key + "': axis must be x or y, got '" + s + "'");
}

MotionProfile profile_from(const Table* t, const std::filesystem::path& base_dir) {
  const std::string kind = as_string(t, "kind", "static");
  const double lever = as_double(t, "lever_arm_m", kDefaultLeverArm);
  MotionProfile p = MotionProfile::static_surface();
  if (kind == "static") {
    p = MotionProfile::static_surface();
  } else if (kind == "table1") {
    std::optional<double> amp;
    if (lookup(t, "amplitude_deg") != nullptr) amp = as_double(t, "amplitude_deg", 0.0);
    try {
      p = MotionProfile::table1(table1_case_from_string(as_string(t, "case_id", "HC1")), lever, amp);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("profile.case_id: ") + e.what());
    }
  } else if (kind == "sinusoid") {
    const double omega = as_double(t, "omega_rad_s", 2.0 * std::numbers::pi);
    const double phase = as_double(t, "phase_rad", 0.0);
    if (lookup(t, "amplitude_deg") != nullptr)
      p = MotionProfile::pitch_sinusoid(as_double(t, "amplitude_deg", 0.0), omega, phase, lever);
    else
      p = MotionProfile::vertical_sinusoid(as_double(t, "amplitude_m", 0.05), omega, phase);
  } else if (kind == "sampled") {
    const auto* file = lookup(t, "sample_file");
    if (file == nullptr) throw ConfigError("profile.sample_file is required for kind=sampled");
    std::filesystem::path path(*file);
    if (path.is_relative()) path = base_dir / path;
    p = MotionProfile::sampled_from_csv(path.string());
  } else {
    throw ConfigError("profile.kind: unknown kind '" + kind + "'");
  }
  const double offset = as_double(t, "time_offset_s", 0.0);
  return offset != 0.0 ? p.time_shifted(offset) : p;
}

}  // namespace

const Table* Document::find(const std::string& section) const {
  for (const auto& t : tables)
    if (t.section == section) return &t;
  return nullptr;
}

Table& Document::get_or_add(const std::string& section) {
  for (auto& t : tables)
    if (t.section == section) return t;
  tables.push_back({section, {}, 0});
  return tables.back();
}

Document parse(const std::string& text) {
  Document doc;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  Table* current = nullptr;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const bool repeated = line.starts_with("[[");
      const std::size_t open = repeated ? 2 : 1;
      const auto close = line.find(repeated ? "]]" : "]");
      if (close == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      const std::string name = trim(line.substr(open, close - open));
      if (!schema().contains(name)) throw ConfigError("unknown section [" + name + "]");
      if (repeated) {
        doc.tables.push_back({name, {}, line_no});
        current = &doc.tables.back();
      } else {
        current = &doc.get_or_add(name);
        current->line = line_no;
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (current == nullptr)
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    check_key(current->section, key);
    if (!current->values.emplace(key, unquote(trim(line.substr(eq + 1)))).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return doc;
}

Document load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Document doc = parse(ss.str());
  doc.base_dir = path.parent_path();
  return doc;
}

void apply_override(Document& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string lhs = trim(assignment.substr(0, eq));
  const std::string value = unquote(trim(assignment.substr(eq + 1)));
  std::string section, key;
  if (const auto dot = lhs.find('.'); dot != std::string::npos) {
    section = lhs.substr(0, dot);
    key = lhs.substr(dot + 1);
  } else {
    key = lhs;
    for (const auto& [name, keys] : schema()) {
      if (name == "disturbance" || !keys.contains(key)) continue;
      if (!section.empty()) throw ConfigError("override key '" + key + "' is ambiguous; use section.key");
      section = name;
    }
    if (section.empty()) throw ConfigError("unknown key '" + key + "'");
  }
  if (section == "disturbance") throw ConfigError("disturbance entries cannot be overridden");
  check_key(section, key);
  doc.get_or_add(section).values[key] = value;
}

GainMode parse_gain_mode(const std::string& text) {
  GainMode mode;
  if (text == "per_tick") {
    mode.kind = GainModeKind::PerTick;
  } else if (text == "per_step") {
    mode.kind = GainModeKind::PerStep;
  } else if (text.starts_with("fixed:")) {
    mode.kind = GainModeKind::Fixed;
    std::string rest = text.substr(6);
    std::replace(rest.begin(), rest.end(), ',', ' ');
    std::istringstream ss(rest);
    double k1 = 0.0, k2 = 0.0;
    std::string extra;
    if (!(ss >> k1 >> k2) || (ss >> extra))
      throw ConfigError("gain_mode: expected fixed:k1,k2, got '" + text + "'");
    mode.fixed = Gain2d(k1, k2);
  } else {
    throw ConfigError("gain_mode: unknown mode '" + text + "'");
  }
  return mode;
}

Scenario scenario_from(const Document& doc) {
  Scenario scn;
  const Table* profile = doc.find("profile");
  try {
    scn.profile = profile_from(profile, doc.base_dir);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
  scn.fbar_margin = as_double(profile, "margin_s2", 0.0);

  const Table* model = doc.find("model");
  scn.params.z0 = as_double(model, "z0_m", scn.params.z0);
  scn.params.g = as_double(model, "g_m_s2", scn.params.g);
  scn.params.mu = as_double(model, "mu", scn.params.mu);
  scn.params.u_min = as_double(model, "u_min_m", scn.params.u_min);
  scn.params.u_max = as_double(model, "u_max_m", scn.params.u_max);
  scn.params.dtau = as_double(model, "dtau_s", scn.params.dtau);

  scn.v_des = as_double(doc.find("reference"), "v_des_m_s", 0.0);

  const Table* ctrl = doc.find("controller");
  scn.gain_mode = parse_gain_mode(as_string(ctrl, "gain_mode", "per_tick"));
  const std::string fbar_mode = as_string(ctrl, "fbar_mode", "oracle_horizon");
  if (fbar_mode == "oracle_horizon")
    scn.fbar_mode = FbarMode::OracleHorizon;
  else if (fbar_mode == "causal_window")
    scn.fbar_mode = FbarMode::CausalWindow;
  else
    throw ConfigError("controller.fbar_mode: unknown mode '" + fbar_mode + "'");
  scn.causal_window = as_double(ctrl, "causal_window_s", 0.0);
  scn.qp.eps = as_double(ctrl, "eps", scn.qp.eps);
  const std::string friction = as_string(ctrl, "friction_bounds", "printed");
  if (friction == "printed")
    scn.qp.friction = FrictionBounds::Printed;
  else if (friction == "strict")
    scn.qp.friction = FrictionBounds::Strict;
  else
    throw ConfigError("controller.friction_bounds: expected printed or strict, got '" + friction + "'");
  const std::string rows = as_string(ctrl, "stability_rows", "exact");
  if (rows == "exact")
    scn.qp.rows = StabilityRows::Exact;
  else if (rows == "printed")
    scn.qp.rows = StabilityRows::Printed;
  else
    throw ConfigError("controller.stability_rows: expected exact or printed, got '" + rows + "'");
  scn.tick = as_double(ctrl, "tick_s", scn.tick);
  scn.dt = as_double(ctrl, "dt_s", scn.dt);

  const Table* sim = doc.find("simulation");
  scn.duration = as_double(sim, "duration_s", scn.duration);
  scn.e0 = State2d(as_double(sim, "e0_m", 0.0), as_double(sim, "e0dot_m_s", 0.0));
  scn.seed = static_cast<std::uint64_t>(as_integer(sim, "seed", 0));
  scn.dtau_jitter = as_double(sim, "dtau_jitter", 0.0);
  scn.error_bound = as_double(sim, "error_bound_m", scn.error_bound);
  const std::string sway = as_string(sim, "sway_schedule", "none");
  if (sway == "hc4") {
    const auto schedule = hc4_sway_schedule();
    scn.disturbances.insert(scn.disturbances.end(), schedule.begin(), schedule.end());
  } else if (sway != "none") {
    throw ConfigError("simulation.sway_schedule: expected none or hc4, got '" + sway + "'");
  }

  for (const auto& t : doc.tables) {
    if (t.section != "disturbance") continue;
    Disturbance d;
    const std::string kind = as_string(&t, "kind", "velocity_impulse");
    if (kind == "velocity_impulse") {
      d.kind = DisturbanceKind::VelocityImpulse;
      d.magnitude = as_double(&t, "magnitude_m_s", 0.0);
    } else if (kind == "fbar_noise") {
      d.kind = DisturbanceKind::FbarNoise;
      d.magnitude = as_double(&t, "magnitude_s2", 0.0);
    } else if (kind == "sway_accel") {
      d.kind = DisturbanceKind::SwayAccel;
      d.magnitude = as_double(&t, "magnitude_m_s2", 0.0);
      d.omega = as_double(&t, "omega_rad_s", d.omega);
    } else {
      throw ConfigError("disturbance.kind: unknown kind '" + kind + "' (line " +
                        std::to_string(t.line) + ")");
    }
    d.time = as_double(&t, "time_s", 0.0);
    d.end_time = as_double(&t, "end_s", d.end_time);
    d.axis = parse_axis(as_string(&t, "axis", "x"), "disturbance.axis");
    scn.disturbances.push_back(d);
  }
  return scn;
}

MonteCarloConfig monte_carlo_from(const Document& doc) {
  MonteCarloConfig mc;
  const Table* t = doc.find("montecarlo");
  const long long trials = as_integer(t, "trials", 100);
  if (trials < 1) throw ConfigError("montecarlo.trials must be at least 1");
  mc.trials = static_cast<std::size_t>(trials);
  auto& r = mc.randomization;
  r.e0_pos = as_double(t, "e0_pos_m", 0.0);
  r.e0_vel = as_double(t, "e0_vel_m_s", 0.0);
  r.push_count = static_cast<int>(as_integer(t, "push_count", 0));
  r.push_max = as_double(t, "push_max_m_s", 0.0);
  r.push_window_start = as_double(t, "push_window_start_s", r.push_window_start);
  r.push_window_end = as_double(t, "push_window_end_s", r.push_window_end);
  r.push_axis = parse_axis(as_string(t, "push_axis", "x"), "montecarlo.push_axis");
  r.fbar_noise_max = as_double(t, "fbar_noise_max_s2", 0.0);
  return mc;
}

}  // namespace htlip::config
