#include "fmto/config.hpp"

#include <regex>
#include <set>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "fmto/error.hpp"
#include "fmto/io.hpp"

namespace fmto {

OscillatorParams OscillatorConfig::resolve() const {
  double mu;
  if (moment) {
    mu = *moment;
  } else {
    const auto mat = MaterialProperties::preset(magnet.material);
    mu = cylinder_inertia_and_moment(magnet.diameter, magnet.height, mat, 0.0).moment;
  }
  if (f_res) return OscillatorParams::from_frequency(inertia, mu, q_factor, *f_res, k_offset);
  return OscillatorParams::from_bias(inertia, mu, q_factor, *bias_field, k_offset);
}

namespace {

// Reads keys from a YAML map and remembers which were used.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError(fmt::format("'{}' must be a mapping", path_));
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    seen_.insert(key);
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(fmt::format("'{}' has the wrong type", name(key)));
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  Section sub(const std::string& key) {
    if (!has(key)) return Section(YAML::Node(), name(key));
    seen_.insert(key);
    return Section(node_[key], name(key));
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(fmt::format("unknown key '{}'", name(key)));
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_coil(Section s, CoilPair& c) {
  s.get("turns", c.turns);
  s.get("diameter", c.diameter);
  s.get("separation", c.separation);
  std::string axis;
  s.get("axis", axis);
  if (axis == "x") c.axis = Axis::x;
  else if (axis == "y") c.axis = Axis::y;
  else if (axis == "z") c.axis = Axis::z;
  else if (!axis.empty()) throw ConfigError(fmt::format("'{}' must be x, y or z", s.name("axis")));
  s.finish();
}

ScenarioConfig read_scenario(const YAML::Node& node, std::size_t index) {
  ScenarioConfig sc;
  Section s(node, fmt::format("scenarios[{}]", index));
  s.get("name", sc.name);
  s.get("seed", sc.seed);

  {
    auto o = s.sub("oscillator");
    auto& c = sc.oscillator;
    o.get("inertia", c.inertia);
    o.get("moment", c.moment);
    o.get("q_factor", c.q_factor);
    const bool has_f = o.has("f_res");
    o.get("f_res", c.f_res);
    o.get("bias_field", c.bias_field);
    if (c.bias_field && !has_f) c.f_res.reset();
    if (c.bias_field && has_f)
      throw ConfigError(fmt::format("'{}': give f_res or bias_field, not both", o.name("")));
    o.get("k_offset", c.k_offset);
    auto m = o.sub("magnet");
    m.get("diameter", c.magnet.diameter);
    m.get("height", c.magnet.height);
    m.get("material", c.magnet.material);
    m.finish();
    o.finish();
  }
  {
    auto m = s.sub("simulation");
    auto& c = sc.simulation;
    m.get("temperature", c.temperature);
    m.get("dt", c.dt);
    m.get("duration", c.duration);
    m.get("start_in_equilibrium", c.start_in_equilibrium);
    m.get("integrator", c.integrator);
    m.finish();
  }
  {
    auto r = s.sub("readout");
    auto& c = sc.readout;
    auto& g = c.geometry;
    r.get("path_length", g.path_length);
    r.get("pixel_size", g.pixel_size);
    r.get("frame_rate", g.frame_rate);
    r.get("bit_depth", g.bit_depth);
    r.get("spot_sigma", g.spot_sigma);
    r.get("spot_peak", g.spot_peak);
    r.get("background", g.background);
    r.get("full_well", g.full_well);
    r.get("width", g.width);
    r.get("height", g.height);
    r.get("spot_x0", g.spot_x0);
    r.get("spot_y0", g.spot_y0);
    r.get("jitter_sigma", c.jitter_sigma);
    r.get("jitter_kind", c.jitter_kind);
    r.get("photon_noise", c.photon_noise);
    r.get("write_frames", c.write_frames);
    r.get("max_written_frames", c.max_written_frames);
    auto t = r.sub("tracker");
    t.get("threshold_sigma", c.tracker.threshold_sigma);
    t.get("roi_halfwidth", c.tracker.roi_halfwidth);
    t.get("quality_floor", c.tracker.quality_floor);
    t.get("max_lost_frames", c.tracker.max_lost_frames);
    t.get("min_noise_sigma", c.tracker.min_noise_sigma);
    t.finish();
    r.finish();
  }
  {
    auto k = s.sub("coils");
    auto& c = sc.coils;
    read_coil(k.sub("signal"), c.signal);
    read_coil(k.sub("bias"), c.bias);
    k.get("deviation_factor", c.deviation_factor);
    k.get("calibration_current", c.calibration_current);
    k.get("calibration_frequency", c.calibration_frequency);
    k.get("profile_offsets", c.profile_offsets);
    k.finish();
  }
  {
    auto a = s.sub("analysis");
    auto& c = sc.analysis;
    a.get("segment_length", c.segment_length);
    a.get("window", c.window);
    a.get("overlap", c.overlap);
    a.get("top_n", c.top_n);
    a.get("halfwidth_bins", c.halfwidth_bins);
    a.get("fit_low", c.fit_low);
    a.get("fit_high", c.fit_high);
    a.get("use_actual_timestamps", c.use_actual_timestamps);
    a.finish();
  }
  {
    auto w = s.sub("sweep");
    auto& c = sc.sweep;
    w.get("f_start", c.f_start);
    w.get("f_stop", c.f_stop);
    w.get("f_step", c.f_step);
    w.get("drive_amplitude", c.drive_amplitude);
    w.get("min_duration", c.min_duration);
    w.get("render_and_track", c.render_and_track);
    w.finish();
  }
  {
    auto e = s.sub("sensitivity");
    auto& c = sc.sensitivity;
    e.get("material", c.material);
    e.get("temperature", c.temperature);
    e.get("q_factor", c.q_factor);
    e.get("radii", c.radii);
    e.get("f_res", c.f_res);
    e.finish();
  }
  {
    auto b = s.sub("bounds");
    auto& c = sc.bounds;
    b.get("eta", c.eta);
    b.get("t_mea", c.t_mea);
    b.get("lambda_min", c.lambda_min);
    b.get("lambda_max", c.lambda_max);
    b.get("points", c.points);
    b.get("thermal", c.thermal);
    b.get("thermal_material", c.thermal_material);
    b.get("thermal_temperature", c.thermal_temperature);
    b.get("thermal_q_factor", c.thermal_q_factor);
    b.get("thermal_bias_fields", c.thermal_bias_fields);
    auto src = b.sub("source");
    std::string material = c.source.material.name();
    src.get("solid_angle", c.source.solid_angle);
    src.get("l0", c.source.l0);
    src.get("lm", c.source.lm);
    src.get("amplitude", c.source.amplitude);
    src.get("f_n", c.source.f_n);
    src.get("material", material);
    src.finish();
    b.finish();
    try {
      c.source.material = MaterialProperties::preset(material);
    } catch (const DomainError& err) {
      throw ConfigError(fmt::format("{}: {}", b.name("source.material"), err.what()));
    }
  }
  s.finish();
  return sc;
}

void validate(const ScenarioConfig& sc) {
  static const std::regex name_re("[A-Za-z0-9._-]+");
  if (!std::regex_match(sc.name, name_re) || sc.name == "." || sc.name == "..")
    throw ConfigError(fmt::format("scenario name '{}' must be non-empty [A-Za-z0-9._-]", sc.name));
  auto fail = [&](const std::string& what) {
    throw ConfigError(fmt::format("scenario '{}': {}", sc.name, what));
  };
  try {
    (void)sc.oscillator.resolve();
    sc.readout.geometry.validate();
    sc.coils.signal.validate();
    sc.coils.bias.validate();
    sc.bounds.source.validate();
    (void)window_from_string(sc.analysis.window);
    (void)MaterialProperties::preset(sc.sensitivity.material);
    (void)MaterialProperties::preset(sc.bounds.thermal_material);
  } catch (const DomainError& e) {
    fail(e.what());
  }
  const auto& m = sc.simulation;
  if (!(m.temperature >= 0.0)) fail("simulation.temperature must be >= 0");
  if (!(m.dt > 0.0) || !(m.duration > 0.0)) fail("simulation.dt and duration must be positive");
  if (m.integrator != "exact" && m.integrator != "euler_maruyama")
    fail("simulation.integrator must be exact or euler_maruyama");
  const auto& r = sc.readout;
  if (r.jitter_kind != "gaussian" && r.jitter_kind != "uniform")
    fail("readout.jitter_kind must be gaussian or uniform");
  if (!(r.jitter_sigma >= 0.0)) fail("readout.jitter_sigma must be >= 0");
  const auto& a = sc.analysis;
  if (!(a.segment_length > 0.0)) fail("analysis.segment_length must be positive");
  if (!(a.overlap >= 0.0 && a.overlap < 1.0)) fail("analysis.overlap must be in [0, 1)");
  if (a.top_n == 0) fail("analysis.top_n must be >= 1");
  if (a.halfwidth_bins < 0) fail("analysis.halfwidth_bins must be >= 0");
  if (!(a.fit_high > a.fit_low && a.fit_low >= 0.0)) fail("analysis fit band is empty");
  const auto& c = sc.coils;
  if (!(c.deviation_factor > 0.0)) fail("coils.deviation_factor must be positive");
  if (!(c.calibration_frequency > 0.0)) fail("coils.calibration_frequency must be positive");
  const auto& w = sc.sweep;
  if (!(w.f_start > 0.0 && w.f_stop > w.f_start && w.f_step > 0.0))
    fail("sweep needs 0 < f_start < f_stop and f_step > 0");
  const auto& e = sc.sensitivity;
  if (!(e.temperature > 0.0 && e.q_factor > 0.0)) fail("sensitivity temperature and Q must be positive");
  for (double v : e.radii) if (!(v > 0.0)) fail("sensitivity.radii must be positive");
  for (double v : e.f_res) if (!(v > 0.0)) fail("sensitivity.f_res must be positive");
  const auto& b = sc.bounds;
  if (!(b.eta > 0.0 && b.t_mea > 0.0)) fail("bounds.eta and t_mea must be positive");
  if (!(b.lambda_min > 0.0 && b.lambda_max > b.lambda_min)) fail("bounds lambda range is empty");
  if (b.points < 2) fail("bounds.points must be >= 2");
  if (!(b.thermal_temperature > 0.0 && b.thermal_q_factor > 0.0))
    fail("bounds thermal temperature and Q must be positive");
  for (double v : b.thermal_bias_fields)
    if (!(v > 0.0)) fail("bounds.thermal_bias_fields must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML syntax: ") + e.what());
  }
  RunConfig cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("top level must be a mapping");
  for (const auto& kv : root)
    if (kv.first.as<std::string>() != "scenarios")
      throw ConfigError(fmt::format("unknown key '{}'", kv.first.as<std::string>()));
  const auto list = root["scenarios"];
  if (!list || list.IsNull()) return cfg;
  if (!list.IsSequence()) throw ConfigError("'scenarios' must be a list");
  std::set<std::string> names;
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto sc = read_scenario(list[i], i);
    validate(sc);
    if (!names.insert(sc.name).second)
      throw ConfigError(fmt::format("duplicate scenario name '{}'", sc.name));
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

namespace {

nlohmann::ordered_json coil_json(const CoilPair& c) {
  const char* axis = c.axis == Axis::x ? "x" : c.axis == Axis::y ? "y" : "z";
  return {{"turns", c.turns}, {"diameter", c.diameter}, {"separation", c.separation}, {"axis", axis}};
}

}  // namespace

std::string scenario_json(const ScenarioConfig& sc) {
  using J = nlohmann::ordered_json;
  const auto& o = sc.oscillator;
  const auto p = o.resolve();
  J osc = {{"inertia", p.inertia()},   {"moment", p.moment()},
           {"q_factor", p.q_factor()}, {"f_res", p.f_res()},
           {"bias_field", p.bias_field()}, {"k_offset", p.k_offset()},
           {"magnet", {{"diameter", o.magnet.diameter}, {"height", o.magnet.height},
                       {"material", o.magnet.material}}}};
  const auto& m = sc.simulation;
  const auto& r = sc.readout;
  const auto& g = r.geometry;
  const auto& t = r.tracker;
  const auto& c = sc.coils;
  const auto& a = sc.analysis;
  const auto& w = sc.sweep;
  const auto& e = sc.sensitivity;
  const auto& b = sc.bounds;
  J j = {
      {"name", sc.name},
      {"seed", sc.seed},
      {"oscillator", osc},
      {"simulation", {{"temperature", m.temperature}, {"dt", m.dt}, {"duration", m.duration},
                      {"start_in_equilibrium", m.start_in_equilibrium},
                      {"integrator", m.integrator}}},
      {"readout", {{"path_length", g.path_length}, {"pixel_size", g.pixel_size},
                   {"frame_rate", g.frame_rate}, {"bit_depth", g.bit_depth},
                   {"spot_sigma", g.spot_sigma}, {"spot_peak", g.spot_peak},
                   {"background", g.background}, {"full_well", g.full_well},
                   {"width", g.width}, {"height", g.height}, {"spot_x0", g.spot_x0},
                   {"spot_y0", g.spot_y0}, {"jitter_sigma", r.jitter_sigma},
                   {"jitter_kind", r.jitter_kind}, {"photon_noise", r.photon_noise},
                   {"write_frames", r.write_frames},
                   {"max_written_frames", r.max_written_frames},
                   {"tracker", {{"threshold_sigma", t.threshold_sigma},
                                {"roi_halfwidth", t.roi_halfwidth},
                                {"quality_floor", t.quality_floor},
                                {"max_lost_frames", t.max_lost_frames},
                                {"min_noise_sigma", t.min_noise_sigma}}}}},
      {"coils", {{"signal", coil_json(c.signal)}, {"bias", coil_json(c.bias)},
                 {"deviation_factor", c.deviation_factor},
                 {"calibration_current", c.calibration_current},
                 {"calibration_frequency", c.calibration_frequency},
                 {"profile_offsets", c.profile_offsets}}},
      {"analysis", {{"segment_length", a.segment_length}, {"window", a.window},
                    {"overlap", a.overlap}, {"top_n", a.top_n},
                    {"halfwidth_bins", a.halfwidth_bins}, {"fit_low", a.fit_low},
                    {"fit_high", a.fit_high},
                    {"use_actual_timestamps", a.use_actual_timestamps}}},
      {"sweep", {{"f_start", w.f_start}, {"f_stop", w.f_stop}, {"f_step", w.f_step},
                 {"drive_amplitude", w.drive_amplitude}, {"min_duration", w.min_duration},
                 {"render_and_track", w.render_and_track}}},
      {"sensitivity", {{"material", e.material}, {"temperature", e.temperature},
                       {"q_factor", e.q_factor}, {"radii", e.radii}, {"f_res", e.f_res}}},
      {"bounds", {{"eta", b.eta}, {"t_mea", b.t_mea},
                  {"source", {{"solid_angle", b.source.solid_angle}, {"l0", b.source.l0},
                              {"lm", b.source.lm}, {"amplitude", b.source.amplitude},
                              {"f_n", b.source.f_n},
                              {"material", b.source.material.name()}}},
                  {"lambda_min", b.lambda_min}, {"lambda_max", b.lambda_max},
                  {"points", b.points}, {"thermal", b.thermal},
                  {"thermal_material", b.thermal_material},
                  {"thermal_temperature", b.thermal_temperature},
                  {"thermal_q_factor", b.thermal_q_factor},
                  {"thermal_bias_fields", b.thermal_bias_fields}}}};
  return j.dump(2);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fmto
