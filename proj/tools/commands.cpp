#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>

#include <fmt/format.h>
#include <json.hpp>

#include "fmto/calibration.hpp"
#include "fmto/coils.hpp"
#include "fmto/exotic.hpp"
#include "fmto/io.hpp"
#include "fmto/lockin.hpp"
#include "fmto/version.hpp"

namespace fmto::cli {

using Json = nlohmann::ordered_json;

void Context::log(const std::string& msg) const {
  if (verbose) fmt::print(stderr, "[{}] {}\n", scenario.name, msg);
}

namespace {

RenderOptions render_options(const ScenarioConfig& sc) {
  RenderOptions o;
  o.jitter_sigma = sc.readout.jitter_sigma;
  o.jitter_kind = sc.readout.jitter_kind == "uniform" ? JitterKind::uniform : JitterKind::gaussian;
  o.photon_noise = sc.readout.photon_noise;
  o.seed = mix_seed(sc.seed, 1);
  return o;
}

double calibration_field(const ScenarioConfig& sc) {
  return center_field_coefficient(sc.coils.signal) * sc.coils.deviation_factor *
         sc.coils.calibration_current;
}

AngleSeries simulate_scenario(const Context& ctx) {
  const auto& sc = ctx.scenario;
  const auto params = sc.oscillator.resolve();
  const auto drive = signal_drive(sc.coils.signal, sc.coils.calibration_current,
                                  sc.coils.calibration_frequency, sc.coils.deviation_factor);
  SimulationOptions o;
  o.temperature = sc.simulation.temperature;
  o.dt = sc.simulation.dt;
  o.duration = sc.simulation.duration;
  o.seed = sc.seed;
  o.start_in_equilibrium = sc.simulation.start_in_equilibrium;
  o.integrator = sc.simulation.integrator == "euler_maruyama" ? Integrator::euler_maruyama
                                                              : Integrator::exact;
  ctx.log(fmt::format("simulating {} s at dt = {} s (f_r = {:.4g} Hz, Q = {:.4g})", o.duration,
                      o.dt, params.f_res(), params.q_factor()));
  return simulate(params, drive, o);
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json fit_summary(const LorentzianFit& fit) {
  return {{"f_r", fit.params.f_r},
          {"f_r_sigma", fit.sigma(0)},
          {"q_factor", fit.params.q_factor},
          {"q_factor_sigma", fit.sigma(1)},
          {"peak_amplitude", fit.params.peak_amplitude},
          {"noise_offset", fit.params.noise_offset}};
}

SensitivityCurve flat_curve(const std::vector<double>& freqs, Provenance prov,
                            const std::function<double(double)>& eta) {
  SensitivityCurve c;
  c.provenance = prov;
  for (double f : freqs) {
    if (!(f > 0.0)) continue;
    c.frequencies.push_back(f);
    c.eta.push_back(eta(f));
  }
  return c;
}

}  // namespace

std::vector<std::string> cmd_simulate(const Context& ctx) {
  const auto& sc = ctx.scenario;
  const auto series = simulate_scenario(ctx);
  std::vector<std::string> files;
  write_angle_series_binary(ctx.dir / "angles.bin", series);
  files.push_back("angles.bin");
  if (series.size() <= 100000) {
    write_angle_series_csv(ctx.dir / "angles.csv", series);
    files.push_back("angles.csv");
  }
  if (sc.readout.write_frames) {
    const auto n = std::min(frame_count(series, sc.readout.geometry), sc.readout.max_written_frames);
    ctx.log(fmt::format("rendering {} frames", n));
    const auto frames = render_frames(series, sc.readout.geometry, render_options(sc), 0, n);
    write_frames(ctx.dir / "frames", frames);
    files.push_back("frames/frames.json");
    for (std::size_t i = 0; i < frames.size(); ++i)
      files.push_back(fmt::format("frames/frame_{:07d}.pgm", i));
  }
  return files;
}

namespace {

struct Series {
  std::vector<double> t;
  std::vector<double> x;
  std::string units;
};

Series load_input(const fs::path& path) {
  if (path.extension() != ".csv") {
    auto s = read_angle_series_binary(path);
    return {std::move(s.timestamps), std::move(s.angles), "rad"};
  }
  const auto table = read_csv(path);
  for (const auto& h : table.header) {
    if (h == "position_px") {
      auto track = read_track_csv(path);
      return {std::move(track.timestamps), std::move(track.positions), "px"};
    }
    if (h == "angle_rad") {
      auto s = read_angle_series_csv(path);
      return {std::move(s.timestamps), std::move(s.angles), "rad"};
    }
  }
  throw IoError(path.string() + ": expected a track (position_px) or angle series (angle_rad)");
}

}  // namespace

std::vector<std::string> cmd_analyze(const Context& ctx) {
  if (!ctx.input) throw PreconditionError("analyze needs --input");
  const auto& sc = ctx.scenario;
  const auto& a = sc.analysis;
  const auto data = load_input(*ctx.input);
  ctx.log(fmt::format("analyzing {} samples from {}", data.t.size(), ctx.input->string()));
  const auto welch =
      welch_psd(data.t, data.x, {a.segment_length, window_from_string(a.window), a.overlap});

  SpectrumEstimate avg = welch.average;
  Json summary = {{"input", ctx.input->filename().string()},
                  {"units", data.units},
                  {"segments_total", welch.segments.size()}};
  const double f_cal = sc.coils.calibration_frequency;
  if (a.top_n <= welch.segments.size()) {
    const auto sel = select_segments_by_snr(welch.segments, f_cal, a.top_n);
    avg = sel.average;
    summary["segments_used"] = sel.selected;
  }
  std::vector<std::string> files;
  write_spectrum_csv(ctx.dir / "spectrum.csv", avg);
  files.push_back("spectrum.csv");
  const auto fit = fit_lorentzian(avg, a.fit_low, a.fit_high);
  write_fit_json(ctx.dir / "fit.json", fit);
  files.push_back("fit.json");
  summary["fit"] = fit_summary(fit);
  write_json(ctx.dir / "analysis.json", summary);
  files.push_back("analysis.json");
  return files;
}

std::vector<std::string> cmd_calibrate(const Context& ctx) {
  const auto& sc = ctx.scenario;
  const auto& a = sc.analysis;
  const auto& g = sc.readout.geometry;
  const auto params = sc.oscillator.resolve();
  const auto series = simulate_scenario(ctx);

  ctx.log(fmt::format("rendering and tracking {} frames", frame_count(series, g)));
  const auto track = render_and_track(series, g, render_options(sc), sc.readout.tracker);
  const auto& t = a.use_actual_timestamps ? track.timestamps : track.nominal_timestamps;
  const auto welch =
      welch_psd(t, track.positions, {a.segment_length, window_from_string(a.window), a.overlap});
  const double f_cal = sc.coils.calibration_frequency;
  const auto sel = select_segments_by_snr(welch.segments, f_cal, a.top_n);
  ctx.log(fmt::format("selected {} of {} segments", sel.selected.size(), welch.segments.size()));

  const auto area = peak_area(sel.average, f_cal, a.halfwidth_bins,
                              Resonance{params.f_res(), params.q_factor()});
  const double b_cal = calibration_field(sc);
  const auto cal = transfer_from_calibration(area.area, b_cal, 0.0, coil_uncertainty);
  const auto fit = fit_lorentzian(sel.average, a.fit_low, a.fit_high);
  const auto fitted = OscillatorParams::from_frequency(params.inertia(), params.moment(),
                                                       fit.params.q_factor, fit.params.f_r,
                                                       params.k_offset());
  const TransferFunction tf{cal.value, f_cal, fitted, cal.uncertainty};

  std::vector<std::string> files;
  write_spectrum_csv(ctx.dir / "spectrum.csv", sel.average);
  files.push_back("spectrum.csv");
  write_fit_json(ctx.dir / "fit.json", fit);
  files.push_back("fit.json");

  const auto measured = sensitivity_from_noise(sel.average, tf, Provenance::measured);
  write_sensitivity_csv(ctx.dir / "sensitivity.csv", measured);
  files.push_back("sensitivity.csv");
  const double eta_th = thermal_limit_sensitivity(params, sc.simulation.temperature);
  write_sensitivity_csv(ctx.dir / "sensitivity_thermal.csv",
                        flat_curve(measured.frequencies, Provenance::thermal_limit,
                                   [&](double) { return eta_th; }));
  files.push_back("sensitivity_thermal.csv");
  const double floor_psd = expected_centroid_noise_psd(g, sc.readout.tracker);
  write_sensitivity_csv(ctx.dir / "sensitivity_floor.csv",
                        flat_curve(measured.frequencies, Provenance::measurement_floor,
                                   [&](double f) { return std::sqrt(floor_psd) / tf(f); }));
  files.push_back("sensitivity_floor.csv");

  const double theory = theoretical_transfer(params, g, f_cal);
  const auto k_res = static_cast<std::size_t>(
      std::lower_bound(measured.frequencies.begin(), measured.frequencies.end(),
                       fit.params.f_r) - measured.frequencies.begin());
  Json j = {{"f_cal_hz", f_cal},
            {"b_cal_t", b_cal},
            {"a_cal_px2", area.area},
            {"c_at_cal_px_per_t", cal.value},
            {"c_at_cal_px_per_ft", cal.value * 1e-15},
            {"c_relative_uncertainty", cal.uncertainty},
            {"c_theory_px_per_t", theory},
            {"c_ratio_to_theory", cal.value / theory},
            {"segments_total", welch.segments.size()},
            {"segments_used", sel.selected.size()},
            {"fit", fit_summary(fit)},
            {"eta_at_resonance_t_per_rthz", measured.eta[std::min(k_res, measured.size() - 1)]},
            {"eta_thermal_limit_t_per_rthz", eta_th}};
  write_json(ctx.dir / "transfer.json", j);
  files.push_back("transfer.json");
  return files;
}

std::vector<std::string> cmd_sweep(const Context& ctx) {
  const auto& sc = ctx.scenario;
  const auto& w = sc.sweep;
  const auto params = sc.oscillator.resolve();
  SweepSettings s;
  s.temperature = sc.simulation.temperature;
  s.dt = sc.simulation.dt;
  s.min_duration = w.min_duration;
  s.seed = sc.seed;
  s.geometry = sc.readout.geometry;
  s.render_and_track = w.render_and_track;
  s.render = render_options(sc);
  s.tracker = sc.readout.tracker;
  const auto grid = linear_grid(w.f_start, w.f_stop, w.f_step);
  ctx.log(fmt::format("sweeping {} frequencies", grid.size()));
  const auto sweep = frequency_sweep(params, w.drive_amplitude, grid, s);
  std::vector<std::string> files;
  write_sweep_csv(ctx.dir / "sweep.csv", sweep);
  files.push_back("sweep.csv");
  const auto fit = fit_lorentzian(sweep);
  write_fit_json(ctx.dir / "sweep_fit.json", fit);
  files.push_back("sweep_fit.json");
  return files;
}

std::vector<std::string> cmd_sensitivity(const Context& ctx) {
  const auto& sc = ctx.scenario;
  const auto& e = sc.sensitivity;
  const auto mat = MaterialProperties::preset(e.material);
  std::vector<double> radius, freq, bias, eta;
  for (double f : e.f_res) {
    for (double r : e.radii) {
      const double b = sphere_bias_for_frequency(r, mat, f);
      radius.push_back(r);
      freq.push_back(f);
      bias.push_back(b);
      eta.push_back(thermal_limit_sensitivity(mat, r, b, e.temperature, e.q_factor));
    }
  }
  std::vector<std::string> files;
  write_csv(ctx.dir / "thermal_limit.csv",
            {"radius_m", "f_res_hz", "bias_field_t", "eta_T_per_rtHz"},
            {&radius, &freq, &bias, &eta});
  files.push_back("thermal_limit.csv");

  const auto params = sc.oscillator.resolve();
  const double eta_osc = thermal_limit_sensitivity(params, sc.simulation.temperature);
  const auto grid = log_grid(1e-2, 0.5 / sc.simulation.dt, 200);
  write_sensitivity_csv(ctx.dir / "sensitivity_thermal.csv",
                        flat_curve(grid, Provenance::thermal_limit,
                                   [&](double) { return eta_osc; }));
  files.push_back("sensitivity_thermal.csv");
  return files;
}

std::vector<std::string> cmd_bounds(const Context& ctx) {
  const auto& b = ctx.scenario.bounds;
  const auto lambdas = log_grid(b.lambda_min, b.lambda_max, b.points);
  std::vector<std::string> files;
  write_bounds_csv(ctx.dir / "bounds.csv", coupling_bound_curve(b.source, lambdas, b.eta, b.t_mea));
  files.push_back("bounds.csv");
  if (b.thermal) {
    const auto mat = MaterialProperties::preset(b.thermal_material);
    for (double field : b.thermal_bias_fields) {
      const auto name = fmt::format("bounds_thermal_{:g}T.csv", field);
      write_bounds_csv(ctx.dir / name,
                       thermal_bound_curve(mat, field, b.thermal_temperature, b.thermal_q_factor,
                                           b.source, lambdas, b.t_mea));
      files.push_back(name);
    }
  }
  return files;
}

std::vector<std::string> cmd_coils(const Context& ctx) {
  const auto& c = ctx.scenario.coils;
  const double k_sig = center_field_coefficient(c.signal);
  const double k_bias = center_field_coefficient(c.bias);
  const double half = 10e-3;
  Json j = {
      {"signal", {{"turns", c.signal.turns}, {"diameter_m", c.signal.diameter},
                  {"separation_m", c.signal.separation}, {"coefficient_t_per_a", k_sig},
                  {"nonuniformity_pm10mm", field_nonuniformity(c.signal, half)}}},
      {"bias", {{"turns", c.bias.turns}, {"diameter_m", c.bias.diameter},
                {"separation_m", c.bias.separation}, {"coefficient_t_per_a", k_bias},
                {"nonuniformity_pm10mm", field_nonuniformity(c.bias, half)}}},
      {"deviation_factor", c.deviation_factor},
      {"relative_uncertainty", coil_uncertainty},
      {"calibration_current_a", c.calibration_current},
      {"calibration_field_t", calibration_field(ctx.scenario)}};
  std::vector<std::string> files;
  write_json(ctx.dir / "coils.json", j);
  files.push_back("coils.json");
  const auto sig = field_profile(c.signal, c.profile_offsets);
  const auto bias = field_profile(c.bias, c.profile_offsets);
  write_csv(ctx.dir / "coil_profile.csv", {"offset_m", "signal_t_per_a", "bias_t_per_a"},
            {&c.profile_offsets, &sig, &bias});
  files.push_back("coil_profile.csv");

  fmt::print("{}: signal pair {:.6g} nT/mA, bias pair {:.6g} uT/mA, calibration field {:.6g} pT\n",
             ctx.scenario.name, k_sig * 1e6, k_bias * 1e3, calibration_field(ctx.scenario) * 1e12);
  return files;
}

void write_manifest(const Context& ctx, const std::string& command,
                    const std::vector<std::string>& files) {
  const auto config = scenario_json(ctx.scenario);
  Json list = Json::array();
  for (const auto& f : files) {
    const auto text = read_text(ctx.dir / f);
    list.push_back({{"name", f}, {"bytes", text.size()}, {"fnv1a", fmt::format("{:016x}", fnv1a(text))}});
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json j = {{"tool", "fmto"},
            {"version", version},
            {"command", command},
            {"scenario", ctx.scenario.name},
            {"seed", ctx.scenario.seed},
            {"config_hash", fmt::format("{:016x}", fnv1a(config))},
            {"config", Json::parse(config)},
            {"created", stamp},
            {"files", list}};
  if (ctx.input) j["input"] = ctx.input->string();
  write_json(ctx.dir / "manifest.json", j);
}

}  // namespace fmto::cli
