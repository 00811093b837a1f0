#include "fmto/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "fmto/error.hpp"

namespace fmto {

using nlohmann::json;

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw IoError("CSV has no column '" + name + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(fmt::format("{}:{}: not a number: '{}'", path.string(), line, s));
  }
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  t.header = split(line);
  t.columns.resize(t.header.size());
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw IoError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), n,
                                t.header.size(), cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i)
      t.columns[i].push_back(parse_double(cells[i], path, n));
  }
  return t;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  if (header.size() != columns.size()) throw IoError("header and column count differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
  for (const auto* c : columns)
    if (c->size() != rows) throw IoError("CSV columns differ in length");
  std::string out = fmt::format("{}\n", fmt::join(header, ","));
  out.reserve(rows * columns.size() * 24);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double((*columns[c])[r]);
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_angle_series_csv(const fs::path& path, const AngleSeries& s) {
  write_csv(path, {"time_s", "angle_rad"}, {&s.timestamps, &s.angles});
}

AngleSeries read_angle_series_csv(const fs::path& path) {
  const auto t = read_csv(path);
  AngleSeries s;
  s.timestamps = t.column("time_s");
  s.angles = t.column("angle_rad");
  if (s.size() >= 2) s.dt = s.duration() / static_cast<double>(s.size() - 1);
  return s;
}

namespace {

constexpr char series_magic[8] = {'F', 'M', 'T', 'O', 'A', 'S', '0', '1'};

static_assert(std::endian::native == std::endian::little, "binary format is little-endian");

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const fs::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw IoError(path.string() + ": truncated file");
  return v;
}

void put_array(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_array(std::ifstream& in, std::size_t n, const fs::path& path) {
  std::vector<double> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
    throw IoError(path.string() + ": truncated file");
  return v;
}

}  // namespace

void write_angle_series_binary(const fs::path& path, const AngleSeries& s) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(series_magic, sizeof series_magic);
  put<std::uint64_t>(out, s.size());
  put<std::uint64_t>(out, s.seed);
  put<double>(out, s.dt);
  const auto& p = s.params;
  for (double v : {p.inertia(), p.moment(), p.q_factor(), p.f_res(), p.k_offset()}) put(out, v);
  put<std::uint8_t>(out, s.angular_rates.empty() ? 0 : 1);
  put_array(out, s.timestamps);
  put_array(out, s.angles);
  if (!s.angular_rates.empty()) put_array(out, s.angular_rates);
  if (!out) throw IoError("write failed: " + path.string());
}

AngleSeries read_angle_series_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, series_magic, 8) != 0)
    throw IoError(path.string() + ": not an angle series file");
  AngleSeries s;
  const auto n = get<std::uint64_t>(in, path);
  s.seed = get<std::uint64_t>(in, path);
  s.dt = get<double>(in, path);
  double v[5];
  for (double& x : v) x = get<double>(in, path);
  s.params = OscillatorParams::from_frequency(v[0], v[1], v[2], v[3], v[4]);
  const bool rates = get<std::uint8_t>(in, path) != 0;
  s.timestamps = get_array(in, n, path);
  s.angles = get_array(in, n, path);
  if (rates) s.angular_rates = get_array(in, n, path);
  return s;
}

AngleSeries read_angle_series(const fs::path& path) {
  return path.extension() == ".csv" ? read_angle_series_csv(path)
                                    : read_angle_series_binary(path);
}

namespace {

json geometry_json(const ReadoutGeometry& g) {
  return {{"path_length", g.path_length}, {"pixel_size", g.pixel_size},
          {"frame_rate", g.frame_rate},   {"bit_depth", g.bit_depth},
          {"spot_sigma", g.spot_sigma},   {"spot_peak", g.spot_peak},
          {"background", g.background},   {"full_well", g.full_well},
          {"width", g.width},             {"height", g.height},
          {"spot_x0", g.spot_x0},         {"spot_y0", g.spot_y0}};
}

ReadoutGeometry geometry_from_json(const json& j) {
  ReadoutGeometry g;
  g.path_length = j.at("path_length");
  g.pixel_size = j.at("pixel_size");
  g.frame_rate = j.at("frame_rate");
  g.bit_depth = j.at("bit_depth");
  g.spot_sigma = j.at("spot_sigma");
  g.spot_peak = j.at("spot_peak");
  g.background = j.at("background");
  g.full_well = j.at("full_well");
  g.width = j.at("width");
  g.height = j.at("height");
  g.spot_x0 = j.at("spot_x0");
  g.spot_y0 = j.at("spot_y0");
  return g;
}

std::string frame_name(std::size_t index) { return fmt::format("frame_{:07d}.pgm", index); }

}  // namespace

void write_frames(const fs::path& dir, const FrameSequence& frames) {
  fs::create_directories(dir);
  const int maxval = frames.geometry.max_count();
  const bool wide = maxval > 255;
  const auto npx = static_cast<std::size_t>(frames.width) * static_cast<std::size_t>(frames.height);
  std::string buf;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    buf = fmt::format("P5\n{} {}\n{}\n", frames.width, frames.height, maxval);
    const auto px = frames.frame(i);
    for (std::size_t k = 0; k < npx; ++k) {
      if (wide) buf += static_cast<char>(px[k] >> 8);
      buf += static_cast<char>(px[k] & 0xff);
    }
    std::ofstream out(dir / frame_name(frames.first_index + i), std::ios::binary);
    out << buf;
    if (!out) throw IoError("cannot write frame " + std::to_string(i));
  }
  json j = {{"format", "pgm"},
            {"width", frames.width},
            {"height", frames.height},
            {"first_index", frames.first_index},
            {"count", frames.size()},
            {"geometry", geometry_json(frames.geometry)},
            {"nominal_timestamps", frames.nominal_timestamps},
            {"actual_timestamps", frames.actual_timestamps}};
  write_text(dir / "frames.json", j.dump(1) + "\n");
}

FrameSequence read_frames(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_text(dir / "frames.json"));
  } catch (const json::exception& e) {
    throw IoError(std::string("frames.json: ") + e.what());
  }
  FrameSequence f;
  f.width = j.at("width");
  f.height = j.at("height");
  f.first_index = j.at("first_index");
  f.geometry = geometry_from_json(j.at("geometry"));
  f.nominal_timestamps = j.at("nominal_timestamps").get<std::vector<double>>();
  f.actual_timestamps = j.at("actual_timestamps").get<std::vector<double>>();
  const std::size_t count = j.at("count");
  const auto npx = static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height);
  f.pixels.resize(count * npx);
  for (std::size_t i = 0; i < count; ++i) {
    const auto path = dir / frame_name(f.first_index + i);
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    if (!in || magic != "P5" || w != f.width || h != f.height)
      throw IoError(path.string() + ": bad PGM header");
    const bool wide = maxval > 255;
    std::vector<unsigned char> raw(npx * (wide ? 2 : 1));
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw IoError(path.string() + ": truncated PGM");
    auto* px = f.pixels.data() + i * npx;
    for (std::size_t k = 0; k < npx; ++k)
      px[k] = wide ? static_cast<std::uint16_t>(raw[2 * k] << 8 | raw[2 * k + 1]) : raw[k];
  }
  return f;
}

void write_track_csv(const fs::path& path, const SpotTrack& t) {
  write_csv(path, {"time_s", "position_px", "quality"}, {&t.timestamps, &t.positions, &t.quality});
}

SpotTrack read_track_csv(const fs::path& path) {
  const auto c = read_csv(path);
  SpotTrack t;
  t.timestamps = c.column("time_s");
  t.nominal_timestamps = t.timestamps;
  t.positions = c.column("position_px");
  t.quality = c.column("quality");
  t.positions_y.assign(t.positions.size(), 0.0);
  return t;
}

void write_sweep_csv(const fs::path& path, const SweepResult& s) {
  write_csv(path, {"freq_hz", "amp", "phase_rad"}, {&s.frequencies, &s.amplitudes, &s.phases});
}

SweepResult read_sweep_csv(const fs::path& path) {
  const auto c = read_csv(path);
  return {c.column("freq_hz"), c.column("amp"), c.column("phase_rad")};
}

void write_spectrum_csv(const fs::path& path, const SpectrumEstimate& s) {
  write_csv(path, {"freq_hz", "psd"}, {&s.frequencies, &s.psd});
}

SpectrumEstimate read_spectrum_csv(const fs::path& path) {
  const auto c = read_csv(path);
  SpectrumEstimate s;
  s.frequencies = c.column("freq_hz");
  s.psd = c.column("psd");
  if (s.frequencies.size() < 2) throw IoError(path.string() + ": spectrum needs two bins");
  s.bin_width = s.frequencies[1] - s.frequencies[0];
  s.n_segments_used = 1;
  return s;
}

void write_fit_json(const fs::path& path, const LorentzianFit& fit) {
  json cov = json::array();
  for (const auto& row : fit.covariance) cov.push_back(row);
  const json j = {{"model", "peak*(f_r^2/Q)^2/((f_r^2-f^2)^2+(f*f_r/Q)^2)+offset"},
                  {"parameters", {"f_r", "q_factor", "peak_amplitude", "noise_offset"}},
                  {"f_r", fit.params.f_r},
                  {"q_factor", fit.params.q_factor},
                  {"peak_amplitude", fit.params.peak_amplitude},
                  {"noise_offset", fit.params.noise_offset},
                  {"sigma", {fit.sigma(0), fit.sigma(1), fit.sigma(2), fit.sigma(3)}},
                  {"covariance", cov},
                  {"residual_norm", fit.residual_norm},
                  {"iterations", fit.iterations}};
  write_text(path, j.dump(2) + "\n");
}

void write_sensitivity_csv(const fs::path& path, const SensitivityCurve& c) {
  std::string out = "freq_hz,eta_T_per_rtHz,provenance\n";
  const auto tag = to_string(c.provenance);
  for (std::size_t i = 0; i < c.size(); ++i)
    out += fmt::format("{},{},{}\n", format_double(c.frequencies[i]), format_double(c.eta[i]), tag);
  write_text(path, out);
}

void write_bounds_csv(const fs::path& path, const std::vector<CouplingBound>& bounds) {
  std::vector<double> l, d;
  for (const auto& b : bounds) {
    l.push_back(b.lambda);
    d.push_back(b.delta_f45);
  }
  write_csv(path, {"lambda_m", "delta_f45"}, {&l, &d});
}

}  // namespace fmto
