#include "fosl/io.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace fosl {

using json = nlohmann::ordered_json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

enum class Kind { Angle, Speed, Rocof };

struct Column {
  std::size_t machine;
  Kind kind;
  double scale;
};

Column parse_header_field(const std::string& field, std::map<std::string, std::size_t>& index,
                          std::vector<std::string>& labels, const std::string& source) {
  const auto unit_sep = field.rfind(':');
  if (unit_sep == std::string::npos || unit_sep == 0) {
    parse_fail(source, 1, "column '" + field + "' is not <label>:<kind>:<unit>");
  }
  const auto kind_sep = field.rfind(':', unit_sep - 1);
  if (kind_sep == std::string::npos || kind_sep == 0) {
    parse_fail(source, 1, "column '" + field + "' is not <label>:<kind>:<unit>");
  }
  const std::string label = field.substr(0, kind_sep);
  const std::string kind = field.substr(kind_sep + 1, unit_sep - kind_sep - 1);
  const std::string unit = field.substr(unit_sep + 1);

  Column col{};
  auto bad_unit = [&]() {
    throw Error(ErrorCode::UnitError,
                source + ":1: unknown unit '" + unit + "' for " + kind + " column of '" + label + "'");
  };
  if (kind == "angle") {
    col.kind = Kind::Angle;
    if (unit == "rad") col.scale = 1.0;
    else if (unit == "deg") col.scale = std::numbers::pi / 180.0;
    else bad_unit();
  } else if (kind == "speed") {
    col.kind = Kind::Speed;
    if (unit == "radps") col.scale = 1.0;
    else if (unit == "hz") col.scale = kTwoPi;
    else bad_unit();
  } else if (kind == "rocof") {
    col.kind = Kind::Rocof;
    if (unit == "radps2") col.scale = 1.0;
    else if (unit == "hzps") col.scale = kTwoPi;
    else bad_unit();
  } else {
    parse_fail(source, 1, "unknown channel kind '" + kind + "'");
  }
  auto [it, inserted] = index.emplace(label, labels.size());
  if (inserted) labels.push_back(label);
  col.machine = it->second;
  return col;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

// JSON helpers. Every lookup failure becomes a ParseError naming the key.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) fail("unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) const {
    if (!j_.contains(key)) fail("missing key '" + std::string(key) + "'");
    return j_.at(key);
  }

  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) fail("'" + std::string(key) + "' must be a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const char* key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer()) fail("'" + std::string(key) + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail("'" + std::string(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) fail("'" + std::string(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  std::vector<double> numbers(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) fail("'" + std::string(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail("'" + std::string(key) + "' must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  // A number broadcast to n entries, or an array of exactly n numbers.
  std::vector<double> per_machine(const char* key, std::size_t n) const {
    if (at(key).is_number()) return std::vector<double>(n, number(key));
    auto v = numbers(key);
    if (v.size() != n) fail("'" + std::string(key) + "' needs " + std::to_string(n) + " entries");
    return v;
  }

  Matrix square(const char* key, std::size_t n) const {
    const json& v = at(key);
    const auto nn = static_cast<Eigen::Index>(n);
    if (v.is_number()) return Matrix::Constant(nn, nn, v.get<double>());
    if (!v.is_array() || v.size() != n) fail("'" + std::string(key) + "' must be " +
                                             std::to_string(n) + " x " + std::to_string(n));
    Matrix out(nn, nn);
    for (std::size_t i = 0; i < n; ++i) {
      const json& row = v[i];
      if (!row.is_array() || row.size() != n) fail("'" + std::string(key) + "' row " +
                                                   std::to_string(i) + " has the wrong length");
      for (std::size_t k = 0; k < n; ++k) {
        if (!row[k].is_number()) fail("'" + std::string(key) + "' entries must be numbers");
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
      }
    }
    return out;
  }

  Reader child(const char* key) const { return Reader(at(key), where_ + "." + key); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, where_ + ": " + what);
  }

 private:
  const json& j_;
  std::string where_;
};

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

template <typename E>
E enum_from(const Reader& rd, const char* key, E fallback,
            std::initializer_list<std::pair<const char*, E>> names) {
  if (!rd.has(key)) return fallback;
  const std::string v = rd.text(key);
  for (const auto& [name, value] : names) {
    if (v == name) return value;
  }
  rd.fail("invalid value '" + v + "' for '" + key + "'");
}

template <typename E>
const char* enum_name(E value, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "";
}

const std::initializer_list<std::pair<const char*, LambdaMode>> kLambdaModes = {
    {"fixed", LambdaMode::Fixed}, {"sparsity", LambdaMode::Sparsity}};
const std::initializer_list<std::pair<const char*, ScanDirection>> kDirections = {
    {"forward", ScanDirection::Forward}, {"bidirectional", ScanDirection::Bidirectional}};
const std::initializer_list<std::pair<const char*, Aggregation>> kPolicies = {
    {"union", Aggregation::Union}, {"intersection", Aggregation::Intersection}};
const std::initializer_list<std::pair<const char*, ScanChannels>> kChannels = {
    {"speed", ScanChannels::Speed}, {"angle", ScanChannels::Angle}, {"both", ScanChannels::Both}};
const std::initializer_list<std::pair<const char*, DerivativeSource>> kSources = {
    {"finite-difference", DerivativeSource::FiniteDifference}, {"rocof", DerivativeSource::Rocof}};
const std::initializer_list<std::pair<const char*, OutlierAxis>> kAxes = {
    {"flat", OutlierAxis::Flat}, {"per-row", OutlierAxis::PerRow}};

json config_json(const PipelineConfig& c) {
  const auto& z = c.candidates.zscore;
  return json{
      {"lambda", c.lambda},
      {"lambda_mode", enum_name(c.lambda_mode, kLambdaModes)},
      {"sparsity_target", c.sparsity_target},
      {"zscore",
       {{"lag", z.lag},
        {"threshold", z.threshold},
        {"influence", z.influence},
        {"direction", enum_name(z.direction, kDirections)}}},
      {"aggregation",
       {{"policy", enum_name(c.candidates.policy, kPolicies)},
        {"quorum", c.candidates.quorum}}},
      {"scan_channels", enum_name(c.candidates.channels, kChannels)},
      {"window_seconds", c.window_seconds},
      {"derivative_source", enum_name(c.derivative_source, kSources)},
      {"prefilter_width", c.prefilter_width},
      {"outlier_axis", enum_name(c.outlier_axis, kAxes)},
      {"unlocatable_spread", c.unlocatable_spread},
      {"seed", c.seed},
  };
}

PipelineConfig config_from(const Reader& rd) {
  rd.only({"lambda", "lambda_mode", "sparsity_target", "zscore", "aggregation", "scan_channels",
           "window_seconds", "derivative_source", "prefilter_width", "outlier_axis",
           "unlocatable_spread", "seed"});
  PipelineConfig c;
  c.lambda = rd.number("lambda", c.lambda);
  c.lambda_mode = enum_from(rd, "lambda_mode", c.lambda_mode, kLambdaModes);
  c.sparsity_target = rd.number("sparsity_target", c.sparsity_target);
  if (rd.has("zscore")) {
    const Reader z = rd.child("zscore");
    z.only({"lag", "threshold", "influence", "direction"});
    auto& p = c.candidates.zscore;
    p.lag = static_cast<int>(z.integer("lag", p.lag));
    p.threshold = z.number("threshold", p.threshold);
    p.influence = z.number("influence", p.influence);
    p.direction = enum_from(z, "direction", p.direction, kDirections);
  }
  if (rd.has("aggregation")) {
    const Reader a = rd.child("aggregation");
    a.only({"policy", "quorum"});
    c.candidates.policy = enum_from(a, "policy", c.candidates.policy, kPolicies);
    c.candidates.quorum = a.number("quorum", c.candidates.quorum);
  }
  c.candidates.channels = enum_from(rd, "scan_channels", c.candidates.channels, kChannels);
  c.window_seconds = rd.number("window_seconds", c.window_seconds);
  c.derivative_source = enum_from(rd, "derivative_source", c.derivative_source, kSources);
  c.prefilter_width = static_cast<int>(rd.integer("prefilter_width", c.prefilter_width));
  c.outlier_axis = enum_from(rd, "outlier_axis", c.outlier_axis, kAxes);
  c.unlocatable_spread = rd.number("unlocatable_spread", c.unlocatable_spread);
  c.seed = rd.unsigned_integer("seed", c.seed);
  try {
    validate_config(c);
  } catch (const Error& e) {
    rd.fail(e.what());
  }
  return c;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read from '" + path + "' failed");
  return buf.str();
}

PmuData parse_pmu_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) parse_fail(source, line_no, "missing header row");
  if (header[0] != "time_s") parse_fail(source, line_no, "first column must be 'time_s'");

  std::map<std::string, std::size_t> index;
  std::vector<std::string> labels;
  std::vector<Column> columns;
  for (std::size_t c = 1; c < header.size(); ++c) {
    columns.push_back(parse_header_field(header[c], index, labels, source));
  }
  const std::size_t r = labels.size();
  std::vector<std::array<int, 3>> seen(r, {0, 0, 0});
  for (const auto& col : columns) ++seen[col.machine][static_cast<int>(col.kind)];
  std::size_t with_rocof = 0;
  for (std::size_t j = 0; j < r; ++j) {
    if (seen[j][0] != 1 || seen[j][1] != 1 || seen[j][2] > 1) {
      parse_fail(source, line_no,
                 "machine '" + labels[j] + "' needs exactly one angle and one speed column");
    }
    with_rocof += static_cast<std::size_t>(seen[j][2]);
  }
  if (with_rocof != 0 && with_rocof != r) {
    parse_fail(source, line_no, "ROCOF columns must be given for every machine or none");
  }

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      parse_fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                      std::to_string(fields.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const char* begin = fields[c].c_str();
      char* end = nullptr;
      values[c] = std::strtod(begin, &end);
      if (fields[c].empty() || end != begin + fields[c].size()) {
        parse_fail(source, line_no, "field " + std::to_string(c + 1) + " ('" + fields[c] +
                                        "') is not a number");
      }
    }
    times.push_back(values[0]);
    rows.push_back(std::move(values));
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  if (m < 4) {
    throw Error(ErrorCode::TooShort,
                source + ": " + std::to_string(m) + " samples, at least 4 required");
  }
  const auto rr = static_cast<Eigen::Index>(r);
  RawSamples raw;
  raw.labels = labels;
  raw.angles.resize(m, rr);
  raw.speeds.resize(m, rr);
  Matrix rocof(with_rocof ? m : 0, with_rocof ? rr : 0);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& values = rows[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& col = columns[c];
      const double v = values[c + 1] * col.scale;
      const auto j = static_cast<Eigen::Index>(col.machine);
      switch (col.kind) {
        case Kind::Angle: raw.angles(k, j) = v; break;
        case Kind::Speed: raw.speeds(k, j) = v; break;
        case Kind::Rocof: rocof(k, j) = v; break;
      }
    }
  }

  const double span = times.back() - times.front();
  if (!(span > 0.0)) {
    throw Error(ErrorCode::NonUniformSampling, source + ": timestamps do not increase");
  }
  double rate = static_cast<double>(m - 1) / span;
  // Integer PMU rates survive the decimal round trip exactly.
  if (std::abs(rate - std::round(rate)) <= 1e-9 * rate) rate = std::round(rate);
  raw.timestamps = std::move(times);

  PmuData data{validate_window(std::move(raw), rate), std::nullopt};
  if (with_rocof) data.rocof = std::move(rocof);
  return data;
}

PmuData load_pmu_data(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return parse_pmu_csv(in, path);
}

MeasurementWindow load_pmu_csv(const std::string& path) { return load_pmu_data(path).window; }

void write_window_csv(std::ostream& out, const MeasurementWindow& window,
                      const std::optional<Matrix>& rocof) {
  const Eigen::Index m = window.samples();
  const Eigen::Index r = window.machines();
  if (rocof && (rocof->rows() != m || rocof->cols() != r)) {
    throw Error(ErrorCode::ShapeMismatch, "ROCOF block shape differs from the window");
  }
  for (const auto& label : window.labels()) {
    if (label.find_first_of(",\n\r") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "label '" + label + "' cannot be written to CSV");
    }
  }
  out << "time_s";
  for (const auto& label : window.labels()) {
    out << ',' << label << ":angle:rad," << label << ":speed:radps";
    if (rocof) out << ',' << label << ":rocof:radps2";
  }
  out << '\n';
  for (Eigen::Index k = 0; k < m; ++k) {
    out << fmt17(window.timestamps()(k));
    for (Eigen::Index j = 0; j < r; ++j) {
      out << ',' << fmt17(window.angles()(k, j)) << ',' << fmt17(window.speeds()(k, j));
      if (rocof) out << ',' << fmt17((*rocof)(k, j));
    }
    out << '\n';
  }
}

void write_window_csv(const std::string& path, const MeasurementWindow& window,
                      const std::optional<Matrix>& rocof) {
  auto out = open_output(path);
  write_window_csv(out, window, rocof);
  finish_output(out, path);
}

PipelineConfig parse_config(const std::string& json_text) {
  const json j = parse_json(json_text, "config");
  return config_from(Reader(j, "config"));
}

PipelineConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string config_to_json(const PipelineConfig& config) { return config_json(config).dump(2) + "\n"; }

Scenario parse_scenario(const std::string& json_text) {
  const json j = parse_json(json_text, "scenario");
  const Reader top(j, "scenario");
  top.only({"description", "model", "forcings", "simulation"});

  const Reader md = top.child("model");
  md.only({"labels", "inertia", "inertia_constant_s", "nominal_frequency_hz", "damping",
           "damping_per_inertia", "emf", "mech_power", "operating_angles",
           "admittance_magnitude", "admittance_angle", "self_conductance", "sigma_load",
           "conductance_drift"});
  GridModelParams p;
  {
    const json& labels = md.at("labels");
    if (!labels.is_array()) md.fail("'labels' must be an array of strings");
    for (const auto& l : labels) {
      if (!l.is_string()) md.fail("'labels' must be an array of strings");
      p.labels.push_back(l.get<std::string>());
    }
  }
  const std::size_t r = p.labels.size();
  if (r == 0) md.fail("'labels' is empty");
  if (md.has("inertia") == md.has("inertia_constant_s")) {
    md.fail("give exactly one of 'inertia' and 'inertia_constant_s'");
  }
  if (md.has("inertia")) {
    p.inertia = md.per_machine("inertia", r);
  } else {
    const double f0 = md.number("nominal_frequency_hz", 60.0);
    for (double h : md.per_machine("inertia_constant_s", r)) p.inertia.push_back(2.0 * h / (kTwoPi * f0));
  }
  if (md.has("damping") == md.has("damping_per_inertia")) {
    md.fail("give exactly one of 'damping' and 'damping_per_inertia'");
  }
  if (md.has("damping")) {
    p.damping = md.per_machine("damping", r);
  } else {
    const double k = md.number("damping_per_inertia");
    for (double mi : p.inertia) p.damping.push_back(k * mi);
  }
  p.emf = md.per_machine("emf", r);
  p.admittance_magnitude = md.square("admittance_magnitude", r);
  p.admittance_angle = md.square("admittance_angle", r);
  if (md.has("self_conductance")) {
    const auto g = md.per_machine("self_conductance", r);
    for (std::size_t i = 0; i < r; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      p.admittance_magnitude(ii, ii) = g[i];
      p.admittance_angle(ii, ii) = 0.0;
    }
  }
  p.sigma_load = md.has("sigma_load") ? md.per_machine("sigma_load", r)
                                      : std::vector<double>(r, 0.0);
  if (md.has("conductance_drift")) {
    const Reader d = md.child("conductance_drift");
    d.only({"std_dev", "time_constant_s"});
    p.drift.std_dev = d.number("std_dev", 0.0);
    p.drift.time_constant_s = d.number("time_constant_s", p.drift.time_constant_s);
  }
  if (md.has("mech_power") == md.has("operating_angles")) {
    md.fail("give exactly one of 'mech_power' and 'operating_angles'");
  }
  std::optional<Vector> operating;
  if (md.has("mech_power")) {
    p.mech_power = md.per_machine("mech_power", r);
  } else {
    const auto angles = md.per_machine("operating_angles", r);
    operating = Eigen::Map<const Vector>(angles.data(), static_cast<Eigen::Index>(r));
    p.mech_power.assign(r, 0.0);
  }
  GridModel model(std::move(p));
  if (operating) model = model.balanced_at(*operating);

  SimulationOptions options;
  if (top.has("simulation")) {
    const Reader s = top.child("simulation");
    s.only({"duration_s", "output_rate_hz", "internal_dt_s", "warmup_s", "seed", "initial_angles"});
    options.duration_s = s.number("duration_s", options.duration_s);
    options.output_rate_hz = s.number("output_rate_hz", options.output_rate_hz);
    options.internal_dt_s = s.number("internal_dt_s", options.internal_dt_s);
    options.warmup_s = s.number("warmup_s", options.warmup_s);
    options.seed = s.unsigned_integer("seed", options.seed);
    if (s.has("initial_angles")) {
      const auto a = s.per_machine("initial_angles", r);
      options.initial_angles = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(r));
    }
  }
  if (operating && !options.initial_angles) options.initial_angles = operating;

  std::vector<ForcingSpec> forcings;
  if (top.has("forcings")) {
    const json& list = top.at("forcings");
    if (!list.is_array()) top.fail("'forcings' must be an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Reader f(list[k], "scenario.forcings[" + std::to_string(k) + "]");
      f.only({"target", "waveform", "amplitude", "amplitude_pm_fraction", "frequency_hz",
              "phase_rad", "start_s", "end_s", "switch"});
      ForcingSpec spec;
      spec.target = f.text("target");
      const int target = [&] {
        try {
          return model.index_of(spec.target);
        } catch (const Error& e) {
          f.fail(e.what());
        }
      }();
      const double pm = std::abs(model.mech_power()(target));
      auto amplitude = [&](const Reader& rd) {
        if (rd.has("amplitude") == rd.has("amplitude_pm_fraction")) {
          rd.fail("give exactly one of 'amplitude' and 'amplitude_pm_fraction'");
        }
        return rd.has("amplitude") ? rd.number("amplitude") : rd.number("amplitude_pm_fraction") * pm;
      };
      const std::string wave = f.text("waveform", "sine");
      if (wave == "sine") spec.waveform = Waveform::Sine;
      else if (wave == "rectangular") spec.waveform = Waveform::Rectangular;
      else f.fail("invalid waveform '" + wave + "'");
      spec.amplitude = amplitude(f);
      spec.frequency_hz = f.number("frequency_hz");
      spec.phase_rad = f.number("phase_rad", 0.0);
      spec.start_s = f.number("start_s", spec.start_s);
      spec.end_s = f.number("end_s", spec.end_s);
      if (f.has("switch")) {
        const Reader sw = f.child("switch");
        sw.only({"time_s", "frequency_hz", "amplitude", "amplitude_pm_fraction"});
        spec.change = FrequencySwitch{sw.number("time_s"), sw.number("frequency_hz"), amplitude(sw)};
      }
      try {
        validate_forcing(spec, options.output_rate_hz / 2.0);
      } catch (const Error& e) {
        f.fail(e.what());
      }
      forcings.push_back(std::move(spec));
    }
  }
  return {std::move(model), std::move(forcings), std::move(options)};
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

std::string report_to_json(const LocationReport& report, const PipelineConfig& config) {
  json detections = json::array();
  for (const auto& d : report.detections) {
    detections.push_back(
        {{"machine", d.machine}, {"frequency_hz", d.frequency_hz}, {"zeta", d.zeta}, {"rank", d.rank}});
  }
  json zeta = json::array();
  for (Eigen::Index i = 0; i < report.zeta.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < report.zeta.cols(); ++j) row.push_back(report.zeta(i, j));
    zeta.push_back(std::move(row));
  }
  const auto& dg = report.diagnostics;
  json out{
      {"config_echo", config_json(config)},
      {"candidates_hz", report.candidates_hz},
      {"detections", std::move(detections)},
      {"diagnostics",
       {{"iterations", dg.iterations},
        {"support_history", dg.support_history},
        {"residual_fro", dg.residual_fro},
        {"objective", dg.objective},
        {"lambda", dg.lambda},
        {"initial_support", dg.initial_support},
        {"sub_lambda_survivors", dg.sub_lambda_survivors},
        {"bin_width_hz", report.bin_width_hz},
        {"labels", report.labels},
        {"zeta", std::move(zeta)}}},
      {"verdict", to_string(report.verdict)},
      {"elapsed_s", report.elapsed_s},
  };
  return out.dump(2) + "\n";
}

void write_report(const LocationReport& report, const PipelineConfig& config,
                  const std::string& path) {
  auto out = open_output(path);
  out << report_to_json(report, config);
  finish_output(out, path);
}

ReportFile parse_report(const std::string& json_text) {
  const json j = parse_json(json_text, "report");
  const Reader top(j, "report");
  top.only({"config_echo", "candidates_hz", "detections", "diagnostics", "verdict", "elapsed_s"});
  ReportFile file;
  file.config = config_from(top.child("config_echo"));
  LocationReport& rep = file.report;
  rep.candidates_hz = top.numbers("candidates_hz");
  const std::string verdict = top.text("verdict");
  const auto v = verdict_from_string(verdict);
  if (!v) top.fail("unknown verdict '" + verdict + "'");
  rep.verdict = *v;
  rep.elapsed_s = top.number("elapsed_s");

  const json& dets = top.at("detections");
  if (!dets.is_array()) top.fail("'detections' must be an array");
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const Reader d(dets[k], "report.detections[" + std::to_string(k) + "]");
    d.only({"machine", "frequency_hz", "zeta", "rank"});
    rep.detections.push_back({d.text("machine"), d.number("frequency_hz"), d.number("zeta"),
                              static_cast<int>(d.integer("rank", 0))});
  }

  const Reader dg = top.child("diagnostics");
  dg.only({"iterations", "support_history", "residual_fro", "objective", "lambda",
           "initial_support", "sub_lambda_survivors", "bin_width_hz", "labels", "zeta"});
  auto& diag = rep.diagnostics;
  diag.iterations = static_cast<int>(dg.integer("iterations", 0));
  for (double s : dg.numbers("support_history")) diag.support_history.push_back(static_cast<int>(s));
  diag.residual_fro = dg.number("residual_fro");
  diag.objective = dg.number("objective");
  diag.lambda = dg.number("lambda");
  diag.initial_support = static_cast<int>(dg.integer("initial_support", 0));
  diag.sub_lambda_survivors = static_cast<int>(dg.integer("sub_lambda_survivors", 0));
  rep.bin_width_hz = dg.number("bin_width_hz");
  for (const auto& l : dg.at("labels")) {
    if (!l.is_string()) dg.fail("'labels' must hold strings");
    rep.labels.push_back(l.get<std::string>());
  }
  const json& zeta = dg.at("zeta");
  if (!zeta.is_array()) dg.fail("'zeta' must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(zeta.size());
  const auto cols = rows ? static_cast<Eigen::Index>(zeta[0].size()) : 0;
  rep.zeta.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = zeta[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) dg.fail("ragged 'zeta'");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& x = row[static_cast<std::size_t>(k)];
      if (!x.is_number()) dg.fail("'zeta' entries must be numbers");
      rep.zeta(i, k) = x.get<double>();
    }
  }
  return file;
}

ReportFile read_report(const std::string& path) { return parse_report(read_text_file(path)); }

void write_spectra(std::ostream& out, const std::vector<AmplitudeSpectrum>& spectra) {
  out << "bin_hz,amplitude,channel\n";
  for (const auto& s : spectra) {
    for (Eigen::Index k = 0; k < s.amplitudes.size(); ++k) {
      out << fmt17(s.frequencies(k)) << ',' << fmt17(s.amplitudes(k)) << ',' << s.channel << '\n';
    }
  }
}

void write_spectra(const std::string& path, const std::vector<AmplitudeSpectrum>& spectra) {
  auto out = open_output(path);
  write_spectra(out, spectra);
  finish_output(out, path);
}

}  // namespace fosl
