#include "crofton/cli.hpp"

#include "crofton/quadrature.hpp"
#include "crofton/zonoid.hpp"

#include "CLI11.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

namespace crofton::cli {

namespace {
using json = nlohmann::json;

// ------------------------------------------------------------ config parsing
class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {}

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
    return d;
  }

  int integer(const std::string& key, int fallback, int min) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    const long long i = v.get<long long>();
    if (i < min) throw ConfigError(key, "must be >= " + std::to_string(min));
    if (i > 1000000) throw ConfigError(key, "is too large");
    return static_cast<int>(i);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const json& v, std::size_t size) const {
    if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
    if (size != 0 && v.size() != size) throw ConfigError(key, "expected " + std::to_string(size) + " numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(key, "expected an array of numbers");
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) throw ConfigError(key, "must be finite");
    }
    return out;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const auto v = numbers(key, j_.at(key), 3);
    return {v[0], v[1], v[2]};
  }

  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    return numbers(key, j_.at(key), 0);
  }

  std::vector<std::vector<double>> rows(const std::string& key, std::size_t width) const {
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(key, "expected an array of arrays");
    std::vector<std::vector<double>> out;
    for (const json& e : v) out.push_back(numbers(key, e, width));
    return out;
  }

 private:
  const json& j_;
};

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// --------------------------------------------------------------- tables
using Cell = std::variant<std::monostate, double, long long, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_csv(const Cell& c) {
  if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
  if (std::holds_alternative<long long>(c)) return std::to_string(std::get<long long>(c));
  if (std::holds_alternative<std::string>(c)) return csv_field(std::get<std::string>(c));
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
  return "";
}

json cell_json(const Cell& c) {
  if (std::holds_alternative<double>(c)) return std::get<double>(c);
  if (std::holds_alternative<long long>(c)) return std::get<long long>(c);
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c);
  return nullptr;
}

void write_table(std::ostream& os, const std::string& command, const RunConfig& cfg, const Table& t,
                 const json& extra = json::object()) {
  const json config = cfg.to_json();
  if (cfg.format == Format::Json) {
    json j;
    j["command"] = command;
    j["config"] = config;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    j["columns"] = t.columns;
    j["rows"] = json::array();
    for (const auto& row : t.rows) {
      json r = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
      j["rows"].push_back(std::move(r));
    }
    os << j.dump(2) << '\n';
    return;
  }
  os << "# crofton " << command << '\n';
  for (const std::string& key : config_keys()) os << "# " << key << " = " << config.at(key).dump() << '\n';
  for (const auto& [k, v] : extra.items()) os << "# " << k << " = " << v.dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_csv(row[i]);
    os << '\n';
  }
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ConfigError("output", "cannot open '" + path + "' for writing");
    os_ = file_.get();
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

// ------------------------------------------------------------ metric sources
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

using SampleKey = std::array<long long, 6>;

SampleKey sample_key(const Vec3& x, const Vec3& omega) {
  auto q = [](double v) { return std::llround(v * 1e9); };
  return {q(x.x()), q(x.y()), q(x.z()), q(omega.x()), q(omega.y()), q(omega.z())};
}

struct SampledMetric {
  std::map<SampleKey, double> values;
  std::map<std::array<long long, 3>, std::size_t> per_point;
};

std::shared_ptr<SampledMetric> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("metric_input", "cannot open '" + path + "'");
  auto s = std::make_shared<SampledMetric>();
  const std::vector<std::string> expected = {"x", "y", "z", "omega_x", "omega_y", "omega_z", "H"};
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (!header) {
      if (fields != expected) {
        throw ConfigError("metric_input", "header must be x,y,z,omega_x,omega_y,omega_z,H");
      }
      header = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw ConfigError("metric_input", "line " + std::to_string(line_no) + " does not have 7 fields");
    }
    std::array<double, 7> v{};
    for (std::size_t i = 0; i < 7; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(fields[i], &used);
        if (used != fields[i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("metric_input", "line " + std::to_string(line_no) + ": '" + fields[i] + "' is not a number");
      }
    }
    const Vec3 x(v[0], v[1], v[2]);
    const Vec3 om(v[3], v[4], v[5]);
    s->values[sample_key(x, om)] = v[6];
    const SampleKey k = sample_key(x, Vec3::Zero());
    ++s->per_point[{k[0], k[1], k[2]}];
  }
  if (!header) throw ConfigError("metric_input", "missing header row");
  return s;
}

MetricField sampled_metric(std::shared_ptr<SampledMetric> samples) {
  MetricField m;
  m.value = [samples](const Vec3& x, const Vec3& omega) {
    const auto it = samples->values.find(sample_key(x, omega));
    if (it == samples->values.end()) {
      std::ostringstream os;
      os.precision(17);
      os << "metric sample missing at x = (" << x.x() << ", " << x.y() << ", " << x.z() << "), Omega = ("
         << omega.x() << ", " << omega.y() << ", " << omega.z() << ")";
      throw std::runtime_error(os.str());
    }
    return it->second;
  };
  return m;
}

MetricField synthetic_metric(const RunConfig& cfg) {
  MetricField m = forward_metric(make_density(cfg.density), cfg.forward_order);
  if (cfg.odd_contamination != 0.0) {
    const Vec3 u = cfg.density.u.normalized();
    const double eps = cfg.odd_contamination;
    m.value = [inner = m.value, u, eps](const Vec3& x, const Vec3& om) { return inner(x, om) + eps * u.dot(om); };
  }
  return m;
}

MetricField metric_source(const RunConfig& cfg) {
  if (cfg.metric_input.empty()) return synthetic_metric(cfg);
  return sampled_metric(read_samples(cfg.metric_input));
}

std::vector<PlaneCoords> plane_list(const RunConfig& cfg) {
  if (!cfg.planes.empty()) return cfg.planes;
  return random_planes(cfg.seed, cfg.plane_count);
}

// --------------------------------------------------------------- commands
int cmd_forward(const RunConfig& cfg, std::ostream& out) {
  const MetricField metric = synthetic_metric(cfg);
  const auto grid = shared_quadrature(cfg.grid_band_limit);
  Table t{{"x", "y", "z", "omega_x", "omega_y", "omega_z", "H"}, {}};
  for (const Vec3& x : cfg.points) {
    for (const Vec3& om : grid->nodes()) {
      t.rows.push_back({x.x(), x.y(), x.z(), om.x(), om.y(), om.z(), metric(x, om)});
    }
  }
  Output o(cfg.output, out);
  write_table(o.stream(), "forward", cfg, t);
  return kExitOk;
}

int cmd_zonoid(const RunConfig& cfg, std::ostream& out) {
  const MetricField metric = metric_source(cfg);
  const int band = cfg.reconstruction.band_limit;
  const auto quad = shared_quadrature(band);
  const auto nodes = quad->nodes();
  Eigen::VectorXd samples(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) samples[static_cast<Eigen::Index>(j)] = metric(cfg.point, nodes[j]);
  const SphericalFunction H = SphericalFunction::from_values(quad, samples);

  Output o(cfg.output, out);
  std::optional<SphericalFunction> h;
  try {
    h = zonoid_invert(H, band, cfg.reconstruction.odd_tolerance);
  } catch (const OddPartTooLarge& e) {
    Table t{{"error", "odd_energy", "odd_tolerance"}, {{std::string("odd_part_too_large"), e.odd_energy(),
                                                        cfg.reconstruction.odd_tolerance}}};
    write_table(o.stream(), "zonoid", cfg, t);
    return kExitFailure;
  }

  Table t{{"section", "n", "m", "omega_x", "omega_y", "omega_z", "value", "H", "residual"}, {}};
  const Eigen::VectorXd& c = h->coefficients();
  for (int n = 0; n <= band; ++n) {
    for (int m = -n; m <= n; ++m) {
      t.rows.push_back({std::string("coefficient"), static_cast<long long>(n), static_cast<long long>(m), {}, {}, {},
                        c[harmonic_index(n, m)], {}, {}});
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Vec3& om = nodes[j];
    const double Hj = samples[static_cast<Eigen::Index>(j)];
    const double residual = std::abs(cosine_transform(*h, Direction(om)) - Hj);
    worst = std::max(worst, residual);
    t.rows.push_back({std::string("node"), {}, {}, om.x(), om.y(), om.z(), h->values()[static_cast<Eigen::Index>(j)],
                      Hj, residual});
  }
  write_table(o.stream(), "zonoid", cfg, t, json{{"max_residual", worst}, {"odd_energy", H.odd_energy_fraction()}});
  return kExitOk;
}

int cmd_reconstruct(const RunConfig& cfg, std::ostream& out) {
  const bool synthetic = cfg.metric_input.empty();
  const FlagDensityField field(metric_source(cfg), cfg.reconstruction);
  const std::vector<PlaneCoords> planes = plane_list(cfg);
  const DensityField truth = make_density(cfg.density);

  struct Row {
    PlaneCoords e;
    double value = 0.0;
    double oracle = 0.0;
  };
  std::vector<Row> rows(planes.size());
  parallel_for(planes.size(), cfg.threads, [&](std::size_t i) {
    Row& r = rows[i];
    r.e = planes[i].canonical();
    r.value = reconstruct_plane(field, r.e).value;
    if (cfg.disc_oracle) r.oracle = disc_limit_oracle(field, r.e, r.e.foot()).value;
  });

  Table t{{"p", "xi_x", "xi_y", "xi_z", "h_reconstructed", "h_true", "rel_error", "h_disc_oracle", "c_norm"}, {}};
  for (const Row& r : rows) {
    const Vec3& n = r.e.normal.vec();
    std::vector<Cell> row{r.e.p, n.x(), n.y(), n.z(), r.value};
    if (synthetic) {
      const double h = truth(r.e);
      row.push_back(h);
      row.push_back(std::abs(r.value - h) / std::max(std::abs(h), 1e-300));
    } else {
      row.push_back(std::monostate{});
      row.push_back(std::monostate{});
    }
    row.push_back(cfg.disc_oracle ? Cell(r.oracle) : Cell(std::monostate{}));
    row.push_back(cfg.reconstruction.c_norm);
    t.rows.push_back(std::move(row));
  }
  Output o(cfg.output, out);
  write_table(o.stream(), "reconstruct", cfg, t);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("suite", "unknown suite '" + cfg.suite + "' (expected one of " + list + ")");
  }
  SuiteOptions opt;
  opt.config = cfg.reconstruction;
  opt.forward_order = cfg.forward_order;
  opt.plane_count = cfg.plane_count;
  opt.oracle_plane_count = cfg.oracle_plane_count;
  opt.threads = cfg.threads;
  const Report report = run_suite(cfg.suite, cfg.seed, opt);

  Output o(cfg.output, out);
  if (cfg.format == Format::Json) {
    json j = report.to_json();
    j["config"] = cfg.to_json();
    o.stream() << j.dump(2) << '\n';
  } else {
    Table t{{"suite", "name", "identity", "measured", "tolerance", "passed", "detail"}, {}};
    for (const Check& c : report.checks) {
      t.rows.push_back({report.suite, c.name, c.identity, c.measured, c.tolerance, c.passed, c.detail});
    }
    write_table(o.stream(), "verify", cfg, t, json{{"passed", report.passed()}, {"seconds", report.seconds}});
  }
  std::size_t failed = 0;
  for (const Check& c : report.checks) failed += c.passed ? 0 : 1;
  err << "suite " << report.suite << ": " << report.checks.size() - failed << "/" << report.checks.size()
      << " checks passed\n";
  return report.passed() ? kExitOk : kExitFailure;
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SyntheticDensitySpec spec = cfg.density;
  spec.family = Family::Constant;
  RunConfig used = cfg;
  used.density = spec;
  const FlagDensityField field(forward_metric(make_density(spec), cfg.forward_order), cfg.reconstruction);
  const std::vector<PlaneCoords> planes = random_planes(cfg.seed, std::max(1, std::min(cfg.plane_count, 3)));
  std::vector<double> bracket(planes.size());
  parallel_for(planes.size(), cfg.threads,
               [&](std::size_t i) { bracket[i] = reconstruct_plane(field, planes[i].canonical()).bracket; });
  double mean = 0.0;
  for (double b : bracket) mean += b / static_cast<double>(bracket.size());
  const double fitted = spec.c / mean;

  Table t{{"c", "bracket", "fitted_c_norm", "calibrated_c_norm", "printed_c_norm", "relative_difference"}, {}};
  t.rows.push_back({spec.c, mean, fitted, kCalibratedNormalization, kPrintedNormalization,
                    std::abs(fitted - kCalibratedNormalization) / kCalibratedNormalization});
  Output o(cfg.output, out);
  write_table(o.stream(), "calibrate", used, t);
  err << "fitted c_norm = " << format_number(fitted) << " (1/(2 pi) = " << format_number(kCalibratedNormalization)
      << ")\n";
  return kExitOk;
}

json parse_flag_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::exception&) {
  }
  try {
    return json::parse("[" + raw + "]");
  } catch (const json::exception&) {
  }
  return raw;
}
}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "family",         "c",                  "u",
      "beta",           "q",                  "sigma",
      "forward_order",  "odd_contamination",  "metric_input",
      "band_limit",     "delta",              "n_phi",
      "c_norm",         "alpha_sequence",     "richardson",
      "disc_radial_nodes", "disc_angular_nodes", "disc_boundary_nodes",
      "phi_offset",     "odd_tolerance",      "oracle_tolerance",
      "points",         "grid_band_limit",    "point",
      "planes",         "plane_count",        "disc_oracle",
      "suite",          "oracle_plane_count", "seed",
      "threads",        "format",             "output",
  };
  return keys;
}

json RunConfig::to_json() const {
  json j;
  j["family"] = family_name(density.family);
  j["c"] = density.c;
  j["u"] = vec_json(density.u);
  j["beta"] = density.beta;
  j["q"] = vec_json(density.q);
  j["sigma"] = density.sigma;
  j["forward_order"] = forward_order;
  j["odd_contamination"] = odd_contamination;
  j["metric_input"] = metric_input;
  const ReconstructionConfig& r = reconstruction;
  j["band_limit"] = r.band_limit;
  j["delta"] = r.delta;
  j["n_phi"] = r.n_phi;
  j["c_norm"] = r.c_norm;
  j["alpha_sequence"] = r.alpha_sequence;
  j["richardson"] = r.richardson;
  j["disc_radial_nodes"] = r.disc_radial_nodes;
  j["disc_angular_nodes"] = r.disc_angular_nodes;
  j["disc_boundary_nodes"] = r.disc_boundary_nodes;
  j["phi_offset"] = r.phi_offset;
  j["odd_tolerance"] = r.odd_tolerance;
  j["oracle_tolerance"] = r.oracle_tolerance;
  j["points"] = json::array();
  for (const Vec3& p : points) j["points"].push_back(vec_json(p));
  j["grid_band_limit"] = grid_band_limit;
  j["point"] = vec_json(point);
  j["planes"] = json::array();
  for (const PlaneCoords& e : planes) {
    j["planes"].push_back(json::array({e.p, e.normal.x(), e.normal.y(), e.normal.z()}));
  }
  j["plane_count"] = plane_count;
  j["disc_oracle"] = disc_oracle;
  j["suite"] = suite;
  j["oracle_plane_count"] = oracle_plane_count;
  j["seed"] = seed;
  j["threads"] = threads;
  j["format"] = format == Format::Json ? "json" : "csv";
  j["output"] = output;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError(k, "unknown key");
  }
  const Reader in(j);
  RunConfig c;
  if (in.has("family")) {
    try {
      c.density.family = parse_family(in.string("family", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("family", e.what());
    }
  }
  c.density.c = in.number("c", c.density.c);
  c.density.u = in.vec3("u", c.density.u);
  if (!(c.density.u.norm() > 0.0)) throw ConfigError("u", "must be nonzero");
  c.density.beta = in.number("beta", c.density.beta);
  c.density.q = in.vec3("q", c.density.q);
  c.density.sigma = in.number("sigma", c.density.sigma);
  if (!(c.density.sigma > 0.0)) throw ConfigError("sigma", "must be positive");
  c.forward_order = in.integer("forward_order", c.forward_order, 1);
  c.odd_contamination = in.number("odd_contamination", c.odd_contamination);
  c.metric_input = in.string("metric_input", c.metric_input);

  ReconstructionConfig& r = c.reconstruction;
  r.band_limit = in.integer("band_limit", r.band_limit, 0);
  if (r.band_limit > 128) throw ConfigError("band_limit", "must be <= 128");
  r.delta = in.number("delta", r.delta);
  r.n_phi = in.integer("n_phi", r.n_phi, 0);
  r.c_norm = in.number("c_norm", r.c_norm);
  r.alpha_sequence = in.list("alpha_sequence", r.alpha_sequence);
  r.richardson = in.boolean("richardson", r.richardson);
  r.disc_radial_nodes = in.integer("disc_radial_nodes", r.disc_radial_nodes, 0);
  r.disc_angular_nodes = in.integer("disc_angular_nodes", r.disc_angular_nodes, 0);
  r.disc_boundary_nodes = in.integer("disc_boundary_nodes", r.disc_boundary_nodes, 0);
  r.phi_offset = in.number("phi_offset", r.phi_offset);
  r.odd_tolerance = in.number("odd_tolerance", r.odd_tolerance);
  r.oracle_tolerance = in.number("oracle_tolerance", r.oracle_tolerance);
  try {
    r.validate();
  } catch (const ConfigFieldError& e) {
    throw ConfigError(e.field(), e.what() + e.field().size() + 2);
  }

  if (in.has("points")) {
    c.points.clear();
    for (const auto& p : in.rows("points", 3)) c.points.emplace_back(p[0], p[1], p[2]);
  }
  c.grid_band_limit = in.integer("grid_band_limit", c.grid_band_limit, 0);
  if (c.grid_band_limit > 128) throw ConfigError("grid_band_limit", "must be <= 128");
  c.point = in.vec3("point", c.point);
  if (in.has("planes")) {
    for (const auto& p : in.rows("planes", 4)) {
      const Vec3 n(p[1], p[2], p[3]);
      if (!(n.norm() > 0.0)) throw ConfigError("planes", "plane normal must be nonzero");
      c.planes.push_back({p[0], Direction(n)});
    }
  }
  c.plane_count = in.integer("plane_count", c.plane_count, 0);
  c.disc_oracle = in.boolean("disc_oracle", c.disc_oracle);
  c.suite = in.string("suite", c.suite);
  c.oracle_plane_count = in.integer("oracle_plane_count", c.oracle_plane_count, 0);
  if (in.has("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  c.threads = static_cast<unsigned>(in.integer("threads", static_cast<int>(c.threads), 0));
  const std::string fmt = in.string("format", "csv");
  if (fmt == "csv") {
    c.format = Format::Csv;
  } else if (fmt == "json") {
    c.format = Format::Json;
  } else {
    throw ConfigError("format", "expected 'csv' or 'json'");
  }
  c.output = in.string("output", c.output);
  if (c.output.empty()) throw ConfigError("output", "must not be empty");
  return c;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crofton density reconstruction from projective Finsler metrics", "crofton"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");
  std::map<std::string, std::string> raw;
  for (const std::string& key : config_keys()) app.add_option("--" + key, raw[key], "override config key " + key);

  const std::map<std::string, std::string> commands = {
      {"forward", "tabulate H(x, Omega) for a synthetic density"},
      {"zonoid", "invert the cosine transform at one point"},
      {"reconstruct", "reconstruct h on a list of planes"},
      {"verify", "run a verification suite"},
      {"calibrate", "fit the normalization constant on a constant density"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("config", "cannot open '" + config_path + "'");
      try {
        j = json::parse(in, nullptr, true, true);
      } catch (const json::exception& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
    }
    for (const std::string& key : config_keys()) {
      if (app.count("--" + key) > 0) j[key] = parse_flag_value(raw[key]);
    }
    const RunConfig cfg = RunConfig::from_json(j);

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "forward") return cmd_forward(cfg, out);
    if (command == "zonoid") return cmd_zonoid(cfg, out);
    if (command == "reconstruct") return cmd_reconstruct(cfg, out);
    if (command == "verify") return cmd_verify(cfg, out, err);
    return cmd_calibrate(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace crofton::cli
