#include "ncsched/io.h"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ncsched/errors.h"

namespace ncsched {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(where, "unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail(where, std::string("missing required key '") + key + "'");
  return obj.at(key);
}

double parse_double_text(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    fail(where, "'" + text + "' is not a decimal number");
  }
  return value;
}

double number(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_double_text(v.get<std::string>(), where);
  fail(where, "expected a number or a decimal string");
}

long long integer(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_string()) {
    const std::string text = v.get<std::string>();
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) {
      return value;
    }
  }
  fail(where, "expected an integer");
}

std::string text_field(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

Matrix parse_matrix(const json& v, const std::string& where) {
  reject_unknown(v, where, {"rows", "cols", "data"});
  const long long rows = integer(require(v, where, "rows"), where + ".rows");
  const long long cols = integer(require(v, where, "cols"), where + ".cols");
  const json& data = require(v, where, "data");
  if (rows < 1 || cols < 1) fail(where, "dimensions must be positive");
  if (!data.is_array() || static_cast<long long>(data.size()) != rows * cols) {
    fail(where, "data must hold rows*cols = " + std::to_string(rows * cols) +
                    " row-major entries");
  }
  Matrix m(rows, cols);
  for (long long r = 0; r < rows; ++r) {
    for (long long c = 0; c < cols; ++c) {
      const auto idx = static_cast<std::size_t>(r * cols + c);
      m(r, c) = number(data[idx], where + ".data[" + std::to_string(idx) + "]");
    }
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

PlantModel parse_plant(const json& v, const std::string& where) {
  reject_unknown(v, where, {"id", "A", "B", "K", "lqr"});
  PlantModel p;
  p.id = static_cast<int>(integer(require(v, where, "id"), where + ".id"));
  p.A = parse_matrix(require(v, where, "A"), where + ".A");
  p.B = parse_matrix(require(v, where, "B"), where + ".B");
  const bool has_k = v.contains("K");
  const bool has_lqr = v.contains("lqr");
  if (has_k == has_lqr) fail(where, "give exactly one of 'K' or 'lqr'");
  if (has_k) {
    p.K = parse_matrix(v.at("K"), where + ".K");
  } else {
    const json& lqr = v.at("lqr");
    reject_unknown(lqr, where + ".lqr", {"Q", "R"});
    const Matrix Q = parse_matrix(require(lqr, where + ".lqr", "Q"), where + ".lqr.Q");
    const Matrix R = parse_matrix(require(lqr, where + ".lqr", "R"), where + ".lqr.R");
    p.K = dare_gain(p.A, p.B, Q, R);
  }
  check_dimensions(p);
  return p;
}

CertificateScalars parse_scalars(const json& v, const std::string& where) {
  reject_unknown(v, where, {"id", "lambda_s", "lambda_u", "mu_su", "mu_us"});
  CertificateScalars s;
  s.lambda_s = number(require(v, where, "lambda_s"), where + ".lambda_s");
  s.lambda_u = number(require(v, where, "lambda_u"), where + ".lambda_u");
  s.mu_su = number(require(v, where, "mu_su"), where + ".mu_su");
  s.mu_us = number(require(v, where, "mu_us"), where + ".mu_us");
  if (!(s.lambda_s > 0.0 && s.lambda_s < 1.0) || !(s.lambda_u >= 1.0) ||
      !(s.mu_su >= 1.0) || !(s.mu_us >= 1.0)) {
    fail(where, "need 0 < lambda_s < 1, lambda_u >= 1 and mu >= 1");
  }
  return s;
}

Partition parse_partition(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of plant-id arrays");
  Partition p;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const std::string w = where + "[" + std::to_string(j) + "]";
    if (!v[j].is_array()) fail(w, "expected an array of plant ids");
    std::vector<int> group;
    for (const auto& id : v[j]) group.push_back(static_cast<int>(integer(id, w)));
    p.groups.push_back(std::move(group));
  }
  return p;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

long long parse_ll(const std::string& s, const std::string& where) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(where, "'" + s + "' is not an integer");
  }
  return v;
}

void expect_header(const std::vector<std::string>& lines, const std::string& header,
                   const std::string& what) {
  if (lines.empty() || lines.front() != header) {
    fail(what, "expected header '" + header + "'");
  }
}

}  // namespace

std::string format_exact(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericalError("cannot format number");
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << value;
  return os.str();
}

RunConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  const std::string where = "config";
  reject_unknown(root, where,
                 {"schema_version", "description", "network", "plants",
                  "certification", "synthesis", "simulation",
                  "reference_scalars", "output_dir"});
  const long long version =
      integer(require(root, where, "schema_version"), "config.schema_version");
  if (version != kSchemaVersion) {
    fail(where, "unsupported schema_version " + std::to_string(version));
  }
  if (root.contains("description")) text_field(root.at("description"), "config.description");

  RunConfig cfg;
  const json& plants = require(root, where, "plants");
  if (!plants.is_array() || plants.empty()) fail("config.plants", "need a nonempty array");
  for (std::size_t i = 0; i < plants.size(); ++i) {
    cfg.plants.push_back(parse_plant(plants[i], "config.plants[" + std::to_string(i) + "]"));
  }
  std::sort(cfg.plants.begin(), cfg.plants.end(),
            [](const PlantModel& a, const PlantModel& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < cfg.plants.size(); ++i) {
    if (cfg.plants[i].id != static_cast<int>(i) + 1) {
      fail("config.plants", "plant ids must be exactly 1..N");
    }
  }

  const json& net = require(root, where, "network");
  reject_unknown(net, "config.network", {"capacity", "max_burst"});
  cfg.network.num_plants = static_cast<int>(cfg.plants.size());
  cfg.network.capacity = static_cast<int>(
      integer(require(net, "config.network", "capacity"), "config.network.capacity"));
  cfg.network.max_burst = static_cast<int>(
      integer(require(net, "config.network", "max_burst"), "config.network.max_burst"));
  if (!(cfg.network.capacity > 0 && cfg.network.capacity < cfg.network.num_plants)) {
    fail("config.network", "capacity must satisfy 0 < M < N");
  }
  if (cfg.network.max_burst < 1) fail("config.network", "max_burst must be >= 1");

  if (root.contains("certification")) {
    const json& c = root.at("certification");
    reject_unknown(c, "config.certification", {"grid", "selection_rule"});
    if (c.contains("grid")) {
      cfg.grid = static_cast<int>(integer(c.at("grid"), "config.certification.grid"));
      if (cfg.grid < 1) fail("config.certification.grid", "must be >= 1");
    }
    if (c.contains("selection_rule")) {
      cfg.selection_rule = parse_selection_rule(
          text_field(c.at("selection_rule"), "config.certification.selection_rule"));
    }
  }
  if (root.contains("synthesis")) {
    const json& s = root.at("synthesis");
    reject_unknown(s, "config.synthesis", {"mode", "partition"});
    if (s.contains("mode")) {
      cfg.mode = parse_synthesis_mode(text_field(s.at("mode"), "config.synthesis.mode"));
    }
    if (s.contains("partition")) {
      cfg.partition = parse_partition(s.at("partition"), "config.synthesis.partition");
      validate_partition(*cfg.partition, cfg.network.num_plants, cfg.network.capacity);
    }
  }
  if (cfg.mode == SynthesisMode::kGivenPartition && !cfg.partition) {
    fail("config.synthesis", "given-partition mode needs 'partition'");
  }
  if (root.contains("simulation")) {
    const json& s = root.at("simulation");
    const std::string w = "config.simulation";
    reject_unknown(s, w, {"horizon", "runs", "seed", "loss_prob", "x0_range", "loss_file"});
    auto& sim = cfg.simulation;
    if (s.contains("horizon")) sim.horizon = integer(s.at("horizon"), w + ".horizon");
    if (s.contains("runs")) sim.runs = static_cast<int>(integer(s.at("runs"), w + ".runs"));
    if (s.contains("seed")) {
      const long long seed = integer(s.at("seed"), w + ".seed");
      if (seed < 0) fail(w + ".seed", "must be >= 0");
      sim.seed = static_cast<std::uint64_t>(seed);
    }
    if (s.contains("loss_prob")) sim.loss_prob = number(s.at("loss_prob"), w + ".loss_prob");
    if (s.contains("x0_range")) sim.x0_range = number(s.at("x0_range"), w + ".x0_range");
    if (s.contains("loss_file")) sim.loss_file = text_field(s.at("loss_file"), w + ".loss_file");
    if (sim.horizon < 1) fail(w + ".horizon", "must be >= 1");
    if (sim.runs < 1) fail(w + ".runs", "must be >= 1");
    if (!(sim.loss_prob >= 0.0 && sim.loss_prob <= 1.0)) fail(w + ".loss_prob", "must lie in [0, 1]");
    if (!(sim.x0_range > 0.0)) fail(w + ".x0_range", "must be positive");
  }
  if (root.contains("reference_scalars")) {
    const json& r = root.at("reference_scalars");
    const std::string w = "config.reference_scalars";
    reject_unknown(r, w, {"source", "plants"});
    ReferenceScalars ref;
    if (r.contains("source")) ref.source = text_field(r.at("source"), w + ".source");
    const json& ps = require(r, w, "plants");
    if (!ps.is_array() || ps.size() != cfg.plants.size()) {
      fail(w + ".plants", "need one entry per plant");
    }
    ref.plants.resize(ps.size());
    std::set<long long> seen;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string wi = w + ".plants[" + std::to_string(i) + "]";
      const long long id = integer(require(ps[i], wi, "id"), wi + ".id");
      if (id < 1 || id > static_cast<long long>(ps.size()) || !seen.insert(id).second) {
        fail(wi, "ids must be exactly 1..N");
      }
      ref.plants[static_cast<std::size_t>(id - 1)] = parse_scalars(ps[i], wi);
    }
    cfg.reference = std::move(ref);
  }
  if (root.contains("output_dir")) {
    cfg.output_dir = text_field(root.at("output_dir"), "config.output_dir");
  }
  return cfg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

std::string certificates_json(std::span<const StabilityCertificate> certs,
                              int max_burst) {
  json list = json::array();
  for (const auto& c : certs) {
    list.push_back({{"plant", c.plant_id},
                    {"lambda_s", c.stable.lambda},
                    {"P_s", matrix_json(c.stable.P)},
                    {"lambda_u", c.unstable.lambda},
                    {"P_u", matrix_json(c.unstable.P)},
                    {"mu_su", c.mu_su},
                    {"mu_us", c.mu_us},
                    {"budget", c.budget}});
  }
  json root = {{"schema_version", kSchemaVersion},
               {"max_burst", max_burst},
               {"certificates", list}};
  return root.dump(2) + "\n";
}

std::vector<StabilityCertificate> parse_certificates_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("certificates: invalid JSON: ") + e.what());
  }
  const std::string where = "certificates";
  reject_unknown(root, where, {"schema_version", "max_burst", "certificates"});
  if (integer(require(root, where, "schema_version"), where) != kSchemaVersion) {
    fail(where, "unsupported schema_version");
  }
  const json& list = require(root, where, "certificates");
  if (!list.is_array()) fail(where, "'certificates' must be an array");
  std::vector<StabilityCertificate> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& v = list[i];
    const std::string w = where + "[" + std::to_string(i) + "]";
    reject_unknown(v, w, {"plant", "lambda_s", "P_s", "lambda_u", "P_u", "mu_su",
                          "mu_us", "budget"});
    StabilityCertificate c;
    c.plant_id = static_cast<int>(integer(require(v, w, "plant"), w + ".plant"));
    c.stable.lambda = number(require(v, w, "lambda_s"), w + ".lambda_s");
    c.stable.P = parse_matrix(require(v, w, "P_s"), w + ".P_s");
    c.unstable.lambda = number(require(v, w, "lambda_u"), w + ".lambda_u");
    c.unstable.P = parse_matrix(require(v, w, "P_u"), w + ".P_u");
    c.mu_su = number(require(v, w, "mu_su"), w + ".mu_su");
    c.mu_us = number(require(v, w, "mu_us"), w + ".mu_us");
    c.budget = number(require(v, w, "budget"), w + ".budget");
    if (c.plant_id != static_cast<int>(i) + 1) fail(w, "certificates must be listed by plant id 1..N");
    out.push_back(std::move(c));
  }
  return out;
}

std::string certificates_csv(std::span<const StabilityCertificate> certs) {
  std::string out = "plant,lambda_s,lambda_u,mu_su,mu_us,budget\n";
  for (const auto& c : certs) {
    out += std::to_string(c.plant_id) + "," + format_exact(c.stable.lambda) + "," +
           format_exact(c.unstable.lambda) + "," + format_exact(c.mu_su) + "," +
           format_exact(c.mu_us) + "," + format_exact(c.budget) + "\n";
  }
  return out;
}

std::string certificates_report(std::span<const StabilityCertificate> certs,
                                int max_burst) {
  std::ostringstream os;
  os << "certificates (max burst " << max_burst << ")\n";
  for (const auto& c : certs) {
    const CertificateScalars s = c.scalars();
    os << "plant " << c.plant_id << "\n"
       << "  lambda_s " << format_fixed(s.lambda_s, 6) << "  lambda_u "
       << format_fixed(s.lambda_u, 6) << "\n"
       << "  mu_su " << format_fixed(s.mu_su, 6) << "  mu_us "
       << format_fixed(s.mu_us, 6) << "\n"
       << "  budget " << format_fixed(c.budget, 6) << "\n";
    auto print = [&](const char* name, const Matrix& P) {
      os << "  " << name << " =";
      for (Eigen::Index r = 0; r < P.rows(); ++r) {
        os << (r == 0 ? " [" : "; ");
        for (Eigen::Index col = 0; col < P.cols(); ++col) {
          os << (col == 0 ? "" : " ") << format_fixed(P(r, col), 6);
        }
      }
      os << "]\n";
    };
    print("P_s", c.stable.P);
    print("P_u", c.unstable.P);
  }
  return os.str();
}

std::string cycle_csv(const Cycle& cycle) {
  std::string out = "vertex,active_set,t_factor\n";
  for (std::size_t k = 0; k < cycle.vertices.size(); ++k) {
    out += std::to_string(k) + "," + csv_quote(cycle.vertices[k].to_string()) + "," +
           std::to_string(cycle.t_factors[k]) + "\n";
  }
  return out;
}

Cycle parse_cycle_csv(std::string_view text) {
  const auto lines = lines_of(text);
  expect_header(lines, "vertex,active_set,t_factor", "cycle.csv");
  Cycle c;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    const std::string w = "cycle.csv line " + std::to_string(i + 1);
    if (f.size() != 3) fail(w, "expected 3 fields");
    if (parse_ll(f[0], w) != static_cast<long long>(i - 1)) fail(w, "vertices out of order");
    c.vertices.push_back(ActiveSet::parse(f[1]));
    c.t_factors.push_back(parse_ll(f[2], w));
  }
  validate_cycle(c);
  return c;
}

std::string schedule_csv(const ScheduleLogic& schedule, long long horizon) {
  std::string out = "t,active_set,segment_index\n";
  for (long long t = 0; t < horizon; ++t) {
    const int k = schedule.segment_at(t);
    out += std::to_string(t) + "," +
           csv_quote(schedule.cycle().vertices[static_cast<std::size_t>(k)].to_string()) +
           "," + std::to_string(k) + "\n";
  }
  return out;
}

std::string schedule_period_text(const ScheduleLogic& schedule) {
  std::ostringstream os;
  os << "ncsched-schedule " << kSchemaVersion << "\n"
     << "max_burst " << schedule.max_burst() << "\n"
     << "period " << schedule.period() << "\n"
     << "segments " << schedule.segments().size() << "\n";
  for (std::size_t k = 0; k < schedule.segments().size(); ++k) {
    const auto& s = schedule.segments()[k];
    os << "segment " << k << " start " << s.start << " length " << s.length
       << " t_factor " << s.t_factor << " active "
       << schedule.cycle().vertices[k].to_string() << "\n";
  }
  return os.str();
}

ScheduleLogic parse_schedule_period_text(std::string_view text) {
  const auto lines = lines_of(text);
  const std::string w = "schedule";
  if (lines.size() < 4 || lines[0] != "ncsched-schedule " + std::to_string(kSchemaVersion)) {
    fail(w, "missing 'ncsched-schedule' header");
  }
  auto keyed = [&](const std::string& line, const std::string& key) {
    if (line.rfind(key + " ", 0) != 0) fail(w, "expected '" + key + "'");
    return parse_ll(line.substr(key.size() + 1), w);
  };
  const long long max_burst = keyed(lines[1], "max_burst");
  const long long period = keyed(lines[2], "period");
  const long long count = keyed(lines[3], "segments");
  if (static_cast<long long>(lines.size()) != 4 + count) fail(w, "segment count mismatch");
  Cycle c;
  for (long long k = 0; k < count; ++k) {
    std::istringstream in(lines[static_cast<std::size_t>(4 + k)]);
    std::string seg, start_kw, length_kw, t_kw, active_kw, active;
    long long idx = 0, start = 0, length = 0, t = 0;
    in >> seg >> idx >> start_kw >> start >> length_kw >> length >> t_kw >> t >> active_kw;
    std::getline(in, active);
    if (!in.eof() && in.fail()) fail(w, "malformed segment line");
    if (seg != "segment" || start_kw != "start" || length_kw != "length" ||
        t_kw != "t_factor" || active_kw != "active" || idx != k) {
      fail(w, "malformed segment line " + std::to_string(k));
    }
    c.vertices.push_back(ActiveSet::parse(active));
    c.t_factors.push_back(t);
  }
  ScheduleLogic s(std::move(c), static_cast<int>(max_burst));
  if (s.period() != period) fail(w, "period does not match the segments");
  for (long long k = 0; k < count; ++k) {
    std::istringstream in(lines[static_cast<std::size_t>(4 + k)]);
    std::string tok;
    long long idx = 0, start = 0, length = 0;
    in >> tok >> idx >> tok >> start >> tok >> length;
    const auto& seg = s.segments()[static_cast<std::size_t>(k)];
    if (seg.start != start || seg.length != length) {
      fail(w, "segment " + std::to_string(k) + " window does not match its T-factor");
    }
  }
  return s;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  Eigen::Index dim = 0;
  for (const auto& p : trajectory.plants) {
    if (!p.states.empty()) dim = std::max(dim, p.states.front().size());
  }
  std::string out = "t,plant";
  for (Eigen::Index i = 1; i <= dim; ++i) out += ",x" + std::to_string(i);
  out += ",norm2,mode,loss_flag\n";
  for (long long t = 0; t < trajectory.horizon; ++t) {
    for (const auto& p : trajectory.plants) {
      const auto ts = static_cast<std::size_t>(t);
      out += std::to_string(t) + "," + std::to_string(p.plant_id);
      const Vector& x = p.states[ts];
      for (Eigen::Index i = 0; i < dim; ++i) {
        out += ",";
        if (i < x.size()) out += format_exact(x(i));
      }
      out += "," + format_exact(p.norm2[ts]) + "," +
             (p.modes[ts] == Mode::kStable ? "stable" : "unstable") + "," +
             std::to_string(p.loss_flags[ts]) + "\n";
    }
  }
  return out;
}

std::string losses_csv(const LossSignal& loss) {
  std::string out = "t,channel,kappa\n";
  for (long long t = 0; t < loss.horizon; ++t) {
    for (int c = 0; c < loss.channels; ++c) {
      out += std::to_string(t) + "," + std::to_string(c + 1) + "," +
             (loss.lost(c, t) ? "1" : "0") + "\n";
    }
  }
  return out;
}

LossSignal parse_losses_csv(std::string_view text) {
  const auto lines = lines_of(text);
  expect_header(lines, "t,channel,kappa", "losses.csv");
  struct Row {
    long long t;
    long long channel;
    int kappa;
  };
  std::vector<Row> rows;
  long long horizon = 0, channels = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    const std::string w = "losses.csv line " + std::to_string(i + 1);
    if (f.size() != 3) fail(w, "expected 3 fields");
    Row r{parse_ll(f[0], w), parse_ll(f[1], w), static_cast<int>(parse_ll(f[2], w))};
    if (r.t < 0 || r.channel < 1 || (r.kappa != 0 && r.kappa != 1)) {
      fail(w, "need t >= 0, channel >= 1 and kappa in {0,1}");
    }
    horizon = std::max(horizon, r.t + 1);
    channels = std::max(channels, r.channel);
    rows.push_back(r);
  }
  if (rows.empty()) fail("losses.csv", "no rows");
  if (static_cast<long long>(rows.size()) != horizon * channels) {
    fail("losses.csv", "every (t, channel) pair must appear exactly once");
  }
  LossSignal s = no_losses(static_cast<int>(channels), horizon);
  std::vector<std::vector<bool>> seen(static_cast<std::size_t>(channels),
                                      std::vector<bool>(static_cast<std::size_t>(horizon)));
  for (const auto& r : rows) {
    const auto c = static_cast<std::size_t>(r.channel - 1);
    const auto t = static_cast<std::size_t>(r.t);
    if (seen[c][t]) fail("losses.csv", "duplicate (t, channel) row");
    seen[c][t] = true;
    s.kappa[c][t] = static_cast<std::uint8_t>(r.kappa);
  }
  return s;
}

std::string synthesis_report_text(const SynthesisReport& report,
                                  std::span<const CertificateScalars> certs,
                                  int max_burst) {
  std::ostringstream os;
  auto margins = [&](const std::vector<PlantMargin>& ms) {
    for (const auto& m : ms) {
      os << "  plant " << m.plant << " (group size " << m.group_size << "): "
         << format_fixed(m.lhs, 4) << (m.holds() ? " > " : " <= ")
         << format_fixed(m.rhs, 4) << (m.holds() ? "  ok" : "  FAIL") << "\n";
    }
  };
  os << "synthesis route: " << report.route << "\n";
  if (report.partition) {
    os << "partition: " << to_string(*report.partition) << "\n";
  }
  if (report.uniform) {
    os << "uniform-T sufficient condition per group: "
       << (report.uniform->holds ? "holds" : "fails") << "\n";
    margins(report.uniform->margins);
  }
  os << "balanced-group condition: "
     << (report.global.balanced_holds ? "holds" : "fails") << "\n";
  margins(report.global.balanced);
  if (report.global.half_capacity_applicable) {
    os << "pairs condition (M >= N/2): "
       << (report.global.half_capacity_holds ? "holds" : "fails") << "\n";
    margins(report.global.half_capacity);
  }
  os << "any-capacity condition: "
     << (report.global.any_capacity_holds ? "holds" : "fails") << "\n";
  margins(report.global.any_capacity);
  for (std::size_t j = 0; j < report.partition_cycles.size(); ++j) {
    const auto& pc = report.partition_cycles[j];
    os << "group cycle " << j + 1 << ": plants";
    for (int p : pc.plants) os << " " << p;
    os << ", T";
    for (long long t : pc.t_factors) os << " " << t;
    if (j < report.scales.size()) {
      os << ", scale a = " << report.scales[j] << ", scaled T";
      for (long long t : pc.t_factors) os << " " << t * report.scales[j];
    }
    os << "\n";
  }
  if (report.period_units > 0) {
    os << "composition period K = " << report.period_units << "\n";
  }
  os << "cycle (" << report.cycle.size() << " vertices, max burst " << max_burst
     << "):\n";
  for (std::size_t k = 0; k < report.cycle.vertices.size(); ++k) {
    os << "  " << report.cycle.vertices[k].to_string() << " : "
       << report.cycle.t_factors[k] << "\n";
  }
  os << "contraction functional per plant:\n";
  for (std::size_t i = 0; i < report.contraction.zbar.size(); ++i) {
    os << "  plant " << i + 1 << ": " << format_fixed(report.contraction.zbar[i], 6)
       << "\n";
  }
  os << "epsilon = " << format_fixed(report.contraction.epsilon, 6) << " -> "
     << (report.contraction.contractive ? "contractive" : "NOT contractive") << "\n";
  (void)certs;
  return os.str();
}

}  // namespace ncsched
