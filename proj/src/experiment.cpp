#include "cfmimo/experiment.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cfmimo/admm.hpp"
#include "cfmimo/baseline.hpp"
#include "cfmimo/centralized.hpp"
#include "cfmimo/netsim.hpp"

namespace cfmimo {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ConfigError::ConfigError(std::string key_path, int line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + key_path + ": " + message),
      key_path_(std::move(key_path)),
      line_(line) {}

// ---------------------------------------------------------------------------
// Spec resolution
// ---------------------------------------------------------------------------

void ExperimentSpec::resolve() {
  const Index M = config.num_aps, N = config.num_antennas, K = config.num_users;
  SystemConfig next = SystemConfig::uniform(M, N, K, snr_db, sinr_target_db, noise_power);
  next.relaxation_factor = config.relaxation_factor;
  next.penalty = config.penalty;
  next.max_iters = config.max_iters;
  next.eps_abs = config.eps_abs;
  next.eps_rel = config.eps_rel;
  next.rng_seed = config.rng_seed;
  next.validate();
  config = std::move(next);
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentSpec::resolved_settings() const {
  return {
      {"system.num_aps", std::to_string(config.num_aps)},
      {"system.num_antennas", std::to_string(config.num_antennas)},
      {"system.num_users", std::to_string(config.num_users)},
      {"system.snr_db", num(snr_db)},
      {"system.noise_power", num(noise_power)},
      {"system.sinr_target_db", num(sinr_target_db)},
      {"system.relaxation_factor", num(config.relaxation_factor)},
      {"system.seed", std::to_string(config.rng_seed)},
      {"admm.penalty", num(config.penalty)},
      {"admm.max_iters", std::to_string(config.max_iters)},
      {"admm.eps_abs", num(config.eps_abs)},
      {"admm.eps_rel", num(config.eps_rel)},
      {"experiment.name", name},
      {"experiment.methods", join(methods, ",")},
      {"experiment.realizations", std::to_string(n_realizations)},
      {"experiment.output_dir", output_dir.string()},
      {"experiment.outage_slack", num(outage_slack)},
      {"experiment.conjugate_min_db", num(conjugate_min_db)},
      {"experiment.conjugate_max_db", num(conjugate_max_db)},
      {"experiment.conjugate_points", std::to_string(conjugate_points)},
  };
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  std::string key_path;
  std::string value;
  int line;
};

double to_double(const Field& f) {
  double v = 0.0;
  const char* end = f.value.data() + f.value.size();
  const auto [p, ec] = std::from_chars(f.value.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw ConfigError(f.key_path, f.line, "expected a finite number, got '" + f.value + "'");
  return v;
}

long long to_integer(const Field& f) {
  long long v = 0;
  const char* end = f.value.data() + f.value.size();
  const auto [p, ec] = std::from_chars(f.value.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError(f.key_path, f.line, "expected an integer, got '" + f.value + "'");
  return v;
}

int to_int(const Field& f, long long lo, long long hi) {
  const long long v = to_integer(f);
  if (v < lo || v > hi)
    throw ConfigError(f.key_path, f.line, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

using Setter = std::function<void(ExperimentSpec&, const Field&)>;

// Keys by section. Scenario sections accept the union (minus `name`).
const std::map<std::string, std::map<std::string, Setter>>& key_table() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"system",
       {
           {"num_aps", [](ExperimentSpec& s, const Field& f) { s.config.num_aps = to_int(f, 1, 1 << 20); }},
           {"num_antennas", [](ExperimentSpec& s, const Field& f) { s.config.num_antennas = to_int(f, 1, 1 << 20); }},
           {"num_users", [](ExperimentSpec& s, const Field& f) { s.config.num_users = to_int(f, 1, 1 << 20); }},
           {"snr_db", [](ExperimentSpec& s, const Field& f) { s.snr_db = to_double(f); }},
           {"noise_power", [](ExperimentSpec& s, const Field& f) { s.noise_power = to_double(f); }},
           {"sinr_target_db", [](ExperimentSpec& s, const Field& f) { s.sinr_target_db = to_double(f); }},
           {"relaxation_factor", [](ExperimentSpec& s, const Field& f) { s.config.relaxation_factor = to_double(f); }},
           {"seed",
            [](ExperimentSpec& s, const Field& f) {
              const long long v = to_integer(f);
              if (v < 0) throw ConfigError(f.key_path, f.line, "must be nonnegative");
              s.config.rng_seed = static_cast<std::uint64_t>(v);
            }},
       }},
      {"admm",
       {
           {"penalty", [](ExperimentSpec& s, const Field& f) { s.config.penalty = to_double(f); }},
           {"max_iters", [](ExperimentSpec& s, const Field& f) { s.config.max_iters = to_int(f, 1, 1000000); }},
           {"eps_abs", [](ExperimentSpec& s, const Field& f) { s.config.eps_abs = to_double(f); }},
           {"eps_rel", [](ExperimentSpec& s, const Field& f) { s.config.eps_rel = to_double(f); }},
       }},
      {"experiment",
       {
           {"name", [](ExperimentSpec& s, const Field& f) { s.name = f.value; }},
           {"methods",
            [](ExperimentSpec& s, const Field& f) {
              s.methods.clear();
              std::string_view rest = f.value;
              while (!rest.empty()) {
                const auto comma = rest.find(',');
                const std::string item(trim(rest.substr(0, comma)));
                if (item.empty()) throw ConfigError(f.key_path, f.line, "empty method name");
                const auto& known = known_methods();
                if (std::find(known.begin(), known.end(), item) == known.end())
                  throw ConfigError(f.key_path, f.line, "unknown method '" + item + "' (expected centralized, admm, conjugate)");
                if (std::find(s.methods.begin(), s.methods.end(), item) != s.methods.end())
                  throw ConfigError(f.key_path, f.line, "duplicate method '" + item + "'");
                s.methods.push_back(item);
                rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
              }
              if (s.methods.empty()) throw ConfigError(f.key_path, f.line, "at least one method is required");
            }},
           {"realizations", [](ExperimentSpec& s, const Field& f) { s.n_realizations = to_int(f, 1, 100000000); }},
           {"output_dir", [](ExperimentSpec& s, const Field& f) { s.output_dir = f.value; }},
           {"outage_slack",
            [](ExperimentSpec& s, const Field& f) {
              s.outage_slack = to_double(f);
              if (s.outage_slack < 0.0 || s.outage_slack >= 1.0) throw ConfigError(f.key_path, f.line, "must be in [0, 1)");
            }},
           {"conjugate_min_db", [](ExperimentSpec& s, const Field& f) { s.conjugate_min_db = to_double(f); }},
           {"conjugate_max_db", [](ExperimentSpec& s, const Field& f) { s.conjugate_max_db = to_double(f); }},
           {"conjugate_points", [](ExperimentSpec& s, const Field& f) { s.conjugate_points = to_int(f, 2, 100000); }},
       }},
  };
  return table;
}

const Setter* find_setter(const std::string& section, const std::string& key) {
  const auto& table = key_table();
  if (section.rfind("experiment.", 0) == 0) {
    if (key == "name") return nullptr;
    for (const auto& [_, keys] : table)
      if (auto it = keys.find(key); it != keys.end()) return &it->second;
    return nullptr;
  }
  const auto sec = table.find(section);
  if (sec == table.end()) return nullptr;
  const auto it = sec->second.find(key);
  return it == sec->second.end() ? nullptr : &it->second;
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

struct Section {
  std::string name;
  int line = 0;
  std::vector<Field> fields;
};

void finish(ExperimentSpec& spec, const std::string& where, int line) {
  if (!valid_name(spec.name)) throw ConfigError(where + ".name", line, "invalid scenario name '" + spec.name + "'");
  if (!(spec.conjugate_max_db > spec.conjugate_min_db))
    throw ConfigError(where + ".conjugate_max_db", line, "must exceed conjugate_min_db");
  try {
    spec.resolve();
  } catch (const InvalidConfig& e) {
    throw ConfigError(where, line, e.what());
  }
}

}  // namespace

std::vector<ExperimentSpec> parse_config_text(std::string_view text, const std::string& source) {
  std::vector<Section> sections;
  std::set<std::string> seen_sections;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    // Comments: whole-line '#' or ';', or " #" after a value.
    if (const auto hash = raw.find(" #"); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      const bool scenario = name.rfind("experiment.", 0) == 0;
      if (!(name == "system" || name == "admm" || name == "experiment" || scenario))
        throw ConfigError(name, line_no, "unknown section (expected system, admm, experiment, experiment.<name>)");
      if (scenario && !valid_name(name.substr(11))) throw ConfigError(name, line_no, "invalid scenario name");
      if (!seen_sections.insert(name).second) throw ConfigError(name, line_no, "duplicate section");
      sections.push_back({name, line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    if (sections.empty()) throw ConfigError(source, line_no, "key outside of any section");
    auto& sec = sections.back();
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const std::string path = sec.name + "." + key;
    if (!find_setter(sec.name, key)) throw ConfigError(path, line_no, "unknown key");
    for (const auto& f : sec.fields)
      if (f.key_path == path) throw ConfigError(path, line_no, "duplicate key (first set on line " + std::to_string(f.line) + ")");
    if (value.empty()) throw ConfigError(path, line_no, "missing value");
    sec.fields.push_back({path, value, line_no});
  }

  ExperimentSpec base;
  int base_line = 1;
  std::vector<const Section*> scenarios;
  for (const auto& sec : sections) {
    if (sec.name.rfind("experiment.", 0) == 0) {
      scenarios.push_back(&sec);
      continue;
    }
    if (sec.name == "experiment") base_line = sec.line;
    for (const auto& f : sec.fields) (*find_setter(sec.name, f.key_path.substr(sec.name.size() + 1)))(base, f);
  }

  std::vector<ExperimentSpec> out;
  if (scenarios.empty()) {
    finish(base, "experiment", base_line);
    out.push_back(std::move(base));
    return out;
  }
  for (const Section* sec : scenarios) {
    ExperimentSpec spec = base;
    spec.name = sec->name.substr(11);
    for (const auto& f : sec->fields) (*find_setter(sec->name, f.key_path.substr(sec->name.size() + 1)))(spec, f);
    finish(spec, sec->name, sec->line);
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<ExperimentSpec> parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string() + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

// ---------------------------------------------------------------------------
// Methods
// ---------------------------------------------------------------------------

MethodOutcome run_method(const std::string& method, const ChannelRealization& channels, const ExperimentSpec& spec) {
  const SystemConfig& cfg = spec.config;
  MethodOutcome out;
  if (method == "centralized") {
    auto res = solve_centralized(channels, cfg);
    out.precoder = std::move(res.precoder);
    out.ok = res.status == conic::Status::Optimal;
    out.status = conic::to_string(res.status);
    out.iterations = res.solution.iterations;
  } else if (method == "admm") {
    auto res = run_admm(channels, cfg);
    out.precoder = std::move(res.precoder);
    out.iterations = res.iterations_used;
    out.converged = res.converged;
  } else if (method == "conjugate") {
    const auto grid = snr_power_grid(spec.conjugate_min_db, spec.conjugate_max_db, spec.conjugate_points, spec.noise_power);
    const auto sweep = max_sinr_under_conjugate(channels, cfg, grid);
    out.precoder = conjugate_precoder(channels, PowerAllocation::equal(cfg, sweep.saturation_power));
    out.iterations = static_cast<int>(grid.size());
  } else {
    throw Error("unknown method '" + method + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string() + ": " + std::strerror(errno));
  out << content;
  out.close();
  if (!out) throw Error("error writing " + path.string() + ": " + std::strerror(errno));
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::string csv_header(const ExperimentSpec& spec, const std::string& kind) {
  std::string h = "# schema_version: " + std::to_string(kResultSchemaVersion) + "\n# file: " + kind + "\n";
  for (const auto& [k, v] : spec.resolved_settings()) h += "# " + k + " = " + v + "\n";
  return h;
}

json config_json(const ExperimentSpec& spec) {
  json j = json::object();
  for (const auto& [k, v] : spec.resolved_settings()) j[k] = v;
  return j;
}

json envelope(const ExperimentSpec& spec, const std::string& kind) {
  json j;
  j["schema_version"] = kResultSchemaVersion;
  j["file"] = kind;
  j["scenario"] = spec.name;
  j["config"] = config_json(spec);
  return j;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

json trace_json(const AdmmResult& r, std::uint64_t realization) {
  json j;
  j["realization"] = realization;
  j["iterations_used"] = r.iterations_used;
  j["converged"] = r.converged;
  j["total_power"] = r.total_power;
  json iters = json::array();
  for (const auto& rec : r.trace) {
    json it;
    it["t"] = rec.iteration;
    it["omega"] = std::vector<double>(rec.omega.data(), rec.omega.data() + rec.omega.size());
    it["primal_residuals"] = rec.primal_residuals;
    it["dual_residual"] = rec.dual_residual;
    it["ap_power"] = rec.ap_power;
    iters.push_back(std::move(it));
  }
  j["trace"] = std::move(iters);
  return j;
}

}  // namespace

void export_cdf(const EnsembleStats& stats, const fs::path& path, const ExperimentSpec& spec, const std::string& method,
                CdfStatistic statistic) {
  const CdfPoints& pts = statistic == CdfStatistic::MinUser ? stats.cdf_points : stats.mean_cdf_points;
  if (stats.samples.empty() || pts.empty()) throw Error("export_cdf: no samples for '" + method + "'");
  const char* stat = statistic == CdfStatistic::MinUser ? "min_user" : "mean_user";

  std::string csv = csv_header(spec, "cdf");
  csv += "# method: " + method + "\n# statistic: " + stat + "\n";
  csv += "sinr_db,cdf\n";
  for (const auto& [x, f] : pts) csv += num(x) + "," + num(f) + "\n";
  write_file(path, csv);

  json j = envelope(spec, "cdf_sidecar");
  j["method"] = method;
  j["statistic"] = stat;
  j["n_samples"] = stats.samples.size();
  j["n_failures"] = stats.failures.size();
  j["outage_fraction"] = stats.outage_fraction;
  j["outage_slack"] = stats.outage_slack;
  j["sinr_target_db"] = spec.sinr_target_db;
  j["sinr_target_linear"] = db_to_linear(spec.sinr_target_db);
  j["relaxation_factor"] = spec.config.relaxation_factor;
  fs::path sidecar = path;
  sidecar += ".json";
  write_file(sidecar, j.dump(2) + "\n");
}

void write_comm_table(const ExperimentSpec& spec, const fs::path& dir, int iterations) {
  make_dirs(dir);
  const auto& c = spec.config;
  std::string csv = csv_header(spec, "comm");
  csv += "# iterations: " + std::to_string(iterations) + "\n";
  csv += "scheme,per_exchange_scalars,per_iteration_bytes,total_bytes\n";
  json rows = json::array();
  for (auto scheme : {netsim::Scheme::Centralized, netsim::Scheme::AdmmCellFree, netsim::Scheme::AdmmCellular}) {
    const auto v = netsim::comm_volume(scheme, c.num_aps, c.num_antennas, c.num_users, iterations);
    csv += std::string(netsim::to_string(scheme)) + "," + std::to_string(v.per_exchange_scalars) + "," +
           std::to_string(v.per_iteration_bytes) + "," + std::to_string(v.total_bytes) + "\n";
    json r;
    r["scheme"] = netsim::to_string(scheme);
    r["scalar_type"] = scheme == netsim::Scheme::Centralized ? "complex" : "real";
    r["per_exchange_scalars"] = v.per_exchange_scalars;
    r["per_exchange_reals"] = v.per_exchange_reals;
    r["per_iteration_bytes"] = v.per_iteration_bytes;
    r["exchanges"] = v.exchanges;
    r["total_bytes"] = v.total_bytes;
    r["downlink_bytes_total"] = v.downlink_bytes_total;
    r["downlink_unicast_bytes_total"] = v.downlink_unicast_bytes_total;
    rows.push_back(std::move(r));
  }
  write_file(dir / "comm.csv", csv);
  json j = envelope(spec, "comm_detail");
  j["iterations"] = iterations;
  j["schemes"] = std::move(rows);
  const auto cen = netsim::comm_volume(netsim::Scheme::Centralized, c.num_aps, c.num_antennas, c.num_users, 1);
  const auto ours = netsim::comm_volume(netsim::Scheme::AdmmCellFree, c.num_aps, c.num_antennas, c.num_users, 1);
  j["per_exchange_reduction_factor"] = static_cast<double>(cen.per_exchange_reals) / static_cast<double>(ours.per_exchange_reals);
  write_file(dir / "comm_detail.json", j.dump(2) + "\n");
}

ScenarioOutcome run_scenario(const ExperimentSpec& spec, const RunOptions& options) {
  ScenarioOutcome outcome;
  outcome.name = spec.name;
  const fs::path dir = options.output_dir.value_or(spec.output_dir) / spec.name;
  make_dirs(dir);

  const SystemConfig& cfg = spec.config;
  const ChannelSource source = [&cfg](std::uint64_t i) { return generate_channels(cfg, i); };
  EnsembleOptions eopts;
  eopts.outage_slack = spec.outage_slack;
  eopts.threads = options.threads;

  std::mutex trace_mutex;
  std::map<std::uint64_t, json> traces;

  for (const auto& method : spec.methods) {
    Method fn;
    if (method == "admm") {
      fn = [&](const ChannelRealization& ch) {
        AdmmResult r = run_admm(ch, cfg);
        if (options.write_traces) {
          json t = trace_json(r, ch.realization_index);
          std::lock_guard lock(trace_mutex);
          traces[ch.realization_index] = std::move(t);
        }
        MethodOutcome out;
        out.precoder = std::move(r.precoder);
        out.iterations = r.iterations_used;
        out.converged = r.converged;
        return out;
      };
    } else {
      fn = [&spec, method](const ChannelRealization& ch) { return run_method(method, ch, spec); };
    }
    try {
      outcome.stats[method] = ensemble(source, fn, cfg, spec.n_realizations, eopts);
    } catch (const Error& e) {
      outcome.aborted = true;
      outcome.error = method + ": " + e.what();
      break;
    }
  }

  // results.csv: one row per (method, realization); failures carry nan.
  std::string csv = csv_header(spec, "results");
  csv += "scenario,method,realization,min_sinr_db,mean_sinr_db,total_power_db,iterations,converged\n";
  json summary = envelope(spec, "summary");
  json methods = json::object();
  for (const auto& method : spec.methods) {
    const auto it = outcome.stats.find(method);
    if (it == outcome.stats.end()) continue;
    const EnsembleStats& st = it->second;
    std::map<std::uint64_t, const EnsembleSample*> by_index;
    for (const auto& s : st.samples) by_index[s.realization_index] = &s;
    for (int r = 0; r < spec.n_realizations; ++r) {
      const auto idx = static_cast<std::uint64_t>(r);
      csv += spec.name + "," + method + "," + std::to_string(r) + ",";
      if (const auto f = by_index.find(idx); f != by_index.end()) {
        const EnsembleSample& s = *f->second;
        csv += num(s.sinr.min_sinr_db) + "," + num(s.sinr.mean_sinr_db) + "," + num(linear_to_db(s.total_power)) + "," +
               std::to_string(s.iterations) + "," + (s.converged ? "true" : "false") + "\n";
      } else {
        csv += "nan,nan,nan,0,false\n";
      }
    }

    std::vector<double> power_db, mean_db, min_db;
    std::size_t converged = 0;
    double iters = 0.0;
    for (const auto& s : st.samples) {
      power_db.push_back(linear_to_db(s.total_power));
      mean_db.push_back(s.sinr.mean_sinr_db);
      min_db.push_back(s.sinr.min_sinr_db);
      converged += s.converged;
      iters += s.iterations;
    }
    json m;
    m["n_samples"] = st.samples.size();
    json fails = json::array();
    for (const auto& f : st.failures) fails.push_back({{"realization", f.realization_index}, {"status", f.status}});
    m["failures"] = std::move(fails);
    m["outage_fraction"] = st.outage_fraction;
    m["median_total_power_db"] = median(power_db);
    m["min_mean_user_sinr_db"] = *std::min_element(mean_db.begin(), mean_db.end());
    m["min_min_user_sinr_db"] = *std::min_element(min_db.begin(), min_db.end());
    m["converged_fraction"] = static_cast<double>(converged) / static_cast<double>(st.samples.size());
    m["mean_iterations"] = iters / static_cast<double>(st.samples.size());
    methods[method] = std::move(m);

    for (auto stat : {CdfStatistic::MinUser, CdfStatistic::MeanUser}) {
      const std::string file = "cdf_" + method + (stat == CdfStatistic::MinUser ? "_min" : "_mean") + ".csv";
      export_cdf(st, dir / file, spec, method, stat);
    }
  }
  summary["methods"] = std::move(methods);

  // Paired power ordering on shared realizations.
  const auto cen = outcome.stats.find("centralized");
  if (cen != outcome.stats.end()) {
    json pairs = json::object();
    for (const auto& [method, st] : outcome.stats) {
      if (method == "centralized") continue;
      std::map<std::uint64_t, double> other;
      for (const auto& s : st.samples) other[s.realization_index] = s.total_power;
      std::size_t n = 0, ordered = 0;
      std::vector<double> excess_db;
      for (const auto& s : cen->second.samples) {
        const auto o = other.find(s.realization_index);
        if (o == other.end()) continue;
        ++n;
        ordered += s.total_power <= o->second * (1.0 + 1e-6);
        excess_db.push_back(linear_to_db(o->second / s.total_power));
      }
      pairs[method] = {{"paired_realizations", n},
                       {"centralized_not_above_fraction", n ? static_cast<double>(ordered) / static_cast<double>(n) : 0.0},
                       {"median_excess_power_db", median(excess_db)}};
    }
    summary["paired_vs_centralized"] = std::move(pairs);
  }
  summary["aborted"] = outcome.aborted;
  if (outcome.aborted) summary["error"] = outcome.error;

  write_file(dir / "results.csv", csv);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  if (options.write_traces && !traces.empty()) {
    json t = envelope(spec, "admm_trace");
    json list = json::array();
    for (auto& [_, tj] : traces) list.push_back(std::move(tj));
    t["realizations"] = std::move(list);
    write_file(dir / "trace.json", t.dump(1) + "\n");
  }
  return outcome;
}

int run_experiments(const std::vector<ExperimentSpec>& specs, const RunOptions& options) {
  std::set<std::string> names;
  for (const auto& s : specs)
    if (!names.insert(s.name).second) throw Error("duplicate scenario name '" + s.name + "'");
  int failures = 0;
  for (const auto& spec : specs) {
    const ScenarioOutcome out = run_scenario(spec, options);
    if (out.aborted) {
      ++failures;
      std::cerr << "scenario " << spec.name << " aborted: " << out.error << "\n";
    }
  }
  if (failures) std::cerr << failures << " of " << specs.size() << " scenarios aborted\n";
  return failures ? 1 : 0;
}

}  // namespace cfmimo
