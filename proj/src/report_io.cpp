#include "icmbayes/report_io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string_view>

#include <json.hpp>

#include "icmbayes/util.hpp"

namespace icmbayes {

namespace {

using nlohmann::json;

double parse_number(const std::string& text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw UsageError(context + ": cannot parse number '" + text + "'");
  }
  return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& context) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    out.push_back(parse_number(text.substr(start, end - start), context));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

std::int64_t to_count(double v, const std::string& context) {
  const std::int64_t n = std::llround(v);
  if (static_cast<double>(n) != v) {
    throw UsageError(context + ": expected an integer, got " + format_double(v));
  }
  return n;
}

// Mutable mirror of ExperimentConfig; the validated types are constructed
// once all keys are known.
struct RawConfig {
  double mean_theta, mean_psi, var_theta, var_psi;
  double var_x, var_eta;
  std::vector<double> rho_list;
  std::vector<std::int64_t> n_list;
  std::vector<double> m_ratio_list;
  std::int64_t trials;
  std::uint64_t master_seed;
  double theta_star, psi_star;
  std::int64_t curve_points;

  explicit RawConfig(const ExperimentConfig& cfg)
      : mean_theta(cfg.prior.mean_theta),
        mean_psi(cfg.prior.mean_psi),
        var_theta(cfg.prior.var_theta),
        var_psi(cfg.prior.var_psi),
        var_x(cfg.lik.var_x),
        var_eta(cfg.lik.var_eta),
        rho_list(cfg.rho_list),
        n_list(cfg.n_list),
        m_ratio_list(cfg.m_ratio_list),
        trials(cfg.trials),
        master_seed(cfg.master_seed),
        theta_star(cfg.theta_star),
        psi_star(cfg.psi_star),
        curve_points(cfg.curve_points) {}

  void apply(const std::string& key, const std::vector<double>& values,
             const std::string& context) {
    const auto scalar = [&]() -> double {
      if (values.size() != 1) {
        throw UsageError(context + ": key '" + key + "' takes a single value");
      }
      return values[0];
    };
    if (key == "mean_theta") {
      mean_theta = scalar();
    } else if (key == "mean_psi") {
      mean_psi = scalar();
    } else if (key == "var_theta") {
      var_theta = scalar();
    } else if (key == "var_psi") {
      var_psi = scalar();
    } else if (key == "var_x") {
      var_x = scalar();
    } else if (key == "var_eta") {
      var_eta = scalar();
    } else if (key == "rho_list") {
      rho_list = values;
    } else if (key == "n_list") {
      n_list.clear();
      for (double v : values) {
        n_list.push_back(to_count(v, context + ".n_list"));
      }
    } else if (key == "m_ratio_list") {
      m_ratio_list = values;
    } else if (key == "trials") {
      trials = to_count(scalar(), context + ".trials");
    } else if (key == "master_seed") {
      const double v = scalar();
      if (v < 0 || std::llround(v) < 0) {
        throw UsageError(context + ".master_seed: must be non-negative");
      }
      master_seed = static_cast<std::uint64_t>(std::llround(v));
    } else if (key == "theta_star") {
      theta_star = scalar();
    } else if (key == "psi_star") {
      psi_star = scalar();
    } else if (key == "curve_points") {
      curve_points = to_count(scalar(), context + ".curve_points");
    } else {
      throw UsageError(context + ": unknown config key '" + key + "'");
    }
  }

  ExperimentConfig finalize(const ExperimentConfig& base) const {
    ExperimentConfig cfg = base;
    cfg.prior = PriorSpec(mean_theta, mean_psi, var_theta, var_psi, base.prior.rho);
    cfg.lik = LikelihoodSpec(var_x, var_eta);
    cfg.rho_list = rho_list;
    cfg.n_list = n_list;
    cfg.m_ratio_list = m_ratio_list;
    if (trials > std::numeric_limits<int>::max() || trials < 1) {
      throw std::invalid_argument("trials must be >= 1");
    }
    cfg.trials = static_cast<int>(trials);
    cfg.master_seed = master_seed;
    cfg.theta_star = theta_star;
    cfg.psi_star = psi_star;
    if (curve_points > 100000 || curve_points < 2) {
      throw std::invalid_argument("curve_points must be in [2, 100000]");
    }
    cfg.curve_points = static_cast<int>(curve_points);
    cfg.validate();
    return cfg;
  }
};

std::string iso8601_utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << contents;
  out.flush();
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

}  // namespace

ExperimentConfig default_config(ExperimentMode mode) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  switch (mode) {
    case ExperimentMode::kUnsupervised:
      cfg.rho_list = {0.75};
      cfg.n_list = {0};
      cfg.m_ratio_list = {0.0};
      cfg.trials = 1;
      break;
    case ExperimentMode::kSupervised:
      cfg.m_ratio_list = {0.0};
      cfg.trials = 10000;
      break;
    case ExperimentMode::kSemiSupervised:
      cfg.m_ratio_list = {0.1, 1.0, 10.0};
      cfg.trials = 10000;
      break;
    case ExperimentMode::kTrajectory:
      // Longer N grid: with a strongly correlated prior the posterior mean
      // needs roughly N > 1200 before the prior pull on theta drops under the
      // 0.05 landing tolerance.
      cfg.n_list = {0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000};
      cfg.m_ratio_list = {0.0};
      cfg.trials = 1000;
      break;
  }
  return cfg;
}

ExperimentConfig parse_config(ExperimentMode mode,
                              const std::optional<std::string>& file_json,
                              const std::vector<std::string>& overrides) {
  const ExperimentConfig base = default_config(mode);
  RawConfig raw(base);

  const bool file_blank =
      file_json.has_value() &&
      file_json->find_first_not_of(" \t\r\n") == std::string::npos;
  if (file_json.has_value() && !file_blank) {
    json doc;
    try {
      doc = json::parse(*file_json);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config file: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
      throw UsageError("config file: top level must be a flat JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
      std::vector<double> values;
      if (value.is_number()) {
        values.push_back(value.get<double>());
      } else if (value.is_array()) {
        for (const auto& item : value) {
          if (!item.is_number()) {
            throw UsageError("config file: key '" + key + "' has a non-numeric entry");
          }
          values.push_back(item.get<double>());
        }
        if (values.empty()) {
          throw UsageError("config file: key '" + key + "' is an empty list");
        }
      } else {
        throw UsageError("config file: key '" + key +
                         "' must be a number or a list of numbers");
      }
      raw.apply(key, values, "config file");
    }
  }

  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("override '" + kv + "' is not of the form key=value");
    }
    const std::string key = kv.substr(0, eq);
    raw.apply(key, parse_number_list(kv.substr(eq + 1), "override " + key), "override");
  }

  return raw.finalize(base);
}

std::uint64_t parse_seed(const std::string& text) {
  std::string_view sv(text);
  int base = 10;
  if (sv.size() > 2 && sv[0] == '0' && (sv[1] == 'x' || sv[1] == 'X')) {
    base = 16;
    sv.remove_prefix(2);
  }
  std::uint64_t v = 0;
  const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v, base);
  if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size() || sv.empty()) {
    throw UsageError("seed '" + text + "' is not an unsigned decimal or 0x-hex integer");
  }
  return v;
}

const char* subcommand_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kUnsupervised:
      return "fig1";
    case ExperimentMode::kSupervised:
      return "fig2";
    case ExperimentMode::kTrajectory:
      return "fig2-traj";
    case ExperimentMode::kSemiSupervised:
      return "fig3";
  }
  return "unknown";
}

const char* csv_filename(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kUnsupervised:
      return "fig1.csv";
    case ExperimentMode::kSupervised:
      return "fig2.csv";
    case ExperimentMode::kTrajectory:
      return "fig2_traj.csv";
    case ExperimentMode::kSemiSupervised:
      return "fig3.csv";
  }
  return "report.csv";
}

std::string render_csv(const ExperimentReport& report) {
  std::string out;
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    if (c > 0) {
      out += ',';
    }
    out += report.columns[c];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) {
        out += ',';
      }
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("read_csv: empty input");
  }
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string::npos ? line.size() : comma;
    table.header.push_back(line.substr(start, end - start));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::size_t end = comma == std::string::npos ? line.size() : comma;
      const std::string cell = line.substr(start, end - start);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw std::invalid_argument("read_csv: bad number at line " +
                                    std::to_string(line_no));
      }
      row.push_back(v);
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    if (row.size() != table.header.size()) {
      throw std::invalid_argument("read_csv: column count mismatch at line " +
                                  std::to_string(line_no));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c > 0) {
      out += ',';
    }
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) {
        out += ',';
      }
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_config_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = mode_name(cfg.mode);
  j["mean_theta"] = cfg.prior.mean_theta;
  j["mean_psi"] = cfg.prior.mean_psi;
  j["var_theta"] = cfg.prior.var_theta;
  j["var_psi"] = cfg.prior.var_psi;
  j["var_x"] = cfg.lik.var_x;
  j["var_eta"] = cfg.lik.var_eta;
  j["rho_list"] = cfg.rho_list;
  j["n_list"] = cfg.n_list;
  j["m_ratio_list"] = cfg.m_ratio_list;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["theta_star"] = cfg.theta_star;
  j["psi_star"] = cfg.psi_star;
  j["curve_points"] = cfg.curve_points;
  return j.dump(2);
}

std::string render_meta_json(const ExperimentReport& report,
                             const std::string& timestamp_utc) {
  json j;
  j["subcommand"] = subcommand_name(report.mode);
  j["seed"] = report.master_seed;
  j["version"] = report.version;
  j["generated_at_utc"] = timestamp_utc;
  j["rows"] = report.rows.size();
  j["config"] = json::parse(render_config_json(report.config));
  return j.dump(2) + "\n";
}

std::vector<std::string> emit_report(const ExperimentReport& report,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  }
  const std::string csv_path = (fs::path(out_dir) / csv_filename(report.mode)).string();
  const std::string meta_path = (fs::path(out_dir) / "meta.json").string();
  write_file(csv_path, render_csv(report));
  write_file(meta_path, render_meta_json(report, iso8601_utc_now()));
  return {csv_path, meta_path};
}

}  // namespace icmbayes
