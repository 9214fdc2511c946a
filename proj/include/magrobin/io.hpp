#pragma once

// Deterministic file artifacts: CSV sweep tables with the fixed header
// (h, zeta, lambda1, residual, truncation_mass, predicted, remainder),
// JSON fit reports and manifests, and the flat key=value config reader.
// All numeric text is produced by snprintf with %.17g so repeated runs of
// the same computation emit byte-identical files.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asymptotics.hpp"

namespace magrobin {

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline const char* sweep_csv_header() {
  return "h,zeta,lambda1,residual,truncation_mass,predicted,remainder";
}

inline std::string sweep_to_csv(const SweepResult& sr) {
  std::ostringstream os;
  os << sweep_csv_header() << "\n";
  for (const auto& r : sr.rows) {
    os << format_g17(r.h) << ',' << format_g17(r.zeta) << ',' << format_g17(r.lambda1) << ','
       << format_g17(r.residual) << ',' << format_g17(r.truncation_mass) << ','
       << format_g17(r.predicted) << ',' << format_g17(r.remainder) << "\n";
  }
  return os.str();
}

inline void write_sweep_csv(const std::string& path, const SweepResult& sr) {
  write_text_file(path, sweep_to_csv(sr));
}

// Eigenvector dump: one row per node, (s, t, Re u, Im u, |u|^2).
inline void write_mode_csv(const std::string& path, const StripGrid& grid,
                           const Eigen::VectorXcd& u) {
  std::ostringstream os;
  os << "s,t,re_u,im_u,abs2_u\n";
  for (int i = 0; i < grid.n_s; ++i)
    for (int j = 0; j < grid.n_t; ++j) {
      std::complex<double> z = u[grid.index(i, j)];
      os << format_g17(grid.s_node(i)) << ',' << format_g17(grid.t_node(j)) << ','
         << format_g17(z.real()) << ',' << format_g17(z.imag()) << ','
         << format_g17(std::norm(z)) << "\n";
    }
  write_text_file(path, os.str());
}

inline nlohmann::json fit_to_json(const FitResult& f) {
  return nlohmann::json{{"exponent", f.exponent},
                        {"constant", f.constant},
                        {"floor_limited", f.floor_limited},
                        {"points", f.points}};
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// Flat key=value config. '#' starts a comment; blank lines ignored; keys and
// values are trimmed. A .json file holding a flat string/number object is
// accepted too, so a written manifest can be replayed as a config.
inline std::map<std::string, std::string> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string body = buffer.str();
  std::map<std::string, std::string> kv;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::size_t first = body.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && body[first] == '{') {
    nlohmann::json j = nlohmann::json::parse(body);
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.value().is_string())
        kv[it.key()] = it.value().get<std::string>();
      else
        kv[it.key()] = it.value().dump();
    }
    return kv;
  }
  std::istringstream lines(body);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  return kv;
}

// Numeric CSV with a header row -> column name to values.
inline std::map<std::string, std::vector<double>> read_csv_columns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = s.find(',', start);
      cells.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  strip_cr(line);
  std::vector<std::string> names = split(line);
  std::map<std::string, std::vector<double>> cols;
  for (auto& n : names) cols[n];
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != names.size())
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has wrong arity");
    for (std::size_t i = 0; i < names.size(); ++i) cols[names[i]].push_back(std::stod(cells[i]));
  }
  return cols;
}

inline nlohmann::json manifest_json(const std::string& command,
                                    const std::map<std::string, std::string>& resolved) {
  nlohmann::json j;
  j["command"] = command;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : resolved) params[k] = v;
  j["parameters"] = params;
  j["format_version"] = 1;
  return j;
}

}  // namespace magrobin
