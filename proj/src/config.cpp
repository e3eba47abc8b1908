#include "qclmi/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace qclmi {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Cut an end-of-line comment, respecting quoted strings.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string_view body = v;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  double out = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), out);
  if (res.ec != std::errc{} || res.ptr != body.data() + body.size())
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(v) + "'");
  return out;
}

long long parse_int(std::string_view key, std::string_view v) {
  std::string_view body = v;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  long long out = 0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), out);
  if (res.ec != std::errc{} || res.ptr != body.data() + body.size())
    throw ConfigError(std::string(key), "expected an integer, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(std::string(key), "expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

std::string parse_string(std::string_view key, std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    const std::string_view body = v.substr(1, v.size() - 2);
    if (body.find('"') != std::string_view::npos)
      throw ConfigError(std::string(key), "nested quotes are not supported");
    return std::string(body);
  }
  for (char c : v)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      throw ConfigError(std::string(key), "bare strings may only contain [A-Za-z0-9_]");
  return std::string(v);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

SimConfig parse_config_text(std::string_view text) {
  SimConfig c;
  std::set<std::string, std::less<>> seen;
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");

    if (key == "model") c.model = parse_string(key, val);
    else if (key == "omega1") c.omega1 = parse_double(key, val);
    else if (key == "omega2") c.omega2 = parse_double(key, val);
    else if (key == "lambda") c.lambda = parse_double(key, val);
    else if (key == "hbar") c.hbar = parse_double(key, val);
    else if (key == "state1") c.state1 = parse_string(key, val);
    else if (key == "state2") c.state2 = parse_string(key, val);
    else if (key == "center1_q") c.center1_q = parse_double(key, val);
    else if (key == "center1_p") c.center1_p = parse_double(key, val);
    else if (key == "center2_q") c.center2_q = parse_double(key, val);
    else if (key == "center2_p") c.center2_p = parse_double(key, val);
    else if (key == "tmax") c.tmax = parse_double(key, val);
    else if (key == "steps") c.steps = parse_int(key, val);
    else if (key == "grid_n") c.grid_n = static_cast<int>(parse_int(key, val));
    else if (key == "grid_span_sigmas") c.grid_span_sigmas = parse_double(key, val);
    else if (key == "mc_samples") c.mc_samples = parse_int(key, val);
    else if (key == "rk4_dt") c.rk4_dt = parse_double(key, val);
    else if (key == "fock_nmax") c.fock_nmax = static_cast<int>(parse_int(key, val));
    else if (key == "seed") c.seed = parse_uint(key, val);
    else throw ConfigError(key, "unknown key");
  }
  for (const char* req : {"model", "tmax", "steps"})
    if (!seen.count(req)) throw ConfigError(req, "missing required key");
  return c;
}

SimConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const SimConfig& c) {
  std::ostringstream out;
  out << "model = \"" << c.model << "\"\n";
  out << "omega1 = " << format_double(c.omega1) << "\n";
  out << "omega2 = " << format_double(c.omega2) << "\n";
  out << "lambda = " << format_double(c.lambda) << "\n";
  out << "hbar = " << format_double(c.hbar) << "\n";
  out << "state1 = \"" << c.state1 << "\"\n";
  out << "state2 = \"" << c.state2 << "\"\n";
  out << "center1_q = " << format_double(c.center1_q) << "\n";
  out << "center1_p = " << format_double(c.center1_p) << "\n";
  out << "center2_q = " << format_double(c.center2_q) << "\n";
  out << "center2_p = " << format_double(c.center2_p) << "\n";
  out << "tmax = " << format_double(c.tmax) << "\n";
  out << "steps = " << c.steps << "\n";
  out << "grid_n = " << c.grid_n << "\n";
  out << "grid_span_sigmas = " << format_double(c.grid_span_sigmas) << "\n";
  out << "mc_samples = " << c.mc_samples << "\n";
  out << "rk4_dt = " << format_double(c.rk4_dt) << "\n";
  out << "fock_nmax = " << c.fock_nmax << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

ValidatedConfig build_config(const SimConfig& c) {
  ValidatedConfig v;
  v.model.kind = model_kind_from_string(c.model);
  v.model.omega1 = c.omega1;
  v.model.omega2 = c.omega2;
  v.model.lambda = c.lambda;
  v.model.hbar = c.hbar;
  v.density.sub1 = {factor_kind_from_string(c.state1), c.center1_q, c.center1_p};
  v.density.sub2 = {factor_kind_from_string(c.state2), c.center2_q, c.center2_p};
  if (c.steps < 1 || c.steps > 1'000'000) throw ConfigError("steps", "steps must be in [1, 1e6]");
  v.grid = TimeGrid(c.tmax, static_cast<int>(c.steps));
  v.grid_n = c.grid_n;
  v.grid_span_sigmas = c.grid_span_sigmas;
  if (c.mc_samples < 0) throw ConfigError("mc_samples", "mc_samples must be >= 0");
  v.mc_samples = static_cast<long>(c.mc_samples);
  v.rk4_dt = c.rk4_dt;
  v.fock_nmax = c.fock_nmax;
  v.seed = c.seed;
  return validate(v);
}

}  // namespace qclmi
