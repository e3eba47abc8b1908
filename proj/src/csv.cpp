#include "qclmi/csv.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace qclmi {

namespace {

std::string fmt(double v) {
  std::array<char, 40> buf;
  const int n = std::snprintf(buf.data(), buf.size(), "%.12g", v);
  return std::string(buf.data(), static_cast<size_t>(n));
}

using Getter = std::function<const std::optional<double>&(const EntropyRecord&)>;

struct Column {
  const char* name;
  Getter get;
};

const std::vector<Column>& entropy_columns() {
  static const std::vector<Column> cols = {
      {"S1_cl", [](const EntropyRecord& r) -> const std::optional<double>& { return r.s1_cl; }},
      {"S2_cl", [](const EntropyRecord& r) -> const std::optional<double>& { return r.s2_cl; }},
      {"I_cl", [](const EntropyRecord& r) -> const std::optional<double>& { return r.i_cl; }},
      {"purity_check",
       [](const EntropyRecord& r) -> const std::optional<double>& { return r.purity_check; }},
      {"mc_stderr",
       [](const EntropyRecord& r) -> const std::optional<double>& { return r.mc_stderr; }},
      {"S1_q", [](const EntropyRecord& r) -> const std::optional<double>& { return r.s1_q; }},
      {"S2_q", [](const EntropyRecord& r) -> const std::optional<double>& { return r.s2_q; }},
      {"I_q", [](const EntropyRecord& r) -> const std::optional<double>& { return r.i_q; }},
      {"trunc_pop",
       [](const EntropyRecord& r) -> const std::optional<double>& { return r.trunc_pop; }},
      {"I_ref", [](const EntropyRecord& r) -> const std::optional<double>& { return r.i_ref; }},
      {"Icl_ref",
       [](const EntropyRecord& r) -> const std::optional<double>& { return r.icl_ref; }},
  };
  return cols;
}

std::optional<double>& entropy_field(EntropyRecord& r, const std::string& name) {
  if (name == "S1_cl") return r.s1_cl;
  if (name == "S2_cl") return r.s2_cl;
  if (name == "I_cl") return r.i_cl;
  if (name == "purity_check") return r.purity_check;
  if (name == "mc_stderr") return r.mc_stderr;
  if (name == "S1_q") return r.s1_q;
  if (name == "S2_q") return r.s2_q;
  if (name == "I_q") return r.i_q;
  if (name == "trunc_pop") return r.trunc_pop;
  if (name == "I_ref") return r.i_ref;
  if (name == "Icl_ref") return r.icl_ref;
  throw ConfigError("csv", "unknown column '" + name + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

double parse_number(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("csv", std::string("malformed ") + what + " value '" + s + "'");
  return v;
}

}  // namespace

std::string entropy_csv_text(const EntropySeries& series, const std::string& manifest_name) {
  if (series.empty()) throw EmptyInput("entropy series has no records");
  const auto& cols = entropy_columns();
  std::vector<bool> present(cols.size(), false);
  for (size_t c = 0; c < cols.size(); ++c)
    for (const auto& r : series.records)
      if (cols[c].get(r).has_value()) {
        present[c] = true;
        break;
      }

  std::string out;
  if (!manifest_name.empty()) out += "# manifest: " + manifest_name + "\n";
  out += "t";
  for (size_t c = 0; c < cols.size(); ++c)
    if (present[c]) {
      out += ',';
      out += cols[c].name;
    }
  out += '\n';
  for (const auto& r : series.records) {
    out += fmt(r.t);
    for (size_t c = 0; c < cols.size(); ++c) {
      if (!present[c]) continue;
      out += ',';
      const auto& v = cols[c].get(r);
      if (v.has_value()) out += fmt(*v);
    }
    out += '\n';
  }
  return out;
}

EntropySeries parse_entropy_csv(const std::string& text) {
  const auto lines = data_lines(text);
  if (lines.empty()) throw EmptyInput("no CSV content");
  const auto header = split(lines[0], ',');
  if (header.empty() || header[0] != "t")
    throw ConfigError("csv", "entropy CSV must start with a 't' column");
  EntropySeries series;
  for (size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li], ',');
    if (cells.size() != header.size())
      throw ConfigError("csv", "row " + std::to_string(li) + " has " +
                                   std::to_string(cells.size()) + " cells, expected " +
                                   std::to_string(header.size()));
    EntropyRecord rec;
    rec.t = parse_number(cells[0], "t");
    for (size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      entropy_field(rec, header[c]) = parse_number(cells[c], header[c].c_str());
    }
    series.records.push_back(rec);
  }
  if (series.empty()) throw EmptyInput("entropy CSV has a header but no rows");
  return series;
}

std::string section_csv_text(const std::vector<SectionPoint>& points,
                             const std::string& manifest_name) {
  if (points.empty()) throw EmptyInput("section has no points");
  std::string out;
  if (!manifest_name.empty()) out += "# manifest: " + manifest_name + "\n";
  out += "q2,p2,seed_index,crossing_index\n";
  for (const auto& p : points) {
    out += fmt(p.q2);
    out += ',';
    out += fmt(p.p2);
    out += ',';
    out += std::to_string(p.seed_index);
    out += ',';
    out += std::to_string(p.crossing_index);
    out += '\n';
  }
  return out;
}

std::vector<SectionPoint> parse_section_csv(const std::string& text) {
  const auto lines = data_lines(text);
  if (lines.empty()) throw EmptyInput("no CSV content");
  if (lines[0] != "q2,p2,seed_index,crossing_index")
    throw ConfigError("csv", "not a section CSV header: '" + lines[0] + "'");
  std::vector<SectionPoint> out;
  for (size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li], ',');
    if (cells.size() != 4)
      throw ConfigError("csv", "section row " + std::to_string(li) + " needs 4 cells");
    SectionPoint p;
    p.q2 = parse_number(cells[0], "q2");
    p.p2 = parse_number(cells[1], "p2");
    p.seed_index = static_cast<int>(parse_number(cells[2], "seed_index"));
    p.crossing_index = static_cast<int>(parse_number(cells[3], "crossing_index"));
    out.push_back(p);
  }
  if (out.empty()) throw EmptyInput("section CSV has a header but no rows");
  return out;
}

bool is_section_csv(const std::string& text) {
  const auto lines = data_lines(text);
  return !lines.empty() && lines[0] == "q2,p2,seed_index,crossing_index";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("path", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("path", "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("path", "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qclmi
