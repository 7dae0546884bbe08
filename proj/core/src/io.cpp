#include "krafty/io.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace krafty::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string strip(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (std::isspace(static_cast<unsigned char>(s[a])) != 0)) ++a;
  while (b > a && (std::isspace(static_cast<unsigned char>(s[b - 1])) != 0)) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& field, const std::filesystem::path& path, std::size_t line_no) {
  const std::string token = strip(field);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    throw input_error(path.string() + ":" + std::to_string(line_no) +
                      ": not a number: '" + field + "'");
  }
  return value;
}

long parse_long(const std::string& field, const std::filesystem::path& path, std::size_t line_no) {
  const std::string token = strip(field);
  char* end = nullptr;
  errno = 0;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (token.empty() || end != token.c_str() + token.size() || errno == ERANGE) {
    throw input_error(path.string() + ":" + std::to_string(line_no) +
                      ": not an integer: '" + field + "'");
  }
  return value;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buffer[40];
  // Shortest representation that round-trips.
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, v);
    double back = 0.0;
    std::sscanf(buffer, "%lf", &back);
    if (back == v) return buffer;
  }
  return buffer;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& field : fields) row.push_back(parse_double(field, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw input_error(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw input_error(path.string() + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  if (!m.allFinite()) throw input_error(path.string() + ": non-finite entries");
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  write_file(path, out.str());
}

Assignment read_assignment_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    labels.push_back(static_cast<int>(parse_long(line, path, line_no)));
  }
  if (labels.empty()) throw input_error(path.string() + ": empty assignment");
  return Assignment::from_labels(std::move(labels));
}

void write_assignment_csv(const std::filesystem::path& path, const Assignment& a) {
  std::ostringstream out;
  for (int i = 0; i < a.n(); ++i) out << a[i] << '\n';
  write_file(path, out.str());
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const auto fields = split(trimmed, ',');
    if (line_no == 1 && !fields.empty() && strip(fields[0]) == "index") continue;  // header
    if (fields.size() == 1) {
      values.push_back(parse_double(fields[0], path, line_no));
    } else {
      values.push_back(parse_double(fields[1], path, line_no));
    }
  }
  if (values.empty()) throw input_error(path.string() + ": empty spectrum");
  return Spectrum(std::move(values));
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  std::ostringstream out;
  out << "index,value,gap\n";
  const auto& values = s.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double gap = i + 1 < values.size() ? values[i] - values[i + 1] : 0.0;
    out << (i + 1) << ',' << format_double(values[i]) << ',' << format_double(gap) << '\n';
  }
  write_file(path, out.str());
}

Dendrogram read_dendrogram_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  Dendrogram d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const auto fields = split(trimmed, ',');
    if (line_no == 1 && !fields.empty() && strip(fields[0]) == "step") continue;  // header
    if (fields.size() != 5) {
      throw input_error(path.string() + ":" + std::to_string(line_no) +
                        ": expected step,left,right,merged,height");
    }
    Dendrogram::Merge m;
    m.step = static_cast<int>(parse_long(fields[0], path, line_no));
    m.left = static_cast<int>(parse_long(fields[1], path, line_no));
    m.right = static_cast<int>(parse_long(fields[2], path, line_no));
    m.merged = static_cast<int>(parse_long(fields[3], path, line_no));
    m.height = parse_double(fields[4], path, line_no);
    d.merges.push_back(m);
  }
  if (d.merges.empty()) throw input_error(path.string() + ": empty dendrogram");
  d.n = static_cast<int>(d.merges.size()) + 1;
  return d;
}

void write_dendrogram_csv(const std::filesystem::path& path, const Dendrogram& d) {
  std::ostringstream out;
  out << "step,left,right,merged,height\n";
  for (const auto& m : d.merges) {
    out << m.step << ',' << m.left << ',' << m.right << ',' << m.merged << ','
        << format_double(m.height) << '\n';
  }
  write_file(path, out.str());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw input_error("cannot write " + path.string());
  out << content;
  if (!out) throw input_error("write failed for " + path.string());
}

std::string file_digest(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace krafty::io
