#include "part/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

#include <openssl/evp.h>

namespace part::io {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw Error(ErrorKind::Parse, msg.str());
}

double parse_number(std::string_view field, const std::string& source, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    parse_error(source, line, "malformed number '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) parse_error(source, line, "non-finite value '" + std::string(field) + "'");
  return v;
}

// Parses a numeric CSV whose header must match `expect_header(col)`.
Matrix parse_table(const std::string& text, const std::string& source,
                   const std::function<std::string(std::size_t)>& expect_header) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::size_t rows = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      cols = fields.size();
      for (std::size_t c = 0; c < cols; ++c) {
        if (trim(fields[c]) != expect_header(c)) {
          parse_error(source, line_no, "unexpected header field '" + std::string(fields[c]) +
                                           "', expected '" + expect_header(c) + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != cols) {
      parse_error(source, line_no, "expected " + std::to_string(cols) + " fields, found " +
                                       std::to_string(fields.size()));
    }
    for (const auto& f : fields) values.push_back(parse_number(f, source, line_no));
    ++rows;
  }
  if (!header_seen) throw Error(ErrorKind::EmptyInput, source + ": empty file");
  if (rows == 0) throw Error(ErrorKind::EmptyInput, source + ": no data rows");
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
    }
  }
  return out;
}

std::string theta_name(std::size_t c) { return "theta_" + std::to_string(c + 1); }

}  // namespace

std::string format_draws(const DrawMatrix& draws) {
  std::string out;
  out.reserve(draws.rows() * draws.dim() * 24 + 16);
  for (std::size_t q = 0; q < draws.dim(); ++q) {
    if (q) out += ',';
    out += theta_name(q);
  }
  out += '\n';
  for (std::size_t j = 0; j < draws.rows(); ++j) {
    for (std::size_t q = 0; q < draws.dim(); ++q) {
      if (q) out += ',';
      append_number(out, draws(j, q));
    }
    out += '\n';
  }
  return out;
}

void write_draws(const DrawMatrix& draws, const fs::path& path) {
  atomic_write(path, format_draws(draws));
}

DrawMatrix parse_draws(const std::string& text, const std::string& source) {
  return DrawMatrix(parse_table(text, source, theta_name));
}

DrawMatrix read_draws(const fs::path& path) {
  return parse_draws(read_file(path), path.string());
}

void write_logistic_data(const LogisticData& data, const fs::path& path) {
  std::string out = "y";
  for (Eigen::Index k = 0; k < data.features.cols(); ++k) out += ",x_" + std::to_string(k + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    append_number(out, data.labels[i]);
    for (Eigen::Index k = 0; k < data.features.cols(); ++k) {
      out += ',';
      append_number(out, data.features(i, k));
    }
    out += '\n';
  }
  atomic_write(path, out);
}

LogisticData read_logistic_data(const fs::path& path, const Vector& theta_star) {
  const Matrix table = parse_table(read_file(path), path.string(), [](std::size_t c) {
    return c == 0 ? std::string("y") : "x_" + std::to_string(c);
  });
  if (table.cols() != theta_star.size()) {
    throw Error(ErrorKind::DimensionMismatch, path.string() + ": feature count does not match theta*");
  }
  LogisticData data;
  data.labels = table.col(0);
  data.features = table.rightCols(table.cols() - 1);
  data.theta_star = theta_star;
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] != 0.0 && data.labels[i] != 1.0) {
      throw Error(ErrorKind::Parse, path.string() + ": labels must be 0 or 1");
    }
  }
  return data;
}

void write_grid(const std::vector<std::pair<double, double>>& rows, const fs::path& path) {
  std::string out = "x,density\n";
  for (const auto& [x, d] : rows) {
    append_number(out, x);
    out += ',';
    append_number(out, d);
    out += '\n';
  }
  atomic_write(path, out);
}

void write_report(const EvalReport& report, const fs::path& path) {
  std::string out = "method,metric,value,seed\n";
  for (const auto& row : report) {
    out += row.method + ',' + row.metric + ',';
    append_number(out, row.value);
    out += ',' + std::to_string(row.seed) + '\n';
  }
  atomic_write(path, out);
}

void atomic_write(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::vector<fs::path> subset_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  static const std::regex pattern(R"(subset_(\d+)\.csv)");
  std::vector<std::pair<long, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, match, pattern)) {
      found.emplace_back(std::stol(match[1].str()), entry.path());
    }
  }
  if (found.empty()) throw Error(ErrorKind::EmptyInput, "no subset_<i>.csv files in " + dir.string());
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (auto& [idx, p] : found) out.push_back(std::move(p));
  return out;
}

SampleSet read_subsets(const fs::path& dir) {
  std::vector<DrawMatrix> subsets;
  for (const auto& file : subset_files(dir)) {
    subsets.push_back(read_draws(file));
    subsets.back().set_subset_id(static_cast<int>(subsets.size() - 1));
  }
  return SampleSet(std::move(subsets));
}

}  // namespace part::io
