#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "part/core.hpp"
#include "part/metrics.hpp"
#include "part/samplers.hpp"

namespace part::io {

namespace fs = std::filesystem;

// CSV with header theta_1,...,theta_p and one draw per row, printed with 17
// significant digits so a read-back is bit-exact.
void write_draws(const DrawMatrix& draws, const fs::path& path);
std::string format_draws(const DrawMatrix& draws);

// Throws Error(EmptyInput) for an empty file and Error(Parse) naming the
// line for a malformed or non-finite row or a header/arity mismatch.
DrawMatrix read_draws(const fs::path& path);
DrawMatrix parse_draws(const std::string& text, const std::string& source = "<memory>");

// Logistic dataset: header y,x_1,...,x_{p-1}.
void write_logistic_data(const LogisticData& data, const fs::path& path);
LogisticData read_logistic_data(const fs::path& path, const Vector& theta_star);

// Two-column x,density CSV.
void write_grid(const std::vector<std::pair<double, double>>& rows, const fs::path& path);

void write_report(const EvalReport& report, const fs::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const fs::path& path, const std::string& contents);

std::string read_file(const fs::path& path);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

// Subset draw files of a directory: subset_<i>.csv sorted by i.
std::vector<fs::path> subset_files(const fs::path& dir);

// Reads every subset file of a directory into one sample set.
SampleSet read_subsets(const fs::path& dir);

}  // namespace part::io
