#include "spcp/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spcp/errors.hpp"

namespace spcp {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'P', 'C', 'P', 'M', 'A', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary matrix format assumes a little-endian host");

void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw InputError("binary matrix: truncated header");
  return v;
}

}  // namespace

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_u64(os, static_cast<std::uint64_t>(m.rows()));
  put_u64(os, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  if (!os) throw InputError("write failed: " + path.string());
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open: " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw InputError("not an SPCPMAT1 file: " + path.string());
  const auto rows = get_u64(is);
  const auto cols = get_u64(is);
  if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw InputError("binary matrix: absurd shape");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      double v = 0.0;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      if (!is) throw InputError("binary matrix: truncated payload");
      m(i, j) = v;
    }
  }
  require_finite(m, path.string());
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) throw InputError("csv: empty cell in " + path.string());
      const std::string trimmed = cell.substr(first, last - first + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
      if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
        throw InputError("csv: cannot parse '" + trimmed + "' in " + path.string());
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("csv: ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  require_finite(m, path.string());
  return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open: " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (is && magic == kMagic) return read_matrix_binary(path);
  return read_matrix_csv(path);
}

}  // namespace spcp
