#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "proxpinv/errors.hpp"
#include "proxpinv/problem.hpp"

namespace proxpinv::matio {

enum class Format { matrixmarket_array, csv };

inline Format parse_format(std::string_view s) {
  if (s == "mm" || s == "matrixmarket" || s == "matrixmarket_array") return Format::matrixmarket_array;
  if (s == "csv") return Format::csv;
  throw ConfigError("unknown matrix format '" + std::string(s) + "' (expected mm or csv)");
}

inline std::string_view to_string(Format f) {
  return f == Format::csv ? "csv" : "mm";
}

inline constexpr std::string_view matrixmarket_header = "%%MatrixMarket matrix array real general";

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct Hilbert {
  int n = 1;
};

/// U diag(sigma) V^T with seeded random orthogonal U (m x m) and V (n x n).
struct PrescribedSV {
  int m = 1;
  int n = 1;
  std::vector<double> sigma;
  std::uint64_t seed = 0;
};

/// rank singular values decaying geometrically from 1 to 1/condition, then zeros.
struct RankDeficient {
  int m = 2;
  int n = 2;
  int rank = 1;
  double condition = 1.0;
  std::uint64_t seed = 0;
};

struct FileSource {
  std::string path;
  Format format = Format::matrixmarket_array;
};

using MatrixSpec = std::variant<Hilbert, PrescribedSV, RankDeficient, FileSource>;

/// Standard normal samples from std::mt19937_64 via Box-Muller on 53-bit uniforms.
///
/// std::normal_distribution is implementation-defined, so it is avoided to keep
/// generated matrices identical across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// k x c matrix filled column-major.
  Matrix matrix(Eigen::Index k, Eigen::Index c) {
    Matrix out(k, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < k; ++i) out(i, j) = next();
    return out;
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Q factor of a Gaussian k x k matrix, columns sign-fixed so that diag(R) > 0.
inline Matrix random_orthogonal(Eigen::Index k, GaussianStream& rng) {
  const Eigen::HouseholderQR<Matrix> qr(rng.matrix(k, k));
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  return q;
}

inline Matrix hilbert(int n) {
  if (n < 1) throw ConfigError("hilbert: n must be positive");
  Matrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = 1.0 / static_cast<double>(i + j + 1);
  return h;
}

inline Matrix prescribed_sv(const PrescribedSV& s) {
  if (s.m < 1 || s.n < 1) throw ConfigError("prescribed_sv: dimensions must be positive");
  const auto k = static_cast<std::size_t>(std::min(s.m, s.n));
  if (s.sigma.size() != k) {
    throw ConfigError("prescribed_sv: expected " + std::to_string(k) + " singular values, got " +
                      std::to_string(s.sigma.size()));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(s.sigma[i]) || s.sigma[i] < 0.0) {
      throw ConfigError("prescribed_sv: singular values must be finite and nonnegative");
    }
    if (i > 0 && s.sigma[i] > s.sigma[i - 1]) {
      throw ConfigError("prescribed_sv: singular values must be nonincreasing");
    }
  }
  GaussianStream rng(s.seed);
  const Matrix u = random_orthogonal(s.m, rng);
  const Matrix v = random_orthogonal(s.n, rng);
  const auto kk = static_cast<Eigen::Index>(k);
  const Vector sigma = Eigen::Map<const Vector>(s.sigma.data(), kk);
  return u.leftCols(kk) * sigma.asDiagonal() * v.leftCols(kk).transpose();
}

inline std::vector<double> rank_deficient_sigma(const RankDeficient& s) {
  if (s.m < 1 || s.n < 1) throw ConfigError("rank_deficient: dimensions must be positive");
  const int k = std::min(s.m, s.n);
  if (s.rank < 1 || s.rank >= k) {
    throw ConfigError("rank_deficient: need 1 <= rank < min(m, n)");
  }
  if (!(s.condition >= 1.0) || !std::isfinite(s.condition)) {
    throw ConfigError("rank_deficient: condition must be >= 1");
  }
  std::vector<double> sigma(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < s.rank; ++i) {
    sigma[static_cast<std::size_t>(i)] =
        s.rank == 1 ? 1.0 : std::pow(s.condition, -static_cast<double>(i) / (s.rank - 1));
  }
  return sigma;
}

inline ProblemData read_matrix(const std::string& path, Format format);

inline ProblemData generate(const MatrixSpec& spec) {
  return std::visit(
      [](const auto& s) -> ProblemData {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Hilbert>) {
          return ProblemData(hilbert(s.n));
        } else if constexpr (std::is_same_v<S, PrescribedSV>) {
          return ProblemData(prescribed_sv(s));
        } else if constexpr (std::is_same_v<S, RankDeficient>) {
          return ProblemData(prescribed_sv({s.m, s.n, rank_deficient_sigma(s), s.seed}));
        } else {
          return read_matrix(s.path, s.format);
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_value(std::string_view token, const std::string& path, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(path, line, "invalid number '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(path, line, "non-finite value '" + std::string(token) + "'");
  }
  return value;
}

inline long parse_dimension(std::string_view token, const std::string& path, std::size_t line) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 1) {
    throw ParseError(path, line, "invalid dimension '" + std::string(token) + "'");
  }
  return value;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline Matrix parse_matrixmarket(const std::vector<std::string>& lines, const std::string& path) {
  if (lines.empty()) throw ParseError(path, 1, "empty file");
  const auto header = split_ws(lines[0]);
  if (header.size() != 5 || header[0] != "%%MatrixMarket") {
    throw ParseError(path, 1, "missing %%MatrixMarket header");
  }
  if (lower(header[1]) != "matrix" || lower(header[2]) != "array" || lower(header[3]) != "real" ||
      lower(header[4]) != "general") {
    throw ParseError(path, 1, "unsupported MatrixMarket type (need 'matrix array real general')");
  }

  std::size_t i = 1;
  auto skip_comments = [&] {
    while (i < lines.size() && (trim(lines[i]).empty() || trim(lines[i]).front() == '%')) ++i;
  };
  skip_comments();
  if (i == lines.size()) throw ParseError(path, i, "missing size line");
  const auto size = split_ws(lines[i]);
  if (size.size() != 2) throw ParseError(path, i + 1, "size line must read 'rows cols'");
  const long rows = parse_dimension(size[0], path, i + 1);
  const long cols = parse_dimension(size[1], path, i + 1);
  ++i;

  Matrix out(rows, cols);
  const long expected = rows * cols;
  long count = 0;
  for (; i < lines.size(); ++i) {
    const std::string_view t = trim(lines[i]);
    if (t.empty() || t.front() == '%') continue;
    for (std::string_view tok : split_ws(t)) {
      if (count == expected) {
        throw ParseError(path, i + 1,
                         "more than " + std::to_string(expected) + " values for a " +
                             std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
      }
      out(count % rows, count / rows) = parse_value(tok, path, i + 1);
      ++count;
    }
  }
  if (count != expected) {
    throw ParseError(path, lines.size(),
                     "expected " + std::to_string(expected) + " values, found " +
                         std::to_string(count));
  }
  return out;
}

inline Matrix parse_csv(const std::vector<std::string>& lines, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    std::vector<double> row;
    std::string_view rest = lines[i];
    while (true) {
      const std::size_t comma = rest.find(',');
      row.push_back(parse_value(rest.substr(0, comma), path, i + 1));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError(path, i + 1,
                       "row has " + std::to_string(row.size()) + " values, expected " +
                           std::to_string(width));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, 0, "no data rows");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return out;
}

}  // namespace detail

inline Matrix read_dense(const std::string& path, Format format) {
  const auto lines = detail::read_lines(path);
  return format == Format::csv ? detail::parse_csv(lines, path)
                               : detail::parse_matrixmarket(lines, path);
}

inline ProblemData read_matrix(const std::string& path, Format format) {
  return ProblemData(read_dense(path, format));
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

/// 17 significant digits, enough for any double to round-trip.
inline std::string format_value(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw IoError("failed to format value");
  return std::string(buf, ptr);
}

inline std::string serialize(const Matrix& a, Format format) {
  std::string out;
  if (format == Format::matrixmarket_array) {
    out += matrixmarket_header;
    out += '\n';
    out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        out += format_value(a(i, j));
        out += '\n';
      }
  } else {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (j) out += ',';
        out += format_value(a(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

inline void write_matrix(const Matrix& a, const std::string& path, Format format) {
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw IoError("cannot open '" + path + "' for writing");
  const std::string text = serialize(a, format);
  outf.write(text.data(), static_cast<std::streamsize>(text.size()));
  outf.flush();
  if (!outf) throw IoError("write to '" + path + "' failed");
}

inline void write_matrix(const ProblemData& p, const std::string& path, Format format) {
  write_matrix(p.matrix(), path, format);
}

}  // namespace proxpinv::matio
