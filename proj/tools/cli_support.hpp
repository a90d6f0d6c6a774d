#pragma once

// Argument grammars, provenance hashing and JSON encoding for the proxpinv driver.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "proxpinv.hpp"

namespace proxpinv::cli {

using nlohmann::ordered_json;

/// Exit codes shared by all subcommands.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_not_met = 2;  ///< max_outer_reached for pinv, rate mismatch for rates
inline constexpr int exit_usage = 64;

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view token, std::string_view what) {
  token = matio::detail::trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ConfigError("invalid " + std::string(what) + " '" + std::string(token) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view s, std::string_view what) {
  std::vector<T> out;
  for (std::string_view tok : split(s, ',')) out.push_back(parse_number<T>(tok, what));
  return out;
}

template <typename T>
std::vector<T> parse_list(std::string_view s, std::string_view what, std::size_t count) {
  std::vector<T> out = parse_list<T>(s, what);
  if (out.size() != count) {
    throw ConfigError(std::string(what) + " expects " + std::to_string(count) + " comma-separated values");
  }
  return out;
}

/// Format from an explicit flag, else from the file extension, else MatrixMarket.
inline matio::Format resolve_format(const std::string& flag, const std::string& path) {
  if (!flag.empty()) return matio::parse_format(flag);
  const std::size_t dot = path.rfind('.');
  if (dot != std::string::npos && matio::detail::lower(path.substr(dot + 1)) == "csv") {
    return matio::Format::csv;
  }
  return matio::Format::matrixmarket_array;
}

/// hilbert:N | rank-deficient:M,N,R,COND | sv:M,N:S1,S2,...
inline matio::MatrixSpec parse_matrix_spec(std::string_view text, std::uint64_t seed) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("matrix spec '" + std::string(text) + "' lacks a ':'");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view args = text.substr(colon + 1);
  if (kind == "hilbert") {
    return matio::Hilbert{parse_number<int>(args, "hilbert order")};
  }
  if (kind == "rank-deficient") {
    const auto f = split(args, ',');
    if (f.size() != 4) throw ConfigError("rank-deficient spec must read rank-deficient:M,N,R,COND");
    matio::RankDeficient s;
    s.m = parse_number<int>(f[0], "rows");
    s.n = parse_number<int>(f[1], "cols");
    s.rank = parse_number<int>(f[2], "rank");
    s.condition = parse_number<double>(f[3], "condition");
    s.seed = seed;
    return s;
  }
  if (kind == "sv") {
    const std::size_t sep = args.find(':');
    if (sep == std::string_view::npos) throw ConfigError("sv spec must read sv:M,N:S1,S2,...");
    const auto dims = parse_list<int>(args.substr(0, sep), "sv dimensions", 2);
    return matio::PrescribedSV{dims[0], dims[1], parse_list<double>(args.substr(sep + 1), "singular value"),
                               seed};
  }
  throw ConfigError("unknown matrix kind '" + std::string(kind) + "'");
}

/// zero | random:SEED | file:PATH
inline Iterate make_phi0(std::string_view text, const ProblemData& p) {
  if (text == "zero") return Iterate::Zero(p.cols(), p.rows());
  if (text.rfind("random:", 0) == 0) {
    matio::GaussianStream rng(parse_number<std::uint64_t>(text.substr(7), "phi0 seed"));
    return rng.matrix(p.cols(), p.rows());
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path(text.substr(5));
    Iterate x = matio::read_dense(path, resolve_format("", path));
    require_iterate_shape(p, x, "phi0 file");
    return x;
  }
  throw ConfigError("phi0 must be zero, random:SEED or file:PATH");
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

/// Hash of the canonical MatrixMarket text, so a file and an equal generated matrix agree.
inline std::string content_hash(const Matrix& a) {
  return hex64(fnv1a(matio::serialize(a, matio::Format::matrixmarket_array)));
}

inline ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

inline ordered_json schedule_json(const MuSchedule& s) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using S = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<S, ConstantMu>) {
          return {{"kind", "constant"}, {"mu", v.mu}};
        } else if constexpr (std::is_same_v<S, GeometricMu>) {
          return {{"kind", "geometric"}, {"mu0", v.mu0}, {"gamma", v.gamma}};
        } else {
          return {{"kind", "custom"}, {"values", v.values}};
        }
      },
      s);
}

inline ordered_json config_json(const ProxConfig& cfg, Eigen::Index n) {
  return {{"mu_schedule", schedule_json(cfg.mu_schedule)},
          {"mode", to_string(cfg.mode)},
          {"eps1", cfg.eps1},
          {"eps2", cfg.eps2},
          {"eps0", cfg.eps0},
          {"rho", cfg.rho},
          {"r", cfg.r},
          {"delta", cfg.delta},
          {"max_outer", cfg.max_outer},
          {"max_inner", cfg.resolved_max_inner(n)}};
}

inline ordered_json record_json(const IterationRecord& r) {
  return {{"k", r.k},
          {"mu", r.mu},
          {"f", r.f},
          {"grad_norm", r.grad_norm},
          {"delta_norm", r.delta_norm},
          {"rate_ratio", optional_number(r.rate_ratio)},
          {"inner_iters", r.inner_iterations}};
}

inline ordered_json history_json(const SolveReport& report) {
  ordered_json out = ordered_json::array();
  for (const auto& r : report.history) out.push_back(record_json(r));
  return out;
}

/// Adds manifest_hash, computed over the serialized manifest.
inline void seal_manifest(ordered_json& doc) {
  doc["manifest_hash"] = hex64(fnv1a(doc.at("manifest").dump()));
}

}  // namespace proxpinv::cli
