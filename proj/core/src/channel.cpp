// SPDX-License-Identifier: Apache-2.0
#include "mcbf/channel.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    std::string_view tok = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
      tok.remove_suffix(1);
    out.push_back(tok);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || tok.empty())
    throw ParseError(line, std::string("malformed ") + what + " '" + std::string(tok) + "'");
  return value;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Scenario s) noexcept {
  return s == Scenario::Homogeneous ? "homogeneous" : "general";
}

Scenario parse_scenario(std::string_view token) {
  if (token == "general") return Scenario::General;
  if (token == "homogeneous") return Scenario::Homogeneous;
  throw InvalidInput("unknown scenario '" + std::string(token) + "'");
}

void ChannelSet::validate() const {
  if (M == 0 || K == 0 || Q == 0) throw InvalidInput("ChannelSet: dimensions must be positive");
  if (h.size() != K * Q) throw InvalidInput("ChannelSet: expected K*Q channel vectors");
  for (const auto& v : h) {
    if (v.dim() != M) throw InvalidInput("ChannelSet: channel vector length differs from M");
    if (!v.all_finite()) throw InvalidInput("ChannelSet: non-finite channel entry");
  }
  if (scenario == Scenario::Homogeneous) {
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t q = 1; q < Q; ++q)
        if (!(at(k, q) == at(k, 0)))
          throw InvalidInput("ChannelSet: homogeneous set has differing channels for user " +
                             std::to_string(k + 1));
  }
}

ChannelSet make_channel_set(std::size_t M, std::size_t K, std::size_t Q, Scenario scenario,
                            std::vector<CVector> h, std::uint64_t seed) {
  ChannelSet cs{M, K, Q, scenario, seed, std::move(h)};
  cs.validate();
  return cs;
}

void ChannelGenConfig::validate() const {
  if (M == 0 || K == 0 || Q == 0) throw InvalidInput("ChannelGenConfig: dimensions must be >= 1");
  if (!std::isfinite(qos_target_db)) throw InvalidInput("ChannelGenConfig: QoS target not finite");
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
    throw InvalidInput("ChannelGenConfig: noise variance must be positive");
  if (!(shadow_sigma_db >= 0.0) || !std::isfinite(shadow_sigma_db))
    throw InvalidInput("ChannelGenConfig: shadowing deviation must be >= 0");
}

ChannelSet generate(const ChannelGenConfig& cfg) {
  cfg.validate();
  const double gamma = std::pow(10.0, cfg.qos_target_db / 10.0);
  const double normalizer = 1.0 / (std::sqrt(cfg.noise_variance) * std::sqrt(gamma));

  auto draw = [&](std::uint64_t stream) {
    Rng rng(cfg.seed, stream);
    const double shadow_db = cfg.shadow_sigma_db * rng.normal();
    const double amplitude = std::pow(10.0, shadow_db / 20.0) * normalizer;
    CVector v(cfg.M);
    for (std::size_t m = 0; m < cfg.M; ++m) v[m] = amplitude * rng.complex_normal();
    return v;
  };

  ChannelSet cs;
  cs.M = cfg.M;
  cs.K = cfg.K;
  cs.Q = cfg.Q;
  cs.scenario = cfg.scenario;
  cs.seed = cfg.seed;
  cs.h.reserve(cfg.K * cfg.Q);
  for (std::size_t k = 0; k < cfg.K; ++k) {
    if (cfg.scenario == Scenario::Homogeneous) {
      const CVector v = draw(k);
      for (std::size_t q = 0; q < cfg.Q; ++q) cs.h.push_back(v);
    } else {
      for (std::size_t q = 0; q < cfg.Q; ++q) cs.h.push_back(draw(k * cfg.Q + q));
    }
  }
  return cs;
}

void write_channels(std::ostream& out, const ChannelSet& cs) {
  cs.validate();
  out << cs.M << ',' << cs.K << ',' << cs.Q << ',' << to_string(cs.scenario) << ',' << cs.seed
      << '\n';
  for (std::size_t k = 0; k < cs.K; ++k) {
    for (std::size_t q = 0; q < cs.Q; ++q) {
      out << (k + 1) << ',' << (q + 1);
      for (const auto& z : cs.at(k, q))
        out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
      out << '\n';
    }
  }
}

ChannelSet read_channels(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw ParseError(1, "missing header line");
  const auto header = split_commas(line);
  if (header.size() != 5)
    throw ParseError(lineno, "header must have 5 fields M,K,Q,scenario,seed");
  ChannelSet cs;
  cs.M = parse_number<std::size_t>(header[0], lineno, "M");
  cs.K = parse_number<std::size_t>(header[1], lineno, "K");
  cs.Q = parse_number<std::size_t>(header[2], lineno, "Q");
  try {
    cs.scenario = parse_scenario(header[3]);
  } catch (const InvalidInput& e) {
    throw ParseError(lineno, e.what());
  }
  cs.seed = parse_number<std::uint64_t>(header[4], lineno, "seed");
  if (cs.M == 0 || cs.K == 0 || cs.Q == 0) throw ParseError(lineno, "dimensions must be positive");

  cs.h.assign(cs.K * cs.Q, CVector{});
  std::vector<bool> seen(cs.K * cs.Q, false);
  std::size_t count = 0;
  while (next_line()) {
    const auto fields = split_commas(line);
    if (fields.size() != 2 + 2 * cs.M)
      throw ParseError(lineno, "expected " + std::to_string(2 + 2 * cs.M) + " fields, found " +
                                   std::to_string(fields.size()));
    const auto k = parse_number<std::size_t>(fields[0], lineno, "user index");
    const auto q = parse_number<std::size_t>(fields[1], lineno, "channel index");
    if (k < 1 || k > cs.K || q < 1 || q > cs.Q)
      throw ParseError(lineno, "user/channel index out of range");
    const std::size_t slot = (k - 1) * cs.Q + (q - 1);
    if (seen[slot]) throw ParseError(lineno, "duplicate entry for user/channel pair");
    seen[slot] = true;
    CVector v(cs.M);
    for (std::size_t m = 0; m < cs.M; ++m)
      v[m] = {parse_number<double>(fields[2 + 2 * m], lineno, "real part"),
              parse_number<double>(fields[3 + 2 * m], lineno, "imaginary part")};
    cs.h[slot] = std::move(v);
    ++count;
  }
  if (count != cs.K * cs.Q)
    throw InvalidInput("channel file lists " + std::to_string(count) + " vectors, header implies " +
                       std::to_string(cs.K * cs.Q));
  cs.validate();
  return cs;
}

void save(const ChannelSet& cs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  write_channels(out, cs);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

ChannelSet load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  return read_channels(in);
}

}  // namespace mcbf
