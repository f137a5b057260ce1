// SPDX-License-Identifier: Apache-2.0
#include "mcbf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "mcbf/baselines.hpp"
#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"
#include "mcbf/sca.hpp"
#include "mcbf/sdr.hpp"

namespace mcbf {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view token, std::size_t line, std::string_view key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(line, "bad value '" + std::string(token) + "' for " + std::string(key));
  return v;
}

std::vector<std::size_t> parse_sizes(std::string_view value, std::size_t line,
                                     std::string_view key) {
  std::vector<std::size_t> out;
  for (auto tok : split_list(value)) out.push_back(parse_number<std::size_t>(tok, line, key));
  return out;
}

bool parse_bool(std::string_view token, std::size_t line) {
  if (token == "true" || token == "1") return true;
  if (token == "false" || token == "0") return false;
  throw ParseError(line, "expected true or false, got '" + std::string(token) + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += f(xs[i]);
  }
  return s;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

ChannelSet draw_channels(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed) {
  ChannelGenConfig g;
  g.M = cell.M;
  g.K = cell.K;
  g.Q = cell.Q;
  g.qos_target_db = cfg.qos_db;
  g.noise_variance = cfg.noise_variance;
  g.shadow_sigma_db = cfg.shadow_db;
  g.scenario = cell.scenario;
  g.seed = seed;
  return generate(g);
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Sdr: return "sdr";
    case Method::Sca: return "sca";
    case Method::OneGroup: return "onegroup";
    case Method::Equipartition: return "equipartition";
  }
  return "?";
}

Method parse_method(std::string_view token) {
  if (token == "sdr") return Method::Sdr;
  if (token == "sca") return Method::Sca;
  if (token == "onegroup") return Method::OneGroup;
  if (token == "equipartition") return Method::Equipartition;
  throw InvalidInput("unknown method '" + std::string(token) + "'");
}

void ExperimentConfig::validate() const {
  if (Q.empty() || M.empty() || K.empty() || scenario.empty())
    throw InvalidInput("experiment: every grid axis needs at least one value");
  for (const auto* axis : {&Q, &M, &K})
    for (std::size_t v : *axis)
      if (v < 1) throw InvalidInput("experiment: grid values must be >= 1");
  if (realizations < 1) throw InvalidInput("experiment: realizations must be >= 1");
  if (L < 1) throw InvalidInput("experiment: L must be >= 1");
  if (dfgp_iters < 1 || sca_max_outer < 1)
    throw InvalidInput("experiment: sca iteration budgets must be >= 1");
  if (methods.empty()) throw InvalidInput("experiment: no methods selected");
  if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size())
    throw InvalidInput("experiment: duplicate method");
  if (!(noise_variance > 0.0) || !std::isfinite(qos_db) || !(shadow_db >= 0.0))
    throw InvalidInput("experiment: bad channel model parameters");
  if (!(sdr_tol > 0.0 && sdr_tol <= 1e-3)) throw InvalidInput("experiment: sdr_tol out of range");
  if (sdr_max_iter < 1) throw InvalidInput("experiment: sdr_max_iter must be >= 1");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(line, "expected 'name = value'");
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(line, "duplicate key " + key);
    if (value.empty()) throw ParseError(line, "empty value for " + key);

    if (key == "Q") cfg.Q = parse_sizes(value, line, key);
    else if (key == "M") cfg.M = parse_sizes(value, line, key);
    else if (key == "K") cfg.K = parse_sizes(value, line, key);
    else if (key == "scenario") {
      cfg.scenario.clear();
      for (auto tok : split_list(value)) {
        try {
          cfg.scenario.push_back(parse_scenario(tok));
        } catch (const InvalidInput& e) {
          throw ParseError(line, e.what());
        }
      }
    } else if (key == "methods") {
      cfg.methods.clear();
      for (auto tok : split_list(value)) {
        try {
          cfg.methods.push_back(parse_method(tok));
        } catch (const InvalidInput& e) {
          throw ParseError(line, e.what());
        }
      }
    } else if (key == "realizations") cfg.realizations = parse_number<std::size_t>(value, line, key);
    else if (key == "L") cfg.L = parse_number<std::size_t>(value, line, key);
    else if (key == "dfgp_iters") cfg.dfgp_iters = parse_number<int>(value, line, key);
    else if (key == "sca_max_outer") cfg.sca_max_outer = parse_number<int>(value, line, key);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, line, key);
    else if (key == "qos_db") cfg.qos_db = parse_number<double>(value, line, key);
    else if (key == "noise_variance") cfg.noise_variance = parse_number<double>(value, line, key);
    else if (key == "shadow_db") cfg.shadow_db = parse_number<double>(value, line, key);
    else if (key == "sdr_tol") cfg.sdr_tol = parse_number<double>(value, line, key);
    else if (key == "sdr_max_iter") cfg.sdr_max_iter = parse_number<int>(value, line, key);
    else if (key == "traces") cfg.traces = parse_bool(value, line);
    else throw ParseError(line, "unknown key " + key);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  auto num = [](std::size_t v) { return std::to_string(v); };
  out << "Q = " << join(cfg.Q, num) << '\n'
      << "M = " << join(cfg.M, num) << '\n'
      << "K = " << join(cfg.K, num) << '\n'
      << "scenario = " << join(cfg.scenario, [](Scenario s) { return std::string(to_string(s)); })
      << '\n'
      << "realizations = " << cfg.realizations << '\n'
      << "L = " << cfg.L << '\n'
      << "dfgp_iters = " << cfg.dfgp_iters << '\n'
      << "sca_max_outer = " << cfg.sca_max_outer << '\n'
      << "seed = " << cfg.seed << '\n'
      << "methods = " << join(cfg.methods, [](Method m) { return std::string(to_string(m)); })
      << '\n'
      << "qos_db = " << fmt(cfg.qos_db) << '\n'
      << "noise_variance = " << fmt(cfg.noise_variance) << '\n'
      << "shadow_db = " << fmt(cfg.shadow_db) << '\n'
      << "sdr_tol = " << fmt(cfg.sdr_tol) << '\n'
      << "sdr_max_iter = " << cfg.sdr_max_iter << '\n'
      << "traces = " << (cfg.traces ? "true" : "false") << '\n';
}

std::vector<Cell> grid(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (Scenario s : cfg.scenario)
    for (std::size_t q : cfg.Q)
      for (std::size_t m : cfg.M)
        for (std::size_t k : cfg.K) cells.push_back({cells.size(), s, q, m, k});
  return cells;
}

RatioStats aggregate(std::span<const double> ratios, double bound) {
  if (ratios.empty()) throw InvalidInput("aggregate: empty ratio list");
  RatioStats st;
  st.theta_bound = bound;
  st.min = *std::min_element(ratios.begin(), ratios.end());
  st.max = *std::max_element(ratios.begin(), ratios.end());
  double sum = 0.0;
  for (double r : ratios) sum += r;
  const double n = static_cast<double>(ratios.size());
  st.mean = sum / n;
  if (ratios.size() > 1) {
    double ss = 0.0;
    for (double r : ratios) ss += (r - st.mean) * (r - st.mean);
    st.std = std::sqrt(ss / (n - 1.0));
  }
  return st;
}

double db_convert(double p_linear) {
  if (!(p_linear > 0.0) || !std::isfinite(p_linear))
    throw InvalidInput("db_convert: power must be positive and finite");
  return 10.0 * std::log10(p_linear);
}

RealizationResult run_realization(const ExperimentConfig& cfg, const Cell& cell,
                                  std::size_t realization) {
  RealizationResult r;
  r.cell = cell.index;
  r.realization = realization;
  r.seed = derive_seed(cfg.seed, cell.index, realization);
  try {
    const ChannelSet cs = draw_channels(cfg, cell, r.seed);
    const SdrSolution sol = sdr_solve(cs, cfg.sdr_tol, cfg.sdr_max_iter);
    r.sdr_lb = sol.value;
    r.sdr_iterations = sol.iterations;

    ScaOptions sca;
    sca.inner_iters = cfg.dfgp_iters;
    sca.max_outer = cfg.sca_max_outer;
    for (Method m : cfg.methods) {
      MethodOutcome o;
      o.method = m;
      switch (m) {
        case Method::Sdr:
          o.power = randomize(sol, cs, cfg.L, derive_seed(r.seed, 1, 0)).best_power;
          break;
        case Method::Sca: {
          sca.seed = derive_seed(r.seed, 2, 0);
          const SolveReport rep = sca_solve(cs, std::nullopt, sca);
          o.power = rep.power;
          o.outer_iters = rep.outer_iters;
          o.trace.reserve(rep.iterates.size());
          for (const auto& it : rep.iterates) o.trace.push_back({it.cost, it.min_margin, it.step_norm});
          break;
        }
        case Method::OneGroup:
          o.power = one_group(cs, sca, derive_seed(r.seed, 3, 0)).power;
          break;
        case Method::Equipartition:
          o.power = equipartition(cs, sca, derive_seed(r.seed, 4, 0)).power;
          break;
      }
      o.ratio = o.power / r.sdr_lb;
      r.outcomes.push_back(std::move(o));
    }
  } catch (const ConvergenceError& e) {
    r.failed = true;
    r.error = e.what();
    r.outcomes.clear();
  }
  return r;
}

std::vector<CellSummary> summarize(const ExperimentConfig& cfg, const std::vector<Cell>& cells,
                                   const std::vector<RealizationResult>& realizations) {
  std::vector<CellSummary> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Cell& cell : cells) {
    ChannelSet shape;
    shape.K = cell.K;
    shape.Q = cell.Q;
    shape.scenario = cell.scenario;
    const double bound = approximation_ratio_bound(shape);

    std::vector<const RealizationResult*> mine;
    std::size_t failures = 0;
    for (const auto& r : realizations) {
      if (r.cell != cell.index) continue;
      if (r.failed) ++failures;
      else mine.push_back(&r);
    }
    std::vector<double> lbs;
    for (const auto* r : mine) lbs.push_back(r->sdr_lb);

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      CellSummary s;
      s.cell = cell;
      s.method = cfg.methods[mi];
      s.successes = mine.size();
      s.failures = failures;
      if (mine.empty()) {
        s.mean_power_db = s.mean_sdr_lb_db = nan;
        s.stats = {nan, nan, nan, nan, bound};
      } else {
        std::vector<double> powers, ratios;
        for (const auto* r : mine) {
          powers.push_back(r->outcomes[mi].power);
          ratios.push_back(r->outcomes[mi].ratio);
        }
        s.mean_power_db = db_convert(mean_of(powers));
        s.mean_sdr_lb_db = db_convert(mean_of(lbs));
        s.stats = aggregate(ratios, bound);
        s.violations = static_cast<std::size_t>(
            std::count_if(ratios.begin(), ratios.end(), [&](double x) { return x > bound; }));
      }
      out.push_back(s);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned jobs,
                                const ProgressFn& progress) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  res.cells = grid(cfg);
  const std::size_t total = res.cells.size() * cfg.realizations;
  res.realizations.resize(total);

  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      res.realizations[task] =
          run_realization(cfg, res.cells[task / cfg.realizations], task % cfg.realizations);
      if (progress) {
        std::lock_guard lock(mu);
        progress(++done, total);
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  res.summary = summarize(cfg, res.cells, res.realizations);
  return res;
}

void write_summary_csv(std::ostream& out, const ExperimentResult& res) {
  out << "Q,M,K,scenario,method,mean_power_db,mean_sdr_lb_db,ratio_min,ratio_max,ratio_mean,"
         "ratio_std,theta,failures,violations\n";
  for (const auto& s : res.summary) {
    out << s.cell.Q << ',' << s.cell.M << ',' << s.cell.K << ',' << to_string(s.cell.scenario)
        << ',' << to_string(s.method) << ',' << fmt(s.mean_power_db) << ','
        << fmt(s.mean_sdr_lb_db) << ',' << fmt(s.stats.min) << ',' << fmt(s.stats.max) << ','
        << fmt(s.stats.mean) << ',' << fmt(s.stats.std) << ',' << fmt(s.stats.theta_bound) << ','
        << s.failures << ',' << s.violations << '\n';
  }
}

void write_realizations_csv(std::ostream& out, const ExperimentResult& res) {
  out << "Q,M,K,scenario,realization,seed,method,power,sdr_lb,ratio,outer_iters,status\n";
  for (const auto& r : res.realizations) {
    const Cell& c = res.cells[r.cell];
    const std::string prefix = std::to_string(c.Q) + ',' + std::to_string(c.M) + ',' +
                               std::to_string(c.K) + ',' + std::string(to_string(c.scenario)) +
                               ',' + std::to_string(r.realization) + ',' + std::to_string(r.seed);
    if (r.failed) {
      for (Method m : res.config.methods)
        out << prefix << ',' << to_string(m) << ",nan,nan,nan,0,failed\n";
      continue;
    }
    for (const auto& o : r.outcomes)
      out << prefix << ',' << to_string(o.method) << ',' << fmt(o.power) << ',' << fmt(r.sdr_lb)
          << ',' << fmt(o.ratio) << ',' << o.outer_iters << ",ok\n";
  }
}

void write_traces_csv(std::ostream& out, const ExperimentResult& res) {
  out << "Q,M,K,scenario,realization,outer_iter,cost,min_margin,step_norm\n";
  for (const auto& r : res.realizations) {
    const Cell& c = res.cells[r.cell];
    for (const auto& o : r.outcomes) {
      if (o.method != Method::Sca) continue;
      for (std::size_t n = 0; n < o.trace.size(); ++n)
        out << c.Q << ',' << c.M << ',' << c.K << ',' << to_string(c.scenario) << ','
            << r.realization << ',' << n << ',' << fmt(o.trace[n].cost) << ','
            << fmt(o.trace[n].min_margin) << ',' << fmt(o.trace[n].step_norm) << '\n';
    }
  }
}

void write_outputs(const std::filesystem::path& dir, const ExperimentResult& res) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw InvalidInput("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("summary.csv");
    write_summary_csv(f, res);
  }
  {
    auto f = open("realizations.csv");
    write_realizations_csv(f, res);
  }
  {
    auto f = open("config.txt");
    write_config(f, res.config);
  }
  if (res.config.traces) {
    auto f = open("traces.csv");
    write_traces_csv(f, res);
  }
}

}  // namespace mcbf
