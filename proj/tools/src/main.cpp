// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcbf/baselines.hpp"
#include "mcbf/channel.hpp"
#include "mcbf/error.hpp"
#include "mcbf/harness.hpp"
#include "mcbf/sca.hpp"
#include "mcbf/sdr.hpp"

namespace {

using nlohmann::json;

json schedule_json(const mcbf::Schedule& s) {
  json assign = json::array();
  for (std::size_t q : s.assign) assign.push_back(q + 1);
  return json{{"channel", assign}, {"margin", s.margin}};
}

json beams_json(const mcbf::BeamformerMatrix& w) {
  json cols = json::array();
  for (std::size_t q = 0; q < w.Q(); ++q) {
    json col = json::array();
    for (std::size_t m = 0; m < w.M(); ++m) col.push_back({w(m, q).real(), w(m, q).imag()});
    cols.push_back(col);
  }
  return cols;
}

struct GenArgs {
  mcbf::ChannelGenConfig cfg;
  std::string scenario = "general";
  std::string out;
};

struct SolveArgs {
  std::string method = "sca";
  std::string channels;
  std::uint64_t seed = 0;
  std::size_t L = 1000;
  int inner_iters = 400;
  double tol = 1e-7;
  std::string trace;
  bool with_beams = false;
};

struct ExperimentArgs {
  std::string config;
  std::string out = "results";
  unsigned jobs = 1;
  bool quiet = false;
};

int run_gen(GenArgs& a) {
  a.cfg.scenario = mcbf::parse_scenario(a.scenario);
  const mcbf::ChannelSet cs = mcbf::generate(a.cfg);
  if (a.out.empty() || a.out == "-") mcbf::write_channels(std::cout, cs);
  else mcbf::save(cs, a.out);
  return 0;
}

int run_solve(const SolveArgs& a) {
  const mcbf::ChannelSet cs = mcbf::load(a.channels);
  const mcbf::Method method = mcbf::parse_method(a.method);
  mcbf::ScaOptions sca;
  sca.inner_iters = a.inner_iters;
  sca.seed = a.seed;

  json out{{"method", a.method}, {"M", cs.M}, {"K", cs.K}, {"Q", cs.Q},
           {"scenario", std::string(mcbf::to_string(cs.scenario))}, {"seed", a.seed}};
  auto finish = [&](double power, const mcbf::BeamformerMatrix& w, const mcbf::Schedule& s) {
    out["power"] = power;
    out["power_db"] = mcbf::db_convert(power);
    out["schedule"] = schedule_json(s);
    if (a.with_beams) out["W"] = beams_json(w);
  };

  switch (method) {
    case mcbf::Method::Sdr: {
      const mcbf::SdrSolution sol = mcbf::sdr_solve(cs, a.tol);
      const mcbf::RandomizationResult rr = mcbf::randomize(sol, cs, a.L, a.seed);
      out["sdr_lb"] = sol.value;
      out["ratio"] = rr.best_power / sol.value;
      out["theta"] = mcbf::approximation_ratio_bound(cs);
      out["admm_iterations"] = sol.iterations;
      out["L"] = a.L;
      out["best_trial"] = rr.best_index;
      finish(rr.best_power, rr.best_W, mcbf::extract_schedule(rr.best_W, cs));
      break;
    }
    case mcbf::Method::Sca: {
      const mcbf::SolveReport rep = mcbf::sca_solve(cs, std::nullopt, sca);
      out["outer_iters"] = rep.outer_iters;
      out["converged"] = rep.converged;
      out["restorations"] = rep.restorations;
      out["wall_time_s"] = rep.wall_time;
      finish(rep.power, rep.final_W, mcbf::extract_schedule(rep.final_W, cs));
      if (!a.trace.empty()) {
        std::ofstream f(a.trace);
        if (!f) throw mcbf::InvalidInput("cannot write " + a.trace);
        mcbf::write_trace_csv(f, rep);
      }
      break;
    }
    case mcbf::Method::OneGroup:
    case mcbf::Method::Equipartition: {
      const mcbf::BaselineResult br = method == mcbf::Method::OneGroup
                                          ? mcbf::one_group(cs, sca, a.seed)
                                          : mcbf::equipartition(cs, sca, a.seed);
      out["per_channel_power"] = br.per_channel_power;
      finish(br.power, br.W, br.schedule);
      break;
    }
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_experiment(const ExperimentArgs& a) {
  const mcbf::ExperimentConfig cfg = mcbf::load_config(a.config);
  mcbf::ProgressFn progress;
  if (!a.quiet)
    progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\r%zu/%zu realizations", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  const mcbf::ExperimentResult res = mcbf::run_experiment(cfg, a.jobs, progress);
  mcbf::write_outputs(a.out, res);
  std::size_t failures = 0;
  for (const auto& r : res.realizations) failures += r.failed;
  if (!a.quiet) std::fprintf(stderr, "wrote %s (%zu failed realizations)\n", a.out.c_str(), failures);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint user scheduling and multicast beamforming solvers"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Draw a channel set and write it to a file");
  g->add_option("--M", gen.cfg.M, "Antennas")->capture_default_str();
  g->add_option("--K", gen.cfg.K, "Users")->capture_default_str();
  g->add_option("--Q", gen.cfg.Q, "Orthogonal channels")->capture_default_str();
  g->add_option("--scenario", gen.scenario, "general or homogeneous")->capture_default_str();
  g->add_option("--seed", gen.cfg.seed, "Channel seed")->capture_default_str();
  g->add_option("--qos-db", gen.cfg.qos_target_db, "QoS target in dB")->capture_default_str();
  g->add_option("--noise", gen.cfg.noise_variance, "Noise variance")->capture_default_str();
  g->add_option("--shadow-db", gen.cfg.shadow_sigma_db, "Shadowing std in dB")->capture_default_str();
  g->add_option("-o,--out", gen.out, "Output file (default stdout)");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve one instance and print a JSON report");
  s->add_option("--method", solve.method, "sdr, sca, onegroup or equipartition")
      ->check(CLI::IsMember({"sdr", "sca", "onegroup", "equipartition"}))
      ->capture_default_str();
  s->add_option("--channels", solve.channels, "Channel file written by gen")->required();
  s->add_option("--seed", solve.seed, "Randomization / start seed")->capture_default_str();
  s->add_option("--L", solve.L, "Randomization trials (sdr)")->capture_default_str();
  s->add_option("--inner-iters", solve.inner_iters, "Inner iteration budget (sca)")->capture_default_str();
  s->add_option("--tol", solve.tol, "Relaxation residual tolerance (sdr)")->capture_default_str();
  s->add_option("--trace", solve.trace, "Write the per-iteration trace CSV here (sca)");
  s->add_flag("--beams", solve.with_beams, "Include the beamforming matrix in the report");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run a Monte-Carlo sweep from a config file");
  e->add_option("--config", exp.config, "Config file")->required();
  e->add_option("--out", exp.out, "Output directory")->capture_default_str();
  e->add_option("--jobs", exp.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  e->add_flag("-q,--quiet", exp.quiet, "No progress output");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return run_gen(gen);
    if (*s) return run_solve(solve);
    if (*e) return run_experiment(exp);
  } catch (const mcbf::ParseError& err) {
    std::cerr << "parse error: " << err.what() << '\n';
    return 2;
  } catch (const mcbf::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
