// Command-line front end: run / compare / comm / sweep.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cfmimo/experiment.hpp"

using namespace cfmimo;

namespace {

std::string tag(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void print_summary(const ScenarioOutcome& out) {
  for (const auto& [method, st] : out.stats) {
    double worst_mean = 1e300;
    for (const auto& s : st.samples) worst_mean = std::min(worst_mean, s.sinr.mean_sinr_db);
    std::printf("%-24s %-12s n=%-4zu fail=%-3zu outage=%5.1f%%  min mean-user SINR=%7.2f dB\n", out.name.c_str(),
                method.c_str(), st.samples.size(), st.failures.size(), 100.0 * st.outage_fraction, worst_mean);
  }
  if (out.aborted) std::printf("%-24s ABORTED: %s\n", out.name.c_str(), out.error.c_str());
}

int run_all(const std::vector<ExperimentSpec>& specs, const RunOptions& opts) {
  int aborted = 0;
  for (const auto& spec : specs) {
    const auto out = run_scenario(spec, opts);
    print_summary(out);
    aborted += out.aborted;
  }
  return aborted ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO precoding: centralized SOCP, ADMM and conjugate beamforming"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
  int realizations = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "Output directory (overrides experiment.output_dir)");
    sub->add_option("-j,--threads", threads, "Worker threads (default: CFMIMO_THREADS or all cores)");
    sub->add_option("-n,--realizations", realizations, "Override the number of channel realizations")
        ->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Run every scenario with its configured methods");
  common(run);
  auto* compare = app.add_subcommand("compare", "Run centralized, admm and conjugate on shared realizations");
  common(compare);
  auto* comm = app.add_subcommand("comm", "Write the fronthaul communication-volume table");
  common(comm);
  int comm_iters = 0;
  comm->add_option("--iterations", comm_iters, "ADMM iterations to account for (default: admm.max_iters)")
      ->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "Grid over SINR target, c, rho and M for each scenario");
  common(sweep);
  std::vector<double> gammas, cs, rhos;
  std::vector<int> aps;
  sweep->add_option("--gamma-db", gammas, "SINR targets in dB")->delimiter(',');
  sweep->add_option("--c", cs, "Relaxation factors")->delimiter(',');
  sweep->add_option("--rho", rhos, "ADMM penalties")->delimiter(',');
  sweep->add_option("--aps", aps, "Numbers of APs")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<ExperimentSpec> specs = parse_config(config_path);
    RunOptions opts;
    opts.threads = threads;
    if (!out_dir.empty()) opts.output_dir = out_dir;
    for (auto& s : specs) {
      if (realizations > 0) s.n_realizations = realizations;
    }

    if (*run) return run_all(specs, opts);

    if (*compare) {
      for (auto& s : specs) s.methods = known_methods();
      return run_all(specs, opts);
    }

    if (*comm) {
      for (const auto& s : specs) {
        const auto dir = opts.output_dir.value_or(s.output_dir) / s.name;
        write_comm_table(s, dir, comm_iters > 0 ? comm_iters : s.config.max_iters);
        std::printf("%s: wrote %s\n", s.name.c_str(), (dir / "comm.csv").string().c_str());
      }
      return 0;
    }

    if (*sweep) {
      std::vector<ExperimentSpec> grid;
      for (const auto& base : specs) {
        const auto g = gammas.empty() ? std::vector<double>{base.sinr_target_db} : gammas;
        const auto c = cs.empty() ? std::vector<double>{base.config.relaxation_factor} : cs;
        const auto r = rhos.empty() ? std::vector<double>{base.config.penalty} : rhos;
        const auto m = aps.empty() ? std::vector<int>{static_cast<int>(base.config.num_aps)} : aps;
        for (double gi : g)
          for (double ci : c)
            for (double ri : r)
              for (int mi : m) {
                ExperimentSpec s = base;
                s.sinr_target_db = gi;
                s.config.relaxation_factor = ci;
                s.config.penalty = ri;
                s.config.num_aps = mi;
                s.name = base.name + "_g" + tag(gi) + "_c" + tag(ci) + "_r" + tag(ri) + "_M" + std::to_string(mi);
                s.resolve();
                grid.push_back(std::move(s));
              }
      }
      return run_all(grid, opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << config_path << ":" << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
