// cfl: command-line front end for the dissipation laboratory.
//
//   cfl <experiment> [--config FILE] [--set key=value]... --out PATH
//       [--format csv|json] [--jobs N]
//   cfl golden-check --dir DIR
//
// Errors are reported as a JSON object on stderr with a machine-readable
// category: "config" (exit 2), "convergence" (exit 3), "io" (exit 4).

#include <chrono>
#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfl/config.hpp"
#include "cfl/experiment.hpp"
#include "cfl/golden.hpp"
#include "cfl/output.hpp"
#include "cfl/types.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  std::string format;
  int jobs = -1;  // -1 = not given on the command line
};

void emit_error(const std::string& category, const std::string& message) {
  std::fprintf(stderr, "{\"error\": {\"category\": \"%s\", \"message\": \"%s\"}}\n",
               category.c_str(), cfl::json_escape(message).c_str());
}

int run_one(const std::string& experiment, const CliOptions& opt) {
  std::map<std::string, std::string> kv;
  if (!opt.config_path.empty()) kv = cfl::load_kv_file(opt.config_path);
  for (const auto& pair : opt.sets) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw cfl::config_error("--set expects key=value, got '" + pair + "'");
    kv[cfl::detail::trim(pair.substr(0, eq))] = cfl::detail::trim(pair.substr(eq + 1));
  }
  if (!kv.count("jobs")) kv["jobs"] = "0";  // default: all processors

  cfl::ExperimentConfig cfg = cfl::config_from_kv(kv);
  cfg.experiment = experiment;
  if (!opt.out.empty()) cfg.out = opt.out;
  if (!opt.format.empty()) cfg.format = opt.format;
  if (opt.jobs >= 0) cfg.jobs = opt.jobs;
  if (cfg.out.empty()) throw cfl::config_error("output path required (--out or config key 'out')");

  const auto start = std::chrono::steady_clock::now();
  const cfl::ExperimentResult result = cfl::run_experiment(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  cfl::write_text_file(cfg.out, cfg.format == "json" ? cfl::json_string(result.table)
                                                     : cfl::csv_string(result.table));
  cfl::write_text_file(cfg.out + ".meta.json",
                       cfl::meta_sidecar_string(cfg.experiment, cfl::config_echo(cfg),
                                                result.table, result.diagnostics, wall));
  std::printf("%s: wrote %zu rows to %s\n", cfg.experiment.c_str(), result.table.rows.size(),
              cfg.out.c_str());
  return 0;
}

int run_golden_check(const std::string& dir) {
  const cfl::GoldenReport report = cfl::golden_check(dir);
  for (const auto& g : report.goldens)
    std::printf("[%s] %s: %s\n", g.passed ? "PASS" : "FAIL", g.name.c_str(), g.message.c_str());
  if (!report.passed) {
    emit_error("golden", "golden comparison failed");
    return 5;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfl: energy dissipation of driven coupled oscillators, by three routes"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string experiment;
  static const std::vector<std::pair<std::string, std::string>> experiments = {
      {"compare", "one configuration, all requested routes side by side"},
      {"sweep-temperature", "spectral-route dissipation over a list of beta values"},
      {"sweep-detuning", "spectral route vs closed form across omega2 - omega1"},
      {"sweep-eta", "window-integrated on-resonance dissipation vs switch-off rate"},
      {"propagate", "exact Schrodinger evolution vs the spectral prediction"},
      {"audit-counter-rotating", "exchange-only vs full coupling under exact evolution"},
  };
  for (const auto& [name, desc] : experiments) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opt.config_path, "key = value configuration file");
    sub->add_option("--set", opt.sets, "override a config key, e.g. --set eta=0.05");
    sub->add_option("--out", opt.out, "output table path");
    sub->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", opt.jobs, "worker threads (0 = all processors)");
    sub->callback([&experiment, name = name] { experiment = name; });
  }

  std::string golden_dir;
  CLI::App* golden = app.add_subcommand("golden-check", "re-run and compare pinned goldens");
  golden->add_option("--dir", golden_dir, "directory of golden cases")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    emit_error("config", e.what());
    return 2;
  }

  try {
    if (golden->parsed()) return run_golden_check(golden_dir);
    return run_one(experiment, opt);
  } catch (const cfl::config_error& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const cfl::convergence_error& e) {
    emit_error("convergence", e.what());
    return 3;
  } catch (const cfl::io_error& e) {
    emit_error("io", e.what());
    return 4;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
