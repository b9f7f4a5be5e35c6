#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "acstrace/config.hpp"
#include "acstrace/oracle.hpp"
#include "acstrace/presets.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            std::int64_t replicates_override, const std::string& format_override, int threads) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  acstrace::RunConfig config = acstrace::parse_config(buf.str());
  if (!out_override.empty()) config.output.path = out_override;
  if (replicates_override > 0) config.replicates_override = replicates_override;
  if (!format_override.empty())
    config.output.format = format_override == "json" ? acstrace::OutputSpec::Format::json
                                                     : acstrace::OutputSpec::Format::csv;
  return acstrace::run(config, std::cerr, threads);
}

int cmd_reproduce(int table, const std::string& block, std::int64_t replicates, std::int64_t seed,
                  const std::string& out, int threads) {
  acstrace::RunConfig config = acstrace::table_config(table, block);
  if (replicates > 0) config.replicates_override = replicates;
  if (seed >= 0)
    for (auto& sc : config.scenarios) sc.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) config.output.path = out;
  return acstrace::run(config, std::cerr, threads);
}

int cmd_enumerate_check(int toys, int two_wave, std::int64_t seed) {
  acstrace::oracle::EnumerationOptions opts;
  if (toys > 0) opts.cross_toys = toys;
  if (two_wave > 0) opts.two_wave_toys = two_wave;
  if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
  const bool ok = acstrace::oracle::run_enumeration_suite(opts, std::cout);
  std::cout << (ok ? "enumeration oracle suite: PASS" : "enumeration oracle suite: FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acstrace - adaptive network tracing designs for prevalence estimation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ACSTRACE_THREADS, then hardware)");

  auto* run = app.add_subcommand("run", "run scenarios from a JSON config file");
  std::string config_path, run_out, run_format;
  std::int64_t run_replicates = 0;
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", run_out, "override the output path");
  run->add_option("--replicates", run_replicates, "override every scenario's replicate count");
  run->add_option("--format", run_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* rep = app.add_subcommand("reproduce", "reproduce a simulation table");
  int table = 0;
  std::string block, rep_out;
  std::int64_t rep_replicates = 0, rep_seed = -1;
  rep->add_option("--table", table, "table number: 1, 2 or 4")->required();
  rep->add_option("--block", block, "table 4 block: srs-m1000 | srs-m5000 | eta2-m1000");
  rep->add_option("--replicates", rep_replicates, "override the replicate count");
  rep->add_option("--seed", rep_seed, "master seed for every scenario");
  rep->add_option("--out", rep_out, "output path (default table<N>.csv)");

  auto* enu = app.add_subcommand("enumerate-check", "run the exhaustive-enumeration oracle suite");
  int toys = 0, two_wave = 0;
  std::int64_t enum_seed = -1;
  enu->add_option("--toys", toys, "number of cross-sectional toy populations");
  enu->add_option("--two-wave-toys", two_wave, "number of two-wave toy populations");
  enu->add_option("--seed", enum_seed, "toy generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, run_out, run_replicates, run_format, threads);
    if (rep->parsed()) return cmd_reproduce(table, block, rep_replicates, rep_seed, rep_out, threads);
    if (enu->parsed()) return cmd_enumerate_check(toys, two_wave, enum_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
