#include <cstdint>
#include <iostream>

#include "CLI11.hpp"
#include "bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Experiment harness for the safe-rate MM optimizers"};
  app.require_subcommand(1);

  umm::bench::Options opt;
  std::uint64_t seed = 0;
  std::string config;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "JSON config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--threads", opt.threads, "worker threads (0: all cores)")->capture_default_str();
  };
  CLI::App* run = app.add_subcommand("run", "run every optimizer in the config and write traces");
  CLI::App* compare = app.add_subcommand("compare", "run, pick the best grid value per optimizer, plot");
  CLI::App* tightness = app.add_subcommand("tightness", "upper/lower enclosure curves along the first GD line");
  for (CLI::App* sub : {run, compare, tightness}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (CLI::App* sub : {run, compare, tightness})
    if (sub->parsed() && sub->count("--seed")) opt.seed = seed;

  if (run->parsed()) return umm::bench::cmd_run(config, opt);
  if (compare->parsed()) return umm::bench::cmd_compare(config, opt);
  return umm::bench::cmd_tightness(config, opt);
}
