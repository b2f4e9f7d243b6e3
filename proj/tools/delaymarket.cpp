#include <iostream>

#include <CLI11.hpp>

#include "delaymarket/cli.hpp"

int main(int argc, char** argv) {
  namespace dm = delaymarket::cli;
  dm::CommandInvocation inv;
  CLI::App app{"Joint LQG control and priced delay-link scheduling"};
  app.add_option("command", inv.command, "validate | solve | simulate | pareto | "
                                         "export-milp | stability | bruteforce")
      ->required()
      ->check(CLI::IsMember(dm::commands()));
  app.add_option("--config", inv.configPath, "problem config (JSON)");
  app.add_option("--out", inv.outputDir, "output directory")->capture_default_str();
  app.add_option("--seed", inv.seed, "Monte Carlo / random-instance seed")
      ->capture_default_str();
  app.add_option("--runs", inv.runs, "Monte Carlo runs")->capture_default_str();
  app.add_option("--alpha-points", inv.alphaPoints, "weights in the Pareto sweep")
      ->capture_default_str();
  app.add_option("--schedule", inv.schedulePath, "evaluate this schedule CSV (column d_t)");
  app.add_option("--budget", inv.budget, "communication budget for pareto");
  app.add_option("--T", inv.bruteT, "bruteforce: horizon of the random instance")
      ->capture_default_str();
  app.add_option("--D", inv.bruteD, "bruteforce: links of the random instance")
      ->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dm::kInputError;
  }
  return dm::run(inv, std::cout, std::cerr);
}
