#include <iostream>

#include <CLI11.hpp>

#include "divcorr/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"divcorr acceptance checks"};
  std::vector<int> only;
  divcorr::AcceptanceOptions opts;
  app.add_option("--only", only, "Run only these checks")->check(CLI::Range(1, divcorr::kCriterionCount));
  app.add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", opts.seed, "Seed for sampled checks");
  CLI11_PARSE(app, argc, argv);
  if (only.empty()) {
    for (int i = 1; i <= divcorr::kCriterionCount; ++i) only.push_back(i);
  }
  return divcorr::run_acceptance(only, opts, std::cout) ? 0 : 1;
}
