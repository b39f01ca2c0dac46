// Runs the acceptance battery and prints one pass/fail line per criterion.
// Exit status is 0 only if every criterion passes.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gplab/verification.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gplab acceptance battery"};
  std::string level = "fast";
  std::string json_path;
  app.add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  app.add_option("--json", json_path, "write the JSON verdict to this file");
  CLI11_PARSE(app, argc, argv);

  const gplab::VerificationReport rep = gplab::run_verification_suite(
      gplab::parse_level(level), [](const gplab::CriterionResult& r) { std::cout << gplab::format_result(r) << std::endl; });
  int passed = 0;
  for (const auto& c : rep.criteria) passed += c.pass;
  std::printf("%d/%zu criteria passed at level %s in %.1f s\n", passed, rep.criteria.size(), level.c_str(),
              rep.seconds);
  if (!json_path.empty()) std::ofstream(json_path) << rep.to_json().dump(2) << "\n";
  return rep.all_pass() ? 0 : 1;
}
