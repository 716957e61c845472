#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "cornermass/config.hpp"
#include "cornermass/errors.hpp"
#include "cornermass/pipeline.hpp"

using namespace cornermass;

namespace {

int thread_cap() {
  const char* env = std::getenv("CORNER_MASS_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("CORNER_MASS_THREADS must be a positive integer");
  return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass bounds for initial data sets with corners"};
  app.footer("\nExit codes: 0 ok, 1 verdict failed, 2 config or domain error, 3 numerical failure.\n"
             "CORNER_MASS_THREADS caps OpenMP threads.\n\n" +
             cli::csv_columns_help());
  app.require_subcommand(1);

  std::string config, out, filter;
  bool deterministic = false;
  for (const auto& name : cli::command_names()) {
    auto* sub = app.add_subcommand(name, cli::command_help(name));
    sub->add_option("--config", config, "run configuration (key = value, [sections])")->required();
    sub->add_option("--out", out, "write the JSON report here instead of stdout");
    sub->add_flag("--deterministic", deterministic, "omit timing so reruns are byte-identical");
    sub->add_option("--filter", filter, "regress only: group or group.key to run");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  nlohmann::json report;
  int code = 0;
  std::string text;
  try {
    cli::RunFlags flags;
    flags.deterministic = deterministic;
    flags.filter = filter;
    flags.threads = thread_cap();
    if (flags.threads > 0) omp_set_num_threads(flags.threads);
    const auto res = cli::run_command(command, cli::Config::load(config), flags);
    report = res.report;
    code = res.exit_code;
    text = res.text;
  } catch (const std::exception& e) {
    std::cerr << "corner-mass " << command << ": " << e.what() << '\n';
    report = cli::error_envelope(command, e);
    code = cli::exit_code_for(e);
  }

  const std::string json = report.dump(2) + "\n";
  if (command == "regress") {
    std::cout << text;
    if (!out.empty()) std::ofstream(out) << json;
  } else if (out.empty()) {
    std::cout << json;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "corner-mass: cannot write " << out << '\n';
      return cli::kConfigFailure;
    }
    f << json;
  }
  return code;
}
