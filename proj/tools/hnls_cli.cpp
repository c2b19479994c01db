#include <iostream>

#include "CLI11.hpp"

#include "hnls/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary control toolkit for the higher-order NLS equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool verbose = false;

  const char* modes[][2] = {
      {"simulate", "forward solve with prescribed boundary data"},
      {"control-linear", "HUM control of the linear problem"},
      {"control-nonlinear", "Picard iteration for the nonlinear control problem"},
      {"critical-lengths", "enumerate critical interval lengths"},
      {"scan", "observability, inequality, smallness or Gramian scans"},
      {"verify", "run the built-in acceptance suites"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (auto& m : modes) {
    CLI::App* sub = app.add_subcommand(m[0], m[1]);
    sub->add_option("-c,--config", config_path, "JSON scenario file");
    sub->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
    seed_opts.push_back(sub->add_option("-s,--seed", seed, "seed for random scans"));
    sub->add_flag("-v,--verbose", verbose, "print the summary");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : hnls::exit_code::config_error;
  }

  hnls::RunRequest rq;
  for (size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) {
      rq.mode = subs[i]->get_name();
      if (seed_opts[i]->count()) rq.seed = seed;
    }
  rq.out_dir = out_dir;
  rq.verbose = verbose;
  try {
    rq.config = config_path.empty() ? nlohmann::json::object() : hnls::load_config(config_path);
  } catch (const hnls::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hnls::exit_code::config_error;
  }
  int code = hnls::run(rq, std::cerr);
  if (verbose || code != 0) std::cerr << "exit code " << code << '\n';
  return code;
}
