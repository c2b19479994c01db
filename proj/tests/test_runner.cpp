#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hnls/runner.hpp"

using namespace hnls;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("hnls_runner_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_mode(const std::string& mode, const json& config, const fs::path& out,
             std::optional<std::uint64_t> seed = std::nullopt) {
  std::ostringstream log;
  return run(RunRequest{mode, config, out, seed, false}, log);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> table(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    rows.push_back(row);
  }
  return rows;
}

json summary_of(const fs::path& d) { return json::parse(slurp(d / "summary.json")); }

json cubic_config(double amplitude) {
  return {{"equation", {{"a", 1.0}, {"b", 1.0}, {"lambda", 1.0}, {"p0", 2.0}}},
          {"grid", {{"R", 3.0}, {"T", 1.0}, {"Nx", 32}, {"Nt", 256}}},
          {"data",
           {{"u0", {{"preset", "gaussian"}, {"center", 1.0}, {"width", 0.3},
                    {"amplitude", amplitude}, {"zero_ends", true}}},
            {"uT", {{"preset", "gaussian"}, {"center", 2.0}, {"width", 0.3},
                    {"amplitude", {0.0, amplitude}}, {"zero_ends", true}}}}}};
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("critical length table") {
  fs::path d = fresh_dir("critical");
  json cfg = {{"equation", {{"a", 0.0}, {"b", 1.0}}}, {"critical", {{"R_max", 10.0}, {"R", 6.283185307179586}}}};
  CHECK(run_mode("critical-lengths", cfg, d) == exit_code::success);
  std::string text = slurp(d / "critical.dat");
  CHECK(text.rfind("R k l\n", 0) == 0);
  CHECK(text.find("6.283185 1 1") != std::string::npos);
  CHECK(text.find("9.597724 1 2") != std::string::npos);
  json s = summary_of(d);
  CHECK(s["exit_code"] == 0);
  CHECK(s.contains("config_hash"));
}

TEST_CASE("zero simulation writes zero fields") {
  fs::path d = fresh_dir("simulate");
  json cfg = {{"grid", {{"R", 3.0}, {"T", 1.0}, {"Nx", 16}, {"Nt", 16}}}};
  REQUIRE(run_mode("simulate", cfg, d) == exit_code::success);
  std::string header;
  auto field = table(d / "field.dat", &header);
  CHECK(header == "x t re_u im_u");
  CHECK(field.size() == 18u * 17u);
  for (const auto& r : field) {
    REQUIRE(r.size() == 4u);
    CHECK(r[2] == 0.0);
    CHECK(r[3] == 0.0);
  }
  auto energy = table(d / "energy.dat", &header);
  CHECK(header == "t mass trace_flux gradient drift dispersion source0 source1 imbalance");
  CHECK(energy.size() == 17u);
  for (const auto& r : energy)
    for (size_t k = 1; k < r.size(); ++k) CHECK(r[k] == 0.0);
  auto trace = table(d / "trace.dat", &header);
  CHECK(header == "t re im");
  CHECK(trace.size() == 17u);
}

TEST_CASE("nonlinear control on small data") {
  fs::path d = fresh_dir("nonlinear");
  REQUIRE(run_mode("control-nonlinear", cubic_config(1e-3), d) == exit_code::success);
  json s = summary_of(d);
  CHECK(s["status"] == "Converged");
  CHECK(s["verified"] == true);
  CHECK(s["residuals"]["terminal_residual"].get<double>() <= 1e-6);
  std::string header;
  auto iters = table(d / "iterations.dat", &header);
  CHECK(header == "k step_norm ratio iterate_norm");
  CHECK(iters.size() == static_cast<size_t>(s["iterations"].get<int>()));
  auto control = table(d / "control.dat");
  CHECK(control.size() == 257u);
}

TEST_CASE("nonlinear control on large data reports divergence") {
  fs::path d = fresh_dir("large");
  CHECK(run_mode("control-nonlinear", cubic_config(1e2), d) == exit_code::divergence);
  json s = summary_of(d);
  CHECK((s["status"] == "Divergence" || s["status"] == "BallEscape"));
  CHECK(s["verified"] == false);
}

TEST_CASE("verify suites") {
  fs::path d = fresh_dir("verify");
  CHECK(run_mode("verify", json{{"verify", {{"suite", "duality"}}}}, d) == exit_code::success);
  std::string header;
  auto rows = table(d / "verify.dat", &header);
  CHECK(header == "id pass measured threshold seconds name");
  REQUIRE(rows.size() == 1u);
  CHECK(rows[0][0] == 1.0);
  CHECK(rows[0][1] == 1.0);
  CHECK(rows[0][2] <= rows[0][3]);
  CHECK(run_mode("verify", json{{"verify", {{"suite", "bogus"}}}}, d) == exit_code::config_error);
  CHECK(summary_of(d)["error"]["kind"] == "ConfigError");
}

TEST_CASE("configuration errors") {
  fs::path d = fresh_dir("errors");
  CHECK(run_mode("nonsense", json::object(), d) == exit_code::config_error);
  CHECK(run_mode("simulate", json{{"grid", {{"Nx", 4}}}}, d) == exit_code::config_error);
  CHECK(run_mode("simulate", json{{"colour", 1}}, d) == exit_code::config_error);
  CHECK(run_mode("simulate", json{{"grid", {{"Nx", 16}, {"Nt", 16}, {"dx", 0.1}}}}, d) ==
        exit_code::config_error);
  CHECK(run_mode("simulate", json{{"data", {{"u0", {{"preset", "triangle"}}}}}}, d) ==
        exit_code::config_error);
  json s = summary_of(d);
  CHECK(s["exit_code"] == exit_code::config_error);
  CHECK(s["error"]["message"].get<std::string>().find("triangle") != std::string::npos);
}

TEST_CASE("runs are deterministic and hashed with the seed") {
  json cfg = cubic_config(1e-3);
  cfg["grid"]["Nt"] = 64;
  cfg["grid"]["Nx"] = 16;
  fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  CHECK(run_mode("simulate", cfg, d1) == exit_code::success);
  CHECK(run_mode("simulate", cfg, d2) == exit_code::success);
  CHECK(slurp(d1 / "field.dat") == slurp(d2 / "field.dat"));
  CHECK(slurp(d1 / "energy.dat") == slurp(d2 / "energy.dat"));
  CHECK(summary_of(d1)["config_hash"] == summary_of(d2)["config_hash"]);
  CHECK(summary_of(d1)["seed"] == 20240601);

  CHECK(config_hash(cfg, 1) != config_hash(cfg, 2));
  CHECK(hex(config_hash(cfg, 7)) == hex(config_hash(cfg, 7)));
  CHECK(hex(0xabcULL).size() == 16u);
  fs::path d3 = fresh_dir("det3");
  CHECK(run_mode("simulate", cfg, d3, 99) == exit_code::success);
  CHECK(summary_of(d3)["seed"] == 99);
  CHECK(summary_of(d3)["config_hash"] != summary_of(d1)["config_hash"]);
}

}
