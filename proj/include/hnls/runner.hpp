#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "hnls/forward.hpp"
#include "hnls/nonlinear.hpp"

namespace hnls {

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int verification_failed = 1;
inline constexpr int config_error = 2;
inline constexpr int non_convergence = 3;
inline constexpr int divergence = 4;
}  // namespace exit_code

struct RunRequest {
  std::string mode;
  nlohmann::json config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

// Dispatches on mode, writes the artifacts into out_dir and returns the exit
// code. summary.json is written even when the run fails.
int run(const RunRequest& request, std::ostream& log);

nlohmann::json load_config(const std::filesystem::path& path);

EquationParams parse_equation(const nlohmann::json& config);
GridSpec parse_grid(const nlohmann::json& config);
// u0, uT, mu, nu and f from the data block; c0 is filled in.
ControlProblem parse_problem(const nlohmann::json& config);
CgOptions parse_cg(const nlohmann::json& config);
PicardConfig parse_picard(const nlohmann::json& config);

// FNV-1a over the compact dump of the config with the effective seed attached.
std::uint64_t config_hash(const nlohmann::json& config, std::uint64_t seed);
std::string hex(std::uint64_t value);

void write_field(const std::filesystem::path& path, const SpaceTimeField& u);
void write_series(const std::filesystem::path& path, const TimeSeries& s, const GridSpec& grid);

}  // namespace hnls
