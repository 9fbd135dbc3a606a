#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocpls/optimizer.hpp"

namespace ocpls {

// Raised for unreadable, malformed or invalid experiment configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { quadratic, rosenbrock, least_squares, pose };

const char* to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& text);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::pose;
  std::string dataset = "synthetic";
  std::uint64_t seed = 1;
  // quadratic / rosenbrock / least_squares
  std::size_t dimension = 10;
  double lambda_min = 1.0;
  double lambda_max = 4.0;
  double lambda_reg = 0.0;
  double init_scale = 1.0;  // x0 = x* + init_scale * N(0, I), or N(0, I) scaled for rosenbrock
  // pose
  std::size_t n_train = 512;
  std::size_t n_val = 128;
  double noise_sigma = 0.0;
  std::size_t feature_dim = 16;
  std::vector<std::size_t> hidden = {64, 64};
  double s_p_init = 0.0;
  double s_q_init = -3.0;

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct RunSpec {
  std::size_t max_iterations = 500;
  std::size_t batch_size = 32;
  std::size_t validation_interval = 10;
  std::vector<std::size_t> checkpoints = {50, 150};
  std::string out_dir;       // empty: OCPLS_OUT_DIR, then ./ocpls_out
  bool record_wall_time = false;  // elapsed_s is 0 unless set; wall time breaks byte-reproducibility
  std::size_t threads = 1;   // arms run concurrently when > 1

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct RobustnessSpec {
  std::vector<double> noise_levels = {0.0};

  friend bool operator==(const RobustnessSpec&, const RobustnessSpec&) = default;
};

struct ArmSpec {
  std::string name;
  OptimizerSpec optimizer;

  friend bool operator==(const ArmSpec&, const ArmSpec&) = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  RunSpec run;
  RobustnessSpec robustness;
  std::vector<ArmSpec> arms;

  // Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// OCP-LS, AdamW and Sophia-style arms with the shipped defaults.
std::vector<ArmSpec> default_arms();

// INI text: [problem], [run], [robustness] and one [arm.<name>] section per arm.
// Unset keys take defaults, unknown sections/keys are rejected, no arm sections
// means default_arms(). Comments start with ';'.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

std::string format_config(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

struct ConfigOverrides {
  std::optional<std::size_t> max_iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> arms;  // subset to run; empty keeps all
};

ExperimentConfig apply_overrides(ExperimentConfig cfg, const ConfigOverrides& overrides);

}  // namespace ocpls
