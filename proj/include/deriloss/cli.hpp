#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deriloss/activator.hpp"
#include "deriloss/moduli.hpp"

namespace deriloss::cli {

enum ExitCode : int { kPass = 0, kVerifyFailed = 1, kConfigError = 2, kHypothesis = 3 };

/// Everything a command may read. Unset optionals fall back to per-command
/// defaults.
struct RunConfig {
  double T0 = 1.0;
  double mu1 = 1.0;
  double mu2 = 2.0;
  std::string omega = "holder:0.25";
  std::string theta = "power:1:1";
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<int> lambda_points;
  std::string out = "out";
  double seed_t1_frac = 0.9;
  double eta = 0.9;
  double gamma2_frac = 0.5;  // gamma^2 = mu1 + frac (mu2 - mu1)
  std::optional<double> lambda;
  std::optional<std::string> input;
  std::size_t samples = 2000;
  std::size_t membership_samples = 100000;
  bool self_test = false;
  int n_max = 60;
  std::optional<double> beta;
  std::optional<double> gamma_reg;
  std::vector<double> probes;  // fractions of T0; default {0.5, 1}

  moduli::ClassParams class_params() const;
  activator::SeedCoefficient seed() const;
  std::vector<double> grid(double lo, double hi, int points) const;
};

/// Flat key=value lines, '#' comments. Keys are the long flag names
/// without dashes. Throws ConfigError on malformed lines or unknown keys.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv);

int cmd_classify(const RunConfig& cfg, std::ostream& out);
int cmd_table5(const RunConfig& cfg, std::ostream& out);
int cmd_construct(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_plot(const RunConfig& cfg, std::ostream& out);
int cmd_spectral(const RunConfig& cfg, std::ostream& out);

/// Verification report text for cmd_verify, without touching the disk.
std::string verify_report(const RunConfig& cfg, bool& all_pass);

/// Parses argv and dispatches; maps errors to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace deriloss::cli
