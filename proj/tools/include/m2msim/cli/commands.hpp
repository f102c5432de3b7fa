#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace m2msim::cli {

enum ExitCode : int { ok = 0, validation_error = 1, runtime_error = 2, verification_failed = 3 };

struct RunOptions {
  std::string config = "paper-default";
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
};

struct SweepOptions {
  std::string config = "paper-default";
  std::vector<std::string> overrides;
  std::string axis;
  std::string values;  // "a,b,c" or "start:stop[:step]"
  std::string seeds = "1";
  unsigned threads = 0;
  std::filesystem::path out_dir;
};

struct VerifyOptions {
  std::string only;  // "", "deadbeat" or "pomdp-oracle"
  double plant_mu_scale = 1.0;
  double tolerance = 1e-9;
};

// $M2MSIM_OUT_DIR, else ./m2msim-out.
std::filesystem::path default_out_dir();

std::vector<double> parse_values(const std::string& text);
std::vector<std::uint64_t> parse_seeds(const std::string& text);

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace m2msim::cli
