#include "m2msim/cli/commands.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <m2msim/engine.hpp>
#include <m2msim/error.hpp>
#include <m2msim/verification.hpp>

#include "m2msim/cli/config.hpp"
#include "m2msim/cli/report.hpp"

namespace m2msim::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) throw ConfigError(what + ": cannot read '" + s + "' as a number");
  return v;
}

// Drops the representation noise that accumulates in start + i * step.
double tidy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void prepare(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

template <class F>
int guarded(std::ostream& err, F body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return validation_error;
  } catch (const YAML::Exception& e) {
    err << "error: " << e.what() << '\n';
    return validation_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_error;
  }
}

std::string allocation_text(const Allocation& a) {
  std::string s;
  for (std::size_t i = 0; i < a.access.size(); ++i) s += (i ? "," : "") + std::to_string(a.access[i]);
  return s + "+" + std::to_string(a.data);
}

}  // namespace

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("M2MSIM_OUT_DIR"); env && *env) return env;
  return "m2msim-out";
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    const auto p = split(text, ':');
    if (p.size() < 2 || p.size() > 3) throw ConfigError("--values: expected start:stop[:step], got '" + text + "'");
    const double a = to_double(p[0], "--values"), b = to_double(p[1], "--values");
    const double step = p.size() == 3 ? to_double(p[2], "--values") : 1.0;
    if (!(step > 0.0)) throw ConfigError("--values: step must be positive");
    if (b < a) throw ConfigError("--values: stop is below start");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) values.push_back(tidy(a + static_cast<double>(i) * step));
  } else {
    for (const auto& p : split(text, ','))
      if (!p.empty()) values.push_back(to_double(p, "--values"));
  }
  return values;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (double v : parse_values(text)) {
    if (v < 0.0 || v != std::floor(v)) throw ConfigError("--seeds: seeds must be non-negative integers");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  return seeds;
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto config = load_config(opt.config, opt.overrides);
    if (opt.seed) config.seed = *opt.seed;
    const auto dir = opt.out_dir.empty() ? default_out_dir() : opt.out_dir;
    const auto run = run_simulation(config);

    prepare(dir);
    write_text(dir / "config.yaml", serialize_config(config));
    auto periods = open(dir / "periods.csv");
    write_periods_csv(periods, run);
    auto summary = open(dir / "summary.csv");
    write_summary_header(summary);
    write_summary_row(summary, 0, run);
    if (config.record_slots) {
      auto slots = open(dir / "slots.csv");
      write_slots_csv(slots, run);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed=%llu periods=%d reward=%.6g bit/s max|e|=%.4g",
                  static_cast<unsigned long long>(run.seed), config.timebase.periods, run.mean_discounted_reward,
                  run.final_max_abs_gap);
    out << buf << " R=" << allocation_text(run.final_allocation) << " -> " << dir.string() << '\n';
    return ok;
  });
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto axis = parse_axis(opt.axis);
    const auto config = load_config(opt.config, opt.overrides);
    const auto values = parse_values(opt.values);
    const auto seeds = parse_seeds(opt.seeds);
    if (values.empty()) throw ConfigError("--values: no values given");
    if (seeds.empty()) throw ConfigError("--seeds: no seeds given");
    for (double v : values) apply_axis(config, axis, v).validate();  // fail before any run starts

    const auto rows = run_sweep(config, axis, values, seeds, opt.threads);

    const auto dir = opt.out_dir.empty() ? default_out_dir() : opt.out_dir;
    prepare(dir);
    write_text(dir / "config.yaml", serialize_config(config));
    auto sweep = open(dir / "sweep.csv");
    write_summary_header(sweep);
    for (std::size_t i = 0; i < rows.size(); ++i) write_summary_row(sweep, static_cast<int>(i), rows[i].summary, &rows[i].axis_value);
    auto plot = open(dir / "sweep_plot.csv");
    write_sweep_plot_csv(plot, rows);

    out << "axis=" << to_string(axis) << " values=" << values.size() << " seeds=" << seeds.size()
        << " runs=" << rows.size() << " -> " << dir.string() << '\n';
    for (const auto& p : aggregate(rows)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %-10.6g mean=%.6g stderr=%.3g\n", p.axis_value, p.mean, p.stderr_);
      out << buf;
    }
    return ok;
  });
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!opt.only.empty() && opt.only != "deadbeat" && opt.only != "pomdp-oracle")
      throw ConfigError("--only: unknown check '" + opt.only + "' (valid: deadbeat, pomdp-oracle)");
    std::vector<CheckResult> results;
    if (opt.only.empty() || opt.only == "deadbeat") results.push_back(verify_deadbeat(opt.plant_mu_scale, opt.tolerance));
    if (opt.only.empty() || opt.only == "pomdp-oracle") results.push_back(verify_pomdp_oracle(opt.tolerance));
    bool all = true;
    for (const auto& r : results) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3g", r.worst);
      out << (r.pass ? "PASS " : "FAIL ") << r.name << " (worst deviation " << buf << ")";
      if (!r.detail.empty()) out << ": " << r.detail;
      out << '\n';
      all = all && r.pass;
    }
    return all ? ok : verification_failed;
  });
}

}  // namespace m2msim::cli
