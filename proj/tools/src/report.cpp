#include "m2msim/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <m2msim/error.hpp>

namespace m2msim::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* state_name(RbState s) { return s == RbState::idle ? "idle" : "busy"; }

const char* reading_name(Reading r) {
  switch (r) {
    case Reading::idle: return "idle";
    case Reading::busy: return "busy";
    default: return "";
  }
}

}  // namespace

void write_periods_csv(std::ostream& out, const RunSummary& run) {
  out << "period,slice,C_l,Q_l,xi_l,xi_star_l,e_l,delta_R_raw,delta_R_applied,R_l\n";
  for (const auto& p : run.periods)
    out << p.period << ',' << p.slice << ',' << num(p.metrics.obtained_rate) << ',' << num(p.filtered_rate) << ','
        << num(p.metrics.obtained_ratio) << ',' << num(p.metrics.desired_ratio) << ',' << num(p.metrics.gap) << ','
        << num(p.delta_raw) << ',' << p.delta_applied << ',' << p.access_rbs << '\n';
}

void write_slots_csv(std::ostream& out, const RunSummary& run) {
  out << "period,slot,slice,device,action,physical_rb,rb_state,observation,own_gain,interference_w,rate,reward\n";
  for (const auto& s : run.slots)
    out << s.period << ',' << s.slot << ',' << s.slice << ',' << s.device << ',' << s.action.to_string() << ','
        << s.physical_rb << ',' << (s.physical_rb < 0 ? "" : state_name(s.rb_state)) << ','
        << reading_name(s.observation) << ',' << num(s.own_gain) << ',' << num(s.interference_w) << ','
        << num(s.rate) << ',' << num(s.reward) << '\n';
}

void write_summary_header(std::ostream& out) {
  out << "run_id,seed,axis_value,mean_discounted_reward,final_max_abs_gap\n";
}

void write_summary_row(std::ostream& out, int run_id, const RunSummary& run, const double* axis_value) {
  out << run_id << ',' << run.seed << ',' << (axis_value ? num(*axis_value) : "") << ','
      << num(run.mean_discounted_reward) << ',' << num(run.final_max_abs_gap) << '\n';
}

std::vector<SweepPoint> aggregate(std::span<const SweepRow> rows) {
  std::vector<SweepPoint> points;
  std::map<double, std::size_t> index;
  std::vector<std::vector<double>> samples;
  for (const auto& r : rows) {
    auto [it, fresh] = index.try_emplace(r.axis_value, points.size());
    if (fresh) {
      points.push_back({r.axis_value, 0.0, 0.0, 0});
      samples.emplace_back();
    }
    samples[it->second].push_back(r.summary.mean_discounted_reward);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& v = samples[i];
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    points[i].mean = mean;
    points[i].stderr_ = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    points[i].samples = static_cast<int>(v.size());
  }
  return points;
}

void write_sweep_plot_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "axis_value,mean,stderr\n";
  for (const auto& p : aggregate(rows)) out << num(p.axis_value) << ',' << num(p.mean) << ',' << num(p.stderr_) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace m2msim::cli
