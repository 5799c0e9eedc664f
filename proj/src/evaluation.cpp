#include "glasdi/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "glasdi/errors.hpp"
#include "glasdi/log.hpp"
#include "glasdi/trajectory_io.hpp"

namespace glasdi {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      const auto b = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFU);
      bytes(&b, 1);
    }
  }
  void u64(std::uint64_t v) { f64(std::bit_cast<double>(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::uint64_t fom_cache_key(const ParamPoint& mu, const FomConfig& cfg) {
  Fnv1a h;
  h.bytes("GLSD1-fom", 9);
  for (double v : {cfg.x_min, cfg.x_max, cfg.y_min, cfg.y_max, cfg.reynolds, cfg.dt, cfg.t_final,
                   cfg.newton_tol}) {
    h.f64(v);
  }
  h.u64(cfg.nx);
  h.u64(cfg.ny);
  h.u64(static_cast<std::uint64_t>(cfg.newton_max_iter));
  h.u64(cfg.advection ? 1 : 0);
  h.u64(mu.dim());
  for (double v : mu.values) h.f64(v);
  return h.value();
}

FomCache::FomCache(std::filesystem::path dir, FomConfig cfg)
    : dir_(std::move(dir)), cfg_(std::move(cfg)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path FomCache::path_for(const ParamPoint& mu) const {
  std::ostringstream name;
  name << "fom_" << std::hex << std::setw(16) << std::setfill('0') << fom_cache_key(mu, cfg_)
       << ".glsd";
  return dir_ / name.str();
}

Trajectory FomCache::operator()(const ParamPoint& mu) const {
  const auto path = path_for(mu);
  if (std::filesystem::exists(path)) {
    try {
      Trajectory t = read_trajectory(path);
      if (t.mu == mu && t.state_size() == cfg_.state_size() &&
          t.n_snapshots() == cfg_.n_steps() + 1 && t.has_derivatives()) {
        ++hits_;
        return t;
      }
    } catch (const FormatError&) {
    }
    log_warn("discarding unreadable cache entry " + path.string());
  }
  ++misses_;
  Trajectory t = simulate(mu, cfg_);
  auto tmp = path;
  tmp += ".tmp";
  write_trajectory(tmp, t);
  std::filesystem::rename(tmp, path);
  return t;
}

double HeatmapTable::grid_max() const {
  double m = 0.0;
  for (const auto& r : rows) {
    if (!r.failed) m = std::max(m, r.max_rel_error);
  }
  return m;
}

std::size_t HeatmapTable::failed_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const HeatmapRow& r) { return r.failed; }));
}

std::size_t HeatmapTable::sampled_count() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const HeatmapRow& r) { return r.sampled; }));
}

HeatmapTable evaluate_grid(const RomModel& rom, const DiscreteParamSpace& space,
                           const FomConfig& fom, const FomSolver& solver,
                           const IndicatorOptions& indicator) {
  std::vector<bool> sampled(space.size(), false);
  for (const auto& a : rom.anchors) {
    if (auto idx = space.index_of(a.owner_mu)) sampled[*idx] = true;
  }
  HeatmapTable table;
  table.rows.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    HeatmapRow row;
    row.index = i;
    row.mu = space.point(i);
    row.sampled = sampled[i];
    try {
      const Trajectory reference = solver(row.mu);
      const Trajectory approx = predict(row.mu, rom, space, fom);
      row.max_rel_error = max_relative_error(reference, approx);
      row.residual_indicator = residual_indicator(approx, fom, indicator);
      row.failed = !std::isfinite(row.max_rel_error);
    } catch (const Error& e) {
      log_warn("grid point " + std::to_string(i) + " failed: " + e.what());
      row.failed = true;
    }
    if (row.failed) {
      row.max_rel_error = std::nan("");
      row.residual_indicator = std::nan("");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_heatmap_csv(std::ostream& out, const HeatmapTable& table) {
  const std::size_t dim = table.rows.empty() ? 0 : table.rows.front().mu.dim();
  for (std::size_t d = 0; d < dim; ++d) out << "mu_" << d + 1 << ',';
  out << "max_rel_error,residual_indicator,sampled\n";
  char buf[64];
  auto num = [&](double v) -> const char* {
    if (std::isnan(v)) return "nan";
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  };
  for (const auto& r : table.rows) {
    for (double v : r.mu.values) out << num(v) << ',';
    out << num(r.max_rel_error) << ',';
    out << num(r.residual_indicator) << ',';
    out << (r.sampled ? 1 : 0) << '\n';
  }
}

void write_heatmap_csv(const std::filesystem::path& path, const HeatmapTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_heatmap_csv(out, table);
}

SpeedupReport measure_speedup(const ParamPoint& mu, const RomModel& rom,
                              const DiscreteParamSpace& space, const FomConfig& fom,
                              std::size_t n_trials) {
  if (n_trials < 3) throw InvalidConfig("measure_speedup needs at least 3 trials");
  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  SpeedupReport report;
  (void)simulate(mu, fom);
  (void)predict(mu, rom, space, fom);
  for (std::size_t i = 0; i < n_trials; ++i) {
    auto t0 = Clock::now();
    const Trajectory full = simulate(mu, fom);
    auto t1 = Clock::now();
    const Trajectory reduced = predict(mu, rom, space, fom);
    auto t2 = Clock::now();
    report.fom_seconds.push_back(seconds(t0, t1));
    report.rom_seconds.push_back(seconds(t1, t2));
  }
  report.fom_median = median(report.fom_seconds);
  report.rom_median = median(report.rom_seconds);
  report.ratio = report.fom_median / report.rom_median;
  return report;
}

}  // namespace glasdi
