#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "dtwin/errors.hpp"
#include "dtwin/io.hpp"
#include "dtwin/metrics.hpp"
#include "dtwin/twin.hpp"

namespace dtwin::twin {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

Timed predict(const sysid::NarxModel& model, const Signal& input, const std::vector<double>& warmup) {
  const auto t0 = Clock::now();
  Timed r{sysid::free_run(model, input, warmup), 0.0};
  r.wall_seconds = seconds_since(t0);
  return r;
}

std::string bench_csv_header() {
  return "horizon_s,rom_wall_s,fom_wall_s,speedup_realtime,speedup_vs_fom,predictions_per_minute,repetitions";
}

std::string to_csv_row(const BenchReport& r) {
  return fmt(r.horizon) + "," + fmt(r.rom_wall) + "," + fmt(r.fom_wall) + "," + fmt(r.speedup_realtime) + "," +
         fmt(r.speedup_vs_fom) + "," + fmt(r.predictions_per_minute) + "," + std::to_string(r.repetitions);
}

std::string to_text(const BenchReport& r) {
  std::string s = "horizon " + fmt(r.horizon) + " s: ROM " + fmt(r.rom_wall) + " s wall (" +
                  fmt(r.speedup_realtime) + "x real time)";
  if (r.fom_wall > 0.0) s += ", FOM " + fmt(r.fom_wall) + " s wall (ROM " + fmt(r.speedup_vs_fom) + "x faster)";
  s += ", " + fmt(r.predictions_per_minute) + " one-hour predictions per minute";
  if (!r.method.empty()) s += " [" + r.method + "]";
  return s;
}

FanoutResult scenario_fanout(const sysid::NarxModel& model, const std::vector<Signal>& candidates,
                             const std::vector<double>& warmup, unsigned threads) {
  if (candidates.empty()) throw DomainError("scenario fan-out needs at least one candidate");
  for (const auto& c : candidates)
    if (c.times() != candidates.front().times()) throw DomainError("fan-out candidates are not co-sampled");

  FanoutResult res;
  res.outputs.resize(candidates.size());
  res.errors.resize(candidates.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      try {
        res.outputs[i] = sysid::free_run(model, candidates[i], warmup);
      } catch (const Error& e) {
        res.errors[i] = e.what();
      }
    }
  };
  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, candidates.size()));
  const auto t0 = Clock::now();
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  const double wall = seconds_since(t0);

  auto& r = res.report;
  r.horizon = candidates.front().end() - candidates.front().start();
  r.rom_wall = wall;
  r.repetitions = 1;
  if (wall > 0.0 && r.horizon > 0.0) {
    r.speedup_realtime = r.horizon * static_cast<double>(candidates.size()) / wall;
    r.predictions_per_minute = static_cast<double>(candidates.size()) * (r.horizon / 3600.0) / (wall / 60.0);
  }
  r.method = std::to_string(candidates.size()) + " candidates on " + std::to_string(nt) +
             " threads, single wall-clock measurement";
  return res;
}

sysid::IoCase io_from_trajectory(const fom::Trajectory& traj, const std::string& id, double interval,
                                 double horizon) {
  if (!(interval > 0.0) || !(horizon > 0.0)) throw DomainError("interval and horizon must be > 0");
  if (traj.probes.empty()) throw DomainError("trajectory has no probes");
  std::vector<double> t, tin, tout;
  for (const auto& p : traj.probes) {
    t.push_back(p.time);
    tin.push_back(p.oven_temperature);
    tout.push_back(p.core_temperature);
  }
  if (horizon > t.back() + 1e-9 * horizon) throw DomainError("trajectory ends before the requested horizon");
  const auto n = static_cast<std::size_t>(std::floor(horizon / interval + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = t.front() + interval * static_cast<double>(k);
  return {id, Signal::uniform(t.front(), interval, metrics::resample(t, tin, grid)),
          Signal::uniform(t.front(), interval, metrics::resample(t, tout, grid))};
}

BenchReport bench_speedup(const sysid::NarxModel& model, const fom::Case& fom_case, double horizon,
                          int repetitions) {
  if (!(horizon > 0.0)) throw DomainError("benchmark horizon must be > 0");
  if (repetitions < 1) throw DomainError("benchmark needs at least one repetition");

  fom::Case c = fom_case;
  c.t_end = horizon;
  c.solver.record_fields = false;
  c.solver.output_interval = model.sample_interval;

  std::vector<double> fom_times, rom_times, hour_times;
  fom::Trajectory traj;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = Clock::now();
    traj = c.run();
    fom_times.push_back(seconds_since(t0));
  }
  const auto io = io_from_trajectory(traj, "bench", model.sample_interval, horizon);
  const auto& warm = io.output.values();

  const std::size_t hour_n = std::min(io.input.size(),
                                      static_cast<std::size_t>(std::floor(3600.0 / model.sample_interval)) + 1);
  const Signal hour(std::vector<double>(io.input.times().begin(), io.input.times().begin() + hour_n),
                    std::vector<double>(io.input.values().begin(), io.input.values().begin() + hour_n));
  for (int r = 0; r < repetitions; ++r) {
    rom_times.push_back(predict(model, io.input, warm).wall_seconds);
    hour_times.push_back(predict(model, hour, warm).wall_seconds);
  }

  BenchReport rep;
  rep.horizon = horizon;
  rep.repetitions = repetitions;
  rep.fom_wall = median(fom_times);
  rep.rom_wall = median(rom_times);
  const double tiny = 1e-9;  // clock resolution floor
  rep.speedup_realtime = horizon / std::max(rep.rom_wall, tiny);
  rep.speedup_vs_fom = rep.fom_wall / std::max(rep.rom_wall, tiny);
  const double hour_span = hour.end() - hour.start();
  const double hour_wall = std::max(median(hour_times), tiny) * (3600.0 / std::max(hour_span, model.sample_interval));
  rep.predictions_per_minute = 60.0 / hour_wall;
  rep.method = "median of " + std::to_string(repetitions) + " runs, steady clock, warm cache";
  return rep;
}

}  // namespace dtwin::twin
