// dtwin: command-line entry point for the full-order model, excitation
// design, identification and ROM runtime.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "dtwin/config.hpp"
#include "dtwin/errors.hpp"
#include "dtwin/excite.hpp"
#include "dtwin/io.hpp"
#include "dtwin/metrics.hpp"
#include "dtwin/pipeline.hpp"
#include "dtwin/sysid.hpp"
#include "dtwin/twin.hpp"

namespace fs = std::filesystem;
using namespace dtwin;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kIdentification = 4, kDivergence = 5, kInternal = 70 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string timestamp;
  unsigned threads = 0;
};

int classify(const std::exception& e) {
  if (const auto* nested = dynamic_cast<const std::nested_exception*>(&e)) {
    try {
      nested->rethrow_nested();
    } catch (const std::exception& inner) {
      return classify(inner);
    } catch (...) {
    }
  }
  if (dynamic_cast<const DivergenceError*>(&e)) return kDivergence;
  if (dynamic_cast<const IdentificationError*>(&e)) return kIdentification;
  if (dynamic_cast<const SolverFailure*>(&e) || dynamic_cast<const NumericalFailure*>(&e)) return kSolver;
  if (dynamic_cast<const Error*>(&e)) return kConfig;
  return kInternal;
}

std::string timestamp(const Options& o) {
  if (!o.timestamp.empty()) return o.timestamp;
  if (const char* s = std::getenv("SOURCE_DATE_EPOCH")) return std::string("epoch:") + s;
  return "unset";
}

std::optional<config::PipelineConfig> maybe_config(const Options& o) {
  if (o.config.empty()) return std::nullopt;
  auto cfg = config::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

config::PipelineConfig need_config(const Options& o, const char* cmd) {
  if (o.config.empty()) throw ConfigError(std::string(cmd) + " needs --config");
  return *maybe_config(o);
}

std::string out_dir(const Options& o, const std::optional<config::PipelineConfig>& cfg) {
  if (!o.out.empty()) return o.out;
  return cfg ? cfg->output_dir : "out";
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void write(const std::string& path, const std::string& text) {
  io::write_atomic(path, text);
  std::cout << "wrote " << path << "\n";
}

std::vector<double> warmup_values(const std::string& csv, std::optional<double> value, std::size_t n) {
  if (!csv.empty()) return io::read_signal_csv(csv).values();
  if (value) return std::vector<double>(n, *value);
  throw ConfigError("predict needs --warmup-csv or --warmup-K");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digital-twin toolkit: porous-food cooking FOM, APRBS excitation, NARX ROMs"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "case/pipeline config (JSON)");
  app.add_option("--seed", o.seed, "global seed (overrides the config)");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--timestamp", o.timestamp, "fit timestamp recorded in model metadata");
  app.add_option("--threads", o.threads, "worker threads (0 = hardware)");

  double t_end = 0.0;
  auto* simulate = app.add_subcommand("simulate", "run the full-order model of the configured case");
  simulate->add_option("--t-end", t_end, "end time, s (overrides t_end_s)");

  std::uint64_t index = 0;
  auto* excite_cmd = app.add_subcommand("excite", "write an APRBS oven-temperature signal");
  excite_cmd->add_option("--index", index, "case index; the signal uses sub_seed(seed, index)");

  std::string manifest, model_path;
  auto* fit_cmd = app.add_subcommand("fit", "identify nonlinear and linear ROMs from a manifest");
  fit_cmd->add_option("--manifest", manifest, "JSON list of {id, probes, input}")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "free-run a model on the cases of a manifest");
  eval_cmd->add_option("--model", model_path, ".dtrom file")->required();
  eval_cmd->add_option("--manifest", manifest, "JSON list of {id, probes, input}")->required();

  std::string input_csv, warmup_csv;
  std::optional<double> warmup_k;
  auto* predict_cmd = app.add_subcommand("predict", "free-run a model on an input signal");
  predict_cmd->add_option("--model", model_path, ".dtrom file")->required();
  predict_cmd->add_option("--input", input_csv, "t_s,value oven temperature")->required();
  predict_cmd->add_option("--warmup-csv", warmup_csv, "t_s,value measured core temperature");
  predict_cmd->add_option("--warmup-K", warmup_k, "constant warmup core temperature");

  double horizon = 10000.0;
  int reps = 5;
  auto* bench_cmd = app.add_subcommand("bench", "time the ROM against the FOM of the configured case");
  bench_cmd->add_option("--model", model_path, ".dtrom file")->required();
  bench_cmd->add_option("--horizon", horizon, "predicted span, s");
  bench_cmd->add_option("--repetitions", reps, "timing repetitions");
  std::optional<std::size_t> bench_case;
  bench_cmd->add_option("--case-index", bench_case, "drive the case with the APRBS oven of pipeline case i");

  std::optional<int> n_train, n_eval;
  auto* pipe_cmd = app.add_subcommand("pipeline", "APRBS cases -> FOM -> fit -> evaluation");
  pipe_cmd->add_option("--n-train", n_train, "training cases (overrides the config)");
  pipe_cmd->add_option("--n-eval", n_eval, "evaluation cases (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (simulate->parsed()) {
      auto cfg = need_config(o, "simulate");
      auto c = cfg.fom_case;
      if (t_end > 0.0) c.t_end = t_end;
      c.solver.record_fields = true;
      const auto traj = c.run();
      const auto dir = out_dir(o, cfg);
      write(join(dir, "trajectory.csv"), io::trajectory_csv(traj, c.grid(), c.material.max_water_concentration()));
      write(join(dir, "probes.csv"), io::probes_csv(traj));
      const double drift = (traj.initial_moisture - traj.final_moisture - traj.cumulative_outflow) /
                           traj.initial_moisture;
      std::cout << "t_end " << c.t_end << " s, " << traj.stats.accepted_steps << " steps, relative moisture-balance "
                << "residual " << drift << "\n";
    } else if (excite_cmd->parsed()) {
      const auto cfg = maybe_config(o);
      config::PipelineConfig c = cfg ? *cfg : config::PipelineConfig{};
      if (o.seed) c.seed = *o.seed;
      auto spec = c.aprbs;
      spec.seed = excite::sub_seed(c.seed, index);
      write(join(out_dir(o, cfg), "aprbs.csv"), io::signal_csv(excite::generate_aprbs(spec, c.sample_interval)));
    } else if (fit_cmd->parsed()) {
      const auto cfg = maybe_config(o);
      sysid::FitConfig fc = cfg ? cfg->fit : sysid::FitConfig{};
      fc.timestamp = timestamp(o);
      if (o.threads) fc.threads = o.threads;
      const auto training = pipeline::read_manifest(manifest);
      const auto nl = sysid::fit(training, fc);
      const auto lin = sysid::fit_linear(training, fc);
      const auto dir = out_dir(o, cfg);
      twin::export_model(nl, join(dir, "nonlinear.dtrom"));
      twin::export_model(lin, join(dir, "linear.dtrom"));
      std::cout << "wrote " << join(dir, "nonlinear.dtrom") << " and " << join(dir, "linear.dtrom") << "\n";
      std::cout << "one-step training RMSE: nonlinear " << nl.meta.training_rmse << " K, linear "
                << lin.meta.training_rmse << " K\n";
    } else if (eval_cmd->parsed()) {
      const auto model = twin::import_model(model_path);
      const auto cases = pipeline::read_manifest(manifest);
      const auto ev = sysid::evaluate(model, cases);
      std::string csv = "case," + metrics::csv_header() + "\n", text;
      for (std::size_t i = 0; i < ev.cases.size(); ++i) {
        csv += cases.cases[i].id + "," + metrics::to_csv_row(ev.cases[i]) + "\n";
        text += cases.cases[i].id + ": " + metrics::to_text(ev.cases[i]) + "\n";
      }
      text += "mean RMSE " + std::to_string(ev.mean_rmse) + " K\n";
      const auto dir = out_dir(o, std::nullopt);
      write(join(dir, "evaluation.csv"), csv);
      write(join(dir, "evaluation.txt"), text);
      std::cout << text;
    } else if (predict_cmd->parsed()) {
      const auto model = twin::import_model(model_path);
      const auto input = io::read_signal_csv(input_csv);
      const auto r = twin::predict(model, input, warmup_values(warmup_csv, warmup_k, model.max_lag()));
      write(join(out_dir(o, std::nullopt), "prediction.csv"), io::signal_csv(r.output));
      std::cout << "predicted " << (input.end() - input.start()) << " s in " << r.wall_seconds << " s wall\n";
    } else if (bench_cmd->parsed()) {
      auto cfg = need_config(o, "bench");
      const auto model = twin::import_model(model_path);
      const auto c = bench_case ? pipeline::aprbs_case(cfg, *bench_case) : cfg.fom_case;
      const auto rep = twin::bench_speedup(model, c, horizon, reps);
      const auto dir = out_dir(o, cfg);
      write(join(dir, "bench.csv"), twin::bench_csv_header() + "\n" + twin::to_csv_row(rep) + "\n");
      write(join(dir, "bench.txt"), twin::to_text(rep) + "\n");
      std::cout << twin::to_text(rep) << "\n";
    } else if (pipe_cmd->parsed()) {
      auto cfg = need_config(o, "pipeline");
      if (n_train) cfg.n_train = *n_train;
      if (n_eval) cfg.n_eval = *n_eval;
      if (cfg.n_train < 1) {
        std::cerr << "usage error: pipeline needs --n-train >= 1\n";
        return kConfig;
      }
      cfg.fit.timestamp = timestamp(o);
      const auto r = pipeline::run(cfg, o.threads);
      const auto dir = out_dir(o, cfg);
      pipeline::write_outputs(r, dir);
      std::cout << pipeline::report_text(r) << "outputs in " << dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return kOk;
}
