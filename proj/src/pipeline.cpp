#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <json.hpp>
#include <thread>

#include "dtwin/excite.hpp"
#include "dtwin/io.hpp"
#include "dtwin/metrics.hpp"
#include "dtwin/pipeline.hpp"
#include "dtwin/twin.hpp"

namespace dtwin::pipeline {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

[[noreturn]] void stage_failed(const std::string& stage, const std::string& id, const std::exception& e) {
  std::throw_with_nested(StageError(stage, id, e.what()));
}

sysid::Evaluation evaluate_named(const sysid::NarxModel& model, const sysid::TrainingSet& cases,
                                 const std::string& stage) {
  sysid::Evaluation ev;
  if (cases.cases.empty()) return ev;
  double sum = 0.0;
  for (const auto& c : cases.cases) {
    sysid::Evaluation one;
    try {
      one = sysid::evaluate(model, sysid::TrainingSet{{c}});
    } catch (const Error& e) {
      stage_failed(stage, c.id, e);
    }
    const auto& rep = one.cases.front();
    ev.worst.rmse = std::max(ev.worst.rmse, rep.rmse);
    ev.worst.mape = std::max(ev.worst.mape, rep.mape);
    ev.worst.max_abs_error = std::max(ev.worst.max_abs_error, rep.max_abs_error);
    ev.worst.n_samples += rep.n_samples;
    sum += rep.rmse;
    ev.cases.push_back(rep);
    ev.predictions.push_back(std::move(one.predictions.front()));
  }
  ev.mean_rmse = sum / static_cast<double>(ev.cases.size());
  return ev;
}

void describe_model(std::string& out, const char* name, const sysid::NarxModel& m) {
  out += std::string(name) + " model: n_a " + std::to_string(m.output_lags) + ", n_b " +
         std::to_string(m.input_lags) + ", " + std::to_string(m.terms.size()) + " terms, ridge " +
         fmt(m.meta.ridge) + (m.meta.ridge_fallback ? " (fallback)" : "") + ", one-step training RMSE " +
         fmt(m.meta.training_rmse) + " K\n";
  out += "  terms:";
  for (const auto& t : m.meta.selected_terms) out += " " + t;
  out += "\n  selection trace (validation RMSE, K):";
  for (double v : m.meta.selection_trace) out += " " + fmt(v);
  out += "\n";
}

}  // namespace

std::string case_id(const config::PipelineConfig& cfg, std::size_t index) {
  const auto n_train = static_cast<std::size_t>(std::max(cfg.n_train, 0));
  return index < n_train ? "train-" + std::to_string(index) : "eval-" + std::to_string(index - n_train);
}

fom::Case aprbs_case(const config::PipelineConfig& cfg, std::size_t index) {
  excite::AprbsSpec spec = cfg.aprbs;
  spec.seed = excite::sub_seed(cfg.seed, index);
  Signal oven;
  try {
    oven = excite::generate_aprbs(spec, cfg.sample_interval);
  } catch (const Error& e) {
    stage_failed("excite", case_id(cfg, index), e);
  }
  fom::Case c = cfg.fom_case;
  c.boundary = config::boundary_with_oven(cfg, fom::Forcing::of(oven));
  c.t_end = spec.duration;
  c.solver.record_fields = false;
  c.solver.output_interval = cfg.sample_interval;
  return c;
}

GeneratedCase generate_case(const config::PipelineConfig& cfg, std::size_t index) {
  const std::string id = case_id(cfg, index);
  const fom::Case c = aprbs_case(cfg, index);
  GeneratedCase out;
  try {
    out.trajectory = c.run();
  } catch (const Error& e) {
    stage_failed("fom", id, e);
  }
  out.io = twin::io_from_trajectory(out.trajectory, id, cfg.sample_interval, c.t_end);
  return out;
}

std::vector<GeneratedCase> generate_cases(const config::PipelineConfig& cfg, std::size_t first, std::size_t count,
                                          unsigned threads) {
  std::vector<GeneratedCase> out(count);
  std::vector<std::exception_ptr> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = generate_case(cfg, first + i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, count));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return out;
}

Result run(const config::PipelineConfig& cfg, unsigned threads) {
  if (cfg.n_train < 1) throw ConfigError("pipeline needs n_train >= 1 (got " + std::to_string(cfg.n_train) + ")");
  if (cfg.n_eval < 0) throw ConfigError("pipeline needs n_eval >= 0");
  const auto n_train = static_cast<std::size_t>(cfg.n_train);
  const auto n_eval = static_cast<std::size_t>(cfg.n_eval);

  Result r;
  auto cases = generate_cases(cfg, 0, n_train + n_eval, threads);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    (i < n_train ? r.training : r.evaluation).cases.push_back(std::move(cases[i].io));
    r.trajectories.push_back(std::move(cases[i].trajectory));
  }

  sysid::FitConfig fc = cfg.fit;
  if (threads) fc.threads = threads;
  try {
    r.nonlinear = sysid::fit(r.training, fc);
  } catch (const Error& e) {
    stage_failed("fit", "", e);
  }
  try {
    r.linear = sysid::fit_linear(r.training, fc);
  } catch (const Error& e) {
    stage_failed("fit-linear", "", e);
  }
  r.nonlinear_eval = evaluate_named(r.nonlinear, r.evaluation, "evaluate");
  r.linear_eval = evaluate_named(r.linear, r.evaluation, "evaluate-linear");
  return r;
}

std::string report_text(const Result& r) {
  std::string out = "training cases:";
  for (const auto& c : r.training.cases) out += " " + c.id;
  out += "\nevaluation cases:";
  for (const auto& c : r.evaluation.cases) out += " " + c.id;
  out += "\n\n";
  describe_model(out, "nonlinear", r.nonlinear);
  describe_model(out, "linear", r.linear);
  if (r.evaluation.cases.empty()) return out + "\nno evaluation cases\n";
  out += "\nfree-run evaluation\n";
  for (std::size_t i = 0; i < r.evaluation.cases.size(); ++i) {
    out += "  " + r.evaluation.cases[i].id + "\n";
    out += "    nonlinear: " + metrics::to_text(r.nonlinear_eval.cases[i]) + "\n";
    out += "    linear:    " + metrics::to_text(r.linear_eval.cases[i]) + "\n";
  }
  out += "\nmean RMSE: nonlinear " + fmt(r.nonlinear_eval.mean_rmse) + " K, linear " +
         fmt(r.linear_eval.mean_rmse) + " K\n";
  out += "worst case: nonlinear RMSE " + fmt(r.nonlinear_eval.worst.rmse) + " K, max |error| " +
         fmt(r.nonlinear_eval.worst.max_abs_error) + " K\n";
  out += "linear / nonlinear mean RMSE ratio: " + fmt(r.linear_eval.mean_rmse / r.nonlinear_eval.mean_rmse) + "\n";
  return out;
}

std::string report_csv(const Result& r) {
  std::string out = "model,case," + metrics::csv_header() + "\n";
  auto rows = [&](const char* name, const sysid::Evaluation& ev) {
    for (std::size_t i = 0; i < ev.cases.size(); ++i)
      out += std::string(name) + "," + r.evaluation.cases[i].id + "," + metrics::to_csv_row(ev.cases[i]) + "\n";
    if (!ev.cases.empty()) out += std::string(name) + ",mean,," + fmt(ev.mean_rmse) + ",,\n";
  };
  rows("nonlinear", r.nonlinear_eval);
  rows("linear", r.linear_eval);
  if (!r.evaluation.cases.empty())
    out += "linear_over_nonlinear,mean_rmse_ratio,," + fmt(r.linear_eval.mean_rmse / r.nonlinear_eval.mean_rmse) +
           ",,\n";
  return out;
}

void write_outputs(const Result& r, const std::string& dir) {
  const fs::path root(dir);
  twin::export_model(r.nonlinear, (root / "nonlinear.dtrom").string());
  twin::export_model(r.linear, (root / "linear.dtrom").string());
  io::write_atomic((root / "report.txt").string(), report_text(r));
  io::write_atomic((root / "report.csv").string(), report_csv(r));

  std::string sel = "stage,term,validation_rmse_K\n";
  const auto& m = r.nonlinear.meta;
  const std::size_t n_linear = m.selected_terms.size() + 1 - m.selection_trace.size();
  for (std::size_t s = 0; s < m.selection_trace.size(); ++s)
    sel += std::to_string(s) + "," + (s == 0 ? "linear" : m.selected_terms[n_linear + s - 1]) + "," +
           io::format_double(m.selection_trace[s]) + "\n";
  io::write_atomic((root / "selection.csv").string(), sel);

  json train = json::array(), eval = json::array();
  std::size_t t = 0;
  for (const auto* set : {&r.training, &r.evaluation}) {
    for (const auto& c : set->cases) {
      const std::string probes = "cases/" + c.id + "_probes.csv";
      const std::string input = "cases/" + c.id + "_input.csv";
      io::write_atomic((root / probes).string(), io::probes_csv(r.trajectories.at(t++)));
      io::write_atomic((root / input).string(), io::signal_csv(c.input));
      (set == &r.training ? train : eval).push_back({{"id", c.id}, {"probes", probes}, {"input", input}});
    }
  }
  io::write_atomic((root / "train_manifest.json").string(), train.dump(2) + "\n");
  io::write_atomic((root / "eval_manifest.json").string(), eval.dump(2) + "\n");
}

sysid::TrainingSet read_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const IoError& e) {
    throw ConfigError(std::string("manifest not found: ") + e.what());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": not valid JSON: " + e.what());
  }
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": manifest must be a non-empty array");
  const fs::path base = fs::path(path).parent_path();
  sysid::TrainingSet set;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = path + "[" + std::to_string(i) + "]";
    bool ok = e.is_object();
    for (const char* k : {"id", "probes", "input"}) {
      if (!ok || !e.contains(k) || !e.at(k).is_string()) {
        errors.push_back(where + "." + k + ": missing or not a string");
        ok = false;
      }
    }
    if (!ok) continue;
    const auto probes = io::read_probes_csv((base / e.at("probes").get<std::string>()).string());
    const auto input = io::read_signal_csv((base / e.at("input").get<std::string>()).string());
    std::vector<double> u;
    for (double t : probes.time) u.push_back(input.sample_clamped(t));
    try {
      set.cases.push_back({e.at("id").get<std::string>(), Signal(probes.time, u),
                           Signal(probes.time, probes.core_temperature)});
    } catch (const DomainError& err) {
      errors.push_back(where + ": " + err.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = path + ": " + std::to_string(errors.size()) + " manifest error(s)";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  try {
    set.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return set;
}

}  // namespace dtwin::pipeline
