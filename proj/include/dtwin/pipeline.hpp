#pragma once

// FOM -> training data -> ROM flow: APRBS cases from one global seed,
// concurrent full-order runs, nonlinear and linear fits, evaluation.

#include <string>
#include <vector>

#include "dtwin/config.hpp"
#include "dtwin/errors.hpp"
#include "dtwin/sysid.hpp"

namespace dtwin::pipeline {

/// A pipeline stage failed. The original error is nested
/// (std::rethrow_if_nested) so callers can classify it.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string case_id, const std::string& what)
      : Error("stage '" + stage + "'" + (case_id.empty() ? "" : " case '" + case_id + "'") + ": " + what),
        stage_(std::move(stage)),
        case_id_(std::move(case_id)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& case_id() const noexcept { return case_id_; }

 private:
  std::string stage_;
  std::string case_id_;
};

/// Case `index` uses excite::sub_seed(cfg.seed, index). Ids are
/// "train-<i>" for index < n_train and "eval-<i>" afterwards.
std::string case_id(const config::PipelineConfig& cfg, std::size_t index);

/// FOM case of pipeline case `index`: the configured case driven by its
/// APRBS oven signal over the APRBS duration, probes at the sample interval.
fom::Case aprbs_case(const config::PipelineConfig& cfg, std::size_t index);

struct GeneratedCase {
  sysid::IoCase io;           // oven temperature -> core temperature at the sample interval
  fom::Trajectory trajectory; // probes only
};

/// APRBS excitation, FOM run and core-temperature extraction for one case.
GeneratedCase generate_case(const config::PipelineConfig& cfg, std::size_t index);

/// Cases [first, first + count), computed concurrently, returned in index order.
std::vector<GeneratedCase> generate_cases(const config::PipelineConfig& cfg, std::size_t first,
                                          std::size_t count, unsigned threads = 0);

struct Result {
  sysid::TrainingSet training;
  sysid::TrainingSet evaluation;
  std::vector<fom::Trajectory> trajectories;  // training cases, then evaluation cases
  sysid::NarxModel nonlinear;
  sysid::NarxModel linear;
  sysid::Evaluation nonlinear_eval;  // empty when there are no eval cases
  sysid::Evaluation linear_eval;
};

/// Throws ConfigError when n_train < 1; StageError for stage failures.
Result run(const config::PipelineConfig& cfg, unsigned threads = 0);

std::string report_text(const Result& r);
/// One row per (model, case) plus a summary row holding the linear /
/// nonlinear mean-RMSE ratio.
std::string report_csv(const Result& r);

/// Writes nonlinear.dtrom, linear.dtrom, report.txt, report.csv,
/// selection.csv, and per case cases/<id>_probes.csv and cases/<id>_input.csv
/// listed in manifest.json ([{id, probes, input}], paths relative to `dir`).
void write_outputs(const Result& r, const std::string& dir);

/// Reads a manifest of {id, probes, input} entries (paths relative to the
/// manifest) into co-sampled cases: input is the oven signal interpolated
/// at the probe times, output the core temperature. Throws ConfigError.
sysid::TrainingSet read_manifest(const std::string& path);

}  // namespace dtwin::pipeline
