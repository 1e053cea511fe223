// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "compact/boost.hpp"
#include "compact/cascade.hpp"
#include "compact/synth.hpp"

namespace compact::harness {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for unreadable or unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> test;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> pool;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> scores;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> log;

  GeneratorConfig generator = default_cost_ladder();
  std::size_t test_positives = 0;  ///< synth: extra held-out split when non-zero
  std::size_t test_negatives = 0;
  std::size_t pool_negatives = 0;  ///< synth: negatives-only bootstrap pool when non-zero

  TrainConfig train;
  std::vector<double> eta_grid;

  /// Throws ConfigError when two path fields name the same file.
  void validate_paths() const;
  nlohmann::json to_json() const;
};

/// Keys absent from `doc` keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

ExternalScores parse_scores_csv(std::string_view text);
std::string scores_to_csv(const Dataset& data, const std::vector<double>& scores);

std::string train_log_csv(const std::vector<RoundLog>& log);
/// stage, family, base_cost, alpha, threshold per stage.
std::string stage_configuration_csv(const Cascade& cascade);
/// First stage index using each family, in manifest order; nullopt if never used.
std::vector<std::optional<std::size_t>> first_use(const Cascade& cascade);

struct SweepRow {
  double eta = 0.0;
  double train_error = 0.0;
  double test_error = 0.0;
  double negative_omega = 0.0;  ///< mean total_omega over test negatives
  double positive_omega = 0.0;
  std::vector<std::optional<std::size_t>> first_use;
  double seconds = 0.0;
  bool ok = true;
  std::string message;
};

struct SweepReport {
  std::vector<std::string> families;
  std::vector<SweepRow> rows;  ///< ascending eta

  std::string to_csv() const;
};

struct SweepModel {
  double eta;
  Cascade cascade;
};

/// Trains one model per grid value (sorted ascending) on shared data and seed.
/// A training failure stops the sweep; the failed row is flagged and returned.
SweepReport run_sweep(const Dataset& train, const Dataset& test, const TrainConfig& base,
                      std::vector<double> grid, std::vector<SweepModel>* models = nullptr,
                      const Dataset* pool = nullptr);

int cmd_synth(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_embed(const RunConfig& config, std::ostream& out);

/// Runs `fn` and maps escaping exceptions to exit codes, reporting on `err`.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err);

int exit_code_for(std::exception_ptr error, std::ostream& err);

template <class Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
}

}  // namespace compact::harness
