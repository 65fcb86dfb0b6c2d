#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lupts/rng.hpp"
#include "lupts/synth.hpp"
#include "lupts/types.hpp"

namespace lupts {

/// Expected layout of a wide-format trajectory CSV: columns x{t}_{j} for
/// t in 1..T, j in 1..d, plus one outcome column; an optional leading "id"
/// column is ignored. Cells equal to missing_marker count as missing
/// (state cells only).
struct CsvSchema {
  int horizon = 2;  // T
  int dim = 1;      // d
  std::string outcome_column = "y";
  std::string missing_marker = "";
};

/// Parsed rows with per-cell missingness, prior to any preprocessing.
struct TrajectoryTable {
  std::vector<std::string> column_names;  // T*d state names then outcome name
  int horizon = 0;
  int dim = 0;
  std::vector<std::vector<std::optional<double>>> state_cells;  // rows x (T*d)
  std::vector<double> outcomes;

  Index rows() const { return static_cast<Index>(outcomes.size()); }
};

/// Training-split statistics for standardization and imputation. Columns
/// are indexed t*d + j (0-based). A feature whose column has zero variance
/// at any time point is dropped from every time block so the state width
/// stays uniform.
struct PreprocessStats {
  std::vector<double> mean;          // per state column
  std::vector<double> std;           // population std per state column
  std::vector<Index> imputed;        // training missing-cell count per column
  std::vector<int> dropped_features; // 0-based feature indices removed everywhere
  double outcome_mean = 0.0;
  double outcome_std = 1.0;
  int horizon = 0;
  int dim = 0;
};

TrajectoryTable load_trajectory_csv(const std::string& path, const CsvSchema& schema);

/// Column means/stds over non-missing training cells only.
PreprocessStats fit_preprocess(const TrajectoryTable& train);

/// Imputes missing cells with the training mean, standardizes every
/// retained column with the training statistics, removes dropped features
/// consistently from every time block, and standardizes the outcome.
TrajectoryDataset apply_preprocess(const TrajectoryTable& table, const PreprocessStats& stats);

struct SplitFractions {
  double train = 0.8;
  double test = 0.2;
};

/// Seed-deterministic disjoint exhaustive row partition.
std::pair<TrajectoryTable, TrajectoryTable> split_rows(const TrajectoryTable& table,
                                                       const SplitFractions& fractions,
                                                       RngStream& rng);

/// k distinct indices from [0, population), deterministic per stream.
std::vector<Index> sample_without_replacement(Index population, Index k, RngStream& rng);

/// Selects a subset of rows (used for training-size sweeps).
TrajectoryTable take_rows(const TrajectoryTable& table, const std::vector<Index>& indices);

/// Lossless conversions for complete (no-missing) data.
TrajectoryTable table_from_dataset(const TrajectoryDataset& data);
TrajectoryDataset dataset_from_table(const TrajectoryTable& table);

nlohmann::json schema_to_json(const CsvSchema& schema);
CsvSchema schema_from_json(const nlohmann::json& j);

}  // namespace lupts
