#include "lupts/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace lupts {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, Index row, const std::string& column) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(raw, &consumed);
    if (consumed != raw.size()) {
      throw std::invalid_argument(raw);
    }
    return v;
  } catch (const std::exception&) {
    throw Error("parse_error", "row " + std::to_string(row + 1) + ", column '" + column +
                                   "': cannot parse '" + raw + "' as a number");
  }
}

std::string state_column_name(int t, int j) {
  return "x" + std::to_string(t + 1) + "_" + std::to_string(j + 1);
}

}  // namespace

TrajectoryTable load_trajectory_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.horizon < 2 || schema.dim < 1) {
    throw Error("invalid_argument", "schema needs horizon >= 2 and dim >= 1");
  }
  std::ifstream in(path);
  if (!in) {
    throw Error("io_error", "cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("parse_error", "'" + path + "' is empty");
  }

  const int state_columns = schema.horizon * schema.dim;
  std::vector<std::string> header = split_csv_line(line);
  for (auto& name : header) {
    name = trim(name);
  }
  // An optional leading id column is tolerated and skipped.
  std::size_t first_data = 0;
  if (header.size() == static_cast<std::size_t>(state_columns) + 2 && header.front() == "id") {
    first_data = 1;
  } else if (header.size() != static_cast<std::size_t>(state_columns) + 1) {
    throw Error("schema_mismatch",
                "expected " + std::to_string(state_columns + 1) + " columns (or +1 id), found " +
                    std::to_string(header.size()));
  }

  TrajectoryTable table;
  table.horizon = schema.horizon;
  table.dim = schema.dim;
  for (int t = 0; t < schema.horizon; ++t) {
    for (int j = 0; j < schema.dim; ++j) {
      const std::string expected = state_column_name(t, j);
      const std::string& found = header[first_data + static_cast<std::size_t>(t * schema.dim + j)];
      if (found != expected) {
        throw Error("schema_mismatch",
                    "header column '" + found + "' where '" + expected + "' was expected");
      }
      table.column_names.push_back(expected);
    }
  }
  if (header.back() != schema.outcome_column) {
    throw Error("schema_mismatch", "outcome column '" + schema.outcome_column +
                                       "' not found in last position (saw '" + header.back() +
                                       "')");
  }
  table.column_names.push_back(schema.outcome_column);

  Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error("parse_error", "row " + std::to_string(row + 1) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header.size()));
    }
    std::vector<std::optional<double>> cells;
    cells.reserve(static_cast<std::size_t>(state_columns));
    for (int c = 0; c < state_columns; ++c) {
      const std::string raw = trim(fields[first_data + static_cast<std::size_t>(c)]);
      if (raw == schema.missing_marker) {
        cells.emplace_back(std::nullopt);
      } else {
        cells.emplace_back(parse_cell(raw, row, table.column_names[static_cast<std::size_t>(c)]));
      }
    }
    const std::string raw_outcome = trim(fields.back());
    if (raw_outcome == schema.missing_marker) {
      throw Error("parse_error", "row " + std::to_string(row + 1) +
                                     ": outcome column '" + schema.outcome_column +
                                     "' is missing; outcomes cannot be imputed");
    }
    table.outcomes.push_back(parse_cell(raw_outcome, row, schema.outcome_column));
    table.state_cells.push_back(std::move(cells));
    ++row;
  }
  return table;
}

PreprocessStats fit_preprocess(const TrajectoryTable& train) {
  const Index m = train.rows();
  if (m < 2) {
    throw Error("invalid_argument", "preprocessing needs at least two training rows");
  }
  const int columns = train.horizon * train.dim;
  PreprocessStats stats;
  stats.horizon = train.horizon;
  stats.dim = train.dim;
  stats.mean.assign(static_cast<std::size_t>(columns), 0.0);
  stats.std.assign(static_cast<std::size_t>(columns), 0.0);
  stats.imputed.assign(static_cast<std::size_t>(columns), 0);

  std::vector<bool> feature_dropped(static_cast<std::size_t>(train.dim), false);
  for (int c = 0; c < columns; ++c) {
    double sum = 0.0;
    Index present = 0;
    for (Index r = 0; r < m; ++r) {
      const auto& cell = train.state_cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell) {
        sum += *cell;
        ++present;
      }
    }
    if (present == 0) {
      throw Error("degenerate", "column '" + train.column_names[static_cast<std::size_t>(c)] +
                                    "' has no observed training cells");
    }
    stats.imputed[static_cast<std::size_t>(c)] = m - present;
    const double mean = sum / static_cast<double>(present);
    double ssq = 0.0;
    for (Index r = 0; r < m; ++r) {
      const auto& cell = train.state_cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (cell) {
        ssq += (*cell - mean) * (*cell - mean);
      }
    }
    const double std_dev = std::sqrt(ssq / static_cast<double>(present));
    stats.mean[static_cast<std::size_t>(c)] = mean;
    stats.std[static_cast<std::size_t>(c)] = std_dev;
    if (std_dev == 0.0) {
      feature_dropped[static_cast<std::size_t>(c % train.dim)] = true;
    }
  }
  for (int j = 0; j < train.dim; ++j) {
    if (feature_dropped[static_cast<std::size_t>(j)]) {
      stats.dropped_features.push_back(j);
    }
  }

  double sum = 0.0;
  for (double y : train.outcomes) {
    sum += y;
  }
  stats.outcome_mean = sum / static_cast<double>(m);
  double ssq = 0.0;
  for (double y : train.outcomes) {
    ssq += (y - stats.outcome_mean) * (y - stats.outcome_mean);
  }
  stats.outcome_std = std::sqrt(ssq / static_cast<double>(m));
  if (stats.outcome_std == 0.0) {
    throw Error("degenerate", "outcome column is constant on the training split");
  }
  return stats;
}

TrajectoryDataset apply_preprocess(const TrajectoryTable& table, const PreprocessStats& stats) {
  if (table.horizon != stats.horizon || table.dim != stats.dim) {
    throw Error("schema_mismatch", "table shape does not match the fitted statistics");
  }
  const Index m = table.rows();
  if (m < 1) {
    throw Error("invalid_argument", "empty table");
  }

  std::vector<int> kept;
  for (int j = 0; j < table.dim; ++j) {
    if (std::find(stats.dropped_features.begin(), stats.dropped_features.end(), j) ==
        stats.dropped_features.end()) {
      kept.push_back(j);
    }
  }
  if (kept.empty()) {
    throw Error("degenerate", "all features were dropped as constant");
  }

  TrajectoryDataset data;
  data.states.assign(static_cast<std::size_t>(table.horizon),
                     Matrix(m, static_cast<Index>(kept.size())));
  for (Index r = 0; r < m; ++r) {
    for (int t = 0; t < table.horizon; ++t) {
      for (std::size_t out_j = 0; out_j < kept.size(); ++out_j) {
        const int c = t * table.dim + kept[out_j];
        const auto& cell =
            table.state_cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        // Train-mean imputation first, then train-statistics standardization;
        // an imputed cell therefore lands exactly on 0.
        const double raw = cell ? *cell : stats.mean[static_cast<std::size_t>(c)];
        data.states[static_cast<std::size_t>(t)](r, static_cast<Index>(out_j)) =
            (raw - stats.mean[static_cast<std::size_t>(c)]) /
            stats.std[static_cast<std::size_t>(c)];
      }
    }
  }
  data.outcomes.resize(m);
  for (Index r = 0; r < m; ++r) {
    data.outcomes(r) =
        (table.outcomes[static_cast<std::size_t>(r)] - stats.outcome_mean) / stats.outcome_std;
  }
  return data;
}

std::pair<TrajectoryTable, TrajectoryTable> split_rows(const TrajectoryTable& table,
                                                       const SplitFractions& fractions,
                                                       RngStream& rng) {
  if (!(fractions.train > 0.0) || !(fractions.test > 0.0) ||
      std::abs(fractions.train + fractions.test - 1.0) > 1e-12) {
    throw Error("invalid_argument", "split fractions must be positive and sum to 1");
  }
  const Index m = table.rows();
  const Index train_count = static_cast<Index>(std::llround(fractions.train * static_cast<double>(m)));
  if (train_count < 1 || train_count >= m) {
    throw Error("invalid_argument", "split would produce an empty part (m=" + std::to_string(m) +
                                        ", train=" + std::to_string(train_count) + ")");
  }
  const std::vector<Index> order = rng.shuffled_indices(m);
  std::vector<Index> train_idx(order.begin(), order.begin() + train_count);
  std::vector<Index> test_idx(order.begin() + train_count, order.end());
  return {take_rows(table, train_idx), take_rows(table, test_idx)};
}

std::vector<Index> sample_without_replacement(Index population, Index k, RngStream& rng) {
  if (k < 0 || k > population) {
    throw Error("invalid_argument", "cannot draw " + std::to_string(k) + " of " +
                                        std::to_string(population) + " rows without replacement");
  }
  std::vector<Index> order = rng.shuffled_indices(population);
  order.resize(static_cast<std::size_t>(k));
  return order;
}

TrajectoryTable take_rows(const TrajectoryTable& table, const std::vector<Index>& indices) {
  TrajectoryTable out;
  out.column_names = table.column_names;
  out.horizon = table.horizon;
  out.dim = table.dim;
  out.state_cells.reserve(indices.size());
  out.outcomes.reserve(indices.size());
  for (Index i : indices) {
    if (i < 0 || i >= table.rows()) {
      throw Error("invalid_argument", "row index out of range");
    }
    out.state_cells.push_back(table.state_cells[static_cast<std::size_t>(i)]);
    out.outcomes.push_back(table.outcomes[static_cast<std::size_t>(i)]);
  }
  return out;
}

TrajectoryTable table_from_dataset(const TrajectoryDataset& data) {
  TrajectoryTable table;
  table.horizon = data.horizon();
  table.dim = static_cast<int>(data.dim());
  for (int t = 0; t < table.horizon; ++t) {
    for (int j = 0; j < table.dim; ++j) {
      table.column_names.push_back(state_column_name(t, j));
    }
  }
  table.column_names.push_back("y");
  const Index m = data.rows();
  table.state_cells.reserve(static_cast<std::size_t>(m));
  table.outcomes.reserve(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) {
    std::vector<std::optional<double>> cells;
    cells.reserve(static_cast<std::size_t>(table.horizon * table.dim));
    for (int t = 0; t < table.horizon; ++t) {
      for (int j = 0; j < table.dim; ++j) {
        cells.emplace_back(data.states[static_cast<std::size_t>(t)](r, j));
      }
    }
    table.state_cells.push_back(std::move(cells));
    table.outcomes.push_back(data.outcomes(r));
  }
  return table;
}

TrajectoryDataset dataset_from_table(const TrajectoryTable& table) {
  const Index m = table.rows();
  if (m < 1) {
    throw Error("invalid_argument", "empty table");
  }
  TrajectoryDataset data;
  data.states.assign(static_cast<std::size_t>(table.horizon), Matrix(m, table.dim));
  data.outcomes.resize(m);
  for (Index r = 0; r < m; ++r) {
    for (int t = 0; t < table.horizon; ++t) {
      for (int j = 0; j < table.dim; ++j) {
        const auto& cell =
            table.state_cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(t * table.dim + j)];
        if (!cell) {
          throw Error("invalid_argument",
                      "row " + std::to_string(r + 1) +
                          " has missing cells; preprocess before converting");
        }
        data.states[static_cast<std::size_t>(t)](r, j) = *cell;
      }
    }
    data.outcomes(r) = table.outcomes[static_cast<std::size_t>(r)];
  }
  return data;
}

nlohmann::json schema_to_json(const CsvSchema& schema) {
  return {{"T", schema.horizon},
          {"d", schema.dim},
          {"outcome_column", schema.outcome_column},
          {"missing_marker", schema.missing_marker}};
}

CsvSchema schema_from_json(const nlohmann::json& j) {
  CsvSchema schema;
  try {
    schema.horizon = j.at("T").get<int>();
    schema.dim = j.at("d").get<int>();
    schema.outcome_column = j.value("outcome_column", std::string("y"));
    schema.missing_marker = j.value("missing_marker", std::string(""));
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("invalid schema JSON: ") + e.what());
  }
  return schema;
}

}  // namespace lupts
