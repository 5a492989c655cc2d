#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/encoder.hpp"
#include "structcomp/partition.hpp"
#include "structcomp/sparse_graph.hpp"
#include "structcomp/training.hpp"

namespace structcomp {

namespace fs = std::filesystem;

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

/// SCMF binary ("SCMF", u32 version 1, u64 rows, u64 cols, little-endian f64
/// row-major), or CSV when the extension is .csv.
DenseMatrix read_matrix(const fs::path& path);
void write_matrix(const fs::path& path, const DenseMatrix& m);

/// One edge per line, two whitespace-separated 0-based ids; '#' starts a comment line.
std::vector<std::pair<NodeId, NodeId>> read_edge_list(const fs::path& path);
/// n defaults to 1 + the largest id in the file.
SparseGraph read_graph(const fs::path& path, std::optional<Index> n = std::nullopt);
void write_edge_list(const fs::path& path, const SparseGraph& g);

std::vector<int> read_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<int>& labels);

Partition read_partition(const fs::path& path);
void write_partition(const fs::path& path, const Partition& p);

struct ParamsMeta {
  std::uint64_t seed = 0;
  std::string loss;
};

/// SCMP binary ("SCMP", u32 version 1, u8 arch, u8 σ₁, u8 σ₂, u32 layer
/// count, then per layer u64 rows, u64 cols and the f64 values), plus a JSON
/// sidecar at path + ".json".
void write_params(const fs::path& path, const EncoderParams& params, const ParamsMeta& meta = {});
EncoderParams read_params(const fs::path& path);

using Cell = std::variant<std::int64_t, double, std::string>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

/// JSON array of objects (keys in column order) or CSV, by extension.
/// Doubles are written with 17 significant digits.
void write_results(const fs::path& path, const ResultTable& table);

std::string sha256_file(const fs::path& path);
std::string sha256_hex(const std::string& data);

struct RunManifest {
  std::string command;
  std::string config_json;                      // resolved configuration
  std::map<std::string, std::string> inputs;    // path -> sha256
  std::map<std::string, std::string> outputs;   // path -> sha256
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;

  /// sha256 over everything except the timestamps; equal for reproduced runs.
  std::string digest() const;
  std::string to_json() const;
};

/// TrainConfig as a JSON object with the same field names. Parsing starts
/// from `base` and rejects unknown keys.
std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& text, const TrainConfig& base = {});

std::string tool_version();
std::string utc_timestamp();

}  // namespace structcomp
