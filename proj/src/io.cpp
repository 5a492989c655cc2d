#include "structcomp/io.hpp"

#include <openssl/sha.h>
#include <unistd.h>

#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "structcomp/error.hpp"

namespace structcomp {

namespace {

constexpr std::uint32_t kVersion = 1;

std::string where(const fs::path& p) { return p.string() + ": "; }

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

class Reader {
 public:
  Reader(const fs::path& path, std::string data) : path_(path), data_(std::move(data)) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    unsigned char b[sizeof(T)];
    std::memcpy(b, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }

  void magic(const char* expected) {
    need(4, "magic");
    if (data_.compare(0, 4, expected) != 0) {
      throw DataError(where(path_) + "bad magic at byte offset 0: expected \"" + expected + "\", found \"" +
                      printable(data_.substr(0, 4)) + "\"");
    }
    pos_ = 4;
  }

  void version() {
    const std::size_t at = pos_;
    const auto v = get<std::uint32_t>("version");
    if (v != kVersion) {
      throw DataError(where(path_) + "unsupported version " + std::to_string(v) + " at byte offset " +
                      std::to_string(at) + " (expected " + std::to_string(kVersion) + ")");
    }
  }

  void need(std::size_t bytes, const char* what) const {
    if (data_.size() - pos_ < bytes) {
      throw DataError(where(path_) + "truncated while reading " + what + " at byte offset " + std::to_string(pos_) +
                      ": expected at least " + std::to_string(pos_ + bytes) + " bytes, file has " +
                      std::to_string(data_.size()));
    }
  }

  void finish() const {
    if (pos_ != data_.size()) {
      throw DataError(where(path_) + "trailing data at byte offset " + std::to_string(pos_) + ": expected length " +
                      std::to_string(pos_) + ", file has " + std::to_string(data_.size()));
    }
  }

  std::size_t pos() const { return pos_; }

 private:
  static std::string printable(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
      if (c >= 32 && c < 127) {
        out += static_cast<char>(c);
      } else {
        std::ostringstream os;
        os << "\\x" << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
        out += os.str();
      }
    }
    return out;
  }

  fs::path path_;
  std::string data_;
  std::size_t pos_ = 0;
};

std::string read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(where(path) + "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_csv(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& tok, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError(where(path) + "line " + std::to_string(line) + ": cannot parse \"" + tok + "\" as a finite number");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& tok, const fs::path& path, std::size_t line) {
  Int v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(where(path) + "line " + std::to_string(line) + ": cannot parse \"" + tok + "\" as an integer");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Non-comment, non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> content_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(where(path) + "cannot open for reading");
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.emplace_back(no, std::move(t));
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw DataError(where(path) + "directory " + path.parent_path().string() + " does not exist");
  }
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(where(path) + "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError(where(path) + "write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError(where(path) + "cannot rename temporary file into place");
  }
}

std::string read_text(const fs::path& path) { return read_binary(path); }

DenseMatrix read_matrix(const fs::path& path) {
  if (is_csv(path)) {
    std::vector<double> values;
    Index rows = 0;
    Index cols = -1;
    for (const auto& [no, line] : content_lines(path)) {
      Index c = 0;
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        values.push_back(parse_double(trim(std::string_view(line).substr(start, comma - start)), path, no));
        ++c;
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (cols >= 0 && c != cols) {
        throw DataError(where(path) + "line " + std::to_string(no) + ": " + std::to_string(c) + " columns, expected " +
                        std::to_string(cols));
      }
      cols = c;
      ++rows;
    }
    return DenseMatrix(rows, std::max<Index>(cols, 0), std::move(values));
  }

  Reader r(path, read_binary(path));
  r.magic("SCMF");
  r.version();
  const auto rows = r.get<std::uint64_t>("rows");
  const auto cols = r.get<std::uint64_t>("cols");
  if (rows > (1ULL << 40) || cols > (1ULL << 40) || (cols != 0 && rows > (1ULL << 60) / cols)) {
    throw DataError(where(path) + "implausible shape " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  r.need(rows * cols * 8, "matrix data");
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = r.get<double>("matrix data");
  r.finish();
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols), std::move(values));
  if (!m.all_finite()) throw DataError(where(path) + "matrix contains non-finite values");
  return m;
}

void write_matrix(const fs::path& path, const DenseMatrix& m) {
  std::string out;
  if (is_csv(path)) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) out += ',';
        out += format_double(m(i, j));
      }
      out += '\n';
    }
  } else {
    out.reserve(24 + static_cast<std::size_t>(m.size()) * 8);
    out += "SCMF";
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (double v : m.values()) put<double>(out, v);
  }
  write_text_atomic(path, out);
}

std::vector<std::pair<NodeId, NodeId>> read_edge_list(const fs::path& path) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& [no, line] : content_lines(path)) {
    const auto toks = split_ws(line);
    if (toks.size() != 2) {
      throw DataError(where(path) + "line " + std::to_string(no) + ": expected two node ids, found " +
                      std::to_string(toks.size()) + " fields");
    }
    const auto u = parse_int<std::int64_t>(toks[0], path, no);
    const auto v = parse_int<std::int64_t>(toks[1], path, no);
    if (u < 0 || v < 0 || u > std::numeric_limits<NodeId>::max() || v > std::numeric_limits<NodeId>::max()) {
      throw DataError(where(path) + "line " + std::to_string(no) + ": node id out of range");
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

SparseGraph read_graph(const fs::path& path, std::optional<Index> n) {
  const auto edges = read_edge_list(path);
  Index count = 0;
  for (const auto& [u, v] : edges) count = std::max<Index>(count, std::max(u, v) + 1);
  if (n) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (edges[k].first >= *n || edges[k].second >= *n) {
        throw DataError(where(path) + "edge " + std::to_string(k) + " (" + std::to_string(edges[k].first) + ", " +
                        std::to_string(edges[k].second) + ") references a node >= n=" + std::to_string(*n));
      }
    }
    count = *n;
  }
  return build_graph(edges, count);
}

void write_edge_list(const fs::path& path, const SparseGraph& g) {
  std::string out = "# " + std::to_string(g.num_nodes()) + " nodes\n";
  for (const auto& [u, v] : g.edge_list()) out += std::to_string(u) + "\t" + std::to_string(v) + "\n";
  write_text_atomic(path, out);
}

std::vector<int> read_labels(const fs::path& path) {
  std::vector<int> labels;
  for (const auto& [no, line] : content_lines(path)) {
    const int v = parse_int<int>(line, path, no);
    if (v < 0) throw DataError(where(path) + "line " + std::to_string(no) + ": negative label");
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::string out;
  for (int l : labels) out += std::to_string(l) + "\n";
  write_text_atomic(path, out);
}

Partition read_partition(const fs::path& path) {
  std::vector<ClusterId> assign;
  ClusterId k = 0;
  for (const auto& [no, line] : content_lines(path)) {
    const auto c = parse_int<ClusterId>(line, path, no);
    if (c < 0) throw DataError(where(path) + "line " + std::to_string(no) + ": negative cluster id");
    assign.push_back(c);
    k = std::max(k, c + 1);
  }
  try {
    return Partition(std::move(assign), k);
  } catch (const ValidationError& e) {
    throw DataError(where(path) + e.what());
  }
}

void write_partition(const fs::path& path, const Partition& p) {
  std::string out;
  for (ClusterId c : p.assign()) out += std::to_string(c) + "\n";
  write_text_atomic(path, out);
}

void write_params(const fs::path& path, const EncoderParams& params, const ParamsMeta& meta) {
  params.validate();
  std::string out = "SCMP";
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, params.arch == Arch::linear ? 0 : 1);
  for (Activation a : params.activations) put<std::uint8_t>(out, a == Activation::relu ? 0 : 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.weights.size()));
  for (const auto& w : params.weights) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(w.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(w.cols()));
    for (double v : w.values()) put<double>(out, v);
  }
  write_text_atomic(path, out);

  nlohmann::ordered_json j;
  j["format"] = "SCMP";
  j["version"] = kVersion;
  j["arch"] = to_string(params.arch);
  j["activations"] = {to_string(params.activations[0]), to_string(params.activations[1])};
  nlohmann::ordered_json dims = nlohmann::ordered_json::array();
  for (const auto& w : params.weights) dims.push_back({w.rows(), w.cols()});
  j["dims"] = dims;
  j["seed"] = meta.seed;
  j["loss"] = meta.loss;
  j["sha256"] = sha256_hex(out);
  write_text_atomic(path.string() + ".json", j.dump(2) + "\n");
}

EncoderParams read_params(const fs::path& path) {
  Reader r(path, read_binary(path));
  r.magic("SCMP");
  r.version();
  const std::size_t arch_at = r.pos();
  const auto arch = r.get<std::uint8_t>("arch");
  if (arch > 1) throw DataError(where(path) + "unknown arch tag " + std::to_string(arch) + " at byte offset " + std::to_string(arch_at));
  EncoderParams p;
  p.arch = arch == 0 ? Arch::linear : Arch::mlp2;
  for (auto& a : p.activations) {
    const std::size_t at = r.pos();
    const auto tag = r.get<std::uint8_t>("activation");
    if (tag > 1) throw DataError(where(path) + "unknown activation tag at byte offset " + std::to_string(at));
    a = tag == 0 ? Activation::relu : Activation::identity;
  }
  const auto layers = r.get<std::uint32_t>("layer count");
  if (layers != (p.arch == Arch::linear ? 1u : 2u)) {
    throw DataError(where(path) + "layer count " + std::to_string(layers) + " does not match arch " + to_string(p.arch));
  }
  for (std::uint32_t l = 0; l < layers; ++l) {
    const auto rows = r.get<std::uint64_t>("weight rows");
    const auto cols = r.get<std::uint64_t>("weight cols");
    if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw DataError(where(path) + "implausible weight shape");
    r.need(rows * cols * 8, "weight data");
    std::vector<double> values(rows * cols);
    for (auto& v : values) v = r.get<double>("weight data");
    p.weights.emplace_back(static_cast<Index>(rows), static_cast<Index>(cols), std::move(values));
  }
  r.finish();
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw DataError(where(path) + e.what());
  }
  return p;
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw ValidationError("results: row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

void write_results(const fs::path& path, const ResultTable& table) {
  std::string out;
  if (is_csv(path)) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
    out += '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) out += format_double(v);
              else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
              else out += v;
            },
            row[c]);
      }
      out += '\n';
    }
  } else {
    // Hand-built so doubles keep 17 significant digits.
    out = "[";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      out += r ? ",\n  {" : "\n  {";
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ", ";
        out += nlohmann::json(table.columns[c]).dump() + ": ";
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) out += std::isfinite(v) ? format_double(v) : "null";
              else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
              else out += nlohmann::json(v).dump();
            },
            table.rows[r][c]);
      }
      out += "}";
    }
    out += table.rows.empty() ? "]\n" : "\n]\n";
  }
  write_text_atomic(path, out);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md);
  std::ostringstream os;
  for (unsigned char c : md) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return os.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_binary(path)); }

std::string RunManifest::digest() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = config_json;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  return sha256_hex(j.dump());
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = config_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(config_json);
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["digest"] = digest();
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j.dump(2) + "\n";
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = to_string(c.model);
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["weight_decay"] = c.weight_decay;
  j["n_clusters"] = c.n_clusters;
  j["compression_rate"] = c.compression_rate;
  j["tau"] = c.tau;
  j["lambda"] = c.lambda;
  j["alpha"] = c.alpha;
  j["drop_rate"] = c.drop_rate;
  j["K"] = c.K;
  j["num_permutations"] = c.num_permutations;
  j["hidden"] = c.hidden;
  j["embed_dim"] = c.embed_dim;
  j["arch"] = to_string(c.resolved_arch());
  j["activations"] = {to_string(c.activations[0]), to_string(c.activations[1])};
  j["weighted_laplacian"] = c.weighted_laplacian;
  j["balance_eps"] = c.balance_eps;
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  j["track_full_loss"] = c.track_full_loss;
  return j.dump(2);
}

TrainConfig config_from_json(const std::string& text, const TrainConfig& base) {
  TrainConfig c = base;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config: expected a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") c.model = model_from_string(v.get<std::string>());
      else if (key == "lr") c.lr = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "weight_decay") c.weight_decay = v.get<double>();
      else if (key == "n_clusters") c.n_clusters = v.get<Index>();
      else if (key == "compression_rate") c.compression_rate = v.get<double>();
      else if (key == "tau") c.tau = v.get<double>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "drop_rate") c.drop_rate = v.get<double>();
      else if (key == "K") c.K = v.get<int>();
      else if (key == "num_permutations") c.num_permutations = v.get<int>();
      else if (key == "hidden") c.hidden = v.get<Index>();
      else if (key == "embed_dim") c.embed_dim = v.get<Index>();
      else if (key == "arch") c.arch = arch_from_string(v.get<std::string>());
      else if (key == "activations") {
        const auto a = v.get<std::vector<std::string>>();
        if (a.size() != 2) throw DataError("config: activations needs two entries");
        c.activations = {activation_from_string(a[0]), activation_from_string(a[1])};
      }
      else if (key == "weighted_laplacian") c.weighted_laplacian = v.get<bool>();
      else if (key == "balance_eps") c.balance_eps = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "checkpoint_every") c.checkpoint_every = v.get<int>();
      else if (key == "track_full_loss") c.track_full_loss = v.get<bool>();
      else throw DataError("config: unknown field \"" + key + "\"");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string tool_version() { return "0.1.0"; }

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace structcomp
