#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hetgnn/graph.hpp"
#include "hetgnn/rng.hpp"
#include "vertex_gen.hpp"

namespace hetgnn {

namespace {

namespace fs = std::filesystem;

constexpr char kMagic[8] = {'H', 'G', 'N', 'N', 'G', 'R', 'A', 'F'};
constexpr std::uint32_t kBinaryVersion = 1;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto h = s.find('#');
  return trim(h == std::string_view::npos ? s : s.substr(0, h));
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
  const auto* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && p == end;
}

fs::path sidecar(const fs::path& edge_path, const char* ext) {
  fs::path p = edge_path;
  p.replace_extension(ext);
  return p;
}

DenseMatrix read_features(const fs::path& path, VertexId n) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path.string());
  std::vector<Real> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = strip_comment(line);
    if (body.empty()) continue;
    const auto toks = tokens(body);
    if (cols == 0) cols = toks.size();
    if (toks.size() != cols) throw ParseError(path.string(), lineno, "ragged feature row");
    for (auto t : toks) {
      Real x = 0;
      if (!parse_number(t, x)) {
        throw ParseError(path.string(), lineno, "bad real '" + std::string(t) + "'");
      }
      values.push_back(x);
    }
    ++rows;
  }
  if (rows != n) {
    throw GraphError(path.string() + ": expected " + std::to_string(n) + " feature rows, got " +
                     std::to_string(rows));
  }
  return DenseMatrix(rows, cols, std::move(values));
}

std::vector<std::int32_t> read_labels(const fs::path& path, VertexId n) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path.string());
  std::vector<std::int32_t> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = strip_comment(line);
    if (body.empty()) continue;
    std::int32_t c = 0;
    if (!parse_number(body, c) || c < 0) {
      throw ParseError(path.string(), lineno, "bad class id '" + std::string(body) + "'");
    }
    labels.push_back(c);
  }
  if (labels.size() != n) {
    throw GraphError(path.string() + ": expected " + std::to_string(n) + " labels");
  }
  return labels;
}

template <class T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw GraphError("binary graph: truncated file");
  return v;
}

template <class T>
std::vector<T> read_vec(std::ifstream& in, std::size_t n) {
  std::vector<T> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!in) throw GraphError("binary graph: truncated file");
  return v;
}

}  // namespace

Dataset load_edge_list(const fs::path& path, std::size_t feat_dim, std::uint64_t seed,
                       const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path.string());
  std::vector<std::pair<VertexId, VertexId>> edges;
  VertexId max_id = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = strip_comment(line);
    if (body.empty()) continue;
    const auto toks = tokens(body);
    VertexId s = 0;
    VertexId d = 0;
    if (toks.size() != 2 || !parse_number(toks[0], s) || !parse_number(toks[1], d)) {
      throw ParseError(path.string(), lineno, "expected 'src dst', got '" + std::string(body) + "'");
    }
    edges.emplace_back(s, d);
    max_id = std::max({max_id, s, d});
  }
  if (edges.empty()) throw GraphError(path.string() + ": empty graph");

  Dataset ds;
  ds.name = path.stem().string();
  const VertexId n = max_id + 1;
  ds.graph = build_graph(n, edges, opts.build);

  const auto feat_path = sidecar(path, ".feat");
  const auto label_path = sidecar(path, ".labels");
  if (fs::exists(label_path)) {
    ds.data.labels = read_labels(label_path, n);
    std::int32_t mx = 0;
    for (auto c : ds.data.labels) mx = std::max(mx, c);
    ds.data.num_classes = mx + 1;
  } else {
    ds.data.num_classes = opts.num_classes;
    ds.data.labels = detail::random_labels(n, opts.num_classes, derive_seed(seed, {0x1AB}));
  }
  if (fs::exists(feat_path)) {
    ds.data.features = read_features(feat_path, n);
    if (feat_dim != 0 && ds.data.features.cols() != feat_dim) {
      throw GraphError(feat_path.string() + ": feature width " +
                       std::to_string(ds.data.features.cols()) + " != requested " +
                       std::to_string(feat_dim));
    }
  } else {
    if (feat_dim == 0) throw GraphError("load_edge_list: feat_dim must be > 0");
    ds.data.features = detail::generate_features(ds.data.labels, ds.data.num_classes, feat_dim,
                                                 0.0, 1.0, derive_seed(seed, {0xFEA7}));
  }
  assign_split_masks(ds.data, n, seed);
  ds.data.validate(n);
  return ds;
}

void write_edge_list(const fs::path& path, const Dataset& ds) {
  {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write " + path.string());
    const auto& g = ds.graph;
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      for (VertexId u : g.in_neighbors(v)) out << u << ' ' << v << '\n';
    }
  }
  {
    std::ofstream out(sidecar(path, ".feat"));
    out << std::setprecision(17);
    const auto& f = ds.data.features;
    for (std::size_t r = 0; r < f.rows(); ++r) {
      for (std::size_t c = 0; c < f.cols(); ++c) out << (c ? " " : "") << f(r, c);
      out << '\n';
    }
  }
  {
    std::ofstream out(sidecar(path, ".labels"));
    for (auto c : ds.data.labels) out << c << '\n';
  }
}

void save_binary(const fs::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kBinaryVersion);
  const std::uint64_t n = ds.graph.num_vertices();
  const std::uint64_t m = ds.graph.num_edges();
  const std::uint64_t f = ds.data.feat_dim();
  write_pod(out, n);
  write_pod(out, m);
  write_pod(out, f);
  write_pod(out, ds.data.num_classes);
  const std::uint32_t name_len = static_cast<std::uint32_t>(ds.name.size());
  write_pod(out, name_len);
  out.write(ds.name.data(), name_len);
  write_vec(out, ds.graph.offsets());
  write_vec(out, ds.graph.targets());
  write_vec(out, ds.data.features.data());
  write_vec(out, ds.data.labels);
  write_vec(out, ds.data.train_mask);
  write_vec(out, ds.data.val_mask);
  write_vec(out, ds.data.test_mask);
}

Dataset load_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw GraphError(path.string() + ": not a binary graph cache (bad magic)");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kBinaryVersion) {
    throw GraphError(path.string() + ": unsupported cache version " + std::to_string(version));
  }
  const auto n = read_pod<std::uint64_t>(in);
  const auto m = read_pod<std::uint64_t>(in);
  const auto f = read_pod<std::uint64_t>(in);
  Dataset ds;
  ds.data.num_classes = read_pod<std::int32_t>(in);
  const auto name_len = read_pod<std::uint32_t>(in);
  ds.name.resize(name_len);
  in.read(ds.name.data(), name_len);
  auto offsets = read_vec<EdgeIndex>(in, n + 1);
  auto targets = read_vec<VertexId>(in, m);
  ds.graph = Graph(std::move(offsets), std::move(targets));
  ds.data.features = DenseMatrix(n, f, read_vec<Real>(in, n * f));
  ds.data.labels = read_vec<std::int32_t>(in, n);
  ds.data.train_mask = read_vec<std::uint8_t>(in, n);
  ds.data.val_mask = read_vec<std::uint8_t>(in, n);
  ds.data.test_mask = read_vec<std::uint8_t>(in, n);
  ds.data.validate(static_cast<VertexId>(n));
  return ds;
}

}  // namespace hetgnn
