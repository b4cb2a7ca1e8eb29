#include "pmrf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pmrf/errors.hpp"
#include "pmrf/rng.hpp"

namespace pmrf {

namespace {

struct Line {
  std::string text;
  int number;  // 1-based in the file
};

[[noreturn]] void parse_fail(const std::filesystem::path& file, int line,
                             const std::string& what) {
  throw InputError(file.string() + ":" + std::to_string(line) + ": " + what);
}

// Content lines only: blank lines and '#' comments skipped.
std::vector<Line> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  std::vector<Line> out;
  std::string s;
  int number = 0;
  while (std::getline(in, s)) {
    ++number;
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos || s[b] == '#') continue;
    std::size_t e = s.find_last_not_of(" \t\r");
    out.push_back({s.substr(b, e - b + 1), number});
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

long parse_int(const std::string& tok, const std::filesystem::path& file, int line) {
  long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    parse_fail(file, line, "expected integer, got '" + tok + "'");
  return v;
}

double parse_double(const std::string& tok, const std::filesystem::path& file, int line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    parse_fail(file, line, "expected number, got '" + tok + "'");
  }
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir, bool infer_n) {
  const auto meta_path = dir / "meta.txt";
  const auto edges_path = dir / "edges.txt";
  const auto labels_path = dir / "labels.txt";

  long n = -1, C = -1;
  std::string feature_mode = "none";
  for (const auto& ln : read_lines(meta_path)) {
    const auto eq = ln.text.find('=');
    if (eq == std::string::npos) parse_fail(meta_path, ln.number, "expected key=value");
    const std::string key = ln.text.substr(0, eq);
    const std::string val = ln.text.substr(eq + 1);
    if (key == "n")
      n = parse_int(val, meta_path, ln.number);
    else if (key == "C")
      C = parse_int(val, meta_path, ln.number);
    else if (key == "features") {
      if (val != "none" && val != "sparse" && val != "dense")
        parse_fail(meta_path, ln.number, "features must be none|sparse|dense");
      feature_mode = val;
    } else
      parse_fail(meta_path, ln.number, "unknown key '" + key + "'");
  }
  if (C < 2) throw InputError(meta_path.string() + ": C must be declared and >= 2");
  if (n < 0 && !infer_n)
    throw InputError(meta_path.string() + ": n must be declared (or pass infer mode)");

  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_lines;
  long max_id = -1;
  for (const auto& ln : read_lines(edges_path)) {
    const auto toks = split_ws(ln.text);
    if (toks.size() != 2) parse_fail(edges_path, ln.number, "expected 'u v'");
    const long u = parse_int(toks[0], edges_path, ln.number);
    const long v = parse_int(toks[1], edges_path, ln.number);
    if (u < 0 || v < 0) parse_fail(edges_path, ln.number, "negative node id");
    max_id = std::max({max_id, u, v});
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    edge_lines.push_back(ln.number);
  }
  if (infer_n) n = max_id + 1;
  if (max_id >= n) {
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].first >= n || edges[i].second >= n)
        parse_fail(edges_path, edge_lines[i],
                   "node id exceeds n=" + std::to_string(n));
  }

  Dataset ds;
  ds.name = dir.filename().string();
  ds.C = static_cast<int>(C);
  ds.graph = build_graph(edges, static_cast<int>(n));
  ds.labels.assign(n, -1);
  for (const auto& ln : read_lines(labels_path)) {
    const auto toks = split_ws(ln.text);
    if (toks.size() != 2) parse_fail(labels_path, ln.number, "expected 'node class'");
    const long v = parse_int(toks[0], labels_path, ln.number);
    const long y = parse_int(toks[1], labels_path, ln.number);
    if (v < 0 || v >= n) parse_fail(labels_path, ln.number, "node id out of range");
    if (y < 0 || y >= C)
      parse_fail(labels_path, ln.number,
                 "label " + std::to_string(y) + " outside [0, " + std::to_string(C) + ")");
    ds.labels[v] = static_cast<int>(y);
  }

  if (feature_mode != "none") {
    const auto feat_path = dir / "features.txt";
    FeatureMatrix X;
    X.n = static_cast<int>(n);
    if (feature_mode == "sparse") {
      std::vector<std::map<int, double>> rows(n);
      long max_f = -1;
      for (const auto& ln : read_lines(feat_path)) {
        const auto toks = split_ws(ln.text);
        if (toks.size() != 3)
          parse_fail(feat_path, ln.number, "expected 'node feat_idx value'");
        const long v = parse_int(toks[0], feat_path, ln.number);
        const long f = parse_int(toks[1], feat_path, ln.number);
        const double x = parse_double(toks[2], feat_path, ln.number);
        if (v < 0 || v >= n) parse_fail(feat_path, ln.number, "node id out of range");
        if (f < 0) parse_fail(feat_path, ln.number, "negative feature index");
        max_f = std::max(max_f, f);
        rows[v][static_cast<int>(f)] = x;
      }
      X.f = static_cast<int>(max_f + 1);
      X.row_ptr.assign(n + 1, 0);
      for (long v = 0; v < n; ++v) X.row_ptr[v + 1] = X.row_ptr[v] + rows[v].size();
      for (long v = 0; v < n; ++v)
        for (const auto& [f, x] : rows[v]) {
          X.idx.push_back(f);
          X.val.push_back(x);
        }
    } else {  // dense CSV, one row per node
      const auto lines = read_lines(feat_path);
      if (static_cast<long>(lines.size()) != n)
        throw InputError(feat_path.string() + ": expected " + std::to_string(n) +
                         " rows, got " + std::to_string(lines.size()));
      X.row_ptr.assign(n + 1, 0);
      std::vector<std::vector<double>> rows(n);
      long width = -1;
      for (long v = 0; v < n; ++v) {
        std::stringstream ss(lines[v].text);
        std::string cell;
        while (std::getline(ss, cell, ','))
          rows[v].push_back(parse_double(cell, feat_path, lines[v].number));
        if (width < 0) width = rows[v].size();
        if (static_cast<long>(rows[v].size()) != width)
          parse_fail(feat_path, lines[v].number, "ragged row");
      }
      X.f = static_cast<int>(width);
      for (long v = 0; v < n; ++v) {
        X.row_ptr[v + 1] = X.row_ptr[v];
        for (int f = 0; f < X.f; ++f) {
          if (rows[v][f] == 0.0) continue;  // dense input stored sparsely
          X.idx.push_back(f);
          X.val.push_back(rows[v][f]);
          ++X.row_ptr[v + 1];
        }
      }
    }
    ds.features = std::move(X);
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "meta.txt");
    out << "n=" << ds.graph.n << "\n";
    out << "C=" << ds.C << "\n";
    out << "features=" << (ds.features ? "sparse" : "none") << "\n";
  }
  {
    std::ofstream out(dir / "edges.txt");
    for (std::int64_t e = 0; e < ds.graph.m; ++e)
      out << ds.graph.edge_u[e] << " " << ds.graph.edge_v[e] << "\n";
  }
  {
    std::ofstream out(dir / "labels.txt");
    for (int v = 0; v < ds.graph.n; ++v)
      if (ds.labels[v] >= 0) out << v << " " << ds.labels[v] << "\n";
  }
  if (ds.features) {
    std::ofstream out(dir / "features.txt");
    const auto& X = *ds.features;
    for (int v = 0; v < X.n; ++v)
      for (auto i = X.row_ptr[v]; i < X.row_ptr[v + 1]; ++i)
        out << v << " " << X.idx[i] << " " << fmt17(X.val[i]) << "\n";
  }
}

Split sample_split(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed) {
  const int n = ds.graph.n;
  std::vector<char> taken(n, 0);
  if (spec.fixed_test) {
    for (int v : *spec.fixed_test) {
      if (v < 0 || v >= n) throw InputError("sample_split: fixed test node out of range");
      taken[v] = 1;
    }
  }

  std::vector<std::vector<int>> by_class(ds.C);
  for (int v = 0; v < n; ++v)
    if (ds.labels[v] >= 0 && !taken[v]) by_class[ds.labels[v]].push_back(v);

  SplitMix64 rng(seed);
  Split split;
  split.seed = seed;
  for (int c = 0; c < ds.C; ++c) {
    if (static_cast<int>(by_class[c].size()) < spec.per_class)
      throw InputError("sample_split: class " + std::to_string(c) + " has only " +
                       std::to_string(by_class[c].size()) + " available labeled nodes, " +
                       std::to_string(spec.per_class) + " requested");
    const auto picked = sample_without_replacement(by_class[c], spec.per_class, rng);
    for (int v : picked) {
      split.train.push_back(v);
      taken[v] = 1;
    }
  }

  std::vector<int> remaining;
  for (int v = 0; v < n; ++v)
    if (ds.labels[v] >= 0 && !taken[v]) remaining.push_back(v);
  if (static_cast<int>(remaining.size()) < spec.val_total)
    throw InputError("sample_split: only " + std::to_string(remaining.size()) +
                     " labeled nodes left for validation, " +
                     std::to_string(spec.val_total) + " requested");
  split.val = sample_without_replacement(remaining, spec.val_total, rng);
  for (int v : split.val) taken[v] = 1;

  if (spec.fixed_test) {
    split.test = *spec.fixed_test;
  } else {
    std::vector<int> rest;
    for (int v = 0; v < n; ++v)
      if (ds.labels[v] >= 0 && !taken[v]) rest.push_back(v);
    if (spec.test_count < 0) {
      split.test = std::move(rest);
    } else {
      if (static_cast<int>(rest.size()) < spec.test_count)
        throw InputError("sample_split: only " + std::to_string(rest.size()) +
                         " labeled nodes left for testing, " +
                         std::to_string(spec.test_count) + " requested");
      split.test = sample_without_replacement(rest, spec.test_count, rng);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Split load_split_file(const std::filesystem::path& file, int n) {
  Split s;
  for (const auto& ln : read_lines(file)) {
    const auto toks = split_ws(ln.text);
    if (toks.size() != 2) parse_fail(file, ln.number, "expected 'node split'");
    const long v = parse_int(toks[0], file, ln.number);
    if (v < 0 || v >= n) parse_fail(file, ln.number, "node id out of range");
    if (toks[1] == "train")
      s.train.push_back(static_cast<int>(v));
    else if (toks[1] == "val")
      s.val.push_back(static_cast<int>(v));
    else if (toks[1] == "test")
      s.test.push_back(static_cast<int>(v));
    else
      parse_fail(file, ln.number, "split must be train|val|test");
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Dataset gen_sbm(int n, int C, double p_in, double p_out, std::uint64_t seed) {
  if (!(0.0 <= p_out && p_out <= p_in && p_in <= 1.0))
    throw InputError("gen_sbm: need 0 <= p_out <= p_in <= 1");
  if (n < C || C < 2) throw InputError("gen_sbm: need n >= C >= 2");

  // contiguous near-equal blocks
  std::vector<int> label(n);
  for (int v = 0; v < n; ++v)
    label[v] = std::min(C - 1, static_cast<int>(static_cast<std::int64_t>(v) * C / n));

  SplitMix64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const double p = label[u] == label[v] ? p_in : p_out;
      if (rng.uniform01() < p) edges.emplace_back(u, v);
    }

  Dataset ds;
  ds.C = C;
  ds.name = "sbm_n" + std::to_string(n) + "_C" + std::to_string(C);
  ds.graph = build_graph(edges, n);
  ds.labels = std::move(label);
  return ds;
}

}  // namespace pmrf
