#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pmrf/graph.hpp"
#include "pmrf/priors.hpp"

namespace pmrf {

struct Dataset {
  SparseGraph graph;
  std::optional<FeatureMatrix> features;
  std::vector<int> labels;  // size n, -1 = unlabeled
  int C = 0;
  std::string name;
};

// Directory layout: meta.txt (n=, C=, features=none|sparse|dense), edges.txt,
// labels.txt, features.txt when declared. '#' comments and blank lines are
// ignored everywhere. Parse errors carry file and line. With infer_n the node
// count is max id + 1 instead of the meta value.
Dataset load_dataset(const std::filesystem::path& dir, bool infer_n = false);

// Canonical text form: edges sorted (u < v, lexicographic), labels by node
// id, floats at 17 significant digits. load followed by write is a byte-level
// fixed point.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct Split {
  std::vector<int> train, val, test;  // sorted, pairwise disjoint
  std::uint64_t seed = 0;
};

struct SplitSpec {
  int per_class = 20;
  int val_total = 500;
  int test_count = -1;  // -1 = all remaining labeled nodes
  std::optional<std::vector<int>> fixed_test;
};

// Paper protocol: per-class uniform train sample, then val from the remaining
// labeled nodes, then the fixed test set (or a sample of the rest).
// Deterministic given seed.
Split sample_split(const Dataset& ds, const SplitSpec& spec, std::uint64_t seed);

// `node split` lines with split in {train, val, test}.
Split load_split_file(const std::filesystem::path& file, int n);

// Planted-partition generator: equal-size contiguous communities, within
// probability p_in, across p_out, labels = community ids, no features.
Dataset gen_sbm(int n, int C, double p_in, double p_out, std::uint64_t seed);

}  // namespace pmrf
