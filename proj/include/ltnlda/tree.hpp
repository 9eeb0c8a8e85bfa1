#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltnlda/common.hpp"

namespace ltnlda {

// One step on a root-to-leaf path: which internal node was crossed (by its
// position in the internal-node ordering) and whether the walk went left.
struct PathStep {
  int internal_index;
  bool left;
};

struct TreeNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  int leaf_index = -1;      // position among leaves; -1 for internal nodes
  int internal_index = -1;  // position in internal ordering; -1 for leaves
  int leaf_count = 0;       // number of descendant leaves (1 for a leaf)
  std::string label;        // taxon label; empty for internal nodes

  bool is_leaf() const { return left < 0; }
};

// Rooted binary tree over V taxa. Nodes are stored in a flat table; the
// internal ordering is a depth-first preorder (left child first), which fixes
// the indexing of log-odds vectors. Immutable after construction.
class PhyloTree {
 public:
  static PhyloTree from_parts(std::vector<TreeNode> nodes, int root);

  int num_leaves() const { return static_cast<int>(leaf_ids_.size()); }     // V
  int num_internal() const { return static_cast<int>(internal_ids_.size()); }  // p = V-1
  int num_nodes() const { return static_cast<int>(nodes_.size()); }         // 2V-1
  int root() const { return root_; }

  const TreeNode& node(int id) const { return nodes_[id]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  int leaf_id(int leaf_index) const { return leaf_ids_[leaf_index]; }
  int internal_id(int internal_index) const { return internal_ids_[internal_index]; }
  const std::vector<std::string>& leaf_labels() const { return leaf_labels_; }

  // Root-to-leaf walk; first element crosses the root. Throws DataError on a
  // bad index.
  const std::vector<PathStep>& leaf_path(int leaf_index) const;
  // Node ids visited on the same walk, ending at the leaf itself.
  const std::vector<int>& leaf_path_nodes(int leaf_index) const;

  int max_leaf_depth() const;

 private:
  std::vector<TreeNode> nodes_;
  int root_ = -1;
  std::vector<int> leaf_ids_;                       // leaf_index -> node id
  std::vector<int> internal_ids_;                   // internal_index -> node id
  std::vector<std::string> leaf_labels_;
  std::vector<std::vector<PathStep>> leaf_paths_;
  std::vector<std::vector<int>> leaf_path_nodes_;
};

// Upper/lower split of the internal nodes at leaf-count threshold C: an
// internal node i is "upper" iff its descendant-leaf count is >= C.
struct NodePartition {
  int threshold = 1;
  std::vector<bool> upper;  // indexed by internal_index

  int upper_count() const {
    int n = 0;
    for (bool u : upper) n += u;
    return n;
  }
};

NodePartition partition_nodes(const PhyloTree& tree, int threshold);

// Newick input. Leaves are numbered by first appearance; branch lengths and
// internal labels are accepted and discarded; non-binary nodes and duplicate
// leaf labels are rejected.
PhyloTree parse_newick(const std::string& text);
PhyloTree read_newick_file(const std::string& path);

std::string to_newick(const PhyloTree& tree);
// node_id,parent_id,left_id,right_id,label,leaf_desc_count
std::string node_table_csv(const PhyloTree& tree);

// Tree-based log-odds transform of a composition. beta has V entries summing
// to one; the result has one entry per internal node, in internal order.
// Subtrees carrying zero mass are an error unless zero_mass_floor > 0, in
// which case every entry is floored at that value and the composition is
// renormalized before the transform.
std::vector<double> beta_to_psi(const PhyloTree& tree, const std::vector<double>& beta,
                                double zero_mass_floor = 0.0);

// Inverse transform: top-down product of left/right split probabilities.
std::vector<double> psi_to_beta(const PhyloTree& tree, const std::vector<double>& psi);

// Per-node totals of counts sitting at the leaves; indexed by node id
// (size 2V-1). Internal entries are the sums over their children.
std::vector<long long> decompose_counts(const PhyloTree& tree,
                                        const std::vector<long long>& leaf_counts);

}  // namespace ltnlda
