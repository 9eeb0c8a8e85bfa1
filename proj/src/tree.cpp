#include "ltnlda/tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ltnlda {

namespace {

struct NewickParser {
  const std::string& text;
  std::size_t pos = 0;
  std::vector<TreeNode> nodes;

  explicit NewickParser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw DataError("newick: " + msg + " at offset " + std::to_string(at));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool is_label_char(char c) const {
    return c != '(' && c != ')' && c != ',' && c != ':' && c != ';' &&
           !std::isspace(static_cast<unsigned char>(c));
  }

  std::string parse_label() {
    std::string label;
    while (pos < text.size() && is_label_char(text[pos])) label += text[pos++];
    return label;
  }

  void skip_branch_length() {
    if (pos < text.size() && text[pos] == ':') {
      ++pos;
      const std::size_t start = pos;
      while (pos < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
              text[pos] == '-' || text[pos] == '+' || text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
      }
      if (pos == start) fail("expected branch length after ':'", pos);
    }
  }

  // Returns (node id, first leaf label in the clade).
  std::pair<int, std::string> parse_node() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input", pos);

    if (text[pos] == '(') {
      const std::size_t clade_start = pos;
      ++pos;
      std::vector<std::pair<int, std::string>> children;
      while (true) {
        children.push_back(parse_node());
        skip_ws();
        if (pos >= text.size()) fail("unterminated '('", clade_start);
        if (text[pos] == ',') {
          ++pos;
          continue;
        }
        if (text[pos] == ')') {
          ++pos;
          break;
        }
        fail("expected ',' or ')'", pos);
      }
      skip_ws();
      parse_label();  // internal label, discarded
      skip_branch_length();
      if (children.size() != 2) {
        fail("non-binary node with " + std::to_string(children.size()) +
                 " children (clade containing '" + children.front().second + "')",
             clade_start);
      }
      const int id = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes[id].left = children[0].first;
      nodes[id].right = children[1].first;
      nodes[children[0].first].parent = id;
      nodes[children[1].first].parent = id;
      return {id, children[0].second};
    }

    const std::size_t label_start = pos;
    const std::string label = parse_label();
    if (label.empty()) fail("expected leaf label", label_start);
    skip_branch_length();
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].label = label;
    nodes[id].leaf_count = 1;
    return {id, label};
  }

  int parse_tree() {
    skip_ws();
    auto [root, first] = parse_node();
    skip_ws();
    if (pos >= text.size() || text[pos] != ';') fail("expected terminating ';'", pos);
    ++pos;
    skip_ws();
    if (pos != text.size()) fail("trailing content after ';'", pos);
    return root;
  }
};

void assign_order(const std::vector<TreeNode>& nodes, int id, std::vector<int>& internal_ids,
                  std::vector<int>& leaf_ids) {
  if (nodes[id].is_leaf()) {
    leaf_ids.push_back(id);
    return;
  }
  internal_ids.push_back(id);
  assign_order(nodes, nodes[id].left, internal_ids, leaf_ids);
  assign_order(nodes, nodes[id].right, internal_ids, leaf_ids);
}

int fill_leaf_counts(std::vector<TreeNode>& nodes, int id) {
  if (nodes[id].is_leaf()) {
    nodes[id].leaf_count = 1;
    return 1;
  }
  const int n = fill_leaf_counts(nodes, nodes[id].left) + fill_leaf_counts(nodes, nodes[id].right);
  nodes[id].leaf_count = n;
  return n;
}

void write_newick(const PhyloTree& tree, int id, std::string& out) {
  const TreeNode& n = tree.node(id);
  if (n.is_leaf()) {
    out += n.label;
    return;
  }
  out += '(';
  write_newick(tree, n.left, out);
  out += ',';
  write_newick(tree, n.right, out);
  out += ')';
}

}  // namespace

PhyloTree PhyloTree::from_parts(std::vector<TreeNode> nodes, int root) {
  PhyloTree t;
  t.nodes_ = std::move(nodes);
  t.root_ = root;
  fill_leaf_counts(t.nodes_, root);

  // Preorder pass fixes the internal ordering and the leaf numbering at once.
  // Leaf numbering by appearance matches the parse order for Newick input.
  std::vector<int> internal_ids, leaf_ids;
  assign_order(t.nodes_, root, internal_ids, leaf_ids);
  t.internal_ids_ = std::move(internal_ids);
  t.leaf_ids_ = std::move(leaf_ids);
  for (std::size_t i = 0; i < t.internal_ids_.size(); ++i)
    t.nodes_[t.internal_ids_[i]].internal_index = static_cast<int>(i);
  for (std::size_t i = 0; i < t.leaf_ids_.size(); ++i) {
    t.nodes_[t.leaf_ids_[i]].leaf_index = static_cast<int>(i);
    t.leaf_labels_.push_back(t.nodes_[t.leaf_ids_[i]].label);
  }

  const int V = t.num_leaves();
  if (t.num_internal() != V - 1)
    throw DataError("tree: internal node count " + std::to_string(t.num_internal()) +
                    " != V-1 with V=" + std::to_string(V));

  t.leaf_paths_.resize(V);
  t.leaf_path_nodes_.resize(V);
  for (int v = 0; v < V; ++v) {
    std::vector<int> up;
    for (int id = t.leaf_ids_[v]; id >= 0; id = t.nodes_[id].parent) up.push_back(id);
    std::reverse(up.begin(), up.end());
    t.leaf_path_nodes_[v] = up;
    for (std::size_t s = 0; s + 1 < up.size(); ++s) {
      const TreeNode& a = t.nodes_[up[s]];
      t.leaf_paths_[v].push_back({a.internal_index, a.left == up[s + 1]});
    }
  }
  return t;
}

const std::vector<PathStep>& PhyloTree::leaf_path(int leaf_index) const {
  if (leaf_index < 0 || leaf_index >= num_leaves())
    throw DataError("leaf index " + std::to_string(leaf_index) + " out of range [0," +
                    std::to_string(num_leaves()) + ")");
  return leaf_paths_[leaf_index];
}

const std::vector<int>& PhyloTree::leaf_path_nodes(int leaf_index) const {
  if (leaf_index < 0 || leaf_index >= num_leaves())
    throw DataError("leaf index " + std::to_string(leaf_index) + " out of range [0," +
                    std::to_string(num_leaves()) + ")");
  return leaf_path_nodes_[leaf_index];
}

int PhyloTree::max_leaf_depth() const {
  std::size_t depth = 0;
  for (const auto& p : leaf_paths_) depth = std::max(depth, p.size());
  return static_cast<int>(depth);
}

NodePartition partition_nodes(const PhyloTree& tree, int threshold) {
  if (threshold < 1) throw ConfigError("partition threshold must be >= 1");
  NodePartition part;
  part.threshold = threshold;
  part.upper.resize(tree.num_internal());
  for (int i = 0; i < tree.num_internal(); ++i)
    part.upper[i] = tree.node(tree.internal_id(i)).leaf_count >= threshold;
  return part;
}

PhyloTree parse_newick(const std::string& text) {
  NewickParser parser(text);
  const int root = parser.parse_tree();
  if (parser.nodes[root].is_leaf()) throw DataError("newick: tree must have at least two leaves");

  std::unordered_map<std::string, int> seen;
  for (const auto& n : parser.nodes) {
    if (n.is_leaf() && ++seen[n.label] > 1)
      throw DataError("newick: duplicate leaf label '" + n.label + "'");
  }
  return PhyloTree::from_parts(std::move(parser.nodes), root);
}

PhyloTree read_newick_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tree file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_newick(ss.str());
}

std::string to_newick(const PhyloTree& tree) {
  std::string out;
  write_newick(tree, tree.root(), out);
  out += ';';
  return out;
}

std::string node_table_csv(const PhyloTree& tree) {
  std::string out = "node_id,parent_id,left_id,right_id,label,leaf_desc_count\n";
  for (int id = 0; id < tree.num_nodes(); ++id) {
    const TreeNode& n = tree.node(id);
    auto opt = [](int x) { return x < 0 ? std::string() : std::to_string(x); };
    out += std::to_string(id) + ',' + opt(n.parent) + ',' + opt(n.left) + ',' + opt(n.right) +
           ',' + n.label + ',' + std::to_string(n.leaf_count) + '\n';
  }
  return out;
}

std::vector<double> beta_to_psi(const PhyloTree& tree, const std::vector<double>& beta,
                                double zero_mass_floor) {
  const int V = tree.num_leaves();
  if (static_cast<int>(beta.size()) != V)
    throw DataError("beta has " + std::to_string(beta.size()) + " entries, tree has " +
                    std::to_string(V) + " leaves");

  std::vector<double> b = beta;
  if (zero_mass_floor > 0.0) {
    double total = 0.0;
    for (double& x : b) {
      x = std::max(x, zero_mass_floor);
      total += x;
    }
    for (double& x : b) x /= total;
  }

  // Subtree masses bottom-up; internal ids are in preorder, so walking them
  // backwards settles children before their parents.
  std::vector<double> mass(tree.num_nodes(), 0.0);
  for (int v = 0; v < V; ++v) mass[tree.leaf_id(v)] = b[v];
  for (int i = tree.num_internal() - 1; i >= 0; --i) {
    const int id = tree.internal_id(i);
    mass[id] = mass[tree.node(id).left] + mass[tree.node(id).right];
  }

  std::vector<double> psi(tree.num_internal());
  for (int i = 0; i < tree.num_internal(); ++i) {
    const int id = tree.internal_id(i);
    if (mass[id] <= 0.0)
      throw DataError("zero mass in subtree at internal node " + std::to_string(i) +
                      "; supply a zero-mass floor to transform anyway");
    const double theta = mass[tree.node(id).left] / mass[id];
    if (theta <= 0.0 || theta >= 1.0)
      throw DataError("degenerate split probability at internal node " + std::to_string(i) +
                      "; supply a zero-mass floor to transform anyway");
    psi[i] = logit(theta);
  }
  return psi;
}

std::vector<double> psi_to_beta(const PhyloTree& tree, const std::vector<double>& psi) {
  if (static_cast<int>(psi.size()) != tree.num_internal())
    throw DataError("psi has " + std::to_string(psi.size()) + " entries, tree has " +
                    std::to_string(tree.num_internal()) + " internal nodes");
  std::vector<double> mass(tree.num_nodes(), 0.0);
  mass[tree.root()] = 1.0;
  // Internal ids are in preorder, so every parent is settled before its
  // children are expanded.
  for (int i = 0; i < tree.num_internal(); ++i) {
    const int id = tree.internal_id(i);
    const double theta = expit(psi[i]);
    mass[tree.node(id).left] = mass[id] * theta;
    mass[tree.node(id).right] = mass[id] * (1.0 - theta);
  }
  std::vector<double> beta(tree.num_leaves());
  for (int v = 0; v < tree.num_leaves(); ++v) beta[v] = mass[tree.leaf_id(v)];
  return beta;
}

std::vector<long long> decompose_counts(const PhyloTree& tree,
                                        const std::vector<long long>& leaf_counts) {
  if (static_cast<int>(leaf_counts.size()) != tree.num_leaves())
    throw DataError("leaf_counts size mismatch");
  std::vector<long long> y(tree.num_nodes(), 0);
  for (int v = 0; v < tree.num_leaves(); ++v) {
    if (leaf_counts[v] < 0) throw DataError("negative leaf count");
    y[tree.leaf_id(v)] = leaf_counts[v];
  }
  for (int i = tree.num_internal() - 1; i >= 0; --i) {
    const int id = tree.internal_id(i);
    y[id] = y[tree.node(id).left] + y[tree.node(id).right];
  }
  return y;
}

}  // namespace ltnlda
