#include "doctest.h"

#include <algorithm>
#include <random>

#include "part/partition.hpp"
#include "part/rng.hpp"

using namespace part;

namespace {

SampleSet uniform_samples(std::size_t m, std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DrawMatrix> subsets;
  for (std::size_t i = 0; i < m; ++i) {
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < x.size(); ++j) x.data()[j] = u(rng);
    subsets.emplace_back(x, static_cast<int>(i));
  }
  return SampleSet(std::move(subsets));
}

void check_tree_invariants(const TreeNode& node, const PartitionConfig& cfg,
                           const std::vector<std::size_t>& totals) {
  if (node.is_leaf()) return;
  const auto& l = node.left->block;
  const auto& r = node.right->block;
  const auto q = static_cast<std::size_t>(node.dim);
  CHECK(l.upper[q] == node.cut);
  CHECK(r.lower[q] == node.cut);
  CHECK(node.cut - node.block.lower[q] > cfg.delta_a);
  CHECK(node.block.upper[q] - node.cut > cfg.delta_a);
  for (std::size_t i = 0; i < totals.size(); ++i) {
    CHECK(node.left->counts[i] + node.right->counts[i] == node.counts[i]);
    CHECK(static_cast<double>(node.left->counts[i]) > cfg.delta_rho * totals[i]);
    CHECK(static_cast<double>(node.right->counts[i]) > cfg.delta_rho * totals[i]);
  }
  check_tree_invariants(*node.left, cfg, totals);
  check_tree_invariants(*node.right, cfg, totals);
}

}  // namespace

TEST_CASE("median cut") {
  std::vector<double> a{0.9, 0.1, 0.5};
  CHECK(median_cut(a) == 0.5);
  std::vector<double> b{4, 3, 2, 1};
  CHECK(median_cut(b) == 2);
  std::vector<double> empty;
  CHECK_THROWS_AS(median_cut(empty), Error);

  Rng rng = make_rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(10'001);
  for (auto& x : v) x = u(rng);
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const double med = median_cut(v);
  CHECK(med == sorted[5'000]);
  CHECK(std::abs(med - 0.5) < 0.02);
}

TEST_CASE("ml cut two points") {
  const auto cut = ml_cut({{0.25, 0.75}}, 0.0, 1.0, 1.0);
  CHECK(cut.cut == 0.25);
  // One point on each side of a two-point node: log(1 / (2 * 0.25)) + log(1 / (2 * 0.75)).
  CHECK(cut.score == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
  // The other-dimension volume shifts every score by -n log(volume).
  const auto wide = ml_cut({{0.25, 0.75}}, 0.0, 1.0, 2.0);
  CHECK(wide.score == doctest::Approx(std::log(4.0 / 3.0) - 2 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("ml cut tie goes to the smaller candidate") {
  // Cutting at 0.3 leaves (1 point, 0.3 wide | 2 points, 0.7 wide) and
  // cutting at 0.7 leaves the mirror image, so the two scores tie.
  const auto cut = ml_cut({{0.3, 0.7, 0.9}}, 0.0, 1.0, 1.0);
  CHECK(cut.cut == 0.3);
  // Under (l, r] membership the four-point grid is not symmetric: 0.6 splits 3 | 1.
  CHECK(ml_cut({{0.2, 0.4, 0.6, 0.8}}, 0.0, 1.0, 1.0).cut == 0.6);
}

TEST_CASE("ml cut without a valid candidate") {
  try {
    ml_cut({{0.5, 0.5, 0.5}}, 0.0, 1.0, 1.0);
    FAIL("expected NoValidCut");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoValidCut);
  }
  // Disjoint subsets cannot both be split by one cut.
  CHECK_FALSE(try_ml_cut({{0.1, 0.2}, {0.8, 0.9}}, 0.0, 1.0, 0.0, 0.0));
}

TEST_CASE("ml cut matches exhaustive search for two subsets") {
  Rng rng = make_rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> values(2, std::vector<double>(50));
    for (auto& s : values)
      for (auto& x : s) x = u(rng);
    const double log_other = 0.3;
    const auto fast = try_ml_cut(values, 0.0, 1.0, log_other, 0.0);

    std::vector<std::pair<double, double>> scored;  // (cut, score)
    for (const auto& s : values) {
      for (double c : s) {
        double score = 0.0;
        bool ok = true;
        for (const auto& t : values) {
          const double n1 = static_cast<double>(std::count_if(t.begin(), t.end(), [&](double x) { return x <= c; }));
          const double n2 = static_cast<double>(t.size()) - n1;
          if (n1 == 0 || n2 == 0) ok = false;
          const double n = n1 + n2;
          score += n1 * std::log(n1 / (n * c * std::exp(log_other))) +
                   n2 * std::log(n2 / (n * (1 - c) * std::exp(log_other)));
        }
        if (ok) scored.emplace_back(c, score);
      }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [c, sc] : scored) top = std::max(top, sc);
    double best_cut = 2.0, best_score = 0.0;
    for (const auto& [c, sc] : scored) {
      if (sc >= top - kMlTieTolerance * std::max(1.0, std::abs(top)) && c < best_cut) {
        best_cut = c;
        best_score = sc;
      }
    }
    REQUIRE(fast);
    CHECK(fast->cut == best_cut);
    CHECK(fast->score == doctest::Approx(best_score).epsilon(1e-12));
  }
}

TEST_CASE("degenerate input yields a single leaf") {
  const SampleSet s({DrawMatrix(Matrix::Constant(100, 1, 0.5))});
  PartitionConfig cfg;
  const auto tree = build_tree(s, cfg);
  CHECK(tree->is_leaf());
  CHECK(tree->counts[0] == 100);
  CHECK(block_contains(tree->block, Vector::Constant(1, 0.5)));
}

TEST_CASE("two clusters are separated at the root") {
  Rng rng = make_rng(9);
  std::normal_distribution<double> noise(0.0, 0.1);
  Matrix x(100, 1);
  for (Eigen::Index j = 0; j < 100; ++j) x(j, 0) = (j < 50 ? -5.0 : 5.0) + noise(rng);
  PartitionConfig cfg;
  cfg.delta_rho = 0.2;
  cfg.delta_a = 1e-4;
  const auto tree = build_tree(SampleSet({DrawMatrix(x)}), cfg);
  REQUIRE_FALSE(tree->is_leaf());
  CHECK(tree->cut < 0.0);
  CHECK(tree->left->block.upper[0] < 0.0);
  const auto leaves = collect_leaves(*tree);
  for (const auto& c : leaves.counts) CHECK(c[0] > 20);
}

TEST_CASE("large delta_rho allows at most one cut") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = uniform_samples(1 + seed % 3, 200, 2, seed);
    PartitionConfig cfg;
    cfg.delta_rho = 0.49;
    cfg.seed = seed;
    CHECK(tree_depth(*build_tree(s, cfg)) <= 1);
  }
}

TEST_CASE("leaves tile the root and counts recount") {
  for (auto rule : {CutRule::KD, CutRule::ML}) {
    const auto s = uniform_samples(3, 400, 2, 17);
    PartitionConfig cfg;
    cfg.rule = rule;
    cfg.delta_rho = 0.01;
    cfg.seed = 4;
    const auto tree = build_tree(s, cfg);
    check_tree_invariants(*tree, cfg, {400, 400, 400});
    const auto leaves = collect_leaves(*tree);
    double vol = 0.0;
    for (const auto& b : leaves.blocks) vol += block_volume(b);
    CHECK(vol == doctest::Approx(block_volume(tree->block)).epsilon(1e-12));

    for (std::size_t i = 0; i < s.size(); ++i) {
      std::vector<std::size_t> recount(leaves.blocks.size(), 0);
      for (std::size_t j = 0; j < s[i].rows(); ++j) {
        std::size_t hits = 0;
        for (std::size_t k = 0; k < leaves.blocks.size(); ++k) {
          if (block_contains(leaves.blocks[k], s[i].row(j).transpose())) {
            ++recount[k];
            ++hits;
            CHECK(locate_leaf(*tree, s[i].row(j).transpose()) == k);
          }
        }
        CHECK(hits == 1);
      }
      std::size_t total = 0;
      for (std::size_t k = 0; k < recount.size(); ++k) {
        CHECK(recount[k] == leaves.counts[k][i]);
        total += leaves.counts[k][i];
      }
      CHECK(total == s[i].rows());
    }
    const auto members = leaf_members(*tree, s);
    for (std::size_t k = 0; k < members.size(); ++k)
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(members[k][i].size() == leaves.counts[k][i]);
  }
}

TEST_CASE("collect leaves of small trees") {
  Matrix x(4, 1);
  x << 0.1, 0.2, 0.3, 0.9;
  PartitionConfig cfg;
  cfg.explicit_bounds = Block(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
  cfg.delta_rho = 0.3;
  const auto tree = build_tree(SampleSet({DrawMatrix(x)}), cfg);
  const auto leaves = collect_leaves(*tree);
  REQUIRE(leaves.blocks.size() == 2);
  CHECK(leaves.blocks[0].lower[0] == 0.0);
  CHECK(leaves.blocks[0].upper[0] == 0.2);
  CHECK(leaves.blocks[1].lower[0] == 0.2);
  CHECK(leaves.blocks[1].upper[0] == 1.0);

  cfg.delta_rho = 0.49;
  Matrix y(1, 1);
  y << 0.5;
  const auto single = build_tree(SampleSet({DrawMatrix(y)}), cfg);
  const auto one = collect_leaves(*single);
  REQUIRE(one.blocks.size() == 1);
  CHECK(one.blocks[0].lower[0] == 0.0);
  CHECK(one.blocks[0].upper[0] == 1.0);
}

TEST_CASE("explicit bounds must enclose the draws") {
  Matrix x(2, 1);
  x << 0.5, 1.5;
  PartitionConfig cfg;
  cfg.explicit_bounds = Block(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
  CHECK_THROWS_AS(build_tree(SampleSet({DrawMatrix(x)}), cfg), Error);
}

TEST_CASE("kd split respects the median property") {
  const auto s = uniform_samples(1, 1001, 3, 23);
  PartitionConfig cfg;
  cfg.delta_rho = 0.05;
  const auto tree = build_tree(s, cfg);
  REQUIRE_FALSE(tree->is_leaf());
  const std::size_t n = tree->counts[0];
  CHECK(std::min(tree->left->counts[0], tree->right->counts[0]) >= n / 2);
}

TEST_CASE("trees are deterministic per seed") {
  const auto s = uniform_samples(2, 300, 3, 31);
  PartitionConfig cfg;
  cfg.seed = 77;
  CHECK(tree_hash(*build_tree(s, cfg)) == tree_hash(*build_tree(s, cfg)));
  cfg.order = DimensionOrder::RoundRobin;
  const auto rr = build_tree(s, cfg);
  CHECK(rr->dim == 0);
}

TEST_CASE("invalid partition settings") {
  const auto s = uniform_samples(1, 10, 2, 1);
  PartitionConfig cfg;
  cfg.delta_rho = 0.5;
  CHECK_THROWS_AS(build_tree(s, cfg), Error);
  cfg.delta_rho = 0.1;
  cfg.delta_a_per_dim = {0.1};
  CHECK_THROWS_AS(build_tree(s, cfg), Error);
}
