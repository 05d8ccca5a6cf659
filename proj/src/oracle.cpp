#include "g2kp/oracle.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

namespace g2kp {

namespace {

// Demand vectors are packed into a mixed-radix key (radix u_i + 1 per
// piece); plate dims index the leading digits.
struct OracleContext {
  const Instance& instance;
  std::vector<std::uint64_t> radix_step;  // per piece
  std::uint64_t plate_step = 0;

  explicit OracleContext(const Instance& inst) : instance(inst) {
    radix_step.resize(inst.pieces.size());
    std::uint64_t step = 1;
    for (std::size_t i = 0; i < inst.pieces.size(); ++i) {
      radix_step[i] = step;
      step *= static_cast<std::uint64_t>(inst.pieces[i].demand) + 1;
    }
    plate_step = step;
  }

  std::uint64_t key(int l, int w, const std::vector<int>& demand) const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < demand.size(); ++i)
      k += radix_step[i] * static_cast<std::uint64_t>(demand[i]);
    k += plate_step * static_cast<std::uint64_t>(
                          l * (instance.plate_width + 1) + w);
    return k;
  }
};

struct Choice {
  enum class Kind : std::uint8_t { Waste, Sold, CutV, CutH };
  Kind kind = Kind::Waste;
  int piece = -1;
  int position = 0;
  std::vector<int> first_demand;  // demand sub-vector granted to the first child
};

// Zeroes out demand of pieces that cannot fit the plate; such demand can
// never be consumed below this node, so masking dedups memo states.
std::vector<int> masked_demand(const Instance& inst, int l, int w, const std::vector<int>& d) {
  std::vector<int> m(d);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (inst.pieces[i].length > l || inst.pieces[i].width > w) m[i] = 0;
  return m;
}

// Advances `sub` to the next componentwise sub-vector of `limit`
// (odometer order); false after the last one.
bool next_subvector(std::vector<int>& sub, const std::vector<int>& limit) {
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (sub[i] < limit[i]) {
      ++sub[i];
      for (std::size_t k = 0; k < i; ++k) sub[k] = 0;
      return true;
    }
  }
  return false;
}

class MemoSolver {
 public:
  explicit MemoSolver(const Instance& inst) : ctx_(inst) {}

  long long solve(int l, int w, const std::vector<int>& demand) {
    std::vector<int> d = masked_demand(ctx_.instance, l, w, demand);
    std::uint64_t key = ctx_.key(l, w, d);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    const Instance& inst = ctx_.instance;
    long long best = 0;
    Choice choice;  // Waste by default

    for (std::size_t i = 0; i < inst.pieces.size(); ++i) {
      const Piece& p = inst.pieces[i];
      if (d[i] > 0 && p.length == l && p.width == w && p.profit > best) {
        best = p.profit;
        choice = Choice{Choice::Kind::Sold, static_cast<int>(i), 0, {}};
      }
    }

    // Vertical cuts: positions 1..l-1 (q and l-q are symmetric, so only
    // q <= l/2 is explored). Demand is split between the two children.
    std::vector<int> sub(d.size(), 0);
    for (int q = 1; 2 * q <= l; ++q) {
      std::fill(sub.begin(), sub.end(), 0);
      do {
        std::vector<int> rest(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) rest[i] = d[i] - sub[i];
        long long v = solve(q, w, sub) + solve(l - q, w, rest);
        if (v > best) {
          best = v;
          choice = Choice{Choice::Kind::CutV, -1, q, sub};
        }
      } while (next_subvector(sub, d));
    }
    for (int q = 1; 2 * q <= w; ++q) {
      std::fill(sub.begin(), sub.end(), 0);
      do {
        std::vector<int> rest(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) rest[i] = d[i] - sub[i];
        long long v = solve(l, q, sub) + solve(l, w - q, rest);
        if (v > best) {
          best = v;
          choice = Choice{Choice::Kind::CutH, -1, q, sub};
        }
      } while (next_subvector(sub, d));
    }

    memo_.emplace(key, best);
    choice_.emplace(key, std::move(choice));
    return best;
  }

  std::unique_ptr<OracleNode> witness(int l, int w, const std::vector<int>& demand) {
    std::vector<int> d = masked_demand(ctx_.instance, l, w, demand);
    std::uint64_t key = ctx_.key(l, w, d);
    const Choice& c = choice_.at(key);
    auto node = std::make_unique<OracleNode>();
    node->length = l;
    node->width = w;
    switch (c.kind) {
      case Choice::Kind::Waste:
        node->kind = OracleNode::Kind::Waste;
        break;
      case Choice::Kind::Sold:
        node->kind = OracleNode::Kind::Sold;
        node->piece = c.piece;
        break;
      case Choice::Kind::CutV: {
        node->kind = OracleNode::Kind::CutVertical;
        node->position = c.position;
        std::vector<int> rest(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) rest[i] = d[i] - c.first_demand[i];
        node->first = witness(c.position, w, c.first_demand);
        node->second = witness(l - c.position, w, rest);
        break;
      }
      case Choice::Kind::CutH: {
        node->kind = OracleNode::Kind::CutHorizontal;
        node->position = c.position;
        std::vector<int> rest(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) rest[i] = d[i] - c.first_demand[i];
        node->first = witness(l, c.position, c.first_demand);
        node->second = witness(l, w - c.position, rest);
        break;
      }
    }
    return node;
  }

 private:
  OracleContext ctx_;
  std::unordered_map<std::uint64_t, long long> memo_;
  std::unordered_map<std::uint64_t, Choice> choice_;
};

// The oracle accepts any plate/piece list with positive dimensions, even
// ones the instance module would reject (e.g. no piece fitting at all).
void check_limits(const Instance& inst, const OracleLimits& limits) {
  if (inst.plate_length < 1 || inst.plate_width < 1)
    throw std::invalid_argument("oracle: plate dimensions must be positive");
  for (const Piece& p : inst.pieces)
    if (p.length < 1 || p.width < 1 || p.demand < 0)
      throw std::invalid_argument("oracle: invalid piece");
  long long area = static_cast<long long>(inst.plate_length) * inst.plate_width;
  if (area > limits.max_plate_area)
    throw std::invalid_argument("oracle: plate area " + std::to_string(area) +
                                " exceeds limit " + std::to_string(limits.max_plate_area));
  long long total = 0;
  for (const Piece& p : inst.pieces) total += p.demand;
  if (total > limits.max_total_demand)
    throw std::invalid_argument("oracle: total demand " + std::to_string(total) +
                                " exceeds limit " + std::to_string(limits.max_total_demand));
}

long long unmemoized(const Instance& inst, int l, int w, std::vector<int>& d) {
  long long best = 0;
  for (std::size_t i = 0; i < inst.pieces.size(); ++i) {
    const Piece& p = inst.pieces[i];
    if (d[i] > 0 && p.length == l && p.width == w) best = std::max(best, p.profit);
  }
  std::vector<int> masked = masked_demand(inst, l, w, d);
  std::vector<int> sub(d.size(), 0);
  for (int q = 1; 2 * q <= l; ++q) {
    std::fill(sub.begin(), sub.end(), 0);
    do {
      std::vector<int> rest(masked.size());
      for (std::size_t i = 0; i < masked.size(); ++i) rest[i] = masked[i] - sub[i];
      long long v = unmemoized(inst, q, w, sub) + unmemoized(inst, l - q, w, rest);
      best = std::max(best, v);
    } while (next_subvector(sub, masked));
  }
  for (int q = 1; 2 * q <= w; ++q) {
    std::fill(sub.begin(), sub.end(), 0);
    do {
      std::vector<int> rest(masked.size());
      for (std::size_t i = 0; i < masked.size(); ++i) rest[i] = masked[i] - sub[i];
      long long v = unmemoized(inst, l, q, sub) + unmemoized(inst, l, w - q, rest);
      best = std::max(best, v);
    } while (next_subvector(sub, masked));
  }
  return best;
}

}  // namespace

OracleResult optimal_value_bruteforce(const Instance& instance, const OracleLimits& limits) {
  check_limits(instance, limits);
  MemoSolver solver(instance);
  std::vector<int> demand;
  for (const Piece& p : instance.pieces) demand.push_back(p.demand);
  OracleResult result;
  result.value = solver.solve(instance.plate_length, instance.plate_width, demand);
  result.witness = solver.witness(instance.plate_length, instance.plate_width, demand);
  return result;
}

long long oracle_value_unmemoized(const Instance& instance, const OracleLimits& limits) {
  check_limits(instance, limits);
  std::vector<int> demand;
  for (const Piece& p : instance.pieces) demand.push_back(p.demand);
  return unmemoized(instance, instance.plate_length, instance.plate_width, demand);
}

std::vector<long long> witness_piece_counts(const Instance& instance, const OracleNode* root) {
  std::vector<long long> counts(instance.pieces.size(), 0);
  if (!root) return counts;
  std::vector<const OracleNode*> stack{root};
  while (!stack.empty()) {
    const OracleNode* n = stack.back();
    stack.pop_back();
    if (n->kind == OracleNode::Kind::Sold) counts[static_cast<std::size_t>(n->piece)] += 1;
    if (n->first) stack.push_back(n->first.get());
    if (n->second) stack.push_back(n->second.get());
  }
  return counts;
}

long long witness_profit(const Instance& instance, const OracleNode* root) {
  auto counts = witness_piece_counts(instance, root);
  long long total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) total += counts[i] * instance.pieces[i].profit;
  return total;
}

}  // namespace g2kp
