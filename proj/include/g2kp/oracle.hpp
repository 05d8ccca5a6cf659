#ifndef G2KP_ORACLE_HPP
#define G2KP_ORACLE_HPP

#include <memory>
#include <vector>

#include "g2kp/instance.hpp"

namespace g2kp {

/// Guard rails for the exhaustive solver. Exceeding them raises
/// std::invalid_argument instead of silently taking hours.
struct OracleLimits {
  long long max_plate_area = 1024;
  int max_total_demand = 12;
};

struct OracleNode {
  enum class Kind { Waste, Sold, CutVertical, CutHorizontal };
  Kind kind = Kind::Waste;
  int length = 0;
  int width = 0;
  int piece = -1;    // Sold only
  int position = 0;  // cuts only
  std::unique_ptr<OracleNode> first;
  std::unique_ptr<OracleNode> second;
};

struct OracleResult {
  long long value = 0;
  std::unique_ptr<OracleNode> witness;
};

/// Exact constrained guillotine optimum by memoized recursion over
/// (plate length, plate width, remaining demand vector). Cut positions
/// range over all integers 1..dim-1, independent of any discretization,
/// so the oracle can validate the discretization itself.
OracleResult optimal_value_bruteforce(const Instance& instance, const OracleLimits& limits = {});

/// Same recursion without memoization; exponential, for cross-checks on
/// very small inputs only.
long long oracle_value_unmemoized(const Instance& instance, const OracleLimits& limits = {});

/// Copies of each piece type sold in a witness tree.
std::vector<long long> witness_piece_counts(const Instance& instance, const OracleNode* root);
long long witness_profit(const Instance& instance, const OracleNode* root);

}  // namespace g2kp

#endif  // G2KP_ORACLE_HPP
