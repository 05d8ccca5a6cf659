#ifndef G2KP_ENUMERATION_HPP
#define G2KP_ENUMERATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "g2kp/discretization.hpp"
#include "g2kp/instance.hpp"

namespace g2kp {

enum class RuleSet : std::uint8_t { Faithful, Enhanced, Restricted };
const char* rule_set_name(RuleSet rules);

struct EnumOptions {
  bool normalize = false;
  bool cut_position = false;
  bool redundant_cut = false;
};

/// Sentinel child id for "no piece fits this child"; waste children are
/// never pooled as plates.
inline constexpr int kWasteChild = -1;

// Provenance bits kept per plate, merged by union when two enumeration
// paths reach the same (length, width).
enum PlateFlags : unsigned {
  kPlateRoot = 1u << 0,
  kPlateFirstChildV = 1u << 1,
  kPlateSecondChildV = 1u << 2,
  kPlateFirstChildH = 1u << 3,
  kPlateSecondChildH = 1u << 4,
};

struct Plate {
  int id = 0;
  int length = 0;
  int width = 0;
  unsigned flags = 0;

  friend bool operator==(const Plate&, const Plate&) = default;
};

/// One cut variable: cutting `parent` at `position` with the given
/// orientation yields `first_child` (the side whose dimension equals the
/// position) and `second_child` (possibly kWasteChild).
struct Cut {
  int parent = 0;
  Orientation orientation = Orientation::Vertical;
  int position = 0;
  int first_child = kWasteChild;
  int second_child = kWasteChild;

  friend bool operator==(const Cut&, const Cut&) = default;
};

/// One extraction variable (enhanced rules): selling piece `piece`
/// directly from plate `plate`.
struct Extraction {
  int piece = 0;
  int plate = 0;

  friend bool operator==(const Extraction&, const Extraction&) = default;
};

/// One sale opportunity (faithful/restricted rules): plate dimensions
/// equal the piece dimensions, so the plate may be sold as the piece.
struct Sale {
  int piece = 0;
  int plate = 0;

  friend bool operator==(const Sale&, const Sale&) = default;
};

struct VarId {
  enum class Kind : std::uint8_t { Cut = 0, Extraction = 1, Sale = 2 };
  Kind kind = Kind::Cut;
  int index = 0;

  friend bool operator==(const VarId&, const VarId&) = default;
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

struct GraphStats {
  std::size_t n_plates = 0;
  std::size_t n_cuts = 0;
  std::size_t n_extractions = 0;
  std::size_t n_sales = 0;

  std::size_t n_variables() const { return n_cuts + n_extractions + n_sales; }
};

struct CutGraph {
  RuleSet rules = RuleSet::Enhanced;
  EnumOptions options;
  std::vector<Plate> plates;
  std::vector<Cut> cuts;
  std::vector<Extraction> extractions;
  std::vector<Sale> sales;

  // adjacency, consistent with the lists above
  std::vector<std::vector<int>> cuts_on;        // outgoing cut ids per plate
  std::vector<std::vector<int>> producers_of;   // incoming cut ids per plate
  std::vector<std::vector<int>> extractions_on; // extraction ids per plate
  std::vector<std::vector<int>> sales_on;       // sale ids per plate

  GraphStats stats() const;
  std::optional<int> find_plate(int length, int width) const;
  std::optional<int> find_cut(int plate, Orientation orientation, int position) const;
  void rebuild_adjacency();
};

/// Breadth-first closure from plate 0 under the chosen rule set.
/// Deterministic: plates expanded in id order, positions ascending,
/// vertical before horizontal; plate ids are dense and stable.
CutGraph enumerate(const Instance& instance, RuleSet rules, const EnumOptions& options = {});

/// (piece, plate) pairs where the piece fits and no piece type (the same
/// type included, demand ignored) fits alongside it.
std::vector<Extraction> enumerate_extractions(const Instance& instance,
                                              const std::vector<Plate>& plates);

/// Dimensions a raw child resolves to during enumeration: size-normalized
/// when requested, nullopt when no piece fits (the waste sentinel).
std::optional<std::pair<int, int>> resolve_child_dims(const Instance& instance,
                                                      const DiscretizationTables& tables,
                                                      bool normalize, int length, int width);

/// Optional reduction passes. Both are conservative identity passes with
/// a subset-and-optimum-preserving contract; apply_redundant_cut rejects
/// enhanced graphs, where the reduction is never applicable.
CutGraph apply_cut_position(const CutGraph& graph);
CutGraph apply_redundant_cut(const CutGraph& graph);

/// Drops the given variables, then removes everything no longer reachable
/// from plate 0, cascading until a fixpoint. Plate ids are recompacted
/// deterministically (original order preserved).
CutGraph purge(const CutGraph& graph, const std::vector<VarId>& removed_vars = {});

std::string stats_csv_header();
std::string stats_csv_row(const CutGraph& graph);

}  // namespace g2kp

#endif  // G2KP_ENUMERATION_HPP
