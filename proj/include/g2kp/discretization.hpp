#ifndef G2KP_DISCRETIZATION_HPP
#define G2KP_DISCRETIZATION_HPP

#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "g2kp/instance.hpp"

namespace g2kp {

enum class Orientation : std::uint8_t { Vertical = 0, Horizontal = 1 };

inline char orientation_tag(Orientation o) {
  return o == Orientation::Vertical ? 'v' : 'h';
}

/// Piece indices fitting a plate of the given dimensions.
struct FitSet {
  int length = 0;
  int width = 0;
  std::vector<int> pieces;  // ascending piece indices
};

FitSet fitting_pieces(const Instance& instance, int length, int width);

/// Normal cut positions of one orientation for one perpendicular class:
/// the demand-bounded subset sums of piece lengths (vertical) or widths
/// (horizontal), restricted to pieces whose perpendicular dimension is at
/// most `class_bound`, in the open interval (0, dim_limit). Neither 0 nor
/// dim_limit is ever a member.
struct NormalPositions {
  Orientation orientation = Orientation::Vertical;
  int class_bound = 0;
  int dim_limit = 0;
  std::vector<int> positions;  // sorted ascending

  bool contains(int q) const;
};

NormalPositions normal_positions(const Instance& instance, Orientation orientation,
                                 int class_bound, int dim_limit);

/// Largest position not exceeding d. Returns 0 when no position fits,
/// which callers treat as "the plate is waste in this dimension".
int normalize_dim(const NormalPositions& positions, int d);

/// Memoized per-class position tables for one instance. Vertical tables
/// are keyed by plate width and range over (0, L); horizontal tables are
/// keyed by plate length and range over (0, W). Tables are built on first
/// request (internally synchronized) and immutable afterwards.
class DiscretizationTables {
 public:
  explicit DiscretizationTables(const Instance& instance) : instance_(instance) {}

  const NormalPositions& lengths(int width_class) const;
  const NormalPositions& widths(int length_class) const;

  /// Normalized length of a plate (length, width_class) per the vertical
  /// class table; 0 when no piece fits.
  int normalized_length(int length, int width_class) const;
  int normalized_width(int width, int length_class) const;

  const Instance& instance() const { return instance_; }

 private:
  const Instance& instance_;
  mutable std::mutex mutex_;
  mutable std::map<int, NormalPositions> vertical_;
  mutable std::map<int, NormalPositions> horizontal_;
};

}  // namespace g2kp

#endif  // G2KP_DISCRETIZATION_HPP
