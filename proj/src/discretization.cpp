#include "g2kp/discretization.hpp"

#include <algorithm>

namespace g2kp {

FitSet fitting_pieces(const Instance& instance, int length, int width) {
  FitSet fit;
  fit.length = length;
  fit.width = width;
  for (std::size_t i = 0; i < instance.pieces.size(); ++i) {
    const Piece& p = instance.pieces[i];
    if (p.length <= length && p.width <= width) fit.pieces.push_back(static_cast<int>(i));
  }
  return fit;
}

bool NormalPositions::contains(int q) const {
  return std::binary_search(positions.begin(), positions.end(), q);
}

NormalPositions normal_positions(const Instance& instance, Orientation orientation,
                                 int class_bound, int dim_limit) {
  NormalPositions out;
  out.orientation = orientation;
  out.class_bound = class_bound;
  out.dim_limit = dim_limit;
  if (dim_limit <= 1) return out;

  // Demand-bounded subset sums via the min-copies trick: used[v] is the
  // number of copies of the current piece needed to reach v from a sum
  // reachable with earlier pieces.
  std::vector<char> reach(static_cast<std::size_t>(dim_limit), 0);
  std::vector<int> used(static_cast<std::size_t>(dim_limit), 0);
  reach[0] = 1;
  for (const Piece& p : instance.pieces) {
    int perp = orientation == Orientation::Vertical ? p.width : p.length;
    if (perp > class_bound) continue;
    int size = orientation == Orientation::Vertical ? p.length : p.width;
    if (size >= dim_limit) continue;
    for (int v = 0; v < dim_limit; ++v) {
      if (reach[v]) {
        used[v] = 0;
      } else if (v >= size && reach[v - size] && used[v - size] < p.demand) {
        reach[v] = 1;
        used[v] = used[v - size] + 1;
      }
    }
  }
  for (int v = 1; v < dim_limit; ++v)
    if (reach[v]) out.positions.push_back(v);
  return out;
}

int normalize_dim(const NormalPositions& positions, int d) {
  const auto& ps = positions.positions;
  auto it = std::upper_bound(ps.begin(), ps.end(), d);
  if (it == ps.begin()) return 0;
  return *std::prev(it);
}

// Class tables span (0, L] / (0, W]: normalization of a child dimension d
// needs sums up to and including d (Proposition-1 sets belong to a strictly
// larger plate), while cut positions are filtered to q < d at the use site.
const NormalPositions& DiscretizationTables::lengths(int width_class) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = vertical_.find(width_class);
  if (it == vertical_.end()) {
    it = vertical_
             .emplace(width_class, normal_positions(instance_, Orientation::Vertical, width_class,
                                                    instance_.plate_length + 1))
             .first;
  }
  return it->second;
}

const NormalPositions& DiscretizationTables::widths(int length_class) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = horizontal_.find(length_class);
  if (it == horizontal_.end()) {
    it = horizontal_
             .emplace(length_class, normal_positions(instance_, Orientation::Horizontal,
                                                     length_class, instance_.plate_width + 1))
             .first;
  }
  return it->second;
}

int DiscretizationTables::normalized_length(int length, int width_class) const {
  return normalize_dim(lengths(width_class), length);
}

int DiscretizationTables::normalized_width(int width, int length_class) const {
  return normalize_dim(widths(length_class), width);
}

}  // namespace g2kp
