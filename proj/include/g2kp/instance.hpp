#ifndef G2KP_INSTANCE_HPP
#define G2KP_INSTANCE_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace g2kp {

/// A rectangular piece type: dimensions, profit per copy sold, and the
/// maximum number of copies that may be sold.
struct Piece {
  int length = 0;
  int width = 0;
  long long profit = 0;
  int demand = 0;

  long long area() const { return static_cast<long long>(length) * width; }

  friend bool operator==(const Piece&, const Piece&) = default;
};

/// A problem instance: the original plate plus the ordered piece list.
/// Piece indices are stable (0-based position in `pieces`).
struct Instance {
  int plate_length = 0;  // L
  int plate_width = 0;   // W
  std::vector<Piece> pieces;

  friend bool operator==(const Instance&, const Instance&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Canonical text format, ASCII with LF line endings:
//   line 1: `L W`
//   line 2: `n`
//   lines 3..n+2: `l w p u`
// Lines starting with '#' are ignored. Parse errors carry the 1-based
// line number of the offending line.
Instance parse_instance(std::istream& in);
Instance parse_instance_text(const std::string& text);
Instance load_instance_file(const std::string& path);
std::string render_instance(const Instance& instance);

/// Throws std::invalid_argument when an invariant is broken (empty piece
/// list, non-positive value, piece larger than the plate).
void validate_instance(const Instance& instance);

struct GeneratorBounds {
  int min_plate_length = 5, max_plate_length = 16;
  int min_plate_width = 5, max_plate_width = 16;
  int min_pieces = 2, max_pieces = 5;
  int min_piece_dim = 1;
  int max_piece_length = 0;  // 0 means "up to the drawn plate length"
  int max_piece_width = 0;   // 0 means "up to the drawn plate width"
  long long min_profit = 1, max_profit = 25;
  int min_demand = 1, max_demand = 3;
  bool unweighted = false;  // profit forced to length * width
};

/// Deterministic instance generator: a pure function of (seed, bounds).
/// Every generated piece fits the plate. Throws std::invalid_argument on
/// bounds that admit no valid piece.
Instance generate_random_instance(std::uint64_t seed, const GeneratorBounds& bounds = {});

}  // namespace g2kp

#endif  // G2KP_INSTANCE_HPP
