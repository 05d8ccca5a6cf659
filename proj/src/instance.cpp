#include "g2kp/instance.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace g2kp {

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

// Reads the next content line (skipping blank and '#' lines); false on EOF.
bool next_content_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    return true;
  }
  return false;
}

std::vector<long long> parse_ints(const std::string& line, int line_no, std::size_t expected) {
  std::istringstream ss(line);
  std::vector<long long> out;
  long long v = 0;
  while (ss >> v) out.push_back(v);
  std::string rest;
  if (!ss.eof()) {
    ss.clear();
    ss >> rest;
  }
  if (!rest.empty() && rest[0] != '#')
    throw ParseError(line_no, "malformed token '" + rest + "'");
  if (out.size() != expected)
    throw ParseError(line_no, "expected " + std::to_string(expected) + " integers, got " +
                                  std::to_string(out.size()));
  return out;
}

void require_positive(long long v, const char* what, int line_no) {
  if (v <= 0)
    throw ParseError(line_no, std::string(what) + " must be positive, got " + std::to_string(v));
}

}  // namespace

Instance parse_instance(std::istream& in) {
  Instance instance;
  std::string line;
  int line_no = 0;

  if (!next_content_line(in, line, line_no)) throw ParseError(line_no + 1, "missing plate line");
  auto plate = parse_ints(line, line_no, 2);
  require_positive(plate[0], "plate length", line_no);
  require_positive(plate[1], "plate width", line_no);
  instance.plate_length = static_cast<int>(plate[0]);
  instance.plate_width = static_cast<int>(plate[1]);

  if (!next_content_line(in, line, line_no)) throw ParseError(line_no + 1, "missing piece count");
  auto count = parse_ints(line, line_no, 1);
  require_positive(count[0], "piece count", line_no);

  for (long long i = 0; i < count[0]; ++i) {
    if (!next_content_line(in, line, line_no))
      throw ParseError(line_no + 1, "missing piece " + std::to_string(i + 1));
    auto f = parse_ints(line, line_no, 4);
    require_positive(f[0], "piece length", line_no);
    require_positive(f[1], "piece width", line_no);
    require_positive(f[2], "piece profit", line_no);
    require_positive(f[3], "piece demand", line_no);
    if (f[0] > instance.plate_length)
      throw ParseError(line_no, "piece length " + std::to_string(f[0]) + " exceeds plate length " +
                                    std::to_string(instance.plate_length));
    if (f[1] > instance.plate_width)
      throw ParseError(line_no, "piece width " + std::to_string(f[1]) + " exceeds plate width " +
                                    std::to_string(instance.plate_width));
    instance.pieces.push_back(Piece{static_cast<int>(f[0]), static_cast<int>(f[1]), f[2],
                                    static_cast<int>(f[3])});
  }
  return instance;
}

Instance parse_instance_text(const std::string& text) {
  std::istringstream ss(text);
  return parse_instance(ss);
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return parse_instance(in);
}

std::string render_instance(const Instance& instance) {
  std::ostringstream out;
  out << instance.plate_length << ' ' << instance.plate_width << '\n';
  out << instance.pieces.size() << '\n';
  for (const Piece& p : instance.pieces)
    out << p.length << ' ' << p.width << ' ' << p.profit << ' ' << p.demand << '\n';
  return out.str();
}

void validate_instance(const Instance& instance) {
  if (instance.plate_length < 1 || instance.plate_width < 1)
    throw std::invalid_argument("plate dimensions must be positive");
  if (instance.pieces.empty()) throw std::invalid_argument("instance needs at least one piece");
  for (std::size_t i = 0; i < instance.pieces.size(); ++i) {
    const Piece& p = instance.pieces[i];
    if (p.length < 1 || p.width < 1 || p.profit < 1 || p.demand < 1)
      throw std::invalid_argument("piece " + std::to_string(i) + " has a non-positive field");
    if (p.length > instance.plate_length || p.width > instance.plate_width)
      throw std::invalid_argument("piece " + std::to_string(i) + " does not fit the plate");
  }
}

namespace {

// Bounded draw with a fixed reduction so results do not depend on the
// standard library's distribution implementation.
long long draw(std::mt19937_64& rng, long long lo, long long hi) {
  return lo + static_cast<long long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace

Instance generate_random_instance(std::uint64_t seed, const GeneratorBounds& b) {
  auto bad = [](const std::string& what) { throw std::invalid_argument(what); };
  if (b.min_plate_length < 1 || b.min_plate_length > b.max_plate_length ||
      b.min_plate_width < 1 || b.min_plate_width > b.max_plate_width)
    bad("plate bounds empty or non-positive");
  if (b.min_pieces < 1 || b.min_pieces > b.max_pieces) bad("piece-count bounds empty");
  if (b.min_profit < 1 || b.min_profit > b.max_profit) bad("profit bounds empty");
  if (b.min_demand < 1 || b.min_demand > b.max_demand) bad("demand bounds empty");
  if (b.min_piece_dim < 1) bad("piece dimension bound non-positive");

  std::mt19937_64 rng(seed);
  Instance instance;
  instance.plate_length = static_cast<int>(draw(rng, b.min_plate_length, b.max_plate_length));
  instance.plate_width = static_cast<int>(draw(rng, b.min_plate_width, b.max_plate_width));

  int max_l = b.max_piece_length > 0 ? std::min(b.max_piece_length, instance.plate_length)
                                     : instance.plate_length;
  int max_w = b.max_piece_width > 0 ? std::min(b.max_piece_width, instance.plate_width)
                                    : instance.plate_width;
  if (b.min_piece_dim > max_l || b.min_piece_dim > max_w)
    bad("bounds admit no valid piece for the drawn plate");

  long long n = draw(rng, b.min_pieces, b.max_pieces);
  for (long long i = 0; i < n; ++i) {
    Piece p;
    p.length = static_cast<int>(draw(rng, b.min_piece_dim, max_l));
    p.width = static_cast<int>(draw(rng, b.min_piece_dim, max_w));
    p.profit = b.unweighted ? p.area() : draw(rng, b.min_profit, b.max_profit);
    p.demand = static_cast<int>(draw(rng, b.min_demand, b.max_demand));
    instance.pieces.push_back(p);
  }
  validate_instance(instance);
  return instance;
}

}  // namespace g2kp
