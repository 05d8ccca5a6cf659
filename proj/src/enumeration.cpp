#include "g2kp/enumeration.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace g2kp {

const char* rule_set_name(RuleSet rules) {
  switch (rules) {
    case RuleSet::Faithful: return "faithful";
    case RuleSet::Enhanced: return "enhanced";
    case RuleSet::Restricted: return "restricted";
  }
  return "?";
}

GraphStats CutGraph::stats() const {
  return GraphStats{plates.size(), cuts.size(), extractions.size(), sales.size()};
}

std::optional<int> CutGraph::find_plate(int length, int width) const {
  for (const Plate& p : plates)
    if (p.length == length && p.width == width) return p.id;
  return std::nullopt;
}

std::optional<int> CutGraph::find_cut(int plate, Orientation orientation, int position) const {
  for (int c : cuts_on[static_cast<std::size_t>(plate)]) {
    const Cut& cut = cuts[static_cast<std::size_t>(c)];
    if (cut.orientation == orientation && cut.position == position) return c;
  }
  return std::nullopt;
}

void CutGraph::rebuild_adjacency() {
  cuts_on.assign(plates.size(), {});
  producers_of.assign(plates.size(), {});
  extractions_on.assign(plates.size(), {});
  sales_on.assign(plates.size(), {});
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const Cut& cut = cuts[c];
    cuts_on[static_cast<std::size_t>(cut.parent)].push_back(static_cast<int>(c));
    if (cut.first_child != kWasteChild)
      producers_of[static_cast<std::size_t>(cut.first_child)].push_back(static_cast<int>(c));
    if (cut.second_child != kWasteChild)
      producers_of[static_cast<std::size_t>(cut.second_child)].push_back(static_cast<int>(c));
  }
  for (std::size_t e = 0; e < extractions.size(); ++e)
    extractions_on[static_cast<std::size_t>(extractions[e].plate)].push_back(static_cast<int>(e));
  for (std::size_t s = 0; s < sales.size(); ++s)
    sales_on[static_cast<std::size_t>(sales[s].plate)].push_back(static_cast<int>(s));
}

namespace {

bool any_piece_fits(const Instance& instance, int length, int width) {
  for (const Piece& p : instance.pieces)
    if (p.length <= length && p.width <= width) return true;
  return false;
}

struct PlatePool {
  std::vector<Plate> plates;
  std::map<std::pair<int, int>, int> index;

  int intern(int length, int width, unsigned flags) {
    auto it = index.find({length, width});
    if (it != index.end()) {
      plates[static_cast<std::size_t>(it->second)].flags |= flags;
      return it->second;
    }
    int id = static_cast<int>(plates.size());
    plates.push_back(Plate{id, length, width, flags});
    index.emplace(std::make_pair(length, width), id);
    return id;
  }
};

// Candidate cut positions for one plate and orientation, already filtered
// by the rule set. `table` spans (0, L] or (0, W]; plate positions are
// strictly below `dim`.
std::vector<int> candidate_positions(const Instance& instance, const DiscretizationTables& tables,
                                     const Plate& plate, Orientation o, RuleSet rules) {
  int dim = o == Orientation::Vertical ? plate.length : plate.width;
  int cls = o == Orientation::Vertical ? plate.width : plate.length;
  const NormalPositions& table =
      o == Orientation::Vertical ? tables.lengths(cls) : tables.widths(cls);

  std::vector<int> base;
  if (rules == RuleSet::Restricted) {
    // Dimensions of fitting pieces only.
    std::set<int> dims;
    for (const Piece& p : instance.pieces) {
      if (p.length > plate.length || p.width > plate.width) continue;
      int d = o == Orientation::Vertical ? p.length : p.width;
      if (d < dim) dims.insert(d);
    }
    base.assign(dims.begin(), dims.end());
  } else {
    for (int q : table.positions) {
      if (q >= dim) break;
      base.push_back(q);
    }
  }

  auto in_base = [&](int q) {
    if (rules == RuleSet::Restricted)
      return std::binary_search(base.begin(), base.end(), q);
    return q > 0 && q < dim && table.contains(q);
  };

  std::vector<int> kept;
  for (int q : base) {
    // Perfect symmetry: the cut at dim-q creates the same child pair, so
    // only the first-half cut is kept.
    bool symmetric_ok = q <= dim - q || !in_base(dim - q);
    if (!symmetric_ok) continue;
    if (rules == RuleSet::Enhanced && 2 * q > dim + 1) continue;  // q > ceil(dim/2)
    kept.push_back(q);
  }
  return kept;
}

}  // namespace

std::optional<std::pair<int, int>> resolve_child_dims(const Instance& instance,
                                                      const DiscretizationTables& tables,
                                                      bool normalize, int length, int width) {
  if (normalize) {
    int nl = tables.normalized_length(length, width);
    int nw = tables.normalized_width(width, length);
    if (nl == 0 || nw == 0) return std::nullopt;
    return std::make_pair(nl, nw);
  }
  if (!any_piece_fits(instance, length, width)) return std::nullopt;
  return std::make_pair(length, width);
}

std::vector<Extraction> enumerate_extractions(const Instance& instance,
                                              const std::vector<Plate>& plates) {
  std::vector<Extraction> result;
  for (const Plate& plate : plates) {
    for (std::size_t i = 0; i < instance.pieces.size(); ++i) {
      const Piece& pi = instance.pieces[i];
      if (pi.length > plate.length || pi.width > plate.width) continue;
      bool blocked = false;
      for (std::size_t k = 0; k < instance.pieces.size() && !blocked; ++k) {
        const Piece& pk = instance.pieces[k];
        if (pk.length > plate.length || pk.width > plate.width) continue;
        if (pi.length + pk.length <= plate.length || pi.width + pk.width <= plate.width)
          blocked = true;
      }
      if (!blocked) result.push_back(Extraction{static_cast<int>(i), plate.id});
    }
  }
  return result;
}

CutGraph enumerate(const Instance& instance, RuleSet rules, const EnumOptions& options) {
  // Deliberately weaker than validate_instance: a piece that does not fit
  // the plate is legal here and simply never participates, so an instance
  // where nothing fits yields a graph with only plate 0.
  if (instance.plate_length < 1 || instance.plate_width < 1)
    throw std::invalid_argument("enumerate: plate dimensions must be positive");
  if (instance.pieces.empty()) throw std::invalid_argument("enumerate: no pieces");
  for (const Piece& p : instance.pieces)
    if (p.length < 1 || p.width < 1 || p.profit < 1 || p.demand < 1)
      throw std::invalid_argument("enumerate: piece fields must be positive");
  if (options.redundant_cut && rules == RuleSet::Enhanced)
    throw std::invalid_argument("redundant-cut reduction is never applied to enhanced graphs");

  DiscretizationTables tables(instance);
  CutGraph graph;
  graph.rules = rules;
  graph.options = options;

  PlatePool pool;
  pool.intern(instance.plate_length, instance.plate_width, kPlateRoot);

  // Resolves a raw child to a plate id or waste. Each dimension is
  // normalized against the class of the other raw dimension.
  auto child_id = [&](int length, int width, unsigned flags) {
    auto dims = resolve_child_dims(instance, tables, options.normalize, length, width);
    if (!dims) return kWasteChild;
    return pool.intern(dims->first, dims->second, flags);
  };

  // Breadth-first closure: children get appended to the pool, so a plain
  // index loop visits plates in id order.
  for (std::size_t p = 0; p < pool.plates.size(); ++p) {
    // Cuts producing a child pair some earlier cut on this plate already
    // produces are skipped; under normalization this can also pair a
    // vertical with a horizontal cut (their columns would be identical).
    std::set<std::pair<int, int>> seen_children;
    for (Orientation o : {Orientation::Vertical, Orientation::Horizontal}) {
      Plate plate = pool.plates[p];  // copy: pool may reallocate below
      for (int q : candidate_positions(instance, tables, plate, o, rules)) {
        int first, second;
        if (o == Orientation::Vertical) {
          first = child_id(q, plate.width, kPlateFirstChildV);
          second = child_id(plate.length - q, plate.width, kPlateSecondChildV);
        } else {
          first = child_id(plate.length, q, kPlateFirstChildH);
          second = child_id(plate.length, plate.width - q, kPlateSecondChildH);
        }
        // The first child always fits a piece: q is a demand-bounded sum,
        // and its smallest summand fits (q, w).
        if (first == kWasteChild)
          throw std::logic_error("enumeration: first child without a fitting piece");
        auto pair = std::minmax(first, second);
        if (!seen_children.insert({pair.first, pair.second}).second) continue;
        graph.cuts.push_back(Cut{plate.id, o, q, first, second});
      }
    }
  }

  graph.plates = std::move(pool.plates);
  if (rules == RuleSet::Enhanced) {
    graph.extractions = enumerate_extractions(instance, graph.plates);
  } else {
    for (const Plate& plate : graph.plates)
      for (std::size_t i = 0; i < instance.pieces.size(); ++i)
        if (instance.pieces[i].length == plate.length && instance.pieces[i].width == plate.width)
          graph.sales.push_back(Sale{static_cast<int>(i), plate.id});
  }
  graph.rebuild_adjacency();

  if (options.cut_position) graph = apply_cut_position(graph);
  if (options.redundant_cut) graph = apply_redundant_cut(graph);
  return graph;
}

// Cut-Position and Redundant-Cut are optional reduction passes with a
// subset-and-optimum-preserving contract. The default implementation is
// the identity pass; a real rule set can be slotted in behind the same
// contract and is validated by the optimum-preservation suite.
CutGraph apply_cut_position(const CutGraph& graph) { return graph; }

CutGraph apply_redundant_cut(const CutGraph& graph) {
  if (graph.rules == RuleSet::Enhanced)
    throw std::invalid_argument("redundant-cut reduction is never applied to enhanced graphs");
  return graph;
}

CutGraph purge(const CutGraph& graph, const std::vector<VarId>& removed_vars) {
  std::vector<char> cut_removed(graph.cuts.size(), 0);
  std::vector<char> ext_removed(graph.extractions.size(), 0);
  std::vector<char> sale_removed(graph.sales.size(), 0);
  for (const VarId& v : removed_vars) {
    switch (v.kind) {
      case VarId::Kind::Cut: cut_removed.at(static_cast<std::size_t>(v.index)) = 1; break;
      case VarId::Kind::Extraction: ext_removed.at(static_cast<std::size_t>(v.index)) = 1; break;
      case VarId::Kind::Sale: sale_removed.at(static_cast<std::size_t>(v.index)) = 1; break;
    }
  }

  // Reachability from plate 0 through kept cuts.
  std::vector<char> reachable(graph.plates.size(), 0);
  std::vector<int> queue{0};
  reachable[0] = 1;
  while (!queue.empty()) {
    int p = queue.back();
    queue.pop_back();
    for (int c : graph.cuts_on[static_cast<std::size_t>(p)]) {
      if (cut_removed[static_cast<std::size_t>(c)]) continue;
      const Cut& cut = graph.cuts[static_cast<std::size_t>(c)];
      for (int child : {cut.first_child, cut.second_child}) {
        if (child == kWasteChild) continue;
        if (!reachable[static_cast<std::size_t>(child)]) {
          reachable[static_cast<std::size_t>(child)] = 1;
          queue.push_back(child);
        }
      }
    }
  }

  std::vector<int> plate_map(graph.plates.size(), -1);
  CutGraph out;
  out.rules = graph.rules;
  out.options = graph.options;
  for (const Plate& plate : graph.plates) {
    if (!reachable[static_cast<std::size_t>(plate.id)]) continue;
    int id = static_cast<int>(out.plates.size());
    plate_map[static_cast<std::size_t>(plate.id)] = id;
    out.plates.push_back(Plate{id, plate.length, plate.width, plate.flags});
  }
  for (std::size_t c = 0; c < graph.cuts.size(); ++c) {
    if (cut_removed[c]) continue;
    const Cut& cut = graph.cuts[c];
    if (!reachable[static_cast<std::size_t>(cut.parent)]) continue;
    Cut copy = cut;
    copy.parent = plate_map[static_cast<std::size_t>(cut.parent)];
    copy.first_child = plate_map[static_cast<std::size_t>(cut.first_child)];
    copy.second_child = cut.second_child == kWasteChild
                            ? kWasteChild
                            : plate_map[static_cast<std::size_t>(cut.second_child)];
    out.cuts.push_back(copy);
  }
  for (std::size_t e = 0; e < graph.extractions.size(); ++e) {
    if (ext_removed[e]) continue;
    const Extraction& ext = graph.extractions[e];
    if (!reachable[static_cast<std::size_t>(ext.plate)]) continue;
    out.extractions.push_back(
        Extraction{ext.piece, plate_map[static_cast<std::size_t>(ext.plate)]});
  }
  for (std::size_t s = 0; s < graph.sales.size(); ++s) {
    if (sale_removed[s]) continue;
    const Sale& sale = graph.sales[s];
    if (!reachable[static_cast<std::size_t>(sale.plate)]) continue;
    out.sales.push_back(Sale{sale.piece, plate_map[static_cast<std::size_t>(sale.plate)]});
  }
  out.rebuild_adjacency();
  return out;
}

std::string stats_csv_header() {
  return "rules,normalize,cut_position,redundant_cut,n_plates,n_cuts,n_extractions";
}

std::string stats_csv_row(const CutGraph& graph) {
  std::ostringstream out;
  GraphStats s = graph.stats();
  out << rule_set_name(graph.rules) << ',' << (graph.options.normalize ? 1 : 0) << ','
      << (graph.options.cut_position ? 1 : 0) << ',' << (graph.options.redundant_cut ? 1 : 0)
      << ',' << s.n_plates << ',' << s.n_cuts << ',' << s.n_extractions;
  return out.str();
}

}  // namespace g2kp
