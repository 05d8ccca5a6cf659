#include "g2kp/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace g2kp {

int ModelIR::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

int ModelIR::row_index(const std::string& name) const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::string cut_name(const CutGraph& graph, int cut_id) {
  const Cut& c = graph.cuts[static_cast<std::size_t>(cut_id)];
  std::ostringstream out;
  out << "x_" << orientation_tag(c.orientation) << '_' << c.position << '_' << c.parent;
  return out.str();
}

void check_graph_instance(const CutGraph& graph, const Instance& instance) {
  if (graph.plates.empty() || graph.plates[0].length != instance.plate_length ||
      graph.plates[0].width != instance.plate_width)
    throw std::invalid_argument("graph does not match instance: plate 0 differs");
  auto piece_in_range = [&](int i) {
    return i >= 0 && static_cast<std::size_t>(i) < instance.pieces.size();
  };
  for (const Extraction& e : graph.extractions)
    if (!piece_in_range(e.piece))
      throw std::invalid_argument("graph does not match instance: extraction piece out of range");
  for (const Sale& s : graph.sales)
    if (!piece_in_range(s.piece))
      throw std::invalid_argument("graph does not match instance: sale piece out of range");
}

// Shared row structure of both formulations: one conservation row per
// plate (the root row has RHS 1), one demand row per piece. Sellable
// terms (extractions or sales) are added by the caller through
// `plate_terms` and `demand_terms`.
ModelIR build_common(const CutGraph& graph, const Instance& instance,
                     const std::vector<Column>& sell_columns) {
  ModelIR model;

  // x columns ordered by (plate, orientation, position); enumeration
  // already creates cuts in that order, but the contract is re-imposed
  // here rather than assumed.
  std::vector<int> cut_order(graph.cuts.size());
  for (std::size_t i = 0; i < cut_order.size(); ++i) cut_order[i] = static_cast<int>(i);
  std::stable_sort(cut_order.begin(), cut_order.end(), [&](int a, int b) {
    const Cut& ca = graph.cuts[static_cast<std::size_t>(a)];
    const Cut& cb = graph.cuts[static_cast<std::size_t>(b)];
    auto key = [](const Cut& c) {
      return std::make_tuple(c.parent, static_cast<int>(c.orientation), c.position);
    };
    return key(ca) < key(cb);
  });

  for (int c : cut_order) {
    Column col;
    col.name = cut_name(graph, c);
    col.objective = 0;
    col.integer = true;
    col.origin = VarId{VarId::Kind::Cut, c};
    model.columns.push_back(std::move(col));
  }
  for (const Column& col : sell_columns) model.columns.push_back(col);

  std::vector<int> cut_col(graph.cuts.size());
  for (std::size_t i = 0; i < cut_order.size(); ++i)
    cut_col[static_cast<std::size_t>(cut_order[i])] = static_cast<int>(i);

  std::vector<std::vector<int>> sells_by_plate(graph.plates.size());
  std::vector<std::vector<int>> sells_by_piece(instance.pieces.size());
  for (std::size_t k = 0; k < sell_columns.size(); ++k) {
    const VarId& origin = sell_columns[k].origin;
    int col = static_cast<int>(graph.cuts.size() + k);
    int plate, piece;
    if (origin.kind == VarId::Kind::Extraction) {
      plate = graph.extractions[static_cast<std::size_t>(origin.index)].plate;
      piece = graph.extractions[static_cast<std::size_t>(origin.index)].piece;
    } else {
      plate = graph.sales[static_cast<std::size_t>(origin.index)].plate;
      piece = graph.sales[static_cast<std::size_t>(origin.index)].piece;
    }
    sells_by_plate[static_cast<std::size_t>(plate)].push_back(col);
    sells_by_piece[static_cast<std::size_t>(piece)].push_back(col);
  }

  // Conservation rows: consumers (cuts on the plate, sell variables on
  // the plate) minus producers (cuts whose child set contains the plate,
  // coefficient -2 when both children coincide).
  for (const Plate& plate : graph.plates) {
    Row row;
    row.name = plate.id == 0 ? "root" : "plate_" + std::to_string(plate.id);
    row.relation = Relation::LessEqual;
    row.rhs = plate.id == 0 ? 1 : 0;

    std::map<int, long long> coeffs;
    for (int c : graph.cuts_on[static_cast<std::size_t>(plate.id)])
      coeffs[cut_col[static_cast<std::size_t>(c)]] += 1;
    for (int col : sells_by_plate[static_cast<std::size_t>(plate.id)]) coeffs[col] += 1;
    if (plate.id != 0) {
      // producers_of lists a cut once per produced copy, so a cut whose
      // two children coincide accumulates coefficient -2 here
      for (int c : graph.producers_of[static_cast<std::size_t>(plate.id)])
        coeffs[cut_col[static_cast<std::size_t>(c)]] -= 1;
    }
    for (const auto& [col, coeff] : coeffs)
      if (coeff != 0) row.terms.push_back(RowTerm{col, coeff});
    model.rows.push_back(std::move(row));
  }

  // Demand rows, one per piece.
  for (std::size_t i = 0; i < instance.pieces.size(); ++i) {
    Row row;
    row.name = "dem_" + std::to_string(i);
    row.relation = Relation::LessEqual;
    row.rhs = instance.pieces[i].demand;
    std::vector<int> cols = sells_by_piece[i];
    std::sort(cols.begin(), cols.end());
    for (int col : cols) row.terms.push_back(RowTerm{col, 1});
    model.rows.push_back(std::move(row));
  }
  return model;
}

}  // namespace

ModelIR build_enhanced_model(const CutGraph& graph, const Instance& instance) {
  if (graph.rules != RuleSet::Enhanced)
    throw std::invalid_argument("build_enhanced_model requires an enhanced-rules graph");
  check_graph_instance(graph, instance);

  std::vector<int> order(graph.extractions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Extraction& ea = graph.extractions[static_cast<std::size_t>(a)];
    const Extraction& eb = graph.extractions[static_cast<std::size_t>(b)];
    return std::make_pair(ea.piece, ea.plate) < std::make_pair(eb.piece, eb.plate);
  });

  std::vector<Column> sell;
  for (int e : order) {
    const Extraction& ext = graph.extractions[static_cast<std::size_t>(e)];
    Column col;
    col.name = "e_" + std::to_string(ext.piece) + "_" + std::to_string(ext.plate);
    col.objective = instance.pieces[static_cast<std::size_t>(ext.piece)].profit;
    col.integer = true;
    col.origin = VarId{VarId::Kind::Extraction, e};
    sell.push_back(std::move(col));
  }
  return build_common(graph, instance, sell);
}

ModelIR build_faithful_model(const CutGraph& graph, const Instance& instance) {
  if (graph.rules == RuleSet::Enhanced)
    throw std::invalid_argument("build_faithful_model cannot take an enhanced-rules graph");
  check_graph_instance(graph, instance);

  std::vector<int> order(graph.sales.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Sale& sa = graph.sales[static_cast<std::size_t>(a)];
    const Sale& sb = graph.sales[static_cast<std::size_t>(b)];
    return std::make_pair(sa.piece, sa.plate) < std::make_pair(sb.piece, sb.plate);
  });

  // A plate with several same-size piece types carries one y per pair;
  // the name keeps the plain y_<plate> form when unique.
  std::map<int, int> sales_per_plate;
  for (const Sale& s : graph.sales) sales_per_plate[s.plate] += 1;

  std::vector<Column> sell;
  for (int s : order) {
    const Sale& sale = graph.sales[static_cast<std::size_t>(s)];
    Column col;
    col.name = sales_per_plate[sale.plate] == 1
                   ? "y_" + std::to_string(sale.plate)
                   : "y_" + std::to_string(sale.piece) + "_" + std::to_string(sale.plate);
    col.objective = instance.pieces[static_cast<std::size_t>(sale.piece)].profit;
    col.upper = static_cast<double>(instance.pieces[static_cast<std::size_t>(sale.piece)].demand);
    col.integer = true;
    col.origin = VarId{VarId::Kind::Sale, s};
    sell.push_back(std::move(col));
  }
  return build_common(graph, instance, sell);
}

namespace {

const char* relation_text(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

void write_lp_expression(std::ostream& out, const ModelIR& model,
                         const std::vector<RowTerm>& terms) {
  int per_line = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    long long c = terms[i].coeff;
    if (i == 0) {
      out << ' ' << c << ' ' << model.columns[static_cast<std::size_t>(terms[i].column)].name;
    } else {
      out << (c < 0 ? " - " : " + ") << std::abs(c) << ' '
          << model.columns[static_cast<std::size_t>(terms[i].column)].name;
    }
    if (++per_line == 8 && i + 1 < terms.size()) {
      out << "\n ";
      per_line = 0;
    }
  }
}

std::string export_lp(const ModelIR& model) {
  std::ostringstream out;
  out << "\\ " << model.name << "\n";
  out << (model.maximize ? "Maximize\n" : "Minimize\n");
  std::vector<RowTerm> obj;
  for (std::size_t i = 0; i < model.columns.size(); ++i)
    if (model.columns[i].objective != 0)
      obj.push_back(RowTerm{static_cast<int>(i), model.columns[i].objective});
  out << " obj:";
  if (obj.empty() && !model.columns.empty())
    out << " 0 " << model.columns[0].name;  // the format needs one term
  else
    write_lp_expression(out, model, obj);
  out << "\nSubject To\n";
  for (const Row& row : model.rows) {
    if (row.terms.empty()) continue;  // LP text cannot express empty rows
    out << ' ' << row.name << ':';
    write_lp_expression(out, model, row.terms);
    out << ' ' << relation_text(row.relation) << ' ' << row.rhs << '\n';
  }
  bool any_bound = false;
  for (const Column& col : model.columns)
    if (col.lower != 0.0 || col.upper != kUnbounded) any_bound = true;
  if (any_bound) {
    out << "Bounds\n";
    for (const Column& col : model.columns) {
      if (col.lower == 0.0 && col.upper == kUnbounded) continue;
      if (col.upper == kUnbounded)
        out << ' ' << col.name << " >= " << static_cast<long long>(col.lower) << '\n';
      else
        out << ' ' << static_cast<long long>(col.lower) << " <= " << col.name
            << " <= " << static_cast<long long>(col.upper) << '\n';
    }
  }
  bool any_integer = false;
  for (const Column& col : model.columns) any_integer = any_integer || col.integer;
  if (any_integer) {
    out << "General\n";
    for (const Column& col : model.columns)
      if (col.integer) out << ' ' << col.name << '\n';
  }
  out << "End\n";
  return out.str();
}

std::string export_mps(const ModelIR& model) {
  std::ostringstream out;
  out << "NAME " << model.name << "\n";
  if (model.maximize) out << "OBJSENSE\n MAX\n";
  out << "ROWS\n N obj\n";
  for (const Row& row : model.rows)
    out << ' ' << static_cast<char>(row.relation) << ' ' << row.name << '\n';

  // Column-major entries; all columns are integer or none are (mixed
  // models never arise here), so a single marker pair suffices.
  bool any_integer = false;
  for (const Column& col : model.columns) any_integer = any_integer || col.integer;

  std::vector<std::vector<std::pair<const std::string*, long long>>> entries(
      model.columns.size());
  for (const Row& row : model.rows)
    for (const RowTerm& t : row.terms)
      entries[static_cast<std::size_t>(t.column)].push_back({&row.name, t.coeff});

  out << "COLUMNS\n";
  if (any_integer) out << " MARKER 'MARKER' 'INTORG'\n";
  for (std::size_t c = 0; c < model.columns.size(); ++c) {
    const Column& col = model.columns[c];
    if (col.objective != 0) out << ' ' << col.name << " obj " << col.objective << '\n';
    for (const auto& [row_name, coeff] : entries[c])
      out << ' ' << col.name << ' ' << *row_name << ' ' << coeff << '\n';
    if (col.objective == 0 && entries[c].empty())
      out << ' ' << col.name << " obj 0\n";  // declare otherwise-empty columns
  }
  if (any_integer) out << " MARKER 'MARKER' 'INTEND'\n";

  out << "RHS\n";
  for (const Row& row : model.rows)
    if (row.rhs != 0) out << " RHS " << row.name << ' ' << row.rhs << '\n';

  // Integer columns get explicit bounds: MPS readers disagree on the
  // default upper bound inside marker sections.
  out << "BOUNDS\n";
  for (const Column& col : model.columns) {
    if (col.upper == kUnbounded)
      out << " PL BND " << col.name << '\n';
    else if (col.integer)
      out << " UI BND " << col.name << ' ' << static_cast<long long>(col.upper) << '\n';
    else
      out << " UP BND " << col.name << ' ' << static_cast<long long>(col.upper) << '\n';
  }
  out << "ENDATA\n";
  return out.str();
}

}  // namespace

std::string export_model(const ModelIR& model, ExportFormat format) {
  return format == ExportFormat::LpText ? export_lp(model) : export_mps(model);
}

ModelIR relax(const ModelIR& model) {
  ModelIR out = model;
  for (Column& col : out.columns) col.integer = false;
  return out;
}

ModelIR restrict_columns(const ModelIR& model, const std::vector<char>& active) {
  if (active.size() != model.columns.size())
    throw std::invalid_argument("restrict_columns: flag vector size mismatch");
  ModelIR out;
  out.maximize = model.maximize;
  out.name = model.name;
  std::vector<int> col_map(model.columns.size(), -1);
  for (std::size_t i = 0; i < model.columns.size(); ++i) {
    if (!active[i]) continue;
    col_map[i] = static_cast<int>(out.columns.size());
    out.columns.push_back(model.columns[i]);
  }
  for (const Row& row : model.rows) {
    Row copy;
    copy.name = row.name;
    copy.relation = row.relation;
    copy.rhs = row.rhs;
    for (const RowTerm& t : row.terms)
      if (col_map[static_cast<std::size_t>(t.column)] >= 0)
        copy.terms.push_back(RowTerm{col_map[static_cast<std::size_t>(t.column)], t.coeff});
    out.rows.push_back(std::move(copy));
  }
  std::set<std::string> kept_names;
  for (const Column& col : out.columns) kept_names.insert(col.name);
  for (const auto& [name, value] : model.warm_start)
    if (kept_names.count(name)) out.warm_start.emplace(name, value);
  return out;
}

Solution extract_solution(const ModelIR& model, const std::map<std::string, double>& values,
                          const CutGraph& graph) {
  Solution solution;
  for (const Column& col : model.columns) {
    auto it = values.find(col.name);
    double v = it == values.end() ? 0.0 : it->second;
    double rounded = std::nearbyint(v);
    if (col.integer && std::abs(v - rounded) > 1e-6)
      throw std::runtime_error("non-integral value " + std::to_string(v) + " for column " +
                               col.name);
    long long mult = static_cast<long long>(rounded);
    if (mult < 0) throw std::runtime_error("negative value for column " + col.name);
    if (mult == 0) continue;
    switch (col.origin.kind) {
      case VarId::Kind::Cut:
        solution.cut_multiplicity[col.origin.index] += mult;
        break;
      case VarId::Kind::Extraction: {
        const Extraction& e = graph.extractions[static_cast<std::size_t>(col.origin.index)];
        solution.extraction_multiplicity[{e.piece, e.plate}] += mult;
        break;
      }
      case VarId::Kind::Sale: {
        const Sale& s = graph.sales[static_cast<std::size_t>(col.origin.index)];
        solution.sale_multiplicity[{s.piece, s.plate}] += mult;
        break;
      }
    }
    solution.objective += col.objective * mult;
  }
  return solution;
}

Verdict verify_solution(const Solution& solution, const CutGraph& graph,
                        const Instance& instance) {
  std::vector<long long> produced(graph.plates.size(), 0);
  std::vector<long long> consumed(graph.plates.size(), 0);
  std::vector<long long> sold(instance.pieces.size(), 0);
  produced[0] = 1;

  for (const auto& [cut_id, mult] : solution.cut_multiplicity) {
    if (cut_id < 0 || static_cast<std::size_t>(cut_id) >= graph.cuts.size())
      return Verdict{false, "unknown cut id " + std::to_string(cut_id)};
    if (mult < 0) return Verdict{false, "negative multiplicity on cut " + std::to_string(cut_id)};
    const Cut& cut = graph.cuts[static_cast<std::size_t>(cut_id)];
    consumed[static_cast<std::size_t>(cut.parent)] += mult;
    if (cut.first_child != kWasteChild) produced[static_cast<std::size_t>(cut.first_child)] += mult;
    if (cut.second_child != kWasteChild)
      produced[static_cast<std::size_t>(cut.second_child)] += mult;
  }
  auto consume_sells = [&](const std::map<std::pair<int, int>, long long>& mults,
                           const char* what) -> Verdict {
    for (const auto& [key, mult] : mults) {
      auto [piece, plate] = key;
      if (plate < 0 || static_cast<std::size_t>(plate) >= graph.plates.size())
        return Verdict{false, std::string(what) + " on unknown plate " + std::to_string(plate)};
      if (piece < 0 || static_cast<std::size_t>(piece) >= instance.pieces.size())
        return Verdict{false, std::string(what) + " of unknown piece " + std::to_string(piece)};
      if (mult < 0) return Verdict{false, std::string("negative ") + what + " multiplicity"};
      consumed[static_cast<std::size_t>(plate)] += mult;
      sold[static_cast<std::size_t>(piece)] += mult;
    }
    return Verdict{};
  };
  if (Verdict v = consume_sells(solution.extraction_multiplicity, "extraction"); !v.ok) return v;
  if (Verdict v = consume_sells(solution.sale_multiplicity, "sale"); !v.ok) return v;

  for (const Plate& plate : graph.plates) {
    std::size_t id = static_cast<std::size_t>(plate.id);
    if (consumed[id] > produced[id]) {
      std::string row = plate.id == 0 ? "root" : "plate_" + std::to_string(plate.id);
      return Verdict{false, row + ": consumed " + std::to_string(consumed[id]) +
                                " > available " + std::to_string(produced[id])};
    }
  }
  for (std::size_t i = 0; i < instance.pieces.size(); ++i) {
    if (sold[i] > instance.pieces[i].demand)
      return Verdict{false, "dem_" + std::to_string(i) + ": sold " + std::to_string(sold[i]) +
                                " > demand " + std::to_string(instance.pieces[i].demand)};
  }
  long long profit = 0;
  for (std::size_t i = 0; i < instance.pieces.size(); ++i)
    profit += sold[i] * instance.pieces[i].profit;
  if (profit != solution.objective)
    return Verdict{false, "objective " + std::to_string(solution.objective) +
                              " does not match sold profit " + std::to_string(profit)};
  return Verdict{};
}

std::map<std::string, double> solution_to_values(const Solution& solution, const ModelIR& model,
                                                 const CutGraph& graph) {
  std::map<std::string, double> values;
  for (const Column& col : model.columns) {
    long long mult = 0;
    switch (col.origin.kind) {
      case VarId::Kind::Cut: {
        auto it = solution.cut_multiplicity.find(col.origin.index);
        if (it != solution.cut_multiplicity.end()) mult = it->second;
        break;
      }
      case VarId::Kind::Extraction: {
        const Extraction& e = graph.extractions[static_cast<std::size_t>(col.origin.index)];
        auto it = solution.extraction_multiplicity.find({e.piece, e.plate});
        if (it != solution.extraction_multiplicity.end()) mult = it->second;
        break;
      }
      case VarId::Kind::Sale: {
        const Sale& s = graph.sales[static_cast<std::size_t>(col.origin.index)];
        auto it = solution.sale_multiplicity.find({s.piece, s.plate});
        if (it != solution.sale_multiplicity.end()) mult = it->second;
        break;
      }
    }
    if (mult != 0) values[col.name] = static_cast<double>(mult);
  }
  return values;
}

std::map<std::string, double> parse_values(std::istream& in) {
  std::map<std::string, double> values;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ss(line);
    std::string name;
    double value = 0.0;
    if (!(ss >> name >> value))
      throw std::runtime_error("malformed name/value line: " + line);
    values[name] = value;
  }
  return values;
}

std::map<std::string, double> parse_values_text(const std::string& text) {
  std::istringstream ss(text);
  return parse_values(ss);
}

}  // namespace g2kp
