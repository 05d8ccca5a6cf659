#ifndef G2KP_MILP_HPP
#define G2KP_MILP_HPP

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "g2kp/enumeration.hpp"
#include "g2kp/instance.hpp"

namespace g2kp {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Column {
  std::string name;
  long long objective = 0;
  double lower = 0.0;
  double upper = kUnbounded;
  bool integer = true;
  VarId origin;
};

struct RowTerm {
  int column = 0;
  long long coeff = 0;
};

enum class Relation : char { LessEqual = 'L', Equal = 'E', GreaterEqual = 'G' };

struct Row {
  std::string name;
  std::vector<RowTerm> terms;
  Relation relation = Relation::LessEqual;
  long long rhs = 0;
};

/// Solver-agnostic sparse MILP. All data integer-valued; column and row
/// names unique.
struct ModelIR {
  bool maximize = true;
  std::string name = "g2kp";
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::map<std::string, double> warm_start;  // column name -> value

  int column_index(const std::string& name) const;  // -1 when absent
  int row_index(const std::string& name) const;
};

/// Eqs-style model over an enhanced graph: one conservation row per plate
/// (the root row has right-hand side 1), one demand row per piece,
/// objective over extraction profits. All variables integer >= 0 with no
/// explicit upper bound beyond the rows.
ModelIR build_enhanced_model(const CutGraph& graph, const Instance& instance);

/// Same row structure over a faithful/restricted graph, with bounded sale
/// variables y on piece-sized plates instead of extractions.
ModelIR build_faithful_model(const CutGraph& graph, const Instance& instance);

enum class ExportFormat { LpText, MpsText };

/// Deterministic, byte-identical serialization. Rows with no terms are
/// omitted from LP text (the format cannot express them) but kept in MPS.
std::string export_model(const ModelIR& model, ExportFormat format);

/// Copy with integrality dropped (continuous relaxation).
ModelIR relax(const ModelIR& model);

/// Copy keeping only the flagged columns; rows keep their names with
/// terms filtered accordingly.
ModelIR restrict_columns(const ModelIR& model, const std::vector<char>& active);

struct Solution {
  long long objective = 0;  // recomputed from piece profits
  std::map<int, long long> cut_multiplicity;                        // cut id -> count
  std::map<std::pair<int, int>, long long> extraction_multiplicity; // (piece, plate)
  std::map<std::pair<int, int>, long long> sale_multiplicity;       // (piece, plate)
};

/// Maps backend column values onto graph variables. Values are rounded;
/// a deviation beyond 1e-6 on an integer column raises
/// std::runtime_error. The objective is recomputed, never trusted.
Solution extract_solution(const ModelIR& model, const std::map<std::string, double>& values,
                          const CutGraph& graph);

struct Verdict {
  bool ok = true;
  std::string detail;
};

/// Independent feasibility replay: plate availability as a flow check,
/// demand limits, and objective consistency. The verdict names the first
/// violated row on failure.
Verdict verify_solution(const Solution& solution, const CutGraph& graph,
                        const Instance& instance);

/// Column-value map of a solution (nonzero entries only), e.g. for warm
/// starts.
std::map<std::string, double> solution_to_values(const Solution& solution, const ModelIR& model,
                                                 const CutGraph& graph);

/// Whitespace-separated `name value` lines; '#' comments ignored.
std::map<std::string, double> parse_values(std::istream& in);
std::map<std::string, double> parse_values_text(const std::string& text);

}  // namespace g2kp

#endif  // G2KP_MILP_HPP
