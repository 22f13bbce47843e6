#pragma once

// Solver-agnostic model: continuous/binary variables, linear rows, second-order
// cone rows ||A x + b|| <= c.x + d, and a linear objective (always minimized).
// Mixed-integer SOC models are solved by outer approximation around a
// mixed-integer linear backend.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iegs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Sense { LessEqual, GreaterEqual, Equal };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = kInf;
};

/// Affine expression sum(coef * x[var]) + constant. Duplicate variables are
/// allowed and summed by consumers.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)

  static LinExpr var(int v, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(v, coef);
    return e;
  }

  LinExpr& add(int v, double coef = 1.0) {
    terms.emplace_back(v, coef);
    return *this;
  }
  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double k);

  double evaluate(const std::vector<double>& x) const;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double k, LinExpr a);

struct LinearRow {
  std::string name;
  std::vector<int> vars;
  std::vector<double> coefs;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;

  double activity(const std::vector<double>& x) const;
  /// Amount by which x violates the row (0 when satisfied).
  double violation(const std::vector<double>& x) const;
};

struct SocRow {
  std::string name;
  std::vector<LinExpr> vec;  // components of A x + b
  LinExpr bound;             // c.x + d

  /// ||A x + b|| - (c.x + d); positive means violated.
  double violation(const std::vector<double>& x) const;
};

class OptModel {
 public:
  int add_var(std::string name, VarKind kind, double lb, double ub);
  int add_continuous(std::string name, double lb = 0.0, double ub = kInf) {
    return add_var(std::move(name), VarKind::Continuous, lb, ub);
  }
  int add_binary(std::string name) { return add_var(std::move(name), VarKind::Binary, 0.0, 1.0); }

  /// Adds `expr (sense) rhs`; the expression's constant moves to the right.
  int add_row(const LinExpr& expr, Sense sense, double rhs, std::string name);
  int add_soc(std::vector<LinExpr> vec, LinExpr bound, std::string name);

  void set_objective(LinExpr objective) { objective_ = std::move(objective); }
  void add_objective(const LinExpr& terms) { objective_ += terms; }
  const LinExpr& objective() const { return objective_; }

  void set_bounds(int v, double lb, double ub);

  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<LinearRow>& rows() const { return rows_; }
  const std::vector<SocRow>& socs() const { return socs_; }
  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_binaries() const;

  /// Rows (linear and conic) whose name starts with `prefix`.
  std::size_t count_rows(std::string_view prefix) const;
  std::size_t count_socs(std::string_view prefix) const;
  std::size_t count_vars(std::string_view prefix) const;

  /// Throws ValidationError if a reference is dangling, a binary has bounds
  /// outside [0, 1], a cone has no components, or a bound interval is empty.
  void validate() const;

  /// Order-sensitive structural fingerprint (names, kinds, coefficients).
  std::uint64_t checksum() const;

  /// Largest violation of linear rows, bounds, and integrality at x.
  double max_linear_violation(const std::vector<double>& x) const;
  double max_soc_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<LinearRow> rows_;
  std::vector<SocRow> socs_;
  LinExpr objective_;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Limit };

std::string_view to_string(SolveStatus s);

struct SolverOptions {
  double mip_gap = 0.01;
  double time_limit = kInf;  // seconds, per backend call
  double tol_soc = 1e-6;
  int max_cut_rounds = 200;

  void set_mip_gap(double gap);
  void set_time_limit(double seconds);
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;  // non-empty iff Optimal or Feasible
  double objective = kInf;
  double bound = -kInf;  // best lower bound known
  double mip_gap = kInf;
  double max_soc_violation = 0.0;
  int cut_rounds = 0;
  int cuts = 0;
  int backend_calls = 0;
  std::vector<double> violation_history;  // max cone violation per solve
  double wall_time = 0.0;
  std::string message;

  bool has_solution() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }
};

/// Result of a single mixed-integer linear solve.
struct MilpResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = kInf;
  double bound = -kInf;
  std::string message;
};

/// Narrow interface to a mixed-integer linear solver. The model handed over
/// never carries cone rows.
class MilpBackend {
 public:
  virtual ~MilpBackend() = default;
  virtual std::string name() const = 0;
  virtual MilpResult solve(const OptModel& linear_model, const SolverOptions& options) = 0;
};

std::unique_ptr<MilpBackend> make_highs_backend();
/// Backend by name; the empty string selects $IEGS_MILP_BACKEND or "highs".
std::unique_ptr<MilpBackend> make_backend(const std::string& name = "");

/// Gradient cut of `row` at x_hat: (A x_hat + b)^T (A x + b) / ||A x_hat + b||
/// <= c.x + d, written as `expr <= 0`. Returns false when A x_hat + b = 0.
bool soc_gradient_cut(const SocRow& row, const std::vector<double>& x_hat, LinExpr& cut);

SolveResult solve_misocp(const OptModel& model, const SolverOptions& options, MilpBackend* backend = nullptr);

// Line-oriented conic exchange format; grammar in docs/conic_format.md.
void write_conic(const OptModel& model, std::ostream& out);
OptModel read_conic(std::istream& in);
void export_conic(const OptModel& model, const std::filesystem::path& path);
OptModel import_conic(const std::filesystem::path& path);

}  // namespace iegs
