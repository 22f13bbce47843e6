#include <cmath>
#include <cstdlib>

#include <Highs.h>

#include "iegs/error.hpp"
#include "iegs/optmodel.hpp"

namespace iegs {

namespace {

class HighsBackend final : public MilpBackend {
 public:
  std::string name() const override { return "highs"; }

  MilpResult solve(const OptModel& model, const SolverOptions& options) override {
    if (!model.socs().empty()) throw SolverError("HiGHS backend received a model with cone rows");
    const auto n = static_cast<HighsInt>(model.num_vars());
    const auto m = static_cast<HighsInt>(model.rows().size());

    HighsLp lp;
    lp.num_col_ = n;
    lp.num_row_ = m;
    lp.sense_ = ObjSense::kMinimize;
    lp.col_cost_.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& [v, c] : model.objective().terms) lp.col_cost_[static_cast<std::size_t>(v)] += c;
    lp.offset_ = model.objective().constant;

    bool any_integer = false;
    lp.col_lower_.resize(static_cast<std::size_t>(n));
    lp.col_upper_.resize(static_cast<std::size_t>(n));
    lp.integrality_.assign(static_cast<std::size_t>(n), HighsVarType::kContinuous);
    for (HighsInt j = 0; j < n; ++j) {
      const auto& var = model.vars()[static_cast<std::size_t>(j)];
      lp.col_lower_[static_cast<std::size_t>(j)] = var.lb;
      lp.col_upper_[static_cast<std::size_t>(j)] = var.ub;
      if (var.kind == VarKind::Binary && var.lb != var.ub) {
        lp.integrality_[static_cast<std::size_t>(j)] = HighsVarType::kInteger;
        any_integer = true;
      }
    }
    if (!any_integer) lp.integrality_.clear();

    lp.row_lower_.resize(static_cast<std::size_t>(m));
    lp.row_upper_.resize(static_cast<std::size_t>(m));
    lp.a_matrix_.format_ = MatrixFormat::kRowwise;
    lp.a_matrix_.num_col_ = n;
    lp.a_matrix_.num_row_ = m;
    lp.a_matrix_.start_.assign(1, 0);
    for (HighsInt i = 0; i < m; ++i) {
      const auto& row = model.rows()[static_cast<std::size_t>(i)];
      double lo = -kHighsInf;
      double up = kHighsInf;
      switch (row.sense) {
        case Sense::LessEqual: up = row.rhs; break;
        case Sense::GreaterEqual: lo = row.rhs; break;
        case Sense::Equal: lo = up = row.rhs; break;
      }
      lp.row_lower_[static_cast<std::size_t>(i)] = lo;
      lp.row_upper_[static_cast<std::size_t>(i)] = up;
      for (std::size_t k = 0; k < row.vars.size(); ++k) {
        lp.a_matrix_.index_.push_back(row.vars[k]);
        lp.a_matrix_.value_.push_back(row.coefs[k]);
      }
      lp.a_matrix_.start_.push_back(static_cast<HighsInt>(lp.a_matrix_.index_.size()));
    }

    Highs highs;
    // IEGS_SOLVER_LOG=1 shows the HiGHS log.
    const char* log = std::getenv("IEGS_SOLVER_LOG");
    highs.setOptionValue("output_flag", log != nullptr && std::string(log) == "1");
    highs.setOptionValue("threads", 1);
    highs.setOptionValue("random_seed", 0);
    highs.setOptionValue("mip_rel_gap", options.mip_gap);
    if (std::isfinite(options.time_limit)) highs.setOptionValue("time_limit", options.time_limit);

    if (highs.passModel(std::move(lp)) == HighsStatus::kError) {
      throw SolverError("HiGHS rejected the model");
    }
    // Numerical trouble sometimes clears without presolve or with the
    // interior-point solver (LPs only).
    auto unresolved = [&] {
      const auto st = highs.getModelStatus();
      return st == HighsModelStatus::kUnknown || st == HighsModelStatus::kSolveError ||
             st == HighsModelStatus::kPostsolveError || st == HighsModelStatus::kNotset;
    };
    const HighsStatus run_status = highs.run();
    if (run_status == HighsStatus::kError || unresolved()) {
      highs.setOptionValue("presolve", "off");
      highs.clearSolver();
      highs.run();
      if (unresolved() && !any_integer) {
        highs.setOptionValue("solver", "ipm");
        highs.clearSolver();
        highs.run();
      }
    }

    MilpResult result;
    const auto status = highs.getModelStatus();
    const auto& info = highs.getInfo();
    const bool has_primal = info.primal_solution_status == kSolutionStatusFeasible;
    result.message = highs.modelStatusToString(status);
    switch (status) {
      case HighsModelStatus::kOptimal:
        result.status = SolveStatus::Optimal;
        break;
      case HighsModelStatus::kInfeasible:
        result.status = SolveStatus::Infeasible;
        return result;
      case HighsModelStatus::kUnboundedOrInfeasible:
      case HighsModelStatus::kUnbounded:
        throw SolverError("HiGHS: model is unbounded (" + result.message + ")");
      case HighsModelStatus::kTimeLimit:
      case HighsModelStatus::kIterationLimit:
      case HighsModelStatus::kSolutionLimit:
      case HighsModelStatus::kInterrupt:
        result.status = has_primal ? SolveStatus::Feasible : SolveStatus::Limit;
        if (!has_primal) return result;
        break;
      default:
        // Unresolved numerical trouble: no usable answer from this call.
        result.status = SolveStatus::Limit;
        result.message = "HiGHS ended with status '" + result.message + "'";
        return result;
    }
    result.values = highs.getSolution().col_value;
    result.objective = info.objective_function_value;
    result.bound = any_integer ? info.mip_dual_bound : result.objective;
    // HiGHS reports integer columns to within its feasibility tolerance.
    for (HighsInt j = 0; j < n; ++j) {
      if (model.vars()[static_cast<std::size_t>(j)].kind == VarKind::Binary) {
        auto& v = result.values[static_cast<std::size_t>(j)];
        v = std::round(v);
      }
    }
    return result;
  }
};

}  // namespace

std::unique_ptr<MilpBackend> make_highs_backend() { return std::make_unique<HighsBackend>(); }

}  // namespace iegs
