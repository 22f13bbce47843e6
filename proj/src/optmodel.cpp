#include "iegs/optmodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "iegs/error.hpp"

namespace iegs {

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  for (const auto& [v, c] : other.terms) terms.emplace_back(v, -c);
  constant -= other.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double k) {
  for (auto& term : terms) term.second *= k;
  constant *= k;
  return *this;
}

double LinExpr::evaluate(const std::vector<double>& x) const {
  double s = constant;
  for (const auto& [v, c] : terms) s += c * x[static_cast<std::size_t>(v)];
  return s;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double k, LinExpr a) { return a *= k; }

double LinearRow::activity(const std::vector<double>& x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < vars.size(); ++k) s += coefs[k] * x[static_cast<std::size_t>(vars[k])];
  return s;
}

double LinearRow::violation(const std::vector<double>& x) const {
  const double a = activity(x);
  switch (sense) {
    case Sense::LessEqual: return std::max(0.0, a - rhs);
    case Sense::GreaterEqual: return std::max(0.0, rhs - a);
    case Sense::Equal: return std::abs(a - rhs);
  }
  return 0.0;
}

double SocRow::violation(const std::vector<double>& x) const {
  double sq = 0.0;
  for (const auto& e : vec) {
    const double v = e.evaluate(x);
    sq += v * v;
  }
  return std::sqrt(sq) - bound.evaluate(x);
}

namespace {

// Merges duplicate variables and drops exact zeros.
void compress(const LinExpr& expr, std::vector<int>& vars, std::vector<double>& coefs) {
  std::vector<std::pair<int, double>> t = expr.terms;
  std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  vars.clear();
  coefs.clear();
  for (const auto& [v, c] : t) {
    if (!vars.empty() && vars.back() == v) {
      coefs.back() += c;
    } else {
      vars.push_back(v);
      coefs.push_back(c);
    }
  }
  std::size_t k = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (coefs[j] != 0.0) {
      vars[k] = vars[j];
      coefs[k] = coefs[j];
      ++k;
    }
  }
  vars.resize(k);
  coefs.resize(k);
}

LinExpr normalized(const LinExpr& e) {
  LinExpr out;
  std::vector<int> vars;
  std::vector<double> coefs;
  compress(e, vars, coefs);
  for (std::size_t k = 0; k < vars.size(); ++k) out.terms.emplace_back(vars[k], coefs[k]);
  out.constant = e.constant;
  return out;
}

bool starts_with(const std::string& s, std::string_view prefix) {
  return s.size() >= prefix.size() && std::string_view(s).substr(0, prefix.size()) == prefix;
}

}  // namespace

int OptModel::add_var(std::string name, VarKind kind, double lb, double ub) {
  vars_.push_back({std::move(name), kind, lb, ub});
  return static_cast<int>(vars_.size()) - 1;
}

int OptModel::add_row(const LinExpr& expr, Sense sense, double rhs, std::string name) {
  LinearRow row;
  row.name = std::move(name);
  compress(expr, row.vars, row.coefs);
  row.sense = sense;
  row.rhs = rhs - expr.constant;
  rows_.push_back(std::move(row));
  return static_cast<int>(rows_.size()) - 1;
}

int OptModel::add_soc(std::vector<LinExpr> vec, LinExpr bound, std::string name) {
  SocRow row;
  row.name = std::move(name);
  for (const auto& e : vec) row.vec.push_back(normalized(e));
  row.bound = normalized(bound);
  socs_.push_back(std::move(row));
  return static_cast<int>(socs_.size()) - 1;
}

void OptModel::set_bounds(int v, double lb, double ub) {
  auto& var = vars_.at(static_cast<std::size_t>(v));
  var.lb = lb;
  var.ub = ub;
}

std::size_t OptModel::num_binaries() const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

std::size_t OptModel::count_rows(std::string_view prefix) const {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [&](const LinearRow& r) { return starts_with(r.name, prefix); }));
}

std::size_t OptModel::count_socs(std::string_view prefix) const {
  return static_cast<std::size_t>(
      std::count_if(socs_.begin(), socs_.end(), [&](const SocRow& r) { return starts_with(r.name, prefix); }));
}

std::size_t OptModel::count_vars(std::string_view prefix) const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [&](const Variable& v) { return starts_with(v.name, prefix); }));
}

void OptModel::validate() const {
  const auto n = static_cast<int>(vars_.size());
  auto check_expr = [&](const LinExpr& e, const std::string& where) {
    for (const auto& [v, c] : e.terms) {
      if (v < 0 || v >= n) throw ValidationError(where + ": undeclared variable index " + std::to_string(v));
      if (!std::isfinite(c)) throw ValidationError(where + ": non-finite coefficient");
    }
    if (!std::isfinite(e.constant)) throw ValidationError(where + ": non-finite constant");
  };
  for (const auto& v : vars_) {
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub) {
      throw ValidationError("variable '" + v.name + "': empty bound interval");
    }
    if (v.kind == VarKind::Binary && (v.lb < 0.0 || v.ub > 1.0)) {
      throw ValidationError("binary '" + v.name + "': bounds outside [0, 1]");
    }
  }
  for (const auto& r : rows_) {
    for (std::size_t k = 0; k < r.vars.size(); ++k) {
      if (r.vars[k] < 0 || r.vars[k] >= n) {
        throw ValidationError("row '" + r.name + "': undeclared variable index " + std::to_string(r.vars[k]));
      }
      if (!std::isfinite(r.coefs[k])) throw ValidationError("row '" + r.name + "': non-finite coefficient");
    }
    if (std::isnan(r.rhs)) throw ValidationError("row '" + r.name + "': NaN right-hand side");
  }
  for (const auto& s : socs_) {
    if (s.vec.empty()) throw ValidationError("cone '" + s.name + "': no vector components");
    for (const auto& e : s.vec) check_expr(e, "cone '" + s.name + "'");
    check_expr(s.bound, "cone '" + s.name + "'");
  }
  check_expr(objective_, "objective");
}

std::uint64_t OptModel::checksum() const {
  // FNV-1a over a canonical byte stream.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_bytes = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  auto mix_d = [&](double d) { mix_bytes(&d, sizeof d); };
  auto mix_i = [&](std::int64_t i) { mix_bytes(&i, sizeof i); };
  auto mix_s = [&](const std::string& s) {
    mix_i(static_cast<std::int64_t>(s.size()));
    mix_bytes(s.data(), s.size());
  };
  auto mix_e = [&](const LinExpr& e) {
    mix_i(static_cast<std::int64_t>(e.terms.size()));
    for (const auto& [v, c] : e.terms) {
      mix_i(v);
      mix_d(c);
    }
    mix_d(e.constant);
  };
  for (const auto& v : vars_) {
    mix_s(v.name);
    mix_i(v.kind == VarKind::Binary);
    mix_d(v.lb);
    mix_d(v.ub);
  }
  for (const auto& r : rows_) {
    mix_s(r.name);
    for (std::size_t k = 0; k < r.vars.size(); ++k) {
      mix_i(r.vars[k]);
      mix_d(r.coefs[k]);
    }
    mix_i(static_cast<std::int64_t>(r.sense));
    mix_d(r.rhs);
  }
  for (const auto& s : socs_) {
    mix_s(s.name);
    for (const auto& e : s.vec) mix_e(e);
    mix_e(s.bound);
  }
  mix_e(objective_);
  return h;
}

double OptModel::max_linear_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    worst = std::max({worst, v.lb - x[j], x[j] - v.ub});
    if (v.kind == VarKind::Binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (const auto& r : rows_) worst = std::max(worst, r.violation(x));
  return worst;
}

double OptModel::max_soc_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (const auto& s : socs_) worst = std::max(worst, s.violation(x));
  return worst;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Limit: return "limit";
  }
  return "unknown";
}

void SolverOptions::set_mip_gap(double gap) {
  if (!(gap >= 0.0 && gap < 1.0)) {
    throw ValidationError("MIP gap must lie in [0, 1), got " + std::to_string(gap));
  }
  mip_gap = gap;
}

void SolverOptions::set_time_limit(double seconds) {
  if (!(seconds > 0.0)) throw ValidationError("time limit must be positive");
  time_limit = seconds;
}

std::unique_ptr<MilpBackend> make_backend(const std::string& name) {
  std::string chosen = name;
  if (chosen.empty()) {
    const char* env = std::getenv("IEGS_MILP_BACKEND");
    chosen = env != nullptr && *env != '\0' ? env : "highs";
  }
  if (chosen == "highs") return make_highs_backend();
  throw SolverError("unknown MILP backend '" + chosen + "' (available: highs)");
}

bool soc_gradient_cut(const SocRow& row, const std::vector<double>& x_hat, LinExpr& cut) {
  std::vector<double> u(row.vec.size());
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < row.vec.size(); ++i) {
    u[i] = row.vec[i].evaluate(x_hat);
    norm_sq += u[i] * u[i];
  }
  const double norm = std::sqrt(norm_sq);
  if (!(norm > 0.0)) return false;
  cut = LinExpr();
  for (std::size_t i = 0; i < row.vec.size(); ++i) {
    if (u[i] == 0.0) continue;
    LinExpr comp = row.vec[i];
    comp *= u[i] / norm;
    cut += comp;
  }
  cut -= row.bound;
  return true;
}

namespace {

using Clock = std::chrono::steady_clock;

// Polyhedral relaxation of every cone: nonnegative bound and |component| <= bound.
void add_initial_cuts(OptModel& m, const std::vector<SocRow>& socs) {
  for (std::size_t k = 0; k < socs.size(); ++k) {
    const auto& s = socs[k];
    const std::string base = "oa0[" + std::to_string(k) + "]";
    m.add_row(s.bound, Sense::GreaterEqual, 0.0, base);
    for (const auto& comp : s.vec) {
      if (comp.terms.empty()) continue;
      m.add_row(comp - s.bound, Sense::LessEqual, 0.0, base);
      m.add_row((-1.0) * comp - s.bound, Sense::LessEqual, 0.0, base);
    }
  }
}

// Adds a gradient cut for every cone violated by more than tol at x.
int add_cuts(OptModel& m, const std::vector<SocRow>& socs, const std::vector<double>& x, double tol) {
  int added = 0;
  for (std::size_t k = 0; k < socs.size(); ++k) {
    if (socs[k].violation(x) <= tol) continue;
    LinExpr cut;
    if (soc_gradient_cut(socs[k], x, cut)) {
      m.add_row(cut, Sense::LessEqual, 0.0, "oa[" + std::to_string(k) + "]");
      ++added;
    }
  }
  return added;
}

double max_violation(const std::vector<SocRow>& socs, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& s : socs) worst = std::max(worst, s.violation(x));
  return worst;
}

std::vector<int> binary_pattern(const OptModel& m, const std::vector<double>& x) {
  std::vector<int> p;
  for (std::size_t j = 0; j < m.vars().size(); ++j) {
    if (m.vars()[j].kind == VarKind::Binary) p.push_back(static_cast<int>(std::lround(x[j])));
  }
  return p;
}

double relative_gap(double upper, double lower) {
  if (!std::isfinite(upper) || !std::isfinite(lower)) return kInf;
  return std::max(0.0, upper - lower) / std::max(1e-9, std::abs(upper));
}

}  // namespace

// Outer approximation: the MILP master with accumulated gradient cuts yields a
// lower bound and a binary pattern; cut rounds on the LP with that pattern fixed
// converge to a cone-feasible incumbent. Stops when the bounds meet within the
// MIP gap or the master repeats a pattern.
SolveResult solve_misocp(const OptModel& model, const SolverOptions& options, MilpBackend* backend) {
  const auto start = Clock::now();
  model.validate();
  std::unique_ptr<MilpBackend> owned;
  if (backend == nullptr) {
    owned = make_backend();
    backend = owned.get();
  }

  SolveResult result;
  auto finish = [&](SolveResult& r) -> SolveResult {
    r.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    if (!r.has_solution()) r.values.clear();
    return r;
  };

  // The master is the model without its cones.
  OptModel master;
  for (const auto& v : model.vars()) master.add_var(v.name, v.kind, v.lb, v.ub);
  for (const auto& r : model.rows()) {
    LinExpr e;
    for (std::size_t k = 0; k < r.vars.size(); ++k) e.add(r.vars[k], r.coefs[k]);
    master.add_row(e, r.sense, r.rhs, r.name);
  }
  master.set_objective(model.objective());
  const auto& socs = model.socs();

  if (socs.empty()) {
    const MilpResult mr = backend->solve(master, options);
    result.backend_calls = 1;
    result.status = mr.status;
    result.message = mr.message;
    if (mr.status == SolveStatus::Optimal || mr.status == SolveStatus::Feasible) {
      result.values = mr.values;
      result.objective = mr.objective;
      result.bound = mr.bound;
      result.mip_gap = relative_gap(mr.objective, mr.bound);
    }
    return finish(result);
  }

  add_initial_cuts(master, socs);
  const bool has_binaries = model.num_binaries() > 0;

  std::vector<double> incumbent;
  double upper = kInf;
  double lower = -kInf;
  double last_violation = kInf;
  std::vector<std::vector<int>> seen_patterns;
  bool hit_time_limit = false;

  while (result.cut_rounds < options.max_cut_rounds) {
    const MilpResult mr = backend->solve(master, options);
    ++result.backend_calls;
    if (mr.status == SolveStatus::Infeasible) {
      if (incumbent.empty()) {
        result.status = SolveStatus::Infeasible;
        result.message = mr.message.empty() ? "mixed-integer relaxation infeasible" : mr.message;
        return finish(result);
      }
      lower = upper;  // every remaining pattern is cut off
      break;
    }
    if (mr.status == SolveStatus::Limit && mr.values.empty()) {
      hit_time_limit = true;
      result.message = mr.message;
      break;
    }
    if (mr.status == SolveStatus::Feasible) hit_time_limit = true;
    lower = std::max(lower, mr.bound);

    std::vector<double> x = mr.values;
    last_violation = max_violation(socs, x);
    result.violation_history.push_back(last_violation);
    if (last_violation <= options.tol_soc) {
      if (mr.objective < upper) {
        upper = mr.objective;
        incumbent = x;
      }
      break;
    }

    const auto pattern = binary_pattern(model, x);
    const bool repeated = std::find(seen_patterns.begin(), seen_patterns.end(), pattern) != seen_patterns.end();
    seen_patterns.push_back(pattern);

    result.cuts += add_cuts(master, socs, x, options.tol_soc);
    ++result.cut_rounds;

    if (has_binaries) {
      // Continuous refinement with the binary pattern fixed.
      OptModel fixed = master;
      for (std::size_t j = 0, b = 0; j < model.vars().size(); ++j) {
        if (model.vars()[j].kind == VarKind::Binary) {
          const double val = pattern[b++];
          fixed.set_bounds(static_cast<int>(j), val, val);
        }
      }
      while (result.cut_rounds < options.max_cut_rounds) {
        const MilpResult lr = backend->solve(fixed, options);
        ++result.backend_calls;
        if (lr.status != SolveStatus::Optimal) break;  // pattern infeasible for the cones
        const double v = max_violation(socs, lr.values);
        result.violation_history.push_back(v);
        if (v <= options.tol_soc) {
          if (lr.objective < upper) {
            upper = lr.objective;
            incumbent = lr.values;
          }
          break;
        }
        last_violation = v;
        const int before = result.cuts;
        result.cuts += add_cuts(fixed, socs, lr.values, options.tol_soc);
        add_cuts(master, socs, lr.values, options.tol_soc);
        ++result.cut_rounds;
        if (result.cuts == before) break;
      }
    } else {
      continue;
    }

    if (!incumbent.empty() && relative_gap(upper, lower) <= options.mip_gap) break;
    if (repeated && !incumbent.empty()) break;
  }

  result.bound = lower;
  if (!incumbent.empty()) {
    result.values = incumbent;
    result.objective = upper;
    result.max_soc_violation = max_violation(socs, incumbent);
    result.mip_gap = relative_gap(upper, std::min(lower, upper));
    result.status = (hit_time_limit || result.mip_gap > options.mip_gap) ? SolveStatus::Feasible
                                                                          : SolveStatus::Optimal;
    return finish(result);
  }
  result.max_soc_violation = last_violation;
  result.status = SolveStatus::Limit;
  if (result.message.empty()) {
    std::ostringstream msg;
    msg << "cut-round limit reached with cone violation " << last_violation << " above tolerance "
        << options.tol_soc;
    result.message = msg.str();
  }
  return finish(result);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_expr(std::ostream& out, const LinExpr& e) {
  out << fmt(e.constant) << ' ' << e.terms.size();
  for (const auto& [v, c] : e.terms) out << ' ' << v << ':' << fmt(c);
}

char sense_char(Sense s) {
  switch (s) {
    case Sense::LessEqual: return 'L';
    case Sense::GreaterEqual: return 'G';
    case Sense::Equal: return 'E';
  }
  return '?';
}

class Tokens {
 public:
  explicit Tokens(std::istream& in) : in_(in) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) throw ParseError(std::string("conic file truncated while reading ") + what);
    return w;
  }
  void expect(const std::string& keyword) {
    const auto w = word(keyword.c_str());
    if (w != keyword) throw ParseError("conic file: expected '" + keyword + "', found '" + w + "'");
  }
  double number(const char* what) {
    const auto w = word(what);
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw ParseError(std::string("conic file: bad number for ") + what + ": " + w);
    return v;
  }
  long count(const char* what) {
    const auto w = word(what);
    char* end = nullptr;
    const long v = std::strtol(w.c_str(), &end, 10);
    if (end == w.c_str() || *end != '\0' || v < 0) throw ParseError(std::string("conic file: bad count for ") + what);
    return v;
  }
  LinExpr expr(const char* what) {
    const double constant = number(what);
    LinExpr e = terms(what);
    e.constant = constant;
    return e;
  }
  LinExpr terms(const char* what) {
    LinExpr e;
    const long n = count(what);
    for (long k = 0; k < n; ++k) {
      const auto w = word(what);
      const auto colon = w.find(':');
      if (colon == std::string::npos) throw ParseError(std::string("conic file: expected idx:coef in ") + what);
      char* end = nullptr;
      const long v = std::strtol(w.c_str(), &end, 10);
      if (end != w.c_str() + colon) throw ParseError(std::string("conic file: bad index in ") + what);
      const double c = std::strtod(w.c_str() + colon + 1, &end);
      if (*end != '\0') throw ParseError(std::string("conic file: bad coefficient in ") + what);
      e.terms.emplace_back(static_cast<int>(v), c);
    }
    return e;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_conic(const OptModel& model, std::ostream& out) {
  out << "CONIC 1\n";
  out << "VARS " << model.vars().size() << '\n';
  for (const auto& v : model.vars()) {
    out << v.name << ' ' << (v.kind == VarKind::Binary ? 'B' : 'C') << ' ' << fmt(v.lb) << ' ' << fmt(v.ub) << '\n';
  }
  out << "OBJ ";
  write_expr(out, model.objective());
  out << '\n';
  out << "LIN " << model.rows().size() << '\n';
  for (const auto& r : model.rows()) {
    out << r.name << ' ' << sense_char(r.sense) << ' ' << fmt(r.rhs) << ' ' << r.vars.size();
    for (std::size_t k = 0; k < r.vars.size(); ++k) out << ' ' << r.vars[k] << ':' << fmt(r.coefs[k]);
    out << '\n';
  }
  out << "SOC " << model.socs().size() << '\n';
  for (const auto& s : model.socs()) {
    out << s.name << ' ' << s.vec.size() << '\n';
    out << "  BOUND ";
    write_expr(out, s.bound);
    out << '\n';
    for (const auto& e : s.vec) {
      out << "  ROW ";
      write_expr(out, e);
      out << '\n';
    }
  }
  out << "END\n";
}

OptModel read_conic(std::istream& in) {
  Tokens tok(in);
  OptModel m;
  tok.expect("CONIC");
  if (tok.count("version") != 1) throw ParseError("conic file: unsupported version");
  tok.expect("VARS");
  const long nv = tok.count("VARS");
  for (long j = 0; j < nv; ++j) {
    auto name = tok.word("variable name");
    const auto kind = tok.word("variable kind");
    if (kind != "B" && kind != "C") throw ParseError("conic file: variable kind must be B or C");
    const double lb = tok.number("lower bound");
    const double ub = tok.number("upper bound");
    m.add_var(std::move(name), kind == "B" ? VarKind::Binary : VarKind::Continuous, lb, ub);
  }
  tok.expect("OBJ");
  m.set_objective(tok.expr("objective"));
  tok.expect("LIN");
  const long nr = tok.count("LIN");
  for (long r = 0; r < nr; ++r) {
    auto name = tok.word("row name");
    const auto s = tok.word("row sense");
    Sense sense;
    if (s == "L") sense = Sense::LessEqual;
    else if (s == "G") sense = Sense::GreaterEqual;
    else if (s == "E") sense = Sense::Equal;
    else throw ParseError("conic file: row sense must be L, G or E");
    const double rhs = tok.number("row rhs");
    const LinExpr e = tok.terms("row");
    m.add_row(e, sense, rhs, std::move(name));
  }
  tok.expect("SOC");
  const long nc = tok.count("SOC");
  for (long k = 0; k < nc; ++k) {
    auto name = tok.word("cone name");
    const long len = tok.count("cone length");
    tok.expect("BOUND");
    LinExpr bound = tok.expr("cone bound");
    std::vector<LinExpr> vec;
    for (long i = 0; i < len; ++i) {
      tok.expect("ROW");
      vec.push_back(tok.expr("cone row"));
    }
    m.add_soc(std::move(vec), std::move(bound), std::move(name));
  }
  tok.expect("END");
  m.validate();
  return m;
}

void export_conic(const OptModel& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write conic file: " + path.string());
  write_conic(model, out);
  if (!out) throw Error("I/O failure while writing " + path.string());
}

OptModel import_conic(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("conic file not found: " + path.string());
  return read_conic(in);
}

}  // namespace iegs
