#include <cmath>

#include "emview/error.hpp"
#include "emview/expr.hpp"
#include "emview/stats.hpp"

namespace emview {

namespace {

[[noreturn]] void bad_args(std::string_view fn, std::span<const CellType> args) {
  std::string s;
  for (const auto& a : args) s += (s.empty() ? "" : ", ") + to_string(a);
  fail(ErrorCode::TypeMismatch, "no overload of " + std::string(fn) + "(" + s + ")");
}

bool all_numeric(std::span<const CellType> args) {
  for (const auto& a : args)
    if (!a.numeric()) return false;
  return true;
}

double real_checked(double r, std::string_view fn) {
  if (!std::isfinite(r)) fail(ErrorCode::NonFinite, std::string(fn) + " produced a non-finite value");
  return r;
}

FunctionDef unary_real(std::string name, double (*f)(double)) {
  FunctionDef def;
  def.name = name;
  def.min_args = def.max_args = 1;
  def.infer = [name](std::span<const CellType> a) {
    if (!all_numeric(a)) bad_args(name, a);
    return CellType::real();
  };
  def.eval = [name, f](std::span<const Value> a) { return Value(real_checked(f(a[0].as_real()), name)); };
  return def;
}

FunctionRegistry make_builtins() {
  FunctionRegistry reg;

  // norm(x, mean, stddev) for scalars; norm(x, mean, cov) for vectors.
  reg.add({"norm", 3, 3,
           [](std::span<const CellType> a) {
             if (all_numeric(a)) return CellType::real();
             if (a[0].type == ValueType::Vec && a[1].type == ValueType::Vec &&
                 a[2].type == ValueType::Mat) {
               if (a[0].rows != a[1].rows || a[2].rows != a[0].rows || a[2].cols != a[0].rows) {
                 fail(ErrorCode::DimensionMismatch, "norm: dimension mismatch");
               }
               return CellType::real();
             }
             bad_args("norm", a);
           },
           [](std::span<const Value> a) {
             if (a[0].is_numeric()) {
               return Value(stats::norm_pdf_1d(a[0].as_real(), a[1].as_real(), a[2].as_real()));
             }
             return Value(stats::norm_pdf(a[0].as_vec(), a[1].as_vec(), a[2].as_mat()));
           }});

  // pow(x) squares a scalar and forms v vᵀ for a vector; pow(x, e) is x^e.
  reg.add({"pow", 1, 2,
           [](std::span<const CellType> a) {
             if (a.size() == 2) {
               if (!all_numeric(a)) bad_args("pow", a);
               return CellType::real();
             }
             if (a[0].numeric()) return a[0].type == ValueType::Int ? CellType::integer() : CellType::real();
             if (a[0].type == ValueType::Vec) return CellType::matrix(a[0].rows, a[0].rows);
             bad_args("pow", a);
           },
           [](std::span<const Value> a) {
             if (a.size() == 2) return Value(real_checked(std::pow(a[0].as_real(), a[1].as_real()), "pow"));
             if (a[0].is_int()) return Value(a[0].as_int() * a[0].as_int());
             if (a[0].is_real()) return Value(real_checked(a[0].as_real() * a[0].as_real(), "pow"));
             return Value(outer(a[0].as_vec(), a[0].as_vec()));
           }});

  reg.add(unary_real("sqrt", [](double x) { return std::sqrt(x); }));
  reg.add(unary_real("exp", [](double x) { return std::exp(x); }));
  reg.add(unary_real("ln", [](double x) { return std::log(x); }));
  reg.add(unary_real("abs", [](double x) { return std::abs(x); }));

  reg.add({"dot", 2, 2,
           [](std::span<const CellType> a) {
             if (a[0].type != ValueType::Vec || a[1].type != ValueType::Vec) bad_args("dot", a);
             if (a[0].rows != a[1].rows) fail(ErrorCode::DimensionMismatch, "dot: length mismatch");
             return CellType::real();
           },
           [](std::span<const Value> a) { return Value(dot(a[0].as_vec(), a[1].as_vec())); }});

  reg.add({"outer", 2, 2,
           [](std::span<const CellType> a) {
             if (a[0].type != ValueType::Vec || a[1].type != ValueType::Vec) bad_args("outer", a);
             return CellType::matrix(a[0].rows, a[1].rows);
           },
           [](std::span<const Value> a) { return Value(outer(a[0].as_vec(), a[1].as_vec())); }});

  reg.add({"scale", 2, 2,
           [](std::span<const CellType> a) {
             if (!a[0].numeric() || (a[1].type != ValueType::Vec && a[1].type != ValueType::Mat)) {
               bad_args("scale", a);
             }
             return a[1];
           },
           [](std::span<const Value> a) {
             if (a[1].is_vec()) return Value(scale(a[0].as_real(), a[1].as_vec()));
             return Value(scale(a[0].as_real(), a[1].as_mat()));
           }});

  reg.add({"mahalanobis", 3, 3,
           [](std::span<const CellType> a) {
             if (a[0].type != ValueType::Vec || a[1].type != ValueType::Vec || a[2].type != ValueType::Mat) {
               bad_args("mahalanobis", a);
             }
             return CellType::real();
           },
           [](std::span<const Value> a) {
             return Value(stats::mahalanobis(a[0].as_vec(), a[1].as_vec(), a[2].as_mat()));
           }});

  reg.add({"entropy", 1, 1,
           [](std::span<const CellType> a) {
             if (a[0].type != ValueType::Vec) bad_args("entropy", a);
             return CellType::real();
           },
           [](std::span<const Value> a) { return Value(stats::entropy(a[0].as_vec().span())); }});

  // Two-argument scalar max/min; the one-argument forms are aggregates.
  for (const char* name : {"max", "min"}) {
    const bool is_max = std::string_view(name) == "max";
    reg.add({name, 2, 2,
             [name](std::span<const CellType> a) {
               if (!all_numeric(a)) bad_args(name, a);
               return (a[0].type == ValueType::Int && a[1].type == ValueType::Int) ? CellType::integer()
                                                                                   : CellType::real();
             },
             [is_max](std::span<const Value> a) {
               const int c = compare_sql(a[0], a[1]);
               const Value& pick = is_max ? (c >= 0 ? a[0] : a[1]) : (c <= 0 ? a[0] : a[1]);
               if (a[0].is_int() && a[1].is_int()) return pick;
               return Value(pick.as_real());
             }});
  }

  // solve(A, b): symmetric solve backing responsibility-weighted least squares.
  reg.add({"solve", 2, 2,
           [](std::span<const CellType> a) {
             if (a[0].type != ValueType::Mat || a[1].type != ValueType::Vec) bad_args("solve", a);
             if (a[0].rows != a[0].cols || a[0].rows != a[1].rows) {
               fail(ErrorCode::DimensionMismatch, "solve: system shape mismatch");
             }
             return a[1];
           },
           [](std::span<const Value> a) {
             return Value(stats::solve_symmetric(a[0].as_mat(), a[1].as_vec()));
           }});

  return reg;
}

}  // namespace

const FunctionRegistry& builtin_functions() {
  static const FunctionRegistry registry = make_builtins();
  return registry;
}

}  // namespace emview
