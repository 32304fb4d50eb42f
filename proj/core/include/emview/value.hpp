#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "emview/linalg.hpp"

namespace emview {

enum class ValueType { Int, Real, Text, Vec, Mat };

std::string_view to_string(ValueType t);

/// Static type of a cell: tag plus shape for vectors (rows = d, cols = 1)
/// and matrices (rows x cols). Scalars and text carry a zero shape.
struct CellType {
  ValueType type = ValueType::Real;
  std::size_t rows = 0;
  std::size_t cols = 0;

  static CellType integer() { return {ValueType::Int, 0, 0}; }
  static CellType real() { return {ValueType::Real, 0, 0}; }
  static CellType text() { return {ValueType::Text, 0, 0}; }
  static CellType vector(std::size_t d) { return {ValueType::Vec, d, 1}; }
  static CellType matrix(std::size_t r, std::size_t c) { return {ValueType::Mat, r, c}; }

  bool numeric() const noexcept { return type == ValueType::Int || type == ValueType::Real; }

  friend bool operator==(const CellType&, const CellType&) = default;
};

std::string to_string(const CellType& t);

/// A single relation cell. Vectors and matrices are shared immutable buffers,
/// so copying a Value never copies numeric payloads.
class Value {
 public:
  Value() : v_(std::int64_t{0}) {}
  Value(std::int64_t i) : v_(i) {}  // NOLINT(google-explicit-constructor)
  Value(int i) : v_(std::int64_t{i}) {}  // NOLINT(google-explicit-constructor)
  /// Throws NonFinite for NaN or infinity.
  Value(double r);  // NOLINT(google-explicit-constructor)
  Value(std::string s) : v_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  Value(const char* s) : v_(std::string(s)) {}  // NOLINT(google-explicit-constructor)
  Value(DenseVector v);  // NOLINT(google-explicit-constructor)
  Value(DenseMatrix m);  // NOLINT(google-explicit-constructor)
  Value(std::shared_ptr<const DenseVector> v);  // NOLINT(google-explicit-constructor)
  Value(std::shared_ptr<const DenseMatrix> m);  // NOLINT(google-explicit-constructor)

  ValueType type() const noexcept { return static_cast<ValueType>(v_.index()); }
  CellType cell_type() const;

  bool is_int() const noexcept { return type() == ValueType::Int; }
  bool is_real() const noexcept { return type() == ValueType::Real; }
  bool is_numeric() const noexcept { return is_int() || is_real(); }
  bool is_text() const noexcept { return type() == ValueType::Text; }
  bool is_vec() const noexcept { return type() == ValueType::Vec; }
  bool is_mat() const noexcept { return type() == ValueType::Mat; }

  std::int64_t as_int() const;
  /// Numeric value; Int promotes to Real.
  double as_real() const;
  const std::string& as_text() const;
  const DenseVector& as_vec() const;
  const DenseMatrix& as_mat() const;
  const std::shared_ptr<const DenseVector>& vec_ptr() const;
  const std::shared_ptr<const DenseMatrix>& mat_ptr() const;

  /// Structural equality; reals compare bitwise so that fixpoint detection is exact.
  friend bool operator==(const Value& a, const Value& b);

  std::size_t hash() const;

 private:
  std::variant<std::int64_t, double, std::string, std::shared_ptr<const DenseVector>,
               std::shared_ptr<const DenseMatrix>>
      v_;
};

/// Total order used for sorting relations: by type tag, then by payload
/// (reals by bit pattern, vectors/matrices lexicographically by bits).
int compare_total(const Value& a, const Value& b);

/// Numeric/text comparison used by SQL predicates and join keys. Int and Real
/// compare by value. Throws TypeMismatch for incomparable operands.
int compare_sql(const Value& a, const Value& b);

/// Canonical text form: integers plainly, reals with round-trip precision,
/// vectors as [a,b], matrices as [[a,b],[c,d]]. Text is returned raw.
std::string format_value(const Value& v);
std::string format_real(double r);

}  // namespace emview
