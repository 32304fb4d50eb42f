#include "emview/value.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <functional>

#include "emview/error.hpp"

namespace emview {

namespace {

std::uint64_t bits(double d) { return std::bit_cast<std::uint64_t>(d); }

int cmp_bits(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = bits(a[i]);
    const auto y = bits(b[i]);
    if (x != y) return x < y ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

std::size_t mix(std::size_t seed, std::size_t h) {
  return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::Int: return "int";
    case ValueType::Real: return "real";
    case ValueType::Text: return "text";
    case ValueType::Vec: return "vec";
    case ValueType::Mat: return "mat";
  }
  return "?";
}

std::string to_string(const CellType& t) {
  std::string s(to_string(t.type));
  if (t.type == ValueType::Vec) s += "(" + std::to_string(t.rows) + ")";
  if (t.type == ValueType::Mat) s += "(" + std::to_string(t.rows) + "x" + std::to_string(t.cols) + ")";
  return s;
}

Value::Value(double r) : v_(r) {
  if (!std::isfinite(r)) fail(ErrorCode::NonFinite, "non-finite real value");
}

Value::Value(DenseVector v) : Value(std::make_shared<const DenseVector>(std::move(v))) {}

Value::Value(DenseMatrix m) : Value(std::make_shared<const DenseMatrix>(std::move(m))) {}

Value::Value(std::shared_ptr<const DenseVector> v) : v_(std::move(v)) {
  if (!std::get<3>(v_)->all_finite()) fail(ErrorCode::NonFinite, "non-finite vector entry");
}

Value::Value(std::shared_ptr<const DenseMatrix> m) : v_(std::move(m)) {
  if (!std::get<4>(v_)->all_finite()) fail(ErrorCode::NonFinite, "non-finite matrix entry");
}

CellType Value::cell_type() const {
  switch (type()) {
    case ValueType::Int: return CellType::integer();
    case ValueType::Real: return CellType::real();
    case ValueType::Text: return CellType::text();
    case ValueType::Vec: return CellType::vector(as_vec().size());
    case ValueType::Mat: return CellType::matrix(as_mat().rows(), as_mat().cols());
  }
  return CellType::real();
}

std::int64_t Value::as_int() const {
  if (!is_int()) fail(ErrorCode::TypeMismatch, "expected int, got " + std::string(to_string(type())));
  return std::get<0>(v_);
}

double Value::as_real() const {
  if (is_real()) return std::get<1>(v_);
  if (is_int()) return static_cast<double>(std::get<0>(v_));
  fail(ErrorCode::TypeMismatch, "expected a number, got " + std::string(to_string(type())));
}

const std::string& Value::as_text() const {
  if (!is_text()) fail(ErrorCode::TypeMismatch, "expected text, got " + std::string(to_string(type())));
  return std::get<2>(v_);
}

const DenseVector& Value::as_vec() const { return *vec_ptr(); }

const DenseMatrix& Value::as_mat() const { return *mat_ptr(); }

const std::shared_ptr<const DenseVector>& Value::vec_ptr() const {
  if (!is_vec()) fail(ErrorCode::TypeMismatch, "expected vec, got " + std::string(to_string(type())));
  return std::get<3>(v_);
}

const std::shared_ptr<const DenseMatrix>& Value::mat_ptr() const {
  if (!is_mat()) fail(ErrorCode::TypeMismatch, "expected mat, got " + std::string(to_string(type())));
  return std::get<4>(v_);
}

bool operator==(const Value& a, const Value& b) { return compare_total(a, b) == 0; }

std::size_t Value::hash() const {
  std::size_t h = std::hash<std::size_t>{}(v_.index());
  switch (type()) {
    case ValueType::Int: return mix(h, std::hash<std::int64_t>{}(std::get<0>(v_)));
    case ValueType::Real: return mix(h, std::hash<std::uint64_t>{}(bits(std::get<1>(v_))));
    case ValueType::Text: return mix(h, std::hash<std::string>{}(std::get<2>(v_)));
    case ValueType::Vec:
      for (double x : as_vec()) h = mix(h, std::hash<std::uint64_t>{}(bits(x)));
      return h;
    case ValueType::Mat:
      for (double x : as_mat().span()) h = mix(h, std::hash<std::uint64_t>{}(bits(x)));
      return h;
  }
  return h;
}

int compare_total(const Value& a, const Value& b) {
  if (a.type() != b.type()) return a.type() < b.type() ? -1 : 1;
  switch (a.type()) {
    case ValueType::Int: {
      const auto x = a.as_int(), y = b.as_int();
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case ValueType::Real: {
      const auto x = bits(a.as_real()), y = bits(b.as_real());
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    case ValueType::Text: return a.as_text().compare(b.as_text()) < 0 ? -1 : (a.as_text() == b.as_text() ? 0 : 1);
    case ValueType::Vec: return cmp_bits(a.as_vec().span(), b.as_vec().span());
    case ValueType::Mat: {
      const auto& x = a.as_mat();
      const auto& y = b.as_mat();
      if (x.rows() != y.rows()) return x.rows() < y.rows() ? -1 : 1;
      return cmp_bits(x.span(), y.span());
    }
  }
  return 0;
}

int compare_sql(const Value& a, const Value& b) {
  if (a.is_int() && b.is_int()) {
    const auto x = a.as_int(), y = b.as_int();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_numeric() && b.is_numeric()) {
    const double x = a.as_real(), y = b.as_real();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (a.is_text() && b.is_text()) {
    const int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  fail(ErrorCode::TypeMismatch, "cannot compare " + std::string(to_string(a.type())) + " with " +
                                    std::string(to_string(b.type())));
}

std::string format_real(double r) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, r);
  std::string s(buf, res.ptr);
  // Keep reals distinguishable from integers in text form.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_value(const Value& v) {
  switch (v.type()) {
    case ValueType::Int: return std::to_string(v.as_int());
    case ValueType::Real: return format_real(v.as_real());
    case ValueType::Text: return v.as_text();
    case ValueType::Vec: {
      std::string s = "[";
      const auto& vec = v.as_vec();
      for (std::size_t i = 0; i < vec.size(); ++i) {
        if (i) s += ',';
        s += format_real(vec[i]);
      }
      return s + "]";
    }
    case ValueType::Mat: {
      const auto& m = v.as_mat();
      std::string s = "[";
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (r) s += ',';
        s += '[';
        for (std::size_t c = 0; c < m.cols(); ++c) {
          if (c) s += ',';
          s += format_real(m(r, c));
        }
        s += ']';
      }
      return s + "]";
    }
  }
  return {};
}

}  // namespace emview
