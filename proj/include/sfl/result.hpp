#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace sfl {

enum class TypeErrorKind {
  Mismatch,
  ProtectionFail,
  PcTooHigh,
  EffectCompositionFail,
  NotPointed,
  WrongCalculus,
  UnboundVar,
  StateTypeInvalid,
  InvalidCoercion,
  ElaborationUnsupported,
  InternalIllTyped,
};

const char* to_string(TypeErrorKind k);

// A rejected premise. `where` is the printed subterm the failing rule was
// applied to.
class TypeError : public std::runtime_error {
 public:
  TypeError(TypeErrorKind kind, std::string detail, std::string where = "")
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail +
                           (where.empty() ? "" : " in `" + where + "`")),
        kind_(kind),
        detail_(std::move(detail)),
        where_(std::move(where)) {}

  TypeErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }
  const std::string& where() const { return where_; }

 private:
  TypeErrorKind kind_;
  std::string detail_;
  std::string where_;
};

// Value or TypeError.
template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(TypeError err) : v_(std::move(err)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }
  const T& value() const {
    if (!ok()) throw std::get<1>(v_);
    return std::get<0>(v_);
  }
  const T& operator*() const { return value(); }
  const T* operator->() const { return &value(); }
  const TypeError& error() const { return std::get<1>(v_); }

 private:
  std::variant<T, TypeError> v_;
};

// Runs `fn`, turning a thrown TypeError into an error result.
template <typename Fn>
auto capture_errors(Fn&& fn) -> Result<decltype(fn())> {
  try {
    return fn();
  } catch (const TypeError& e) {
    return e;
  }
}

}  // namespace sfl
