#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hp3 {

/// Interned variable name. Ids are handed out by a process-wide table whose
/// order is the global variable order used by every monomial comparison:
/// x < y < z < t < q < p < a0 < a1 < (pre-registered chart symbols) < anything
/// interned later, in first-seen order.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view name);

  static Symbol from_id(std::uint32_t id) {
    Symbol s;
    s.id_ = id;
    return s;
  }

  std::uint32_t id() const { return id_; }
  const std::string& name() const;

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend auto operator<=>(Symbol a, Symbol b) { return a.id_ <=> b.id_; }

 private:
  std::uint32_t id_ = 0;
};

inline Symbol sym(std::string_view name) { return Symbol(name); }

/// True for identifiers matching [A-Za-z_][A-Za-z0-9_]*.
bool is_identifier(std::string_view s);

}  // namespace hp3

template <>
struct std::hash<hp3::Symbol> {
  std::size_t operator()(hp3::Symbol s) const noexcept { return s.id(); }
};
