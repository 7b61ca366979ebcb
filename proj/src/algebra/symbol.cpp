#include "hp3/algebra/symbol.hpp"

#include <array>
#include <cctype>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace hp3 {
namespace {

// Registered up front so that ids (and therefore printing order) never
// depend on which thread happens to build a model first.
constexpr std::array kPreregistered = {
    "x",  "y",  "z",  "t",  "q",  "p",  "a0", "a1",  // fixed order
    "u",  "u1", "u2", "u3",                          // jet of the third-order equation
    "x0", "y0", "z0", "x1", "y1", "z1", "x2", "y2", "z2",
    "X1", "Y1", "Z1", "X2", "Y2", "Z2", "X3", "Y3", "Z3",
    "Xs", "Ys", "Zs", "P",  "Q",  "R",  "X",  "Y",  "Z",
    "p1", "q1", "r1", "p2", "q2", "r2", "p3", "q3", "r3", "p4", "q4", "r4",
    "p5", "q5", "r5", "p6", "q6", "r6", "p7", "q7", "r7",
    "T",  "t0", "alpha", "tau", "c1", "c2", "c3", "f1", "f2", "f3",
};

class SymbolTable {
 public:
  SymbolTable() {
    for (const char* n : kPreregistered) intern(n);
  }

  std::uint32_t intern(std::string_view name) {
    {
      std::shared_lock lock(mu_);
      if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.emplace_back(name);
    return it->second;
  }

  const std::string& name(std::uint32_t id) const {
    std::shared_lock lock(mu_);
    // std::deque never relocates existing elements on push_back.
    return names_.at(id);
  }

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::deque<std::string> names_;
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

}  // namespace

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  if (!alpha(s.front())) return false;
  for (char c : s)
    if (!alpha(c) && !std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

Symbol::Symbol(std::string_view name) {
  if (!is_identifier(name)) throw std::invalid_argument("invalid symbol name: '" + std::string(name) + "'");
  id_ = table().intern(name);
}

const std::string& Symbol::name() const { return table().name(id_); }

}  // namespace hp3
