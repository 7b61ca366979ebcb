#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hp3/models/system.hpp"

namespace hp3 {

/// Every formula the models are built from, as text in the expression
/// grammar (a0, a1 stand for the two parameters). Keeping the sources as
/// text lets mutation tests edit single tokens.
struct ModelSource {
  std::string hamiltonian;
  std::string eq1_rhs;  // in u, u1, u2, t
  std::array<std::string, 3> system6;
  std::array<std::string, 3> reduction;      // (x, y, z) in u, u1, u2
  std::array<std::string, 3> reduction_inv;  // (u, u1, u2) in x, y, z
  std::array<std::string, 3> glue1;
  std::array<std::string, 3> glue2;
  std::array<std::string, 3> p3_u1, p3_u2, p3_u3, scaled;
  /// U2 chart followed by Steps 1..7 and the closing sign flip; every step
  /// maps (p,q,r) of the previous stage to the next.
  std::vector<std::array<std::string, 3>> blowup_steps;
  std::array<std::string, 3> s0;
  std::array<std::string, 2> s0_params;
  std::string g;  // the function G used by s1
  std::array<std::string, 3> s1;
  std::array<std::string, 3> s1_printed;
  std::array<std::string, 2> s1_params;
  std::array<std::string, 3> pi_printed;  // pi coordinate formula as printed
  std::array<std::string, 2> pi_params;

  /// The formulas as published, with the corrections described in README.
  static ModelSource published();
};

enum class ChartId { p3_u1, p3_u2, p3_u3, scaled, glue1, glue2 };
ChartId chart_id_from_string(const std::string& name);
std::string to_string(ChartId id);

/// Compiled models: parsed formulas plus derived inverses.
class ModelSet {
 public:
  explicit ModelSet(const ModelSource& src = ModelSource::published());

  const ModelSource& source() const { return src_; }

  const RFunc& hamiltonian() const { return hamiltonian_; }
  ODESystem hamiltonian_system() const;
  /// Right-hand side u3 = F(t, u, u1, u2) of the third-order equation.
  const RFunc& eq1_rhs() const { return eq1_rhs_; }
  /// u3 - F(t, u, u1, u2).
  RFunc eq1_residual(const Jet3& j = {}) const;
  /// State (u, u1, u2) with u2' = F.
  ODESystem jet_system() const;
  const ODESystem& system6() const { return system6_; }
  const ChartMap& reduction_map() const { return reduction_; }
  const ChartMap& chart(ChartId id) const;
  /// Charts U2, Step 1, ..., Step 7, sign flip.
  const std::vector<ChartMap>& blowup_steps() const { return steps_; }

  /// name in {s0, s1, pi}; also "s1_printed" and "pi_printed" for the
  /// formulas exactly as published. Throws std::invalid_argument otherwise.
  Backlund backlund(const std::string& name) const;

 private:
  ChartMap make_chart(std::string id, const std::vector<Symbol>& src, const std::vector<Symbol>& dst,
                      const std::array<std::string, 3>& forward, const std::string& extra_symbol = {},
                      const RFunc* extra_value = nullptr) const;

  ModelSource src_;
  RFunc hamiltonian_;
  RFunc eq1_rhs_;
  ODESystem system6_;
  ChartMap reduction_;
  std::vector<ChartMap> charts_;
  std::vector<ChartMap> steps_;
  RFunc g_;
};

/// Shared default models.
const ModelSet& default_models();

/// Convenience wrappers over default_models().
RFunc hamiltonian();
ODESystem hamiltonian_system();
RFunc eq1_residual(const Jet3& j = {});
ODESystem system6();
ChartMap reduction_map();
ChartMap chart(ChartId id);
Backlund backlund(const std::string& name);

/// Parameter symbols a0, a1.
inline Symbol alpha0() { return sym("a0"); }
inline Symbol alpha1() { return sym("a1"); }

}  // namespace hp3
