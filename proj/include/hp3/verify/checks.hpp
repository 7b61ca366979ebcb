#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hp3/models/painleve.hpp"

namespace hp3 {

enum class CheckStatus { pass, fail };

std::string to_string(CheckStatus s);

/// Verdict of one symbolic check.
struct CheckReport {
  std::string check_id;
  CheckStatus status = CheckStatus::fail;
  /// On failure: the first nonzero residual, printed in the expression
  /// grammar (possibly shortened, see witness_truncated).
  std::optional<std::string> witness;
  bool witness_truncated = false;
  /// On failure: a rational point where the witness is nonzero.
  std::map<std::string, std::string> witness_point;
  /// Human-readable summary of what was established.
  std::string detail;
  double elapsed_ms = 0;
  /// Informational checks document expected failures (formulas as printed,
  /// symbolic parameters where a constraint is required) and do not count
  /// towards the suite verdict.
  bool informational = false;

  bool passed() const { return status == CheckStatus::pass; }
};

/// u = H along the Hamiltonian flow satisfies the third-order equation, and
/// p, q are recovered from (u, u', u'').
CheckReport verify_hamiltonian_satisfies_eq1(const ModelSet& m = default_models());
/// The reduction map takes the jet system onto the polynomial system.
CheckReport verify_reduction(const ModelSet& m = default_models());
/// glue1/glue2 preserve dx^dy^dz and make the system polynomial.
CheckReport verify_holomorphy(const ModelSet& m = default_models());
/// The named Backlund transformation (see ModelSet::backlund) is a symmetry
/// under its validity constraint. With `symbolic` set the constraint is
/// ignored.
CheckReport verify_backlund(const std::string& name, const ModelSet& m = default_models(), bool symbolic = false);
/// Which composition order of s0, s1 translates a0 by -2.
CheckReport verify_translation(const ModelSet& m = default_models());
/// The blow-up steps compose to glue2.
CheckReport verify_blowup_sequence(const ModelSet& m = default_models());

/// Check ids in report order.
const std::vector<std::string>& check_ids();
bool is_informational(const std::string& check_id);
/// Runs one check by id; throws std::invalid_argument for unknown ids.
CheckReport run_check(const std::string& check_id, const ModelSet& m = default_models());
/// Every check, ordered as check_ids() regardless of `parallel`.
std::vector<CheckReport> run_all(const ModelSet& m = default_models(), bool parallel = true);
/// True when every non-informational report passed.
bool suite_passed(const std::vector<CheckReport>& reports);

/// A single-token edit of the model sources together with the check it is
/// designed to break.
struct Mutation {
  std::string id;
  std::string target_check;
  std::function<void(ModelSource&)> apply;
};

/// The seeded mutations: sign of t*p in H, the 2/t term of dz/dt, the
/// constant 3 in glue2, and omission of blow-up Step 6.
const std::vector<Mutation>& seeded_mutations();

/// Replaces the single occurrence of `from` in `text`; throws
/// std::logic_error if it occurs zero or several times.
void replace_token(std::string& text, const std::string& from, const std::string& to);

}  // namespace hp3
