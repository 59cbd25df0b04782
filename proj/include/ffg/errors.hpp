#pragma once

#include <stdexcept>
#include <string>

namespace ffg {

enum class errc {
  invalid_model,
  budget_exceeded,
  tie_on_birth_times,
  truncation_too_coarse,
  catalog_missing,
  region_too_large,
  state_space_too_large,
  defect_touches_boundary,
  incompatible_family,
  hypothesis_violated,
  recursion_budget_exceeded,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_model: return "InvalidModel";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::tie_on_birth_times: return "TieOnBirthTimes";
    case errc::truncation_too_coarse: return "TruncationTooCoarse";
    case errc::catalog_missing: return "CatalogMissing";
    case errc::region_too_large: return "RegionTooLarge";
    case errc::state_space_too_large: return "StateSpaceTooLarge";
    case errc::defect_touches_boundary: return "DefectTouchesBoundary";
    case errc::incompatible_family: return "IncompatibleFamily";
    case errc::hypothesis_violated: return "HypothesisViolated";
    case errc::recursion_budget_exceeded: return "RecursionBudgetExceeded";
    case errc::config_error: return "ConfigError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ffg
