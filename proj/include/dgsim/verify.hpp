#ifndef DGSIM_VERIFY_HPP
#define DGSIM_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dgsim {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  bool informational = false;  // reported, never fails the run
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok() const {
    for (const auto& c : checks) {
      if (!c.passed && !c.informational) return false;
    }
    return true;
  }
};

/// Cross-formula property suite: spectral vs analytic excess, invariant
/// exactness, estimator identities, bound sanity, gap polynomial, and a Monte
/// Carlo check of the oracle risk. Runs in well under a minute.
VerifyReport run_verification(std::uint64_t seed = 0);

}  // namespace dgsim

#endif  // DGSIM_VERIFY_HPP
