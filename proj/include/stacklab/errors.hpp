#pragma once

#include <stdexcept>

namespace stacklab {

// A learner was driven out of protocol order (observe before act, act twice)
// or given feedback it cannot use.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A modelling assumption the computation depends on does not hold for the
// given input, e.g. the target follower response is weakly dominated.
class AssumptionViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace stacklab
