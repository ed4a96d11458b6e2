#pragma once

#include <stdexcept>
#include <string>

namespace ddalpha {

// Error taxonomy shared across the library. Failure modes callers are
// expected to handle get their own type; std::invalid_argument is reserved
// for precondition violations.
struct NumericalBreakdown : std::runtime_error { using std::runtime_error::runtime_error; };
struct NotPositiveDefinite : std::runtime_error { using std::runtime_error::runtime_error; };
struct DegenerateData : std::runtime_error { using std::runtime_error::runtime_error; };
struct DegenerateProjection : std::runtime_error { using std::runtime_error::runtime_error; };
struct NoAdmissiblePair : std::runtime_error { using std::runtime_error::runtime_error; };
struct TooFewPoints : std::runtime_error { using std::runtime_error::runtime_error; };
struct LengthMismatch : std::runtime_error { using std::runtime_error::runtime_error; };
struct EmptyInput : std::runtime_error { using std::runtime_error::runtime_error; };
struct CsvError : std::runtime_error { using std::runtime_error::runtime_error; };

struct ReplicationFailure : std::runtime_error {
  ReplicationFailure(int index, const std::string& reason)
      : std::runtime_error("replication " + std::to_string(index) + " failed: " + reason),
        replication(index) {}
  int replication;
};

}  // namespace ddalpha
