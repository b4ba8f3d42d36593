#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hadas {

enum class ErrorCode {
  parse_error,
  schema_error,
  integrity_error,
  conflict,
  partial_resolution,
  invalid_resolution,
  out_of_domain,
  unknown_concern,
  unknown_variant,
  unknown_choice,
  unknown_session,
  variant_excluded,
  no_energy_data,
  ambiguous_provider,
  invalid_step,
  invalid_argument,
};

inline std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::schema_error: return "schema_error";
    case ErrorCode::integrity_error: return "integrity_error";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::partial_resolution: return "partial_resolution";
    case ErrorCode::invalid_resolution: return "invalid_resolution";
    case ErrorCode::out_of_domain: return "out_of_domain";
    case ErrorCode::unknown_concern: return "unknown_concern";
    case ErrorCode::unknown_variant: return "unknown_variant";
    case ErrorCode::unknown_choice: return "unknown_choice";
    case ErrorCode::unknown_session: return "unknown_session";
    case ErrorCode::variant_excluded: return "variant_excluded";
    case ErrorCode::no_energy_data: return "no_energy_data";
    case ErrorCode::ambiguous_provider: return "ambiguous_provider";
    case ErrorCode::invalid_step: return "invalid_step";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

/// Base of every error raised by the library. `details` carries free-form
/// supporting lines (derivation chains, violated rules, offending ids).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::vector<std::string> details = {})
      : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

/// Propagation derived both true and false for `choice`.
class ConflictError : public Error {
 public:
  ConflictError(std::string choice, std::vector<std::string> chain)
      : Error(ErrorCode::conflict, "conflict on choice " + choice, chain),
        choice_(std::move(choice)) {}

  const std::string& choice() const noexcept { return choice_; }
  const std::vector<std::string>& chain() const noexcept { return details(); }

 private:
  std::string choice_;
};

/// A size fell outside the sampled domain. `valid_lo`/`valid_hi` is the
/// domain the caller may clamp to (NaN when no valid domain exists).
class OutOfDomainError : public Error {
 public:
  OutOfDomainError(std::string message, std::string stage, double size, double valid_lo,
                   double valid_hi)
      : Error(ErrorCode::out_of_domain, std::move(message)),
        stage_(std::move(stage)),
        size_(size),
        valid_lo_(valid_lo),
        valid_hi_(valid_hi) {}

  const std::string& stage() const noexcept { return stage_; }
  double size() const noexcept { return size_; }
  double valid_lo() const noexcept { return valid_lo_; }
  double valid_hi() const noexcept { return valid_hi_; }

 private:
  std::string stage_;
  double size_;
  double valid_lo_;
  double valid_hi_;
};

class AmbiguousProviderError : public Error {
 public:
  AmbiguousProviderError(std::string interface_id, std::string requirer,
                         std::vector<std::string> candidates)
      : Error(ErrorCode::ambiguous_provider,
              "ambiguous provider for interface " + interface_id + " required by " + requirer,
              candidates),
        interface_(std::move(interface_id)),
        candidates_(std::move(candidates)) {}

  const std::string& interface_id() const noexcept { return interface_; }
  const std::vector<std::string>& candidates() const noexcept { return candidates_; }

 private:
  std::string interface_;
  std::vector<std::string> candidates_;
};

/// One problem found by a structural check. Checks return findings as data.
struct Finding {
  std::string subject;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool clean() const noexcept { return findings.empty(); }
  void add(std::string subject, std::string message) {
    findings.push_back({std::move(subject), std::move(message)});
  }
};

}  // namespace hadas
