#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace selfasm {

enum class Errc {
  UnknownType,
  TemplateInvalid,
  MissingLinkQoS,
  DisconnectedNode,
  DuplicateId,
  PeerUnknown,
  NoStartingService,
  InsufficientServices,
  BudgetExceeded,
  DomainError,
  InstanceTooLarge,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace selfasm
