#pragma once

#include <stdexcept>
#include <string>

namespace genet {

/// Error codes shared across the library. Each maps to one contract
/// violation named in the operation it belongs to.
enum class Errc {
  UnknownNode,
  UnknownUser,
  UnknownItem,
  DuplicateIncidence,
  EmptyHyperedge,
  NotIncident,
  IsolatedAfterPerturbation,
  KTooLarge,
  EmptyInput,
  EmptyHypergraph,
  NoEligibleEdge,
  EmptyBatch,
  EmptySequence,
  EmptyLog,
  DimensionMismatch,
  ShapeMismatch,
  NonFiniteGradient,
  ParseError,
  MissingCheckpoint,
  BadDump,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace genet
