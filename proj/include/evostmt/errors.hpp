#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evostmt {

struct ParseError : std::runtime_error {
  std::size_t position;
  std::string expected;
  ParseError(std::size_t pos, std::string what_expected)
      : std::runtime_error("parse error at offset " + std::to_string(pos) +
                           ": expected " + what_expected),
        position(pos),
        expected(std::move(what_expected)) {}
};

struct MultipleDeclarations : std::runtime_error {
  MultipleDeclarations() : std::runtime_error("more than one theorem/lemma declaration") {}
};

struct NoDeclaration : std::runtime_error {
  NoDeclaration() : std::runtime_error("no theorem/lemma declaration found") {}
};

struct SiteInvalid : std::runtime_error {
  SiteInvalid(const std::string& why) : std::runtime_error("rewrite site invalid: " + why) {}
};

struct OracleTooLarge : std::runtime_error {
  OracleTooLarge(std::size_t n) : std::runtime_error("assignment space too large: " + std::to_string(n)) {}
};

struct EmptyPopulation : std::runtime_error {
  EmptyPopulation() : std::runtime_error("empty population") {}
};

struct EmptyArchive : std::runtime_error {
  EmptyArchive() : std::runtime_error("archive has no members") {}
};

struct MissingPlaceholder : std::runtime_error {
  MissingPlaceholder(const std::string& name) : std::runtime_error("unresolved placeholder {" + name + "}") {}
};

struct BackendFailure : std::runtime_error {
  BackendFailure(const std::string& cause) : std::runtime_error("backend failure: " + cause) {}
};

struct UnknownProblem : std::runtime_error {
  UnknownProblem(const std::string& id) : std::runtime_error("unknown problem: " + id) {}
};

struct ConfigInvalid : std::runtime_error {
  std::string field;
  ConfigInvalid(std::string f, const std::string& reason)
      : std::runtime_error("invalid config field '" + f + "': " + reason), field(std::move(f)) {}
};

struct SchemaError : std::runtime_error {
  std::size_t line;
  SchemaError(std::size_t l, const std::string& reason)
      : std::runtime_error("schema error at line " + std::to_string(l) + ": " + reason), line(l) {}
};

struct MissingLogs : std::runtime_error {
  MissingLogs(const std::string& dir) : std::runtime_error("no event logs under " + dir) {}
};

struct LengthMismatch : std::runtime_error {
  LengthMismatch() : std::runtime_error("paired vectors differ in length") {}
};

struct OutOfRange : std::runtime_error {
  OutOfRange(const std::string& what) : std::runtime_error("out of range: " + what) {}
};

}  // namespace evostmt
