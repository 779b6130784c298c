#pragma once

#include <stdexcept>
#include <string>

namespace morph {

// Every failure raised by the library derives from Error. The CLI maps
// ConfigError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class LookupError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class LoadError : public Error { using Error::Error; };
class SchemaError : public Error { using Error::Error; };
class ClusterError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace morph
