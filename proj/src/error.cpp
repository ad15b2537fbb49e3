#include "velvet/error.hpp"

namespace velvet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::Network: return "network";
  }
  return "unknown";
}

}  // namespace velvet
