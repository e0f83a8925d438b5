#include "spoc/error.hpp"

namespace spoc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDegree: return "invalid-degree";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::InvalidLayout: return "invalid-layout";
    case ErrorCode::Transcription: return "transcription";
    case ErrorCode::DerivativeInconsistency: return "derivative-inconsistency";
    case ErrorCode::Singularity: return "singularity";
    case ErrorCode::UnsupportedStructure: return "unsupported-structure";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace spoc
