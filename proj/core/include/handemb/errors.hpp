#pragma once

#include <stdexcept>
#include <string>

namespace handemb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// se3 / kinematics
class DegenerateFrame : public Error { public: using Error::Error; };
class MissingJointValue : public Error { public: using Error::Error; };
class UnknownJoint : public Error { public: using Error::Error; };

// optimization
class NonFiniteObjective : public Error { public: using Error::Error; };

// motion capture ingest
class MalformedHeader : public Error { public: using Error::Error; };
class UnknownMarkerLabel : public Error { public: using Error::Error; };
class RowArityMismatch : public Error { public: using Error::Error; };
class NonMonotoneTimestamps : public Error { public: using Error::Error; };
class MalformedRow : public Error { public: using Error::Error; };
class MissingHandMarkers : public Error { public: using Error::Error; };

// record mapping
class NoPoseAvailable : public Error { public: using Error::Error; };
class EmptyUsableSequence : public Error { public: using Error::Error; };

// configuration files
class SchemaError : public Error { public: using Error::Error; };
class DanglingReference : public Error { public: using Error::Error; };
class CouplingCycle : public Error { public: using Error::Error; };

// evaluation
class DegenerateTriangle : public Error { public: using Error::Error; };
class EmptyMesh : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class NonPositiveDuration : public Error { public: using Error::Error; };

}  // namespace handemb
