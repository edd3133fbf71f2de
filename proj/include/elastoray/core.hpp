#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace elastoray {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using cplx = std::complex<double>;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

inline constexpr cplx I_unit{0.0, 1.0};

enum class Mode { P, S };
enum class BranchKind { Reflect, Transmit };

inline const char* to_string(Mode m) { return m == Mode::P ? "P" : "S"; }
inline const char* to_string(BranchKind k) { return k == BranchKind::Reflect ? "R" : "T"; }

/// Error categories raised by the library. Each maps to one of the named
/// failure conditions of an operation; callers switch on kind() rather than
/// on message text.
enum class ErrorKind {
  OnInterfaceWithoutHint,
  OutsideAllRegions,
  NonPhysical,
  NoFoliation,
  CharacteristicViolation,
  StepFailure,
  GlancingRay,
  PolicyExhausted,
  NoReturn,
  SingularSystem,
  BundleBroken,
  CausticEncountered,
  ZeroLeadingAmplitude,
  NearD,
  UnderResolved,
  ZeroPairing,
  WraparoundRisk,
  ParseError,
  ValidationError,
  InvalidArgument,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::OnInterfaceWithoutHint: return "OnInterfaceWithoutHint";
    case ErrorKind::OutsideAllRegions: return "OutsideAllRegions";
    case ErrorKind::NonPhysical: return "NonPhysical";
    case ErrorKind::NoFoliation: return "NoFoliation";
    case ErrorKind::CharacteristicViolation: return "CharacteristicViolation";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::GlancingRay: return "GlancingRay";
    case ErrorKind::PolicyExhausted: return "PolicyExhausted";
    case ErrorKind::NoReturn: return "NoReturn";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::BundleBroken: return "BundleBroken";
    case ErrorKind::CausticEncountered: return "CausticEncountered";
    case ErrorKind::ZeroLeadingAmplitude: return "ZeroLeadingAmplitude";
    case ErrorKind::NearD: return "NearD";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::ZeroPairing: return "ZeroPairing";
    case ErrorKind::WraparoundRisk: return "WraparoundRisk";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string fmt_vec(const Vec3& v) {
  return "(" + std::to_string(v.x()) + ", " + std::to_string(v.y()) + ", " + std::to_string(v.z()) + ")";
}

/// Deterministic unit vector orthogonal to `n` (assumed unit).
inline Vec3 any_orthogonal(const Vec3& n) {
  Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 v = a - a.dot(n) * n;
  return v.normalized();
}

inline CVec3 to_complex(const Vec3& v) { return v.cast<cplx>(); }

// Bilinear (not Hermitian) products; polarization algebra uses analytic
// continuation of the real formulas for evanescent covectors.
inline cplx bdot(const CVec3& a, const CVec3& b) { return a(0) * b(0) + a(1) * b(1) + a(2) * b(2); }
inline CVec3 bcross(const CVec3& a, const CVec3& b) {
  return CVec3(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

}  // namespace elastoray
