#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectral_eta {

enum class Errc {
  invalid_grid,
  invalid_potential,
  scheme_mismatch,
  not_compactly_supported,
  not_product_near_cut,
  singular_boundary_operator,
  not_self_adjoint,
  invalid_time,
  degenerate_spectrum,
  fit_unstable,
  near_pole,
  tracking_failed,
  stencil_straddles_crossing,
  support_too_small,
  no_signal,
  invalid_theta,
  config_error,
};

std::string_view to_string(Errc code);

// Every failure raised by the toolkit carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_grid: return "InvalidGrid";
    case Errc::invalid_potential: return "InvalidPotential";
    case Errc::scheme_mismatch: return "SchemeMismatch";
    case Errc::not_compactly_supported: return "NotCompactlySupported";
    case Errc::not_product_near_cut: return "NotProductNearCut";
    case Errc::singular_boundary_operator: return "SingularBoundaryOperator";
    case Errc::not_self_adjoint: return "NotSelfAdjoint";
    case Errc::invalid_time: return "InvalidTime";
    case Errc::degenerate_spectrum: return "DegenerateSpectrum";
    case Errc::fit_unstable: return "FitUnstable";
    case Errc::near_pole: return "NearPole";
    case Errc::tracking_failed: return "TrackingFailed";
    case Errc::stencil_straddles_crossing: return "StencilStraddlesCrossing";
    case Errc::support_too_small: return "SupportTooSmall";
    case Errc::no_signal: return "NoSignal";
    case Errc::invalid_theta: return "InvalidTheta";
    case Errc::config_error: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace spectral_eta
