// Error taxonomy shared by all modules.
#pragma once
#include <stdexcept>
#include <string>

namespace invlab {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid resolution below what the stencils require.
struct InvalidResolutionError : Error { using Error::Error; };
// Two objects live on incompatible grids / have incompatible shapes.
struct ShapeError : Error { using Error::Error; };
// Boundary data exceeds the admissible norm bound of an oracle.
struct AdmissibilityError : Error { using Error::Error; };
// An epsilon schedule would push a probe combination outside admissibility.
struct ScheduleError : Error { using Error::Error; };
// Newton (or another solver) failed to converge; carries the last residual.
struct WellPosednessError : Error {
    double last_residual;
    WellPosednessError(const std::string& msg, double r) : Error(msg), last_residual(r) {}
};
// Linear solver breakdown (non-SPD pivot, singular system).
struct SolverFailureError : Error { using Error::Error; };
// CGO probe frequency exceeds the configured growth cap.
struct FrequencyCapError : Error { using Error::Error; };
// Wave solution left the small-data regime.
struct InstabilityError : Error { using Error::Error; };
// Scan target outside the admissible spacetime region.
struct RegionError : Error { using Error::Error; };
// A least-squares or calibration problem is too ill-conditioned to trust.
struct ConditioningError : Error { using Error::Error; };
// Config file is malformed or inconsistent.
struct ConfigError : Error { using Error::Error; };

} // namespace invlab
