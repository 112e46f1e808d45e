// Seeded Gaussian measurement noise with exact post-hoc SNR scaling.
#pragma once
#include <cstdint>
#include <limits>

#include "invlab/wave.hpp"

namespace invlab {

// Sentinel: noise disabled.
inline double snr_off() { return std::numeric_limits<double>::infinity(); }

// Adds zero-mean Gaussian noise scaled so that 10*log10(||signal||^2/||noise||^2)
// equals snr_db exactly for the realized vector. Throws on zero signal.
void add_noise_inplace(std::vector<double>& data, double snr_db, std::uint64_t seed);

BoundaryTimeData add_noise(const BoundaryTimeData& data, double snr_db, std::uint64_t seed);

// Measurement-noise wrapper around a wave DtN oracle. The per-call seed is
// derived from the job seed and a hash of the input trace, so evaluations are
// deterministic and independent of call order; identical inputs receive
// identical noise (the oracle stays a deterministic map).
class NoisyWaveDtn {
public:
    NoisyWaveDtn(const WaveDtn& base, double snr_db, std::uint64_t job_seed)
        : base_(&base), snr_db_(snr_db), seed_(job_seed) {}

    BoundaryTimeData operator()(const BoundaryTimeData& f) const {
        BoundaryTimeData out = (*base_)(f);
        if (snr_db_ != snr_off() && out.norm_inf() > 0.0) {
            std::uint64_t call_seed = fnv1a(out.v.data(), out.v.size() * sizeof(double), seed_);
            add_noise_inplace(out.v, snr_db_, call_seed);
        }
        return out;
    }
    double delta() const { return base_->delta(); }
    const SpaceTimeGrid& grid() const { return base_->grid(); }

private:
    const WaveDtn* base_;
    double snr_db_;
    std::uint64_t seed_;
};

} // namespace invlab
