#include "invlab/noise.hpp"

#include <cmath>
#include <random>

namespace invlab {

void add_noise_inplace(std::vector<double>& data, double snr_db, std::uint64_t seed) {
    if (snr_db == snr_off()) return;
    long double sig2 = 0.0L;
    for (double x : data) sig2 += static_cast<long double>(x) * x;
    if (sig2 == 0.0L) throw Error("add_noise: zero signal, SNR undefined");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> noise(data.size());
    long double raw2 = 0.0L;
    for (double& z : noise) {
        z = gauss(rng);
        raw2 += static_cast<long double>(z) * z;
    }
    if (raw2 == 0.0L) throw Error("add_noise: degenerate noise draw");
    // ||noise||^2 = ||signal||^2 * 10^(-snr/10), exactly for the realized vector.
    double scale = static_cast<double>(std::sqrt(sig2 * std::pow(10.0L, -snr_db / 10.0L) / raw2));
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += scale * noise[k];
}

BoundaryTimeData add_noise(const BoundaryTimeData& data, double snr_db, std::uint64_t seed) {
    BoundaryTimeData out = data;
    add_noise_inplace(out.v, snr_db, seed);
    return out;
}

} // namespace invlab
