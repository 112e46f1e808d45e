#pragma once
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace invlab {

using cplx = std::complex<double>;

// Compensated (Kahan) accumulator; several modules sum long series where the
// result is many orders below the summands.
struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double sum() const { return s; }
};

struct KahanC {
    Kahan re, im;
    void add(cplx z) { re.add(z.real()); im.add(z.imag()); }
    cplx sum() const { return {re.sum(), im.sum()}; }
};

// Deterministic parallel map: body(i) for i in [0, count). Results must be
// written to pre-allocated slots keyed by i, so the outcome is independent of
// the thread count. Thread count comes from INVLAB_THREADS (0/unset = hardware).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);
int thread_count();

// 64-bit FNV-1a over raw bytes; used to derive per-job noise seeds.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull);

// SHA-256 of a byte buffer / file, lowercase hex.
std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_file(const std::string& path);

// Locale-independent formatting used by every CSV writer.
std::string fmt_g17(double x);

// Integer power by repeated multiplication; deterministic across platforms.
inline double ipow(double x, int m) {
    double r = 1.0;
    for (int k = 0; k < m; ++k) r *= x;
    return r;
}

} // namespace invlab
