#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "levycouple/common.hpp"

namespace lvc {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// A private per-task random stream. Streams derived from the same master seed
// but distinct stream ids never share state, so parallel workers stay
// deterministic regardless of scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<unsigned>(a), static_cast<unsigned>(a >> 32),
                      static_cast<unsigned>(b), static_cast<unsigned>(b >> 32)};
    gen_.seed(seq);
  }

  // Uniform on (0,1); never returns 0 or 1 exactly.
  double uniform01() {
    std::uint64_t r = gen_();
    return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Marsaglia polar method; avoids relying on libstdc++ distribution details.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Uniform direction on the unit sphere in R^d (in 1D: +-1).
  Vec unit_direction(int dim) {
    Vec u(dim);
    if (dim == 1) {
      u[0] = uniform01() < 0.5 ? -1.0 : 1.0;
      return u;
    }
    double n = 0.0;
    do {
      for (int i = 0; i < dim; ++i) u[i] = normal();
      n = norm(u);
    } while (n == 0.0);
    for (int i = 0; i < dim; ++i) u[i] /= n;
    return u;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lvc
