#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spreadmc {

/// Deterministic seeding: every batch owns a private stream derived from
/// (master_seed, batch index), independent of worker scheduling.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint32_t batch_size = 8192;  ///< paths per batch (>= 1)
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t batch_stream_seed(const SeedSpec& seed,
                                       std::uint64_t batch_index) noexcept {
  return splitmix64(splitmix64(seed.master_seed) ^
                    splitmix64(batch_index + 1));
}

/// Inverse standard normal CDF (Wichura's PPND16, AS 241),
/// accurate to about 1e-15 over (0, 1).
inline double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  if (!(r > 0.0)) return q < 0.0 ? -38.5 : 38.5;  // clamp at ~1e-300 tails
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

/// Stream of standard normals: mt19937_64 uniforms mapped through the
/// inverse CDF (one draw per normal, so antithetic negation is exact).
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    // top 53 bits -> open interval (0, 1)
    const double u =
        (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    return normal_quantile(u);
  }

private:
  std::mt19937_64 eng_;
};

/// Records the normals drawn within one Monte Carlo unit so they can be
/// replayed: negated for the antithetic pair, or verbatim for common-random-
/// number re-evaluations (bumped parameter sets).
class DrawBuffer {
public:
  explicit DrawBuffer(NormalStream& stream) : stream_(&stream) {}

  /// Cursor over the unit's draws. The first cursor materializes values from
  /// the stream; later cursors (and sign = -1 passes) replay them.
  class Cursor {
  public:
    double operator()() {
      if (pos_ < buf_->vals_.size()) return sign_ * buf_->vals_[pos_++];
      assert(sign_ > 0.0 && "antithetic replay must not draw fresh normals");
      const double z = (*buf_->stream_)();
      buf_->vals_.push_back(z);
      ++pos_;
      return sign_ * z;
    }

  private:
    friend class DrawBuffer;
    Cursor(DrawBuffer* b, double sign) : buf_(b), sign_(sign) {}
    DrawBuffer* buf_;
    double sign_;
    std::size_t pos_ = 0;
  };

  Cursor draws(double sign = 1.0) { return Cursor(this, sign); }

  void next_unit() { vals_.clear(); }

private:
  friend class Cursor;
  NormalStream* stream_;
  std::vector<double> vals_;
};

}  // namespace spreadmc
