// sonimap - PCM buffers, FFT, and linear convolution
// SPDX-License-Identifier: Apache-2.0

#ifndef SONIMAP_AUDIO_HPP
#define SONIMAP_AUDIO_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sonimap/error.hpp"
#include "sonimap/geometry.hpp"  // for kPi

namespace sonimap {

/// Interleaved floating-point PCM. `samples.size() == frames() * channels`.
struct AudioBuffer {
  int sample_rate = 0;
  int channels = 1;
  std::vector<float> samples;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels)
                        : 0;
  }

  float sample(int ch, std::size_t frame) const {
    return samples[frame * static_cast<std::size_t>(channels) +
                   static_cast<std::size_t>(ch)];
  }

  float& sample(int ch, std::size_t frame) {
    return samples[frame * static_cast<std::size_t>(channels) +
                   static_cast<std::size_t>(ch)];
  }

  /// One channel copied out as a contiguous vector.
  std::vector<float> channel(int ch) const {
    std::vector<float> out(frames());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample(ch, i);
    return out;
  }

  float peak() const {
    float p = 0.f;
    for (float s : samples) p = std::max(p, std::abs(s));
    return p;
  }

  double channel_energy(int ch) const {
    double e = 0.0;
    for (std::size_t i = 0; i < frames(); ++i) {
      const double s = sample(ch, i);
      e += s * s;
    }
    return e;
  }
};

inline AudioBuffer make_sine(double freq_hz, double duration_s,
                             int sample_rate, float amplitude = 0.5f) {
  AudioBuffer buf;
  buf.sample_rate = sample_rate;
  buf.channels = 1;
  const auto n = static_cast<std::size_t>(duration_s * sample_rate);
  buf.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    buf.samples[i] = amplitude * static_cast<float>(std::sin(
                                     2.0 * kPi * freq_hz * i / sample_rate));
  return buf;
}

namespace dsp {

/// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& data,
                        bool inverse = false) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw Error("fft_inplace: size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) *
                       (inverse ? 1.0 : -1.0);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : data) x /= static_cast<double>(n);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Full linear convolution, output length x.size() + h.size() - 1.
/// Uses the FFT above once the direct product gets expensive.
inline std::vector<float> convolve_full(std::span<const float> x,
                                        std::span<const float> h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;

  if (x.size() * h.size() <= 65536) {
    std::vector<float> out(out_len, 0.f);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      for (std::size_t j = 0; j < h.size(); ++j)
        out[i + j] += static_cast<float>(xi * h[j]);
    }
    return out;
  }

  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> a(n), b(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = x[i];
  for (std::size_t i = 0; i < h.size(); ++i) b[i] = h[i];
  fft_inplace(a);
  fft_inplace(b);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  fft_inplace(a, true);
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i)
    out[i] = static_cast<float>(a[i].real());
  return out;
}

/// Frequency of the strongest spectral component, with parabolic refinement
/// of the peak bin. Hann-windowed, zero-padded to at least 4x the input.
inline double dominant_frequency(std::span<const float> x, int sample_rate) {
  if (x.size() < 16) throw Error("dominant_frequency: signal too short");
  const std::size_t n = next_pow2(x.size() * 4);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * kPi * i / (x.size() - 1));
    buf[i] = x[i] * w;
  }
  fft_inplace(buf);
  std::size_t best = 1;
  double best_mag = 0.0;
  for (std::size_t i = 1; i < n / 2; ++i) {
    const double m = std::abs(buf[i]);
    if (m > best_mag) {
      best_mag = m;
      best = i;
    }
  }
  double delta = 0.0;
  if (best > 1 && best + 1 < n / 2) {
    const double l = std::log(std::abs(buf[best - 1]) + 1e-300);
    const double c = std::log(std::abs(buf[best]) + 1e-300);
    const double r = std::log(std::abs(buf[best + 1]) + 1e-300);
    const double denom = l - 2.0 * c + r;
    if (std::abs(denom) > 1e-12) delta = 0.5 * (l - r) / denom;
  }
  return (static_cast<double>(best) + delta) * sample_rate /
         static_cast<double>(n);
}

}  // namespace dsp
}  // namespace sonimap

#endif  // SONIMAP_AUDIO_HPP
