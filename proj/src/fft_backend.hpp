#pragma once

// Thin FFTW wrapper. Plans are created once per (kind, length) and shared between threads;
// execution uses the new-array interface so concurrent calls are safe.

#include <complex>
#include <cstddef>
#include <span>

namespace doalab::detail {

/// Unnormalized forward complex DFT, `out.size() == in.size()`.
void fft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
/// Unnormalized inverse complex DFT.
void ifft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
/// Real-to-half-complex forward DFT, `out.size() == in.size() / 2 + 1`.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);
/// Half-complex-to-real inverse DFT of length `out.size()`, unnormalized.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

/// Smallest n >= min_length whose only prime factors are 2, 3 and 5.
std::size_t fast_length(std::size_t min_length);

}  // namespace doalab::detail
