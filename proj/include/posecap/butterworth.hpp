// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "posecap/types.hpp"

namespace posecap {

struct FilterSpec {
  int order = 4;  // per pass
  double cutoff_hz = 6.0;
  double sample_rate_hz = 90.0;
};

struct SecondOrderSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  // a0 == 1
};

struct SosChain {
  std::vector<SecondOrderSection> sections;

  int order() const { return 2 * static_cast<int>(sections.size()); }
  std::complex<double> response(double frequency_hz,
                                double sample_rate_hz) const;
  double magnitude(double frequency_hz, double sample_rate_hz) const {
    return std::abs(response(frequency_hz, sample_rate_hz));
  }
};

// Throws SpecError unless order is in {2, 4, 6, 8} and 0 < cutoff < Nyquist.
void validate(const FilterSpec& spec);

// Digital low-pass Butterworth via the bilinear transform with the cutoff
// prewarped, realized as cascaded sections each with unit DC gain.
SosChain design_butterworth(const FilterSpec& spec);

// Reflection padding length used by filter_zero_phase.
std::size_t pad_length(const SosChain& chain);

// Forward-backward application with odd reflection padding of pad_length()
// samples per side and steady-state initial conditions. Throws LengthError
// when the signal is not longer than the padding.
std::vector<double> filter_zero_phase(const SosChain& chain,
                                      std::span<const double> signal);

// Single causal pass with steady-state initial conditions; for ablations.
std::vector<double> filter_forward(const SosChain& chain,
                                   std::span<const double> signal);

// Filters each of the 51 coordinate channels independently. The sequence's
// sample rate replaces FilterSpec::sample_rate_hz.
PoseSequence smooth_sequence(const PoseSequence& seq, const FilterSpec& spec,
                             bool single_pass = false);

}  // namespace posecap
