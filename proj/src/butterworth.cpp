// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "posecap/errors.hpp"

namespace posecap {

std::complex<double> SosChain::response(double frequency_hz,
                                        double sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

void validate(const FilterSpec& spec) {
  if (spec.order != 2 && spec.order != 4 && spec.order != 6 &&
      spec.order != 8) {
    throw SpecError("filter order must be one of 2, 4, 6, 8; got " +
                    std::to_string(spec.order));
  }
  if (!(spec.sample_rate_hz > 0.0)) {
    throw SpecError("filter sample rate must be positive");
  }
  if (!(spec.cutoff_hz > 0.0) || !(spec.cutoff_hz < spec.sample_rate_hz / 2.0)) {
    std::ostringstream msg;
    msg << "filter cutoff " << spec.cutoff_hz
        << " Hz must lie strictly between 0 and Nyquist ("
        << spec.sample_rate_hz / 2.0 << " Hz)";
    throw SpecError(msg.str());
  }
}

SosChain design_butterworth(const FilterSpec& spec) {
  validate(spec);
  const double k = 2.0 * spec.sample_rate_hz;
  const double wc = k * std::tan(std::numbers::pi * spec.cutoff_hz /
                                 spec.sample_rate_hz);
  const int n = spec.order;

  SosChain chain;
  for (int i = 0; i < n / 2; ++i) {
    // Conjugate pole pair of the analog prototype at angle phi off the
    // imaginary axis: s^2 + 2 wc sin(phi) s + wc^2.
    const double phi = std::numbers::pi * (2.0 * i + 1.0) / (2.0 * n);
    const double a = k * k;
    const double b = 2.0 * wc * std::sin(phi) * k;
    const double c = wc * wc;
    const double d0 = a + b + c;
    SecondOrderSection s;
    s.a1 = (2.0 * c - 2.0 * a) / d0;
    s.a2 = (a - b + c) / d0;
    // Zeros at z = -1; gain fixed so each section passes DC exactly.
    const double g = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    chain.sections.push_back(s);
  }
  return chain;
}

std::size_t pad_length(const SosChain& chain) {
  return 3 * static_cast<std::size_t>(chain.order());
}

namespace {

// Transposed direct form II, state initialized to the steady state of a
// constant input equal to x[0].
void run_forward(const SosChain& chain, std::vector<double>& x) {
  if (x.empty()) return;
  for (const auto& s : chain.sections) {
    const double x0 = x.front();
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z2 = (s.b2 - s.a2 * dc) * x0;
    double z1 = (dc - s.b0) * x0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

std::vector<double> filter_forward(const SosChain& chain,
                                   std::span<const double> signal) {
  std::vector<double> out(signal.begin(), signal.end());
  run_forward(chain, out);
  return out;
}

std::vector<double> filter_zero_phase(const SosChain& chain,
                                      std::span<const double> signal) {
  const std::size_t pad = pad_length(chain);
  const std::size_t n = signal.size();
  if (n <= pad) {
    throw LengthError("zero-phase filtering needs more than " +
                      std::to_string(pad) + " samples, got " +
                      std::to_string(n));
  }
  // Odd reflection about both end samples.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) {
    ext.push_back(2.0 * signal[0] - signal[i]);
  }
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) {
    ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);
  }

  run_forward(chain, ext);
  std::reverse(ext.begin(), ext.end());
  run_forward(chain, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

PoseSequence smooth_sequence(const PoseSequence& seq, const FilterSpec& spec,
                             bool single_pass) {
  FilterSpec effective = spec;
  effective.sample_rate_hz = seq.sample_rate_hz;
  const SosChain chain = design_butterworth(effective);

  PoseSequence out = seq;
  std::vector<double> channel(seq.size());
  for (int j = 0; j < kNumJoints; ++j) {
    for (int axis = 0; axis < 3; ++axis) {
      for (std::size_t t = 0; t < seq.size(); ++t) {
        channel[t] = seq.frames[t][j](axis);
      }
      std::vector<double> filtered;
      try {
        filtered = single_pass ? filter_forward(chain, channel)
                               : filter_zero_phase(chain, channel);
      } catch (const LengthError& e) {
        throw LengthError("channel " + std::string(Skeleton::coco().name(j)) +
                          "." + "xyz"[axis] + ": " + e.what());
      }
      for (std::size_t t = 0; t < seq.size(); ++t) {
        out.frames[t][j](axis) = filtered[t];
      }
    }
  }
  return out;
}

}  // namespace posecap
