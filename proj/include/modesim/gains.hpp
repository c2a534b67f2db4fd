#pragma once

#include <string>

#include "modesim/types.hpp"

namespace modesim {

// Speed and coupling gains shared by the protocols. K is the pigeonhole
// parameter used by the candidate-selection algorithms.
struct GainSet {
  Scalar h_x = 1.0;
  Scalar gamma_x = 1.0;
  Scalar h_y = 1.0;
  Scalar gamma_y = 1.0;
  Scalar beta = 1.0;
  Scalar g = 1.0;
  Scalar gamma_z = 1.0;
  int K = 1;
  std::string preset = "custom";
};

enum class GainPreset { PaperExact, PaperStrict, Desk };

GainPreset gain_preset_from_string(const std::string& s);
std::string to_string(GainPreset preset);

// Gain selection rules.
//   paper-exact : h = 1e3, gamma_x = n_bar^3, beta = 1/n_bar, g = |Omega|,
//                 gamma_z = g * n_bar^2; gamma_y = known_n^3 when the actual
//                 network size is supplied (size-estimation phase already
//                 ran), else n_bar^3.
//   paper-strict: strict inequalities with margin; g = beta*n_bar*|Omega|+1,
//                 gamma_z = n_bar*(beta*n_bar + g*n_bar) + 1.
//   desk        : slower speed gains for small n_bar; every inequality still
//                 satisfied.
GainSet select_gains(int n_bar, int omega_size, GainPreset preset, int known_n = 0);

}  // namespace modesim
