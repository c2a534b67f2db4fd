#include "modesim/gains.hpp"

namespace modesim {

GainPreset gain_preset_from_string(const std::string& s) {
  if (s == "paper-exact") return GainPreset::PaperExact;
  if (s == "paper-strict") return GainPreset::PaperStrict;
  if (s == "desk") return GainPreset::Desk;
  throw ConfigError("unknown gain preset '" + s + "'");
}

std::string to_string(GainPreset preset) {
  switch (preset) {
    case GainPreset::PaperExact: return "paper-exact";
    case GainPreset::PaperStrict: return "paper-strict";
    case GainPreset::Desk: return "desk";
  }
  return "?";
}

GainSet select_gains(int n_bar, int omega_size, GainPreset preset, int known_n) {
  if (n_bar < 2) throw ConfigError("gain selection needs n_bar >= 2");
  if (omega_size < 1) throw ConfigError("gain selection needs a nonempty universe");
  const Scalar nb = static_cast<Scalar>(n_bar);
  const Scalar nb3 = nb * nb * nb;
  GainSet gains;
  gains.preset = to_string(preset);
  switch (preset) {
    case GainPreset::PaperExact: {
      gains.h_x = 1e3;
      gains.h_y = 1e3;
      gains.gamma_x = nb3;
      gains.gamma_y = known_n > 0 ? std::pow(static_cast<Scalar>(known_n), 3) : nb3;
      gains.beta = 1.0 / nb;
      gains.g = static_cast<Scalar>(omega_size);
      gains.gamma_z = gains.g * nb * nb;
      break;
    }
    case GainPreset::PaperStrict: {
      gains.h_x = 1e3;
      gains.h_y = 1e3;
      gains.gamma_x = nb3;
      gains.gamma_y = nb3;
      gains.beta = 1.0 / nb;
      gains.g = gains.beta * nb * omega_size + 1.0;
      // sup |phi_k| over K_z is at most beta*n_bar + g*n_bar for any k <= N.
      gains.gamma_z = nb * (gains.beta * nb + gains.g * nb) + 1.0;
      break;
    }
    case GainPreset::Desk: {
      gains.h_x = 100.0;
      gains.h_y = 100.0;
      gains.gamma_x = nb3;
      gains.gamma_y = nb3;
      gains.beta = 1.0 / nb;
      gains.g = gains.beta * nb * omega_size + 1.0;
      gains.gamma_z = nb * (gains.beta * nb + gains.g * nb) + 1.0;
      break;
    }
  }
  return gains;
}

}  // namespace modesim
