#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tightcert/network.hpp"

namespace tightcert {

struct Architecture {
  Index input_dim = 0;
  std::vector<Index> hidden;
  Index num_labels = 0;
  ActivationKind activation = ActivationKind::Sigmoid;
};

/// "in-h1-...-hk-out", e.g. "2-10-10-3".
Architecture parse_architecture(const std::string& text, ActivationKind activation);

/// Qualifying: every first-layer column gets one random sign and magnitudes
/// in [0, 1], later weights in [0, 1]. Mixed: all weights in [-1, 1].
/// Biases are uniform in [-0.5, 0.5] in both modes.
enum class WeightMode { Qualifying, Mixed };

Network random_network(const Architecture& arch, WeightMode mode, std::uint64_t seed);

/// Inputs uniform in [0, 1]^input_dim, labelled with the network's own
/// prediction so every sample is correctly classified.
Dataset random_dataset(const Network& net, std::size_t samples, std::uint64_t seed);

}  // namespace tightcert
